/**
 * @file experiment.hpp
 * @brief R-sweeps comparing reduced solves against one full-frequency reference.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fftmor/config.hpp"
#include "fftmor/geometry.hpp"
#include "fftmor/io.hpp"
#include "fftmor/postproc.hpp"

namespace fftmor {

/// Phase map for @p cfg: imported file or generated geometry.
template <int Dim>
PhaseMap<Dim> build_phase_map(const RunConfig& cfg) {
  if (cfg.phase_map) {
    const auto& p = *cfg.phase_map;
    auto pm = p.extension() == ".csv" ? read_phase_map_csv<Dim>(p) : read_phase_map_spmr<Dim>(p);
    if (!(pm.grid == cfg.make_grid<Dim>()))
      throw ConfigError("phase_map", "imported map does not match the configured grid");
    return pm;
  }
  GeometrySpec spec = cfg.geometry;
  if (auto* mc = std::get_if<MultiCircle>(&spec)) mc->seed = cfg.seed;
  return generate_geometry<Dim>(spec, cfg.make_grid<Dim>());
}

template <int Dim>
FrequencyMask<Dim> build_mask(const RunConfig& cfg, const PhaseMap<Dim>& pm, PatternKind kind, double R) {
  switch (kind) {
    case PatternKind::radial: return radial_mask(pm.grid, R, cfg.radial);
    case PatternKind::adapted: return adapted_mask(pm, R);
    default: return full_mask(pm.grid);
  }
}

/// Per-voxel accumulated plastic strain (zero when no phase is plastic).
template <int Dim>
ScalarField<Dim> accumulated_plastic_strain(const SolveResult<Dim>& r) {
  ScalarField<Dim> f(r.strain.grid());
  for (std::size_t i = 0; i < r.plastic.size(); ++i) f.values[i] = r.plastic[i].eps_p_acc;
  return f;
}

/// VTK and CSV files for ε, σ, ε_p^acc and, given a reference, Δσ₁₁.
template <int Dim>
void write_fields(const std::filesystem::path& dir, const SolveResult<Dim>& r,
                  const SolveResult<Dim>* ref = nullptr) {
  write_vtk(dir / "strain.vtk", r.strain, "strain");
  write_vtk(dir / "stress.vtk", r.stress, "stress");
  write_csv(dir / "strain.csv", r.strain, "eps");
  write_csv(dir / "stress.csv", r.stress, "sigma");
  if (!r.plastic.empty()) {
    const auto acc = accumulated_plastic_strain(r);
    write_vtk(dir / "eps_p_acc.vtk", acc, "eps_p_acc");
    write_csv(dir / "eps_p_acc.csv", acc, "eps_p_acc");
  }
  if (ref) {
    const auto d = stress_difference_field(r, *ref);
    write_vtk(dir / "delta_sigma11.vtk", d, "delta_sigma11");
    write_csv(dir / "delta_sigma11.csv", d, "delta_sigma11");
  }
}

struct SweepOutcome {
  PatternKind pattern = PatternKind::full;
  double R = 100.0;
  std::size_t mask_count = 0;
  bool ok = false;
  std::string error;
  SolveStatus status = SolveStatus::converged;
  ErrorReport raw;
  std::optional<ErrorReport> compat;
  double compat_seconds = 0.0;
  StageTimings timings;
};

struct ExperimentResult {
  SolveStatus reference_status = SolveStatus::converged;
  int reference_iterations = 0;
  StageTimings reference_timings;
  std::vector<SweepOutcome> points;
  std::vector<ErrorReport> reports;
  std::map<PatternKind, TimingTable> timing;
  /// Smallest R with micro_error(fixed) ≤ micro_error(adapted), raw fields.
  std::optional<double> crossover_R;
  bool any_convergence_failure = false;

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& p : points)
      if (!p.ok) out.push_back(pattern_label(p.pattern) + " R=" + detail::fmt_short(p.R) + ": " + p.error);
    return out;
  }
};

namespace detail {

inline std::string point_dir_name(PatternKind k, double R) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_R%06.2f", pattern_label(k).c_str(), R);
  return buf;
}

}  // namespace detail

/// Smallest R at which the fixed pattern is at least as accurate as the adapted one.
inline std::optional<double> find_crossover(const std::vector<ErrorReport>& reports, PostKind post = PostKind::raw) {
  std::optional<double> best;
  for (const auto& f : reports) {
    if (f.pattern != PatternKind::radial || f.post != post) continue;
    for (const auto& a : reports) {
      if (a.pattern != PatternKind::adapted || a.post != post || a.R != f.R) continue;
      if (f.micro_error <= a.micro_error && (!best || f.R < *best)) best = f.R;
    }
  }
  return best;
}

struct ExperimentOptions {
  int threads = 1;
  bool write_outputs = true;
  /// Progress lines (one per finished solve); nullptr for silence.
  std::FILE* log = nullptr;
};

/**
 * @brief Reference solve plus every configured (pattern, R) combination.
 *
 * A failing combination is recorded in its outcome and the sweep
 * continues. Throws only if the reference itself cannot be computed.
 */
template <int Dim>
ExperimentResult run_experiment(const RunConfig& cfg, const PhaseMap<Dim>& pm, const ExperimentOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto macro = cfg.macro<Dim>();
  const std::filesystem::path out = cfg.output;
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!opt.log) return;
    std::lock_guard lock(log_mutex);
    std::fprintf(opt.log, "%s\n", line.c_str());
    std::fflush(opt.log);
  };

  ExperimentResult res;
  const auto ref = basic_scheme_solve(pm, cfg.materials, macro, full_mask(pm.grid), cfg.solver);
  res.reference_status = ref.status;
  res.reference_iterations = ref.total_iterations();
  res.reference_timings = ref.timings;
  log("reference: " + std::string(to_string(ref.status)) + ", " + std::to_string(ref.total_iterations()) +
      " iterations, " + detail::fmt_short(ref.timings.total) + " s");
  if (!ref.converged()) {
    res.any_convergence_failure = true;
    if (opt.write_outputs) write_fields(out / "reference", ref);
    return res;
  }
  if (opt.write_outputs && cfg.write_fields) write_fields(out / "reference", ref);

  std::vector<SweepOutcome> points;
  for (auto kind : cfg.patterns) {
    if (kind == PatternKind::full) {
      points.emplace_back().pattern = kind;
      continue;
    }
    for (double R : cfg.R) {
      auto& p = points.emplace_back();
      p.pattern = kind;
      p.R = R;
    }
  }

  auto base_report = [&](const SweepOutcome& p, PostKind post) {
    ErrorReport r;
    r.geometry = cfg.geometry_kind;
    r.material = cfg.material_label();
    r.pattern = p.pattern;
    r.R = p.R;
    r.post = post;
    return r;
  };

  auto run_point = [&](SweepOutcome& p) {
    try {
      if (p.pattern == PatternKind::full) {
        // the reference is the full-mask solve; compare it with itself
        p.mask_count = pm.grid.size();
        p.raw = base_report(p, PostKind::raw);
        p.raw.macro_error = macro_error(ref, ref);
        p.raw.micro_error = micro_error(ref, ref);
        p.raw.iterations = ref.total_iterations();
        p.raw.seconds_total = ref.timings.total;
        p.raw.seconds_gamma = ref.timings.mean_gamma();
        p.raw.seconds_constitutive = ref.timings.mean_constitutive();
        p.timings = ref.timings;
        p.ok = true;
        return;
      }
      const auto mask = build_mask(cfg, pm, p.pattern, p.R);
      p.mask_count = mask.count();
      const auto sol = basic_scheme_solve(pm, cfg.materials, macro, mask, cfg.solver);
      p.status = sol.status;
      p.timings = sol.timings;
      if (!sol.converged()) {
        p.error = std::string("solver ") + to_string(sol.status) + " after " + std::to_string(sol.total_iterations()) +
                  " iterations";
        log(pattern_label(p.pattern) + " R=" + detail::fmt_short(p.R) + ": " + p.error);
        return;
      }
      p.raw = base_report(p, PostKind::raw);
      const auto micro = micro_error_detail(sol, ref);
      p.raw.macro_error = macro_error(sol, ref);
      p.raw.micro_error = micro.value;
      p.raw.excluded_voxels = micro.excluded;
      p.raw.iterations = sol.total_iterations();
      p.raw.seconds_total = sol.timings.total;
      p.raw.seconds_gamma = sol.timings.mean_gamma();
      p.raw.seconds_constitutive = sol.timings.mean_constitutive();
      std::optional<SolveResult<Dim>> compat;
      if (cfg.compatibility) {
        const auto t0 = Clock::now();
        compat = compatibility_step(sol, pm, cfg.materials, macro, cfg.solver);
        p.compat_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        ErrorReport c = base_report(p, PostKind::compatibility);
        const auto cm = micro_error_detail(*compat, ref);
        c.macro_error = macro_error(*compat, ref);
        c.micro_error = cm.value;
        c.excluded_voxels = cm.excluded;
        c.iterations = 1;
        c.seconds_total = p.compat_seconds;
        c.seconds_gamma = compat->timings.mean_gamma();
        c.seconds_constitutive = compat->timings.mean_constitutive();
        p.compat = c;
      }
      if (opt.write_outputs) {
        const auto dir = out / detail::point_dir_name(p.pattern, p.R);
        write_mask(dir / "mask.txt", mask);
        if (cfg.write_fields) {
          write_fields(dir, sol, &ref);
          if (compat) write_fields(dir / "compatibility", *compat, &ref);
        }
      }
      p.ok = true;
      log(pattern_label(p.pattern) + " R=" + detail::fmt_short(p.R) + ": " + std::to_string(p.raw.iterations) +
          " iterations, macro " + detail::fmt_short(p.raw.macro_error) + ", micro " + detail::fmt_short(p.raw.micro_error));
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
      log(pattern_label(p.pattern) + " R=" + detail::fmt_short(p.R) + " failed: " + p.error);
    }
  };

  const int workers = std::max(1, std::min<int>(opt.threads, static_cast<int>(points.size())));
  if (workers == 1) {
    for (auto& p : points) run_point(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) run_point(points[i]);
      });
    for (auto& t : pool) t.join();
  }

  for (const auto& p : points) {
    if (!p.ok) {
      if (p.status != SolveStatus::converged) res.any_convergence_failure = true;
      continue;
    }
    res.reports.push_back(p.raw);
    if (p.compat) res.reports.push_back(*p.compat);
  }
  for (auto kind : cfg.patterns) {
    if (kind == PatternKind::full) continue;
    TimingTable t;
    t.title = "CPU time, " + pattern_label(kind) + " pattern";
    t.rows.push_back({100.0, ref.timings.total, ref.timings.mean_gamma(), ref.timings.mean_constitutive(), 0.0});
    for (const auto& p : points)
      if (p.pattern == kind && p.ok)
        t.rows.push_back({p.R, p.timings.total, p.timings.mean_gamma(), p.timings.mean_constitutive(), p.compat_seconds});
    res.timing[kind] = t;
  }
  res.crossover_R = find_crossover(res.reports);
  res.points = std::move(points);

  if (opt.write_outputs) {
    write_error_reports(out / "errors.csv", res.reports);
    for (const auto& [kind, table] : res.timing) {
      write_timing_csv(out / ("timing_" + pattern_label(kind) + ".csv"), table);
      write_timing_text(out / ("timing_" + pattern_label(kind) + ".txt"), table);
      std::vector<ErrorReport> raw, comp;
      for (const auto& r : res.reports)
        if (r.pattern == kind) (r.post == PostKind::raw ? raw : comp).push_back(r);
      write_error_plot_data(out / ("errors_" + pattern_label(kind) + ".dat"), raw, comp);
    }
    nlohmann::json summary;
    summary["name"] = cfg.name;
    summary["reference"] = {{"status", to_string(ref.status)},
                            {"iterations", ref.total_iterations()},
                            {"seconds", ref.timings.total}};
    summary["crossover_R"] = res.crossover_R ? nlohmann::json(*res.crossover_R) : nlohmann::json(nullptr);
    summary["failures"] = res.failures();
    auto f = detail::open_out(out / "summary.json");
    f << summary.dump(2) << '\n';
    detail::check_written(f, out / "summary.json");
  }
  return res;
}

}  // namespace fftmor
