// Command-line front end: generate | solve | sweep | report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fftmor/experiment.hpp"

namespace fs = std::filesystem;
using namespace fftmor;

namespace {

enum Exit { kOk = 0, kConfig = 2, kConvergence = 3, kIo = 4 };

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config", "required");
  RunConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output = o.out;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

template <int Dim>
int generate(const RunConfig& cfg) {
  const auto pm = build_phase_map<Dim>(cfg);
  const fs::path out = cfg.output;
  write_phase_map_csv(out / "phase_map.csv", pm);
  write_phase_map_spmr(out / "phase_map.spmr", pm);
  write_vtk(out / "phase_map.vtk", pm.indicator(), "phase");
  if constexpr (Dim == 2) write_pgm(out / "phase_map.pgm", pm.indicator());
  std::printf("grid");
  for (int j = 0; j < Dim; ++j) std::printf(" %d", pm.grid.extent(j));
  std::printf("\ninclusion fraction %.6f\n", pm.inclusion_fraction());
  for (auto kind : cfg.patterns) {
    if (kind == PatternKind::full) continue;
    for (double R : cfg.R) {
      const auto mask = build_mask(cfg, pm, kind, R);
      const auto dir = out / ("mask_" + pattern_label(kind));
      char stem[32];
      std::snprintf(stem, sizeof stem, "R%06.2f", R);
      write_mask(dir / (std::string(stem) + ".txt"), mask);
      const auto preview = mask_apply_geometry_preview(pm, mask);
      write_csv(dir / (std::string(stem) + "_preview.csv"), preview, "g");
      if constexpr (Dim == 2) {
        write_pgm(dir / (std::string(stem) + "_mask.pgm"), mask_image(mask));
        write_pgm(dir / (std::string(stem) + "_preview.pgm"), preview);
      }
      std::printf("%-8s R=%6.2f  %zu frequencies%s%s\n", pattern_label(kind).c_str(), R, mask.count(),
                  mask.warning().empty() ? "" : "  warning: ", mask.warning().c_str());
    }
  }
  return kOk;
}

template <int Dim>
int solve(const RunConfig& cfg) {
  const auto pm = build_phase_map<Dim>(cfg);
  const PatternKind kind = cfg.patterns.front();
  const double R = kind == PatternKind::full ? 100.0 : cfg.R.front();
  const auto mask = build_mask(cfg, pm, kind, R);
  const auto sol = basic_scheme_solve(pm, cfg.materials, cfg.macro<Dim>(), mask, cfg.solver);
  const fs::path out = cfg.output;
  write_mask(out / "mask.txt", mask);
  if (cfg.write_fields) write_fields(out, sol);
  const auto mean = volume_average(sol.stress);
  std::printf("pattern %s R=%.2f (%zu frequencies)\n", pattern_label(kind).c_str(), R, mask.count());
  std::printf("status %s after %d iterations, %.3f s\n", to_string(sol.status), sol.total_iterations(),
              sol.timings.total);
  std::printf("mean stress");
  for (int c = 0; c < kSymComponents<Dim>; ++c) std::printf(" %.9e", mean[c]);
  std::printf("\nmean gamma %.3e s, mean constitutive %.3e s per iteration\n", sol.timings.mean_gamma(),
              sol.timings.mean_constitutive());
  return sol.converged() ? kOk : kConvergence;
}

void print_reports(const std::vector<ErrorReport>& reports) {
  std::printf("%-9s %-14s %8s %13s %13s %10s\n", "pattern", "post", "R [%]", "macro_error", "micro_error",
              "iterations");
  for (const auto& r : reports)
    std::printf("%-9s %-14s %8.2f %13.6e %13.6e %10d\n", pattern_label(r.pattern).c_str(), to_string(r.post), r.R,
                r.macro_error, r.micro_error, r.iterations);
}

void print_crossover(const std::optional<double>& x) {
  if (x) {
    std::printf("crossover: fixed pattern at least as accurate as adapted from R=%.2f%%\n", *x);
  } else {
    std::printf("crossover: none, adapted pattern more accurate at every R\n");
  }
}

template <int Dim>
int sweep(const RunConfig& cfg, int threads) {
  const auto pm = build_phase_map<Dim>(cfg);
  ExperimentOptions opt;
  opt.threads = threads;
  opt.log = stderr;
  const auto res = run_experiment(cfg, pm, opt);
  if (res.reference_status != SolveStatus::converged) {
    std::fprintf(stderr, "reference solve %s\n", to_string(res.reference_status));
    return kConvergence;
  }
  print_reports(res.reports);
  for (const auto& [kind, table] : res.timing) std::printf("\n%s", render_timing_text(table).c_str());
  std::printf("\n");
  print_crossover(res.crossover_R);
  for (const auto& f : res.failures()) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return res.any_convergence_failure ? kConvergence : kOk;
}

int report(const fs::path& dir) {
  const auto reports = read_error_reports(dir / "errors.csv");
  print_reports(reports);
  for (const char* kind : {"fixed", "adapted"}) {
    const auto path = dir / (std::string("timing_") + kind + ".csv");
    if (!fs::exists(path)) continue;
    auto table = read_timing_csv(path);
    table.title = std::string("CPU time, ") + kind + " pattern";
    write_timing_text(dir / (std::string("timing_") + kind + ".txt"), table);
    std::printf("\n%s", render_timing_text(table).c_str());
    std::vector<ErrorReport> raw, comp;
    for (const auto& r : reports)
      if (pattern_label(r.pattern) == kind) (r.post == PostKind::raw ? raw : comp).push_back(r);
    write_error_plot_data(dir / (std::string("errors_") + kind + ".dat"), raw, comp);
  }
  std::printf("\n");
  print_crossover(find_crossover(reports));
  return kOk;
}

template <typename F2, typename F3>
int by_dim(const RunConfig& cfg, F2&& f2, F3&& f3) {
  return cfg.dim == 2 ? f2(cfg) : f3(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FFT-based homogenization on reduced frequency sets"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool need_config) {
    auto* c = sub->add_option("--config", o.config, "JSON run configuration");
    if (need_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--threads", o.threads, "concurrent sweep points")->check(CLI::Range(1, 256));
    sub->add_option("--seed", o.seed, "seed for randomized geometries (overrides the config)");
  };
  auto* gen = app.add_subcommand("generate", "write the phase map and mask previews");
  auto* sol = app.add_subcommand("solve", "single solve with the first configured pattern and R");
  auto* swp = app.add_subcommand("sweep", "reference plus every (pattern, R) combination");
  auto* rep = app.add_subcommand("report", "re-render tables and plot data from a sweep directory");
  for (auto* s : {gen, sol, swp}) add_common(s, true);
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (rep->parsed()) {
      fs::path dir = o.out;
      if (dir.empty()) {
        if (o.config.empty()) throw ConfigError("--out", "give --out or --config");
        dir = load_config(o.config).output;
      }
      return report(dir);
    }
    const RunConfig cfg = load(o);
    if (gen->parsed()) return by_dim(cfg, generate<2>, generate<3>);
    if (sol->parsed()) return by_dim(cfg, solve<2>, solve<3>);
    if (swp->parsed()) {
      const int threads = o.threads;
      return by_dim(cfg, [&](const RunConfig& c) { return sweep<2>(c, threads); },
                    [&](const RunConfig& c) { return sweep<3>(c, threads); });
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConvergence;
  }
  return kOk;
}
