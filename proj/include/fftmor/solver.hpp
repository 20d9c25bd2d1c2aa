/**
 * @file solver.hpp
 * @brief Basic fixed-point scheme for the Lippmann-Schwinger equation on a
 *        (possibly reduced) set of frequencies.
 *
 * One iteration:
 *   a) τ = σ(ε) − C⁰:ε pointwise
 *   b) τ̂ = FFT(τ)
 *   c) ε̂ = −Γ̂⁰:τ̂ on retained frequencies ≠ 0, ε̂(0) = n ε̄, zero elsewhere
 *   d) ε = iFFT(ε̂)
 *
 * Iteration stops when ‖ε⁽ⁱ⁺¹⁾ − ε⁽ⁱ⁾‖ / (√n ‖ε̄‖) ≤ tol, both norms
 * Frobenius-L2 over the full grid.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fftmor/fft.hpp"
#include "fftmor/field.hpp"
#include "fftmor/green.hpp"
#include "fftmor/materials.hpp"
#include "fftmor/sampling.hpp"

namespace fftmor {

struct SolveSettings {
  double tol_eps = 1e-8;
  int max_iter = 10000;
  int load_steps = 1;
  FrequencySymbol symbol = FrequencySymbol::rotated;

  void validate() const {
    if (!(tol_eps > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (load_steps < 1) throw std::invalid_argument("load_steps must be >= 1");
  }
};

enum class SolveStatus { converged, max_iter_reached, diverged };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter_reached: return "max_iter_reached";
    case SolveStatus::diverged: return "diverged";
  }
  return "?";
}

/// Wall-clock seconds per solver stage, summed over iterations.
struct StageTimings {
  double constitutive = 0.0;
  double transform = 0.0;
  double gamma = 0.0;
  double total = 0.0;
  std::size_t iterations = 0;

  double mean_constitutive() const { return iterations ? constitutive / iterations : 0.0; }
  double mean_transform() const { return iterations ? transform / iterations : 0.0; }
  double mean_gamma() const { return iterations ? gamma / iterations : 0.0; }
};

template <int Dim>
struct SolveResult {
  SymTensorField<Dim> strain;
  SymTensorField<Dim> stress;
  /// Committed internal variables per voxel; empty when every phase is elastic.
  std::vector<PlasticState> plastic;
  MacroTensor<Dim> macro_strain;
  std::vector<int> iterations;   // per load step
  std::vector<double> residuals;  // every iteration, load steps concatenated
  StageTimings timings;
  SolveStatus status = SolveStatus::converged;
  /// Largest imaginary residue after an inverse transform, relative to field RMS.
  double max_imag_residue = 0.0;

  bool converged() const { return status == SolveStatus::converged; }
  int total_iterations() const {
    int s = 0;
    for (int i : iterations) s += i;
    return s;
  }
};

/// Per-axis factors of the frequency symbol, so k can be formed cheaply per slot.
template <int Dim>
class FrequencyTable {
 public:
  FrequencyTable(const Grid<Dim>& grid, FrequencySymbol symbol) : grid_{grid}, symbol_{symbol} {
    for (int j = 0; j < Dim; ++j) {
      const int n = grid.extent(j);
      diff_[j].resize(n);
      avg_[j].resize(n);
      for (int i = 0; i < n; ++i) {
        typename Grid<Dim>::Index m{};
        m[j] = i >= n / 2 + n % 2 ? i - n : i;
        // 1D building blocks taken from the full symbol so both routes agree
        if (symbol == FrequencySymbol::continuous) {
          diff_[j][i] = modified_frequency<Dim>(m, grid, symbol)[j];
        } else {
          const double phi = 2.0 * std::numbers::pi * m[j] / n;
          std::complex<double> e = std::polar(1.0, phi);
          std::complex<double> minus = e - 1.0, plus = e + 1.0;
          if (m[j] == 0) minus = 0.0;
          if (2 * std::abs(m[j]) == n) {
            minus = -2.0;
            plus = 0.0;
          }
          diff_[j][i] = minus;
          avg_[j][i] = plus;
        }
      }
    }
  }

  CVector<Dim> symbol_at(std::size_t slot) const {
    const auto idx = grid_.unflat(slot);
    CVector<Dim> k{};
    if (symbol_ == FrequencySymbol::continuous) {
      for (int j = 0; j < Dim; ++j) k[j] = diff_[j][idx[j]];
      return k;
    }
    const double norm = static_cast<double>(1 << (Dim - 1));
    for (int j = 0; j < Dim; ++j) {
      std::complex<double> v = diff_[j][idx[j]];
      for (int l = 0; l < Dim; ++l)
        if (l != j) v *= avg_[l][idx[l]];
      k[j] = v / (norm * grid_.spacing(j));
    }
    return k;
  }

 private:
  Grid<Dim> grid_;
  FrequencySymbol symbol_;
  std::array<std::vector<std::complex<double>>, Dim> diff_, avg_;
};

/**
 * @brief Green operator of the reference medium restricted to a mask.
 *
 * For a reduced mask the factorized kernels of the retained frequencies are
 * cached (memory ∝ |mask|); the full mask keeps only the symbols and
 * evaluates the kernels on the fly.
 */
template <int Dim>
class MaskedGamma {
 public:
  MaskedGamma(const FrequencyMask<Dim>& mask, const ReferenceMedium& ref,
              FrequencySymbol symbol = FrequencySymbol::rotated)
      : grid_{mask.grid()}, ref_{ref}, table_{mask.grid(), symbol}, full_{mask.is_full()} {
    if (!mask.contains_dc()) throw std::invalid_argument("frequency mask must contain DC");
    if (!full_) {
      slots_.reserve(mask.count());
      kernels_.reserve(mask.count());
      for (auto s : mask.retained()) {
        if (s == 0) continue;
        slots_.push_back(s);
        kernels_.push_back(GreenKernel<Dim>::make(table_.symbol_at(s), ref_));
      }
      gathered_.resize(slots_.size());
    } else {
      symbols_.resize(grid_.size());
      for (std::size_t s = 0; s < grid_.size(); ++s) symbols_[s] = table_.symbol_at(s);
    }
  }

  const Grid<Dim>& grid() const { return grid_; }
  bool full() const { return full_; }

  /// Slots whose acoustic tensor is singular (Γ̂ taken as zero there).
  std::vector<std::size_t> singular_slots() const {
    std::vector<std::size_t> out;
    if (full_) {
      for (std::size_t s = 1; s < grid_.size(); ++s)
        if (GreenKernel<Dim>::make(table_.symbol_at(s), ref_).singular) out.push_back(s);
    } else {
      for (std::size_t i = 0; i < slots_.size(); ++i)
        if (kernels_[i].singular) out.push_back(slots_[i]);
    }
    return out;
  }

  /**
   * In-place step c) on a component-major spectrum buffer of kComp·n
   * entries: τ̂ in, ε̂ out.
   */
  void apply_inplace(std::span<std::complex<double>> spec, const MacroTensor<Dim>& eps_bar) {
    constexpr int kComp = kSymComponents<Dim>;
    const std::size_t n = grid_.size();
    if (spec.size() != n * kComp) throw std::invalid_argument("spectrum size does not match mask grid");
    auto load = [&](std::size_t s) {
      CSymTensor<Dim> t;
      for (int c = 0; c < kComp; ++c) t[c] = spec[c * n + s];
      return t;
    };
    auto store = [&](std::size_t s, const CSymTensor<Dim>& t) {
      for (int c = 0; c < kComp; ++c) spec[c * n + s] = t[c];
    };
    if (full_) {
      for (std::size_t s = 1; s < n; ++s) {
        const auto kernel = GreenKernel<Dim>::make(symbols_[s], ref_);
        store(s, kernel.apply(load(s)) * std::complex<double>(-1.0));
      }
    } else {
      for (std::size_t i = 0; i < slots_.size(); ++i)
        gathered_[i] = kernels_[i].apply(load(slots_[i])) * std::complex<double>(-1.0);
      std::memset(static_cast<void*>(spec.data()), 0, spec.size() * sizeof(std::complex<double>));
      for (std::size_t i = 0; i < slots_.size(); ++i) store(slots_[i], gathered_[i]);
    }
    CSymTensor<Dim> dc;
    for (int c = 0; c < kComp; ++c) dc[c] = eps_bar[c] * static_cast<double>(n);
    store(0, dc);
  }

 private:
  Grid<Dim> grid_;
  ReferenceMedium ref_;
  FrequencyTable<Dim> table_;
  bool full_;
  std::vector<std::size_t> slots_;
  std::vector<GreenKernel<Dim>> kernels_;
  std::vector<CSymTensor<Dim>> gathered_;
  std::vector<CVector<Dim>> symbols_;
};

/// Masked application of the Green operator to a polarization spectrum.
template <int Dim>
SpectralSymTensorField<Dim> apply_gamma_masked(const SpectralSymTensorField<Dim>& tau_hat,
                                               const FrequencyMask<Dim>& mask,
                                               const ReferenceMedium& ref,
                                               const MacroTensor<Dim>& eps_bar,
                                               FrequencySymbol symbol = FrequencySymbol::rotated) {
  if (!(tau_hat.grid() == mask.grid())) throw std::invalid_argument("mask and spectrum grids differ");
  MaskedGamma<Dim> gamma(mask, ref, symbol);
  SpectralSymTensorField<Dim> out = tau_hat;
  gamma.apply_inplace(out.data(), eps_bar);
  return out;
}

/// ‖ε_new − ε_old‖ / (√n ‖ε̄‖)
template <int Dim>
double convergence_residual(const SymTensorField<Dim>& eps_new, const SymTensorField<Dim>& eps_old,
                            const MacroTensor<Dim>& eps_bar) {
  const double denom = frobenius(eps_bar);
  if (!(denom > 0.0)) throw std::invalid_argument("convergence residual undefined for zero macro strain");
  return field_l2_distance(eps_new, eps_old) / (std::sqrt(static_cast<double>(eps_new.size())) * denom);
}

/// Observer called after every iteration with (load step, iteration, new strain).
template <int Dim>
using IterationObserver = std::function<void(int, int, const SymTensorField<Dim>&)>;

/**
 * @brief Fixed-point solver bound to one microstructure and one mask.
 *
 * Holds the transform plan and the (cached) Green operator so repeated
 * solves or single sweeps reuse them.
 */
template <int Dim>
class BasicScheme {
 public:
  using Clock = std::chrono::steady_clock;

  BasicScheme(const PhaseMap<Dim>& phases, std::vector<Material> materials,
              const FrequencyMask<Dim>& mask, SolveSettings settings = {})
      : phases_{phases},
        materials_{std::move(materials)},
        settings_{settings},
        ref_{reference_medium(phases, std::span<const Material>(materials_))},
        gamma_{mask, ref_, settings.symbol},
        engine_{phases.grid, kSymComponents<Dim>} {
    settings_.validate();
    phases_.validate();
    if (!(mask.grid() == phases.grid)) throw std::invalid_argument("mask and phase map grids differ");
    for (const auto& m : materials_) {
      std::visit([](const auto& p) { p.validate(Dim); }, m);
      plastic_ |= is_plastic(m);
    }
  }

  const ReferenceMedium& reference() const { return ref_; }
  const Grid<Dim>& grid() const { return phases_.grid; }
  bool has_plastic_phase() const { return plastic_; }
  const SolveSettings& settings() const { return settings_; }

  /// Step a) stress part: σ(ε) from the committed state; @p trial gets the updated state.
  void constitutive(const SymTensorField<Dim>& eps, const std::vector<PlasticState>& committed,
                    SymTensorField<Dim>& sigma, std::vector<PlasticState>& trial) const {
    const std::size_t n = eps.size();
    if (plastic_) trial.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Material& m = materials_[phases_.phase[i]];
      if (plastic_) {
        sigma.set(i, material_stress<Dim>(m, eps.at(i), committed[i], trial[i]));
      } else {
        sigma.set(i, elastic_stress(eps.at(i), std::get<ElasticParams>(m)));
      }
    }
  }

  /// τ = σ − C⁰:ε
  void polarization(const SymTensorField<Dim>& eps, const SymTensorField<Dim>& sigma,
                    SymTensorField<Dim>& tau) const {
    const std::size_t n = eps.size();
    for (std::size_t i = 0; i < n; ++i) tau.set(i, sigma.at(i) - elastic_stress(eps.at(i), ref_));
  }

  /**
   * Steps b)-d): new strain from a polarization field. Returns the largest
   * imaginary residue relative to the strain RMS.
   */
  double lippmann_schwinger(const SymTensorField<Dim>& tau, const MacroTensor<Dim>& eps_bar,
                            SymTensorField<Dim>& eps_out, StageTimings* t = nullptr) {
    auto buf = engine_.buffer();
    const auto& td = tau.data();
    auto t0 = Clock::now();
    for (std::size_t i = 0; i < td.size(); ++i) buf[i] = td[i];
    engine_.execute_forward();
    auto t1 = Clock::now();
    gamma_.apply_inplace(buf, eps_bar);
    auto t2 = Clock::now();
    engine_.execute_backward();
    const double scale = 1.0 / static_cast<double>(tau.size());
    double max_imag = 0.0;
    auto& out = eps_out.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = buf[i].real() * scale;
      max_imag = std::max(max_imag, std::abs(buf[i].imag()) * scale);
    }
    auto t3 = Clock::now();
    if (t) {
      t->transform += seconds(t0, t1) + seconds(t2, t3);
      t->gamma += seconds(t1, t2);
    }
    const double rms = field_l2_norm(eps_out) / std::sqrt(static_cast<double>(eps_out.size()));
    return rms > 0.0 ? max_imag / rms : max_imag;
  }

  SolveResult<Dim> solve(const MacroTensor<Dim>& eps_bar, const IterationObserver<Dim>& observer = {}) {
    const auto start = Clock::now();
    const Grid<Dim>& grid = phases_.grid;
    const std::size_t n = grid.size();
    SolveResult<Dim> res;
    res.macro_strain = eps_bar;
    res.strain = SymTensorField<Dim>(grid);
    res.stress = SymTensorField<Dim>(grid);
    if (plastic_) res.plastic.assign(n, PlasticState{});
    std::vector<PlasticState> trial;
    SymTensorField<Dim> tau(grid), next(grid);

    const int steps = settings_.load_steps;
    MacroTensor<Dim> applied;
    for (int step = 1; step <= steps; ++step) {
      const MacroTensor<Dim> target = eps_bar * (static_cast<double>(step) / steps);
      const MacroTensor<Dim> increment = target - applied;
      applied = target;
      if (step == 1) {
        res.strain = SymTensorField<Dim>::uniform(grid, target);
      } else {
        for (int c = 0; c < kSymComponents<Dim>; ++c)
          for (auto& x : res.strain.component(c)) x += increment[c];
      }

      int it = 0;
      bool step_converged = false;
      while (it < settings_.max_iter) {
        ++it;
        auto t0 = Clock::now();
        constitutive(res.strain, res.plastic, res.stress, trial);
        polarization(res.strain, res.stress, tau);
        res.timings.constitutive += seconds(t0, Clock::now());
        res.max_imag_residue =
            std::max(res.max_imag_residue, lippmann_schwinger(tau, target, next, &res.timings));
        ++res.timings.iterations;
        const double r = convergence_residual(next, res.strain, target);
        res.residuals.push_back(r);
        std::swap(res.strain.data(), next.data());
        if (observer) observer(step, it, res.strain);
        if (!std::isfinite(r) || r > 1e12) {
          res.status = SolveStatus::diverged;
          res.iterations.push_back(it);
          res.timings.total = seconds(start, Clock::now());
          return res;
        }
        if (r <= settings_.tol_eps) {
          step_converged = true;
          break;
        }
      }
      res.iterations.push_back(it);
      constitutive(res.strain, res.plastic, res.stress, trial);
      if (plastic_) res.plastic.swap(trial);
      if (!step_converged) {
        res.status = SolveStatus::max_iter_reached;
        break;
      }
    }
    res.timings.total = seconds(start, Clock::now());
    return res;
  }

 private:
  static double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  }

  PhaseMap<Dim> phases_;
  std::vector<Material> materials_;
  SolveSettings settings_;
  ReferenceMedium ref_;
  MaskedGamma<Dim> gamma_;
  FftEngine<Dim> engine_;
  bool plastic_ = false;
};

/// Convenience wrapper: build a scheme for @p mask and solve once.
template <int Dim>
SolveResult<Dim> basic_scheme_solve(const PhaseMap<Dim>& phases, std::vector<Material> materials,
                                    const MacroTensor<Dim>& eps_bar, const FrequencyMask<Dim>& mask,
                                    const SolveSettings& settings = {},
                                    const IterationObserver<Dim>& observer = {}) {
  BasicScheme<Dim> scheme(phases, std::move(materials), mask, settings);
  return scheme.solve(eps_bar, observer);
}

}  // namespace fftmor
