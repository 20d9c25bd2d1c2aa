/**
 * @file postproc.hpp
 * @brief Compatibility step and error metrics against a full-frequency reference.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fftmor/sampling.hpp"
#include "fftmor/solver.hpp"

namespace fftmor {

enum class PostKind { raw, compatibility };

inline const char* to_string(PostKind p) { return p == PostKind::raw ? "raw" : "compatibility"; }

struct ErrorReport {
  std::string geometry;
  std::string material;
  PatternKind pattern = PatternKind::full;
  double R = 100.0;
  PostKind post = PostKind::raw;
  double macro_error = 0.0;
  double micro_error = 0.0;
  std::size_t excluded_voxels = 0;
  int iterations = 0;
  double seconds_total = 0.0;
  double seconds_gamma = 0.0;
  double seconds_constitutive = 0.0;
};

/**
 * One full-frequency sweep of steps a)-d) starting from a reduced solution.
 *
 * The polarization is built from the reduced stress and strain fields. The
 * returned stress is evaluated at the new strain from the reduced solution's
 * committed internal variables, which are passed through unchanged.
 */
template <int Dim>
SolveResult<Dim> compatibility_step(const SolveResult<Dim>& reduced, const PhaseMap<Dim>& phases,
                                    std::vector<Material> materials, const MacroTensor<Dim>& eps_bar,
                                    const SolveSettings& settings = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  BasicScheme<Dim> scheme(phases, std::move(materials), full_mask(phases.grid), settings);
  const auto& grid = phases.grid;
  SolveResult<Dim> out;
  out.macro_strain = eps_bar;
  out.plastic = reduced.plastic;
  out.strain = SymTensorField<Dim>(grid);
  out.stress = SymTensorField<Dim>(grid);
  SymTensorField<Dim> tau(grid);
  scheme.polarization(reduced.strain, reduced.stress, tau);
  out.max_imag_residue = scheme.lippmann_schwinger(tau, eps_bar, out.strain, &out.timings);
  out.timings.iterations = 1;
  std::vector<PlasticState> trial;
  const auto t0 = Clock::now();
  scheme.constitutive(out.strain, reduced.plastic, out.stress, trial);
  out.timings.constitutive += std::chrono::duration<double>(Clock::now() - t0).count();
  out.residuals.push_back(convergence_residual(out.strain, reduced.strain, eps_bar));
  out.iterations.push_back(1);
  out.status = SolveStatus::converged;
  out.timings.total = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

/// ‖σ̄ − σ̄_ref‖ / ‖σ̄_ref‖
template <int Dim>
double macro_error(const SolveResult<Dim>& sol, const SolveResult<Dim>& ref) {
  if (!(sol.stress.grid() == ref.stress.grid())) throw std::invalid_argument("results on different grids");
  const auto mean_ref = volume_average(ref.stress);
  const double denom = frobenius(mean_ref);
  if (!(denom > 0.0)) throw std::invalid_argument("reference mean stress is zero");
  return frobenius(volume_average(sol.stress) - mean_ref) / denom;
}

struct MicroError {
  double value = 0.0;
  std::size_t excluded = 0;
};

/**
 * Mean over voxels of ‖σ − σ_ref‖ / ‖σ_ref‖. Voxels with
 * ‖σ_ref‖ < 1e-14 max‖σ_ref‖ are left out of the mean and counted.
 */
template <int Dim>
MicroError micro_error_detail(const SolveResult<Dim>& sol, const SolveResult<Dim>& ref) {
  if (!(sol.stress.grid() == ref.stress.grid())) throw std::invalid_argument("results on different grids");
  const std::size_t n = ref.stress.size();
  std::vector<double> ref_norm(n);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ref_norm[i] = frobenius(ref.stress.at(i));
    max_norm = std::max(max_norm, ref_norm[i]);
  }
  const double cutoff = 1e-14 * max_norm;
  MicroError out;
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ref_norm[i] >= cutoff) || ref_norm[i] == 0.0) {
      ++out.excluded;
      continue;
    }
    sum += frobenius(sol.stress.at(i) - ref.stress.at(i)) / ref_norm[i];
    ++used;
  }
  if (used == 0) throw std::invalid_argument("reference stress vanishes everywhere");
  out.value = sum / static_cast<double>(used);
  return out;
}

template <int Dim>
double micro_error(const SolveResult<Dim>& sol, const SolveResult<Dim>& ref) {
  return micro_error_detail(sol, ref).value;
}

/// Pointwise |σ_ref,ij − σ_ij| of one stored component (default 11).
template <int Dim>
ScalarField<Dim> stress_difference_field(const SolveResult<Dim>& sol, const SolveResult<Dim>& ref,
                                         int component = 0) {
  if (!(sol.stress.grid() == ref.stress.grid())) throw std::invalid_argument("results on different grids");
  if (component < 0 || component >= kSymComponents<Dim>) throw std::out_of_range("stress component");
  ScalarField<Dim> out(ref.stress.grid());
  const auto a = sol.stress.component(component);
  const auto b = ref.stress.component(component);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = std::abs(b[i] - a[i]);
  return out;
}

}  // namespace fftmor
