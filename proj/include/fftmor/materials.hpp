/**
 * @file materials.hpp
 * @brief Phase-wise constitutive laws and the homogeneous reference medium.
 *
 * Constitutive evaluation is done in 3D; 2D problems are plane strain
 * (eps_33 = eps_13 = eps_23 = 0) and keep sigma_33 in the von Mises
 * deviator.
 */
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fftmor/field.hpp"
#include "fftmor/tensor.hpp"

namespace fftmor {

/// Isotropic elastic constants in GPa.
struct ElasticParams {
  double lambda = 0.0;
  double mu = 0.0;

  void validate(int dim = 3) const {
    if (!(mu > 0.0)) throw std::invalid_argument("shear modulus mu must be positive");
    if (!(lambda + 2.0 * mu / dim > 0.0))
      throw std::invalid_argument("lambda + 2 mu / d must be positive");
  }
};

/// von Mises plasticity with linear isotropic hardening.
struct PlasticParams {
  ElasticParams elastic;
  double sigma_y0 = 0.0;
  double hardening_h = 0.0;

  void validate(int dim = 3) const {
    elastic.validate(dim);
    if (!(sigma_y0 > 0.0)) throw std::invalid_argument("initial yield stress must be positive");
    if (!(hardening_h >= 0.0)) throw std::invalid_argument("hardening modulus must be >= 0");
  }
};

using Material = std::variant<ElasticParams, PlasticParams>;

inline const ElasticParams& elastic_part(const Material& m) {
  if (const auto* p = std::get_if<PlasticParams>(&m)) return p->elastic;
  return std::get<ElasticParams>(m);
}

inline bool is_plastic(const Material& m) { return std::holds_alternative<PlasticParams>(m); }

struct PlasticState {
  SymTensor<3> eps_p;
  double eps_p_acc = 0.0;
};

struct ReferenceMedium {
  double lambda0 = 0.0;
  double mu0 = 0.0;
};

/// sigma = lambda tr(eps) I + 2 mu eps
template <int Dim>
SymTensor<Dim> elastic_stress(const SymTensor<Dim>& eps, const ElasticParams& p) {
  SymTensor<Dim> s = eps * (2.0 * p.mu);
  const double lt = p.lambda * eps.trace();
  for (int i = 0; i < Dim; ++i) s[i] += lt;
  return s;
}

template <int Dim>
SymTensor<Dim> elastic_stress(const SymTensor<Dim>& eps, const ReferenceMedium& r) {
  return elastic_stress(eps, ElasticParams{r.lambda0, r.mu0});
}

/// von Mises equivalent stress sqrt(3/2 s:s).
inline double von_mises(const SymTensor<3>& sigma) {
  return std::sqrt(1.5 * frobenius_sq(deviator(sigma)));
}

/// Raised when the return map meets a state it cannot have produced.
class DegenerateStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ReturnMapResult {
  SymTensor<3> sigma;
  PlasticState state;
  double delta_gamma = 0.0;
};

/**
 * @brief Backward-Euler radial return for J2 plasticity.
 *
 * Elastic predictor from the committed plastic strain; if the trial stress
 * violates the yield condition it is returned radially onto the hardened
 * yield surface, Δγ = Φ_trial / (3μ + H).
 */
inline ReturnMapResult j2_return_map(const SymTensor<3>& eps_total, const PlasticState& state,
                                     const PlasticParams& p) {
  const double mu = p.elastic.mu;
  const SymTensor<3> trial = elastic_stress(eps_total - state.eps_p, p.elastic);
  const SymTensor<3> s = deviator(trial);
  const double seq = std::sqrt(1.5 * frobenius_sq(s));
  const double phi = seq - (p.sigma_y0 + p.hardening_h * state.eps_p_acc);
  if (phi <= 0.0) return {trial, state, 0.0};
  if (!(seq > 0.0)) throw DegenerateStateError("zero equivalent stress with active yield function");

  const double dgamma = phi / (3.0 * mu + p.hardening_h);
  const SymTensor<3> flow = s * (1.5 / seq);
  ReturnMapResult out;
  out.delta_gamma = dgamma;
  out.state.eps_p = state.eps_p + flow * dgamma;
  out.state.eps_p_acc = state.eps_p_acc + dgamma;
  out.sigma = trial - flow * (2.0 * mu * dgamma);
  return out;
}

/// Yield function value of @p sigma at accumulated plastic strain @p acc.
inline double yield_function(const SymTensor<3>& sigma, double acc, const PlasticParams& p) {
  return von_mises(sigma) - (p.sigma_y0 + p.hardening_h * acc);
}

/**
 * Pointwise stress for any phase model. @p trial receives the updated
 * internal state (unchanged for elastic phases).
 */
template <int Dim>
SymTensor<Dim> material_stress(const Material& m, const SymTensor<Dim>& eps,
                               const PlasticState& committed, PlasticState& trial) {
  if (const auto* pp = std::get_if<PlasticParams>(&m)) {
    auto r = j2_return_map(embed(eps), committed, *pp);
    trial = r.state;
    return restrict_to<Dim>(r.sigma);
  }
  trial = committed;
  return elastic_stress(eps, std::get<ElasticParams>(m));
}

/// Arithmetic volume average of the Lamé constants.
template <int Dim>
ReferenceMedium reference_medium(const PhaseMap<Dim>& phases, std::span<const Material> materials) {
  std::size_t counts[256] = {};
  for (auto p : phases.phase) ++counts[p];
  ReferenceMedium ref;
  for (int label = 0; label < 256; ++label) {
    if (counts[label] == 0) continue;
    if (static_cast<std::size_t>(label) >= materials.size())
      throw std::invalid_argument("no material parameters for phase " + std::to_string(label));
    const auto& e = elastic_part(materials[label]);
    ref.lambda0 += e.lambda * static_cast<double>(counts[label]);
    ref.mu0 += e.mu * static_cast<double>(counts[label]);
  }
  const double n = static_cast<double>(phases.phase.size());
  ref.lambda0 /= n;
  ref.mu0 /= n;
  return ref;
}

}  // namespace fftmor
