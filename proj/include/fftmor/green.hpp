/**
 * @file green.hpp
 * @brief Green operator of a homogeneous isotropic reference medium.
 *
 * Two differential-operator symbols are available. The continuous one is
 * k = i 2π m on the unit cell. The rotated first-order finite-difference
 * symbol is
 *
 *   k_j = (e^{iφ_j} - 1) ∏_{l≠j} (e^{iφ_l} + 1) / (2^{d-1} h_j),  φ_j = 2π m_j / N_j,
 *
 * which tends to the continuous symbol for |φ| → 0.
 *
 * With strain ε̂ = sym(k ⊗ û) and equilibrium conj(k)·σ̂ = 0 the acoustic
 * tensor is A_jm = C⁰_jpmq conj(k_p) k_q, G = A⁻¹, and the Green operator
 * reads
 *
 *   Γ_ijmn = ¼ (k_i G_jm conj(k_n) + k_j G_im conj(k_n)
 *              + k_i G_jn conj(k_m) + k_j G_in conj(k_m)).
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "fftmor/grid.hpp"
#include "fftmor/materials.hpp"
#include "fftmor/tensor.hpp"

namespace fftmor {

enum class FrequencySymbol { continuous, rotated };

template <int Dim>
using CVector = std::array<std::complex<double>, Dim>;

template <int Dim>
using CMatrix = std::array<std::array<std::complex<double>, Dim>, Dim>;

/// Differential-operator symbol at centered multi-index @p m.
template <int Dim>
CVector<Dim> modified_frequency(const typename Grid<Dim>::Index& m, const Grid<Dim>& grid,
                                FrequencySymbol symbol = FrequencySymbol::rotated) {
  using namespace std::complex_literals;
  CVector<Dim> k{};
  if (symbol == FrequencySymbol::continuous) {
    for (int j = 0; j < Dim; ++j) k[j] = 2.0i * std::numbers::pi * static_cast<double>(m[j]);
    return k;
  }
  std::array<std::complex<double>, Dim> minus{}, plus{};
  for (int j = 0; j < Dim; ++j) {
    const double phi = 2.0 * std::numbers::pi * m[j] / grid.extent(j);
    const std::complex<double> e = std::polar(1.0, phi);
    minus[j] = e - 1.0;
    plus[j] = e + 1.0;
    // exact zeros at the DC and Nyquist planes
    if (m[j] == 0) minus[j] = 0.0;
    if (2 * std::abs(m[j]) == grid.extent(j)) {
      minus[j] = -2.0;
      plus[j] = 0.0;
    }
  }
  const double norm = static_cast<double>(1 << (Dim - 1));
  for (int j = 0; j < Dim; ++j) {
    std::complex<double> v = minus[j];
    for (int l = 0; l < Dim; ++l)
      if (l != j) v *= plus[l];
    k[j] = v / (norm * grid.spacing(j));
  }
  return k;
}

/// A_jm = λ conj(k_j) k_m + μ k_j conj(k_m) + μ |k|² δ_jm
template <int Dim>
CMatrix<Dim> acoustic_tensor(const CVector<Dim>& k, const ReferenceMedium& ref) {
  double k2 = 0.0;
  for (const auto& kj : k) k2 += std::norm(kj);
  CMatrix<Dim> a{};
  for (int j = 0; j < Dim; ++j)
    for (int m = 0; m < Dim; ++m) {
      a[j][m] = ref.lambda0 * std::conj(k[j]) * k[m] + ref.mu0 * k[j] * std::conj(k[m]);
      if (j == m) a[j][m] += ref.mu0 * k2;
    }
  return a;
}

/**
 * Closed-form inverse of a 2x2 or 3x3 matrix. Returns nullopt when the
 * determinant is negligible relative to the matrix scale.
 */
template <int Dim>
std::optional<CMatrix<Dim>> invert(const CMatrix<Dim>& a) {
  double scale2 = 0.0;
  for (const auto& row : a)
    for (const auto& x : row) scale2 = std::max(scale2, std::norm(x));
  if (scale2 == 0.0) return std::nullopt;
  CMatrix<Dim> inv{};
  std::complex<double> det;
  if constexpr (Dim == 2) {
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    inv[0][0] = a[1][1];
    inv[0][1] = -a[0][1];
    inv[1][0] = -a[1][0];
    inv[1][1] = a[0][0];
  } else {
    inv[0][0] = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    inv[0][1] = a[0][2] * a[2][1] - a[0][1] * a[2][2];
    inv[0][2] = a[0][1] * a[1][2] - a[0][2] * a[1][1];
    inv[1][0] = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    inv[1][1] = a[0][0] * a[2][2] - a[0][2] * a[2][0];
    inv[1][2] = a[0][2] * a[1][0] - a[0][0] * a[1][2];
    inv[2][0] = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    inv[2][1] = a[0][1] * a[2][0] - a[0][0] * a[2][1];
    inv[2][2] = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    det = a[0][0] * inv[0][0] + a[0][1] * inv[1][0] + a[0][2] * inv[2][0];
  }
  const double bound2 = Dim == 2 ? scale2 * scale2 : scale2 * scale2 * scale2;
  if (std::norm(det) <= 1e-26 * bound2) return std::nullopt;
  const std::complex<double> rdet = std::conj(det) / std::norm(det);
  for (auto& row : inv)
    for (auto& x : row) x *= rdet;
  return inv;
}

template <int Dim>
struct GammaHat {
  Tensor4<Dim> value;
  bool singular = false;
};

/// Explicit fourth-order Green operator at symbol @p k.
template <int Dim>
GammaHat<Dim> gamma_hat(const CVector<Dim>& k, const ReferenceMedium& ref) {
  GammaHat<Dim> out;
  const auto g = invert<Dim>(acoustic_tensor<Dim>(k, ref));
  if (!g) {
    out.singular = true;
    return out;
  }
  const auto& G = *g;
  for (int i = 0; i < Dim; ++i)
    for (int j = 0; j < Dim; ++j)
      for (int m = 0; m < Dim; ++m)
        for (int n = 0; n < Dim; ++n)
          out.value(i, j, m, n) = 0.25 * (k[i] * G[j][m] * std::conj(k[n]) +
                                          k[j] * G[i][m] * std::conj(k[n]) +
                                          k[i] * G[j][n] * std::conj(k[m]) +
                                          k[j] * G[i][n] * std::conj(k[m]));
  return out;
}

/**
 * @brief Factorized Green operator at one frequency.
 *
 * Applying Γ as sym(k ⊗ G (conj(k)·τ)) costs O(d²) instead of O(d⁴).
 */
template <int Dim>
struct GreenKernel {
  CVector<Dim> k{};
  CMatrix<Dim> g{};
  bool singular = true;

  static GreenKernel make(const CVector<Dim>& k, const ReferenceMedium& ref) {
    GreenKernel out;
    out.k = k;
    if (auto inv = invert<Dim>(acoustic_tensor<Dim>(k, ref))) {
      out.g = *inv;
      out.singular = false;
    }
    return out;
  }

  /// Returns Γ : τ (without the leading minus sign).
  CSymTensor<Dim> apply(const CSymTensor<Dim>& tau) const {
    CSymTensor<Dim> out;
    if (singular) return out;
    CVector<Dim> q{};
    for (int j = 0; j < Dim; ++j)
      for (int p = 0; p < Dim; ++p) q[j] += tau(j, p) * std::conj(k[p]);
    CVector<Dim> u{};
    for (int j = 0; j < Dim; ++j)
      for (int m = 0; m < Dim; ++m) u[j] += g[j][m] * q[m];
    for (int c = 0; c < kSymComponents<Dim>; ++c) {
      const auto [i, j] = kSymPairs<Dim>[c];
      out[c] = 0.5 * (k[i] * u[j] + k[j] * u[i]);
    }
    return out;
  }
};

}  // namespace fftmor
