/**
 * @file tensor.hpp
 * @brief Small fixed-size symmetric tensors.
 *
 * A symmetric second-order tensor in @c Dim dimensions is stored by its
 * independent components in the order 11, 22, (33,) 12(, 13, 23). No Voigt
 * or Mandel weighting is applied to the stored values; contractions apply
 * the factor 2 of the off-diagonal entries explicitly.
 */
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace fftmor {

template <int Dim>
concept SpatialDim = (Dim == 2 || Dim == 3);

/// Number of independent components of a symmetric tensor.
template <int Dim>
inline constexpr int kSymComponents = Dim * (Dim + 1) / 2;

namespace detail {

template <int Dim>
constexpr std::array<std::array<int, 2>, kSymComponents<Dim>> sym_pairs() {
  if constexpr (Dim == 2) {
    return {{{0, 0}, {1, 1}, {0, 1}}};
  } else {
    return {{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}}};
  }
}

template <int Dim>
constexpr std::array<std::array<int, Dim>, Dim> sym_lookup() {
  std::array<std::array<int, Dim>, Dim> out{};
  constexpr auto pairs = sym_pairs<Dim>();
  for (int c = 0; c < kSymComponents<Dim>; ++c) {
    out[pairs[c][0]][pairs[c][1]] = c;
    out[pairs[c][1]][pairs[c][0]] = c;
  }
  return out;
}

}  // namespace detail

/// (i, j) index pair of stored component @p c.
template <int Dim>
inline constexpr auto kSymPairs = detail::sym_pairs<Dim>();

/// Stored component holding entry (i, j).
template <int Dim>
constexpr int sym_index(int i, int j) {
  return detail::sym_lookup<Dim>()[i][j];
}

/// Weight of stored component @p c in a full double contraction.
template <int Dim>
constexpr double sym_weight(int c) {
  return c < Dim ? 1.0 : 2.0;
}

template <int Dim, typename T = double>
  requires SpatialDim<Dim>
struct SymTensor {
  static constexpr int kComp = kSymComponents<Dim>;
  std::array<T, kComp> v{};

  static SymTensor identity() {
    SymTensor out;
    for (int i = 0; i < Dim; ++i) out.v[i] = T(1);
    return out;
  }

  T& operator[](int c) { return v[c]; }
  const T& operator[](int c) const { return v[c]; }
  T& operator()(int i, int j) { return v[sym_index<Dim>(i, j)]; }
  const T& operator()(int i, int j) const { return v[sym_index<Dim>(i, j)]; }

  T trace() const {
    T t{};
    for (int i = 0; i < Dim; ++i) t += v[i];
    return t;
  }

  SymTensor& operator+=(const SymTensor& o) {
    for (int c = 0; c < kComp; ++c) v[c] += o.v[c];
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    for (int c = 0; c < kComp; ++c) v[c] -= o.v[c];
    return *this;
  }
  SymTensor& operator*=(T s) {
    for (auto& x : v) x *= s;
    return *this;
  }
  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(SymTensor a, T s) { return a *= s; }
  friend SymTensor operator*(T s, SymTensor a) { return a *= s; }
  friend bool operator==(const SymTensor&, const SymTensor&) = default;
};

/// Full double contraction a : b.
template <int Dim>
double contract(const SymTensor<Dim>& a, const SymTensor<Dim>& b) {
  double s = 0.0;
  for (int c = 0; c < SymTensor<Dim>::kComp; ++c) s += sym_weight<Dim>(c) * a[c] * b[c];
  return s;
}

template <int Dim>
double frobenius_sq(const SymTensor<Dim>& a) {
  return contract(a, a);
}

template <int Dim>
double frobenius(const SymTensor<Dim>& a) {
  return std::sqrt(frobenius_sq(a));
}

template <int Dim>
SymTensor<Dim> deviator(const SymTensor<Dim>& a) {
  SymTensor<Dim> s = a;
  const double m = a.trace() / 3.0;
  for (int i = 0; i < Dim; ++i) s[i] -= m;
  return s;
}

/// Plane-strain embedding of an in-plane tensor (out-of-plane entries zero).
inline SymTensor<3> embed(const SymTensor<2>& a) {
  SymTensor<3> out;
  out(0, 0) = a(0, 0);
  out(1, 1) = a(1, 1);
  out(0, 1) = a(0, 1);
  return out;
}

inline SymTensor<3> embed(const SymTensor<3>& a) { return a; }

/// In-plane part of a 3D tensor.
template <int Dim>
SymTensor<Dim> restrict_to(const SymTensor<3>& a) {
  if constexpr (Dim == 3) {
    return a;
  } else {
    SymTensor<2> out;
    out(0, 0) = a(0, 0);
    out(1, 1) = a(1, 1);
    out(0, 1) = a(0, 1);
    return out;
  }
}

template <int Dim>
using CSymTensor = SymTensor<Dim, std::complex<double>>;

/// Macroscopic (volume-averaged) tensor.
template <int Dim>
using MacroTensor = SymTensor<Dim>;

/**
 * @brief Dense fourth-order tensor with complex entries.
 *
 * Used where the full index structure matters (Green operator checks). The
 * solver itself never materializes it.
 */
template <int Dim>
struct Tensor4 {
  std::array<std::complex<double>, Dim * Dim * Dim * Dim> v{};

  std::complex<double>& operator()(int i, int j, int k, int l) {
    return v[((i * Dim + j) * Dim + k) * Dim + l];
  }
  const std::complex<double>& operator()(int i, int j, int k, int l) const {
    return v[((i * Dim + j) * Dim + k) * Dim + l];
  }

  /// out_ij = T_ijkl a_kl
  template <typename T>
  CSymTensor<Dim> contract(const SymTensor<Dim, T>& a) const {
    CSymTensor<Dim> out;
    for (int c = 0; c < kSymComponents<Dim>; ++c) {
      const auto [i, j] = kSymPairs<Dim>[c];
      std::complex<double> s{};
      for (int k = 0; k < Dim; ++k)
        for (int l = 0; l < Dim; ++l) s += (*this)(i, j, k, l) * std::complex<double>(a(k, l));
      out[c] = s;
    }
    return out;
  }
};

}  // namespace fftmor
