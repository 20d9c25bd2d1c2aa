/**
 * @file field.hpp
 * @brief Tensor and scalar fields over a periodic grid.
 *
 * Fields store their components component-major: component @c c of voxel
 * @c i lives at <tt>data[c * n + i]</tt>. This matches the batched transform
 * layout, so a field can be handed to the FFT without reshuffling.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "fftmor/grid.hpp"
#include "fftmor/tensor.hpp"

namespace fftmor {

template <int Dim, typename T>
class BasicSymTensorField {
 public:
  static constexpr int kComp = kSymComponents<Dim>;
  using value_type = T;
  using Tensor = SymTensor<Dim, T>;

  BasicSymTensorField() = default;
  explicit BasicSymTensorField(const Grid<Dim>& grid)
      : grid_{grid}, data_(static_cast<std::size_t>(kComp) * grid.size(), T{}) {}

  /// Field with every voxel equal to @p value.
  static BasicSymTensorField uniform(const Grid<Dim>& grid, const Tensor& value) {
    BasicSymTensorField f(grid);
    for (int c = 0; c < kComp; ++c) {
      auto comp = f.component(c);
      std::fill(comp.begin(), comp.end(), value[c]);
    }
    return f;
  }

  const Grid<Dim>& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  Tensor at(std::size_t i) const {
    Tensor t;
    const std::size_t n = size();
    for (int c = 0; c < kComp; ++c) t[c] = data_[c * n + i];
    return t;
  }

  void set(std::size_t i, const Tensor& t) {
    const std::size_t n = size();
    for (int c = 0; c < kComp; ++c) data_[c * n + i] = t[c];
  }

  std::span<T> component(int c) { return {data_.data() + c * size(), size()}; }
  std::span<const T> component(int c) const { return {data_.data() + c * size(), size()}; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

 private:
  Grid<Dim> grid_;
  std::vector<T> data_;
};

template <int Dim>
using SymTensorField = BasicSymTensorField<Dim, double>;

/// Spectrum of a symmetric tensor field, slots in FFT order.
template <int Dim>
class SpectralSymTensorField : public BasicSymTensorField<Dim, std::complex<double>> {
 public:
  using BasicSymTensorField<Dim, std::complex<double>>::BasicSymTensorField;

  /// Entry at centered (or any periodic) multi-index @p m.
  CSymTensor<Dim> at_frequency(const typename Grid<Dim>::Index& m) const {
    return this->at(this->grid().wrap(m));
  }
};

/// Scalar field over the grid, row-major.
template <int Dim>
struct ScalarField {
  Grid<Dim> grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid<Dim>& g, double fill = 0.0) : grid{g}, values(g.size(), fill) {}
};

/**
 * @brief Phase indicator of a two-phase microstructure.
 *
 * Label 0 is the matrix, label 1 the inclusion.
 */
template <int Dim>
struct PhaseMap {
  Grid<Dim> grid;
  std::vector<std::uint8_t> phase;

  PhaseMap() = default;
  explicit PhaseMap(const Grid<Dim>& g, std::uint8_t fill = 0) : grid{g}, phase(g.size(), fill) {}

  double inclusion_fraction() const {
    std::size_t count = 0;
    for (auto p : phase) count += (p != 0);
    return static_cast<double>(count) / static_cast<double>(phase.size());
  }

  bool is_single_phase() const {
    for (auto p : phase)
      if (p != phase.front()) return false;
    return true;
  }

  /// Indicator g(x): 1 in the inclusion, 0 in the matrix.
  ScalarField<Dim> indicator() const {
    ScalarField<Dim> g(grid);
    for (std::size_t i = 0; i < phase.size(); ++i) g.values[i] = phase[i] != 0 ? 1.0 : 0.0;
    return g;
  }

  void validate() const {
    if (phase.size() != grid.size()) throw std::invalid_argument("phase map size does not match grid");
    for (auto p : phase)
      if (p > 1) throw std::invalid_argument("phase label " + std::to_string(p) + " outside {0,1}");
  }
};

template <int Dim, typename T>
SymTensor<Dim, T> volume_average(const BasicSymTensorField<Dim, T>& field) {
  SymTensor<Dim, T> avg;
  const double n = static_cast<double>(field.size());
  for (int c = 0; c < kSymComponents<Dim>; ++c) {
    T s{};
    for (const auto& x : field.component(c)) s += x;
    avg[c] = s / n;
  }
  return avg;
}

/// sqrt of the sum over voxels of the squared Frobenius norm.
template <int Dim, typename T>
double field_l2_norm(const BasicSymTensorField<Dim, T>& field) {
  double s = 0.0;
  for (int c = 0; c < kSymComponents<Dim>; ++c) {
    double sc = 0.0;
    for (const auto& x : field.component(c)) sc += std::norm(std::complex<double>(x));
    s += sym_weight<Dim>(c) * sc;
  }
  return std::sqrt(s);
}

template <int Dim>
double field_l2_distance(const SymTensorField<Dim>& a, const SymTensorField<Dim>& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
  double s = 0.0;
  const std::size_t n = a.size();
  for (int c = 0; c < kSymComponents<Dim>; ++c) {
    double sc = 0.0;
    const double* pa = a.data().data() + c * n;
    const double* pb = b.data().data() + c * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = pa[i] - pb[i];
      sc += d * d;
    }
    s += sym_weight<Dim>(c) * sc;
  }
  return std::sqrt(s);
}

template <int Dim, typename T>
bool all_finite(const BasicSymTensorField<Dim, T>& field) {
  for (const auto& x : field.data()) {
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(x)) return false;
    } else {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    }
  }
  return true;
}

}  // namespace fftmor
