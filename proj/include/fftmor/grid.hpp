/**
 * @file grid.hpp
 * @brief Periodic voxel grid on the unit cell.
 *
 * Voxels are numbered in row-major order (last axis fastest), which is also
 * the layout FFTW expects. Frequencies use the same flat numbering; the
 * centered multi-index of a frequency lies in [-N/2, N/2) per axis.
 */
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fftmor/tensor.hpp"

namespace fftmor {

template <int Dim>
  requires SpatialDim<Dim>
class Grid {
 public:
  using Index = std::array<int, Dim>;

  Grid() = default;

  explicit Grid(const Index& dims) : dims_{dims} {
    for (int j = 0; j < Dim; ++j) {
      if (dims_[j] < 2) {
        throw std::invalid_argument("grid axis " + std::to_string(j) + " has " +
                                    std::to_string(dims_[j]) + " voxels, need at least 2");
      }
    }
    size_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                            [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }

  static constexpr int dim() { return Dim; }
  const Index& dims() const { return dims_; }
  int extent(int axis) const { return dims_[axis]; }
  std::size_t size() const { return size_; }

  /// Voxel edge length along @p axis (unit cell of edge 1).
  double spacing(int axis) const { return 1.0 / dims_[axis]; }

  std::size_t flat(const Index& idx) const {
    std::size_t f = 0;
    for (int j = 0; j < Dim; ++j) f = f * dims_[j] + static_cast<std::size_t>(idx[j]);
    return f;
  }

  Index unflat(std::size_t f) const {
    Index idx{};
    for (int j = Dim - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(f % dims_[j]);
      f /= dims_[j];
    }
    return idx;
  }

  /// Centered frequency multi-index of flat frequency slot @p f.
  Index centered(std::size_t f) const {
    Index m = unflat(f);
    for (int j = 0; j < Dim; ++j) {
      if (m[j] >= dims_[j] / 2 + dims_[j] % 2) m[j] -= dims_[j];
    }
    return m;
  }

  /// Flat slot of an arbitrary integer multi-index, wrapped periodically.
  std::size_t wrap(const Index& m) const {
    Index w{};
    for (int j = 0; j < Dim; ++j) w[j] = ((m[j] % dims_[j]) + dims_[j]) % dims_[j];
    return flat(w);
  }

  /// Slot of the Hermitian partner -m (mod N) of slot @p f.
  std::size_t partner(std::size_t f) const {
    Index m = unflat(f);
    for (int j = 0; j < Dim; ++j) m[j] = -m[j];
    return wrap(m);
  }

  /// Voxel-center coordinate along @p axis.
  double center(int axis, int i) const { return (i + 0.5) * spacing(axis); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Index dims_{};
  std::size_t size_ = 0;
};

}  // namespace fftmor
