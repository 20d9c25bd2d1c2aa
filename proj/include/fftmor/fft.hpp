/**
 * @file fft.hpp
 * @brief Forward/inverse discrete Fourier transforms of grid fields (FFTW).
 *
 * Convention: the forward transform is unnormalized, the inverse carries the
 * 1/n factor. The zero-frequency entry of a forward transform is therefore n
 * times the volume average.
 */
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "fftmor/field.hpp"

namespace fftmor {

/// Raised when an inverse transform leaves a significant imaginary part.
class HermitianSymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// The FFTW planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

struct FftwPlanDestroy {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDestroy>;

}  // namespace detail

/**
 * @brief Batched complex-to-complex transform of @p howmany scalar grids.
 *
 * Owns an aligned work buffer; callers copy in, transform in place, and copy
 * out. Plans are built with FFTW_ESTIMATE so repeated runs are bitwise
 * reproducible.
 */
template <int Dim>
class FftEngine {
 public:
  FftEngine(const Grid<Dim>& grid, int howmany) : grid_{grid}, howmany_{howmany} {
    const std::size_t total = grid.size() * static_cast<std::size_t>(howmany);
    buffer_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total)));
    if (!buffer_) throw std::bad_alloc();
    std::array<int, Dim> n = grid.dims();
    const int dist = static_cast<int>(grid.size());
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_.reset(fftw_plan_many_dft(Dim, n.data(), howmany, buffer_.get(), nullptr, 1, dist,
                                      buffer_.get(), nullptr, 1, dist, FFTW_FORWARD, FFTW_ESTIMATE));
    backward_.reset(fftw_plan_many_dft(Dim, n.data(), howmany, buffer_.get(), nullptr, 1, dist,
                                       buffer_.get(), nullptr, 1, dist, FFTW_BACKWARD,
                                       FFTW_ESTIMATE));
    if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
  }

  const Grid<Dim>& grid() const { return grid_; }
  int howmany() const { return howmany_; }

  std::span<std::complex<double>> buffer() {
    return {reinterpret_cast<std::complex<double>*>(buffer_.get()),
            grid_.size() * static_cast<std::size_t>(howmany_)};
  }

  void execute_forward() { fftw_execute(forward_.get()); }
  void execute_backward() { fftw_execute(backward_.get()); }

  /// Real input -> spectrum.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) {
    auto buf = buffer();
    check_size(in.size());
    check_size(out.size());
    for (std::size_t i = 0; i < in.size(); ++i) buf[i] = in[i];
    execute_forward();
    std::copy(buf.begin(), buf.end(), out.begin());
  }

  /**
   * Spectrum -> real output with 1/n normalization. Returns the largest
   * absolute imaginary part left after inversion.
   */
  double inverse(std::span<const std::complex<double>> in, std::span<double> out) {
    auto buf = buffer();
    check_size(in.size());
    check_size(out.size());
    std::copy(in.begin(), in.end(), buf.begin());
    execute_backward();
    const double scale = 1.0 / static_cast<double>(grid_.size());
    double max_imag = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
      out[i] = buf[i].real() * scale;
      max_imag = std::max(max_imag, std::abs(buf[i].imag()) * scale);
    }
    return max_imag;
  }

 private:
  void check_size(std::size_t s) const {
    if (s != grid_.size() * static_cast<std::size_t>(howmany_))
      throw std::invalid_argument("transform size mismatch");
  }

  Grid<Dim> grid_;
  int howmany_;
  detail::FftwBuffer buffer_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

/// Relative imaginary residue tolerated by fft_inverse.
inline constexpr double kHermitianTolerance = 1e-8;

template <int Dim>
SpectralSymTensorField<Dim> fft_forward(const SymTensorField<Dim>& field) {
  FftEngine<Dim> engine(field.grid(), kSymComponents<Dim>);
  SpectralSymTensorField<Dim> out(field.grid());
  engine.forward(field.data(), out.data());
  return out;
}

/**
 * Inverse transform of a spectrum that must be Hermitian-symmetric.
 *
 * Throws HermitianSymmetryError if the imaginary residue exceeds
 * kHermitianTolerance times the RMS of the real result.
 */
template <int Dim>
SymTensorField<Dim> fft_inverse(const SpectralSymTensorField<Dim>& spec) {
  FftEngine<Dim> engine(spec.grid(), kSymComponents<Dim>);
  SymTensorField<Dim> out(spec.grid());
  const double max_imag = engine.inverse(spec.data(), out.data());
  const double scale = field_l2_norm(out) / std::sqrt(static_cast<double>(out.size()));
  if (max_imag > kHermitianTolerance * scale) {
    throw HermitianSymmetryError("inverse transform left imaginary residue " +
                                 std::to_string(max_imag) + " (spectrum not Hermitian)");
  }
  return out;
}

template <int Dim>
std::vector<std::complex<double>> fft_forward(const ScalarField<Dim>& field) {
  FftEngine<Dim> engine(field.grid, 1);
  std::vector<std::complex<double>> out(field.grid.size());
  engine.forward(field.values, out);
  return out;
}

template <int Dim>
ScalarField<Dim> fft_inverse(const Grid<Dim>& grid, std::span<const std::complex<double>> spec) {
  FftEngine<Dim> engine(grid, 1);
  ScalarField<Dim> out(grid);
  engine.inverse(spec, out.values);
  return out;
}

}  // namespace fftmor
