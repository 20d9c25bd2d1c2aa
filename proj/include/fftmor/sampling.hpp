/**
 * @file sampling.hpp
 * @brief Reduced frequency sets ("sampling patterns").
 *
 * Every mask keeps the zero frequency and is closed under m -> -m (mod N),
 * so a masked spectrum of a real field stays Hermitian.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fftmor/fft.hpp"
#include "fftmor/field.hpp"
#include "fftmor/grid.hpp"

namespace fftmor {

enum class PatternKind { full, radial, adapted, custom };

inline const char* to_string(PatternKind k) {
  switch (k) {
    case PatternKind::full: return "full";
    case PatternKind::radial: return "radial";
    case PatternKind::adapted: return "adapted";
    case PatternKind::custom: return "custom";
  }
  return "?";
}

template <int Dim>
class FrequencyMask {
 public:
  FrequencyMask() = default;

  /// Builds a mask from arbitrary slots; sorts and deduplicates.
  FrequencyMask(const Grid<Dim>& grid, std::vector<std::size_t> slots, double target_fraction,
                PatternKind kind = PatternKind::custom)
      : grid_{grid}, dense_(grid.size(), 0), target_fraction_{target_fraction}, kind_{kind} {
    for (auto s : slots) {
      if (s >= grid.size()) throw std::out_of_range("frequency slot outside grid");
      dense_[s] = 1;
    }
    retained_.reserve(slots.size());
    for (std::size_t s = 0; s < dense_.size(); ++s)
      if (dense_[s]) retained_.push_back(s);
  }

  const Grid<Dim>& grid() const { return grid_; }
  const std::vector<std::size_t>& retained() const { return retained_; }
  std::size_t count() const { return retained_.size(); }
  bool contains(std::size_t slot) const { return dense_[slot] != 0; }
  bool is_full() const { return retained_.size() == grid_.size(); }
  double target_fraction() const { return target_fraction_; }
  /// Achieved percentage of retained frequencies.
  double fraction() const { return 100.0 * static_cast<double>(count()) / grid_.size(); }
  PatternKind kind() const { return kind_; }

  const std::string& warning() const { return warning_; }
  void set_warning(std::string w) { warning_ = std::move(w); }

  bool contains_dc() const { return !dense_.empty() && dense_[0]; }

  bool hermitian_closed() const {
    for (auto s : retained_)
      if (!dense_[grid_.partner(s)]) return false;
    return true;
  }

  friend bool operator==(const FrequencyMask& a, const FrequencyMask& b) {
    return a.grid_ == b.grid_ && a.retained_ == b.retained_;
  }

 private:
  Grid<Dim> grid_;
  std::vector<std::size_t> retained_;
  std::vector<std::uint8_t> dense_;
  double target_fraction_ = 100.0;
  PatternKind kind_ = PatternKind::custom;
  std::string warning_;
};

/// round(R/100 · n), at least one (the DC slot).
inline std::size_t target_count(double percent, std::size_t n) {
  if (!(percent > 0.0 && percent <= 100.0))
    throw std::invalid_argument("frequency percentage R must lie in (0, 100], got " +
                                std::to_string(percent));
  const auto k = static_cast<std::size_t>(std::llround(percent / 100.0 * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

template <int Dim>
FrequencyMask<Dim> full_mask(const Grid<Dim>& grid) {
  std::vector<std::size_t> all(grid.size());
  for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
  return FrequencyMask<Dim>(grid, std::move(all), 100.0, PatternKind::full);
}

namespace detail {

/// Adds slots in the given priority order, each with its partner, until
/// at least @p target slots are taken.
template <int Dim>
std::vector<std::size_t> take_in_pairs(const Grid<Dim>& grid, const std::vector<std::size_t>& order,
                                       std::size_t target) {
  std::vector<std::uint8_t> taken(grid.size(), 0);
  std::vector<std::size_t> out;
  out.reserve(target + 1);
  auto add = [&](std::size_t s) {
    if (!taken[s]) {
      taken[s] = 1;
      out.push_back(s);
    }
  };
  add(0);
  for (auto s : order) {
    if (out.size() >= target) break;
    add(s);
    add(grid.partner(s));
  }
  return out;
}

/// Unit directions spanning half the sphere (lines through the origin).
template <int Dim>
std::vector<std::array<double, Dim>> line_directions(int count) {
  std::vector<std::array<double, Dim>> dirs;
  dirs.reserve(count);
  if constexpr (Dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double theta = std::numbers::pi * k / count;
      dirs.push_back({std::cos(theta), std::sin(theta)});
    }
  } else {
    // golden-angle spiral over the upper hemisphere
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
  }
  return dirs;
}

template <int Dim>
long radius2(const typename Grid<Dim>::Index& m) {
  long r2 = 0;
  for (int j = 0; j < Dim; ++j) r2 += static_cast<long>(m[j]) * m[j];
  return r2;
}

/// Sorts slots by squared radius, ties by centered index.
template <int Dim>
void sort_by_radius(const Grid<Dim>& grid, std::vector<std::size_t>& slots) {
  std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
    const auto ma = grid.centered(a), mb = grid.centered(b);
    const long ra = radius2<Dim>(ma), rb = radius2<Dim>(mb);
    return ra != rb ? ra < rb : ma < mb;
  });
}

/// Slots hit by the line through the origin along @p u, with partners.
template <int Dim>
std::vector<std::size_t> line_slots(const Grid<Dim>& grid, const std::array<double, static_cast<std::size_t>(Dim)>& u) {
  int reach = 0;
  for (int j = 0; j < Dim; ++j) reach = std::max(reach, grid.extent(j));
  std::vector<std::uint8_t> hit(grid.size(), 0);
  std::vector<std::size_t> out;
  auto mark = [&](std::size_t s) {
    if (!hit[s]) {
      hit[s] = 1;
      out.push_back(s);
    }
  };
  for (int step = -2 * reach; step <= 2 * reach; ++step) {
    const double t = 0.5 * step;
    typename Grid<Dim>::Index m{};
    bool inside = true;
    for (int j = 0; j < Dim; ++j) {
      m[j] = static_cast<int>(std::lround(t * u[j]));
      inside &= m[j] >= -grid.extent(j) / 2 && m[j] < grid.extent(j) - grid.extent(j) / 2;
    }
    if (!inside) continue;
    const auto s = grid.wrap(m);
    mark(s);
    mark(grid.partner(s));
  }
  sort_by_radius(grid, out);
  return out;
}

/**
 * Priority order of the radial pattern with @p lines lines: DC, the disk by
 * radius, then each line in turn (its new slots by radius). Returns the
 * order; its length is the pattern cardinality.
 */
template <int Dim>
std::vector<std::size_t> radial_order(const Grid<Dim>& grid, double disk_radius, int lines) {
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::vector<std::size_t> order;
  auto push = [&](std::size_t s) {
    if (!seen[s]) {
      seen[s] = 1;
      order.push_back(s);
    }
  };
  push(0);
  std::vector<std::size_t> disk;
  for (std::size_t s = 1; s < grid.size(); ++s)
    if (static_cast<double>(radius2<Dim>(grid.centered(s))) <= disk_radius * disk_radius) disk.push_back(s);
  sort_by_radius(grid, disk);
  for (auto s : disk) push(s);
  for (const auto& u : line_directions<Dim>(lines))
    for (auto s : line_slots(grid, u)) push(s);
  return order;
}

}  // namespace detail

/// Tunables of the radial pattern.
struct RadialOptions {
  /// Radius (in frequency index units) of the always-retained low-pass disk.
  double disk_radius = 2.0;
};

/**
 * @brief Fixed radial sampling pattern.
 *
 * DC, a small low-frequency disk and M lines through the origin at equal
 * angles, rasterized on the centered frequency grid. M is the smallest count
 * whose pattern holds the target cardinality. Slots are taken disk first,
 * then line by line, so all lines but the last are complete and the count
 * hits the target up to one Hermitian pair.
 */
template <int Dim>
FrequencyMask<Dim> radial_mask(const Grid<Dim>& grid, double percent, RadialOptions opts = {}) {
  const std::size_t target = target_count(percent, grid.size());
  if (target >= grid.size()) return full_mask(grid);

  auto count_for = [&](int lines) { return detail::radial_order(grid, opts.disk_radius, lines).size(); };
  // smallest line count (doubling, then bisection) whose pattern reaches the target
  int reach = 1;
  for (int j = 0; j < Dim; ++j) reach = std::max(reach, grid.extent(j));
  const int max_lines = 8 * static_cast<int>(std::pow(reach, Dim - 1));
  int hi = 1;
  while (hi < max_lines && count_for(hi) < target) hi *= 2;
  int lo = hi / 2;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    (count_for(mid) >= target ? hi : lo) = mid;
  }
  auto order = detail::radial_order(grid, opts.disk_radius, hi);
  // lines saturated: continue with the remaining slots by radius
  if (order.size() < target) {
    std::vector<std::uint8_t> seen(grid.size(), 0);
    for (auto s : order) seen[s] = 1;
    std::vector<std::size_t> rest;
    for (std::size_t s = 0; s < grid.size(); ++s)
      if (!seen[s]) rest.push_back(s);
    detail::sort_by_radius(grid, rest);
    order.insert(order.end(), rest.begin(), rest.end());
  }
  return FrequencyMask<Dim>(grid, detail::take_in_pairs(grid, order, target), percent,
                            PatternKind::radial);
}

/**
 * @brief Geometry-adapted sampling pattern.
 *
 * Ranks frequencies by the amplitude of the indicator's Fourier transform
 * and keeps the largest ones. Amplitudes are compared after quantization to
 * 1e-12 of n so that round-off cannot reorder exact ties; ties go to the
 * lexicographically smaller centered index.
 */
template <int Dim>
FrequencyMask<Dim> adapted_mask(const PhaseMap<Dim>& phases, double percent) {
  const auto& grid = phases.grid;
  const std::size_t target = target_count(percent, grid.size());
  if (target >= grid.size()) {
    auto m = full_mask(grid);
    return FrequencyMask<Dim>(grid, m.retained(), percent, PatternKind::adapted);
  }

  const auto ghat = fft_forward(phases.indicator());
  const double n = static_cast<double>(grid.size());
  struct Cand {
    long long key;
    typename Grid<Dim>::Index m;
    std::size_t slot;
  };
  std::vector<Cand> cands;
  cands.reserve(grid.size());
  for (std::size_t s = 1; s < grid.size(); ++s)
    cands.push_back({std::llround(std::abs(ghat[s]) / n * 1e12), grid.centered(s), s});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.key != b.key ? a.key > b.key : a.m < b.m;
  });
  std::vector<std::size_t> order;
  order.reserve(cands.size());
  for (const auto& c : cands) order.push_back(c.slot);
  FrequencyMask<Dim> mask(grid, detail::take_in_pairs(grid, order, target), percent,
                          PatternKind::adapted);
  if (phases.is_single_phase())
    mask.set_warning("single-phase microstructure: amplitudes vanish off DC, mask filled lexicographically");
  return mask;
}

/// Truncated Fourier approximation of the indicator on @p mask.
template <int Dim>
ScalarField<Dim> mask_apply_geometry_preview(const PhaseMap<Dim>& phases,
                                             const FrequencyMask<Dim>& mask) {
  if (!(mask.grid() == phases.grid)) throw std::invalid_argument("mask and phase map grids differ");
  auto ghat = fft_forward(phases.indicator());
  for (std::size_t s = 0; s < ghat.size(); ++s)
    if (!mask.contains(s)) ghat[s] = 0.0;
  return fft_inverse(phases.grid, std::span<const std::complex<double>>(ghat));
}

}  // namespace fftmor
