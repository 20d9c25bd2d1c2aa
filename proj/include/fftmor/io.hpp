/**
 * @file io.hpp
 * @brief File formats: legacy VTK, flat CSV fields, mask text files, phase
 *        map import, error reports and timing tables.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fftmor/field.hpp"
#include "fftmor/postproc.hpp"
#include "fftmor/sampling.hpp"

namespace fftmor {

/// I/O failure; the message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_{path} {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing");
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  return in;
}

inline void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

inline std::string fmt_e9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

inline std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError(path, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError(path, "line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
}

/// Flat indices in VTK order (x = axis 0 fastest).
template <int Dim>
std::vector<std::size_t> vtk_order(const Grid<Dim>& grid) {
  std::vector<std::size_t> order;
  order.reserve(grid.size());
  typename Grid<Dim>::Index idx{};
  if constexpr (Dim == 2) {
    for (idx[1] = 0; idx[1] < grid.extent(1); ++idx[1])
      for (idx[0] = 0; idx[0] < grid.extent(0); ++idx[0]) order.push_back(grid.flat(idx));
  } else {
    for (idx[2] = 0; idx[2] < grid.extent(2); ++idx[2])
      for (idx[1] = 0; idx[1] < grid.extent(1); ++idx[1])
        for (idx[0] = 0; idx[0] < grid.extent(0); ++idx[0]) order.push_back(grid.flat(idx));
  }
  return order;
}

template <int Dim>
void vtk_header(std::ostream& out, const Grid<Dim>& grid, const std::string& title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << grid.extent(0) << ' ' << grid.extent(1) << ' ' << (Dim == 3 ? grid.extent(2) : 1) << '\n';
  out << "ORIGIN";
  for (int j = 0; j < 3; ++j) out << ' ' << fmt_e9(j < Dim ? 0.5 * grid.spacing(j) : 0.0);
  out << "\nSPACING";
  for (int j = 0; j < 3; ++j) out << ' ' << fmt_e9(j < Dim ? grid.spacing(j) : 1.0);
  out << "\nPOINT_DATA " << grid.size() << '\n';
}

inline const char* axis_name(int j) { return j == 0 ? "i" : (j == 1 ? "j" : "k"); }

}  // namespace detail

/// Legacy ASCII VTK file holding one scalar dataset.
template <int Dim>
void write_vtk(const std::filesystem::path& path, const ScalarField<Dim>& field, const std::string& name) {
  auto out = detail::open_out(path);
  detail::vtk_header(out, field.grid, "fftmor " + name);
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (auto i : detail::vtk_order(field.grid)) out << detail::fmt_e9(field.values[i]) << '\n';
  detail::check_written(out, path);
}

/// Legacy ASCII VTK file holding one tensor dataset, 2D tensors padded to 3×3.
template <int Dim>
void write_vtk(const std::filesystem::path& path, const SymTensorField<Dim>& field, const std::string& name) {
  auto out = detail::open_out(path);
  detail::vtk_header(out, field.grid(), "fftmor " + name);
  out << "TENSORS " << name << " double\n";
  for (auto i : detail::vtk_order(field.grid())) {
    const auto t = field.at(i);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double v = (a < Dim && b < Dim) ? t(a, b) : 0.0;
        out << (b ? " " : "") << detail::fmt_e9(v);
      }
      out << '\n';
    }
  }
  detail::check_written(out, path);
}

/// Flat CSV: index columns then the stored tensor components.
template <int Dim>
void write_csv(const std::filesystem::path& path, const SymTensorField<Dim>& field, const std::string& name) {
  auto out = detail::open_out(path);
  const auto& g = field.grid();
  for (int j = 0; j < Dim; ++j) out << detail::axis_name(j) << ',';
  for (int c = 0; c < kSymComponents<Dim>; ++c) {
    const auto [a, b] = kSymPairs<Dim>[c];
    out << name << '_' << a + 1 << b + 1 << (c + 1 < kSymComponents<Dim> ? "," : "\n");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflat(i);
    for (int j = 0; j < Dim; ++j) out << idx[j] << ',';
    for (int c = 0; c < kSymComponents<Dim>; ++c)
      out << detail::fmt_g17(field.component(c)[i]) << (c + 1 < kSymComponents<Dim> ? "," : "\n");
  }
  detail::check_written(out, path);
}

template <int Dim>
void write_csv(const std::filesystem::path& path, const ScalarField<Dim>& field, const std::string& name) {
  auto out = detail::open_out(path);
  for (int j = 0; j < Dim; ++j) out << detail::axis_name(j) << ',';
  out << name << '\n';
  for (std::size_t i = 0; i < field.grid.size(); ++i) {
    const auto idx = field.grid.unflat(i);
    for (int j = 0; j < Dim; ++j) out << idx[j] << ',';
    out << detail::fmt_g17(field.values[i]) << '\n';
  }
  detail::check_written(out, path);
}

/// Reads a tensor CSV written by write_csv back onto @p grid.
template <int Dim>
SymTensorField<Dim> read_csv_field(const std::filesystem::path& path, const Grid<Dim>& grid) {
  auto in = detail::open_in(path);
  constexpr int kComp = kSymComponents<Dim>;
  SymTensorField<Dim> f(grid);
  std::vector<char> seen(grid.size(), 0);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != static_cast<std::size_t>(Dim + kComp))
      throw IoError(path, "line " + std::to_string(lineno) + ": expected " + std::to_string(Dim + kComp) + " columns");
    typename Grid<Dim>::Index idx{};
    for (int j = 0; j < Dim; ++j) {
      const long v = detail::parse_long(cols[j], path, lineno);
      if (v < 0 || v >= grid.extent(j)) throw IoError(path, "line " + std::to_string(lineno) + ": index out of range");
      idx[j] = static_cast<int>(v);
    }
    const auto s = grid.flat(idx);
    for (int c = 0; c < kComp; ++c) f.component(c)[s] = detail::parse_double(cols[Dim + c], path, lineno);
    seen[s] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw IoError(path, "not every voxel is present");
  return f;
}

// ---------------------------------------------------------------------------
// masks

/**
 * Text format:
 *   # fftmor frequency mask
 *   dims <N1> <N2> [<N3>]
 *   R <percent>
 *   pattern <full|radial|adapted|custom>
 *   count <k>
 * followed by one centered multi-index per line.
 */
template <int Dim>
void write_mask(const std::filesystem::path& path, const FrequencyMask<Dim>& mask) {
  auto out = detail::open_out(path);
  const auto& g = mask.grid();
  out << "# fftmor frequency mask\ndims";
  for (int j = 0; j < Dim; ++j) out << ' ' << g.extent(j);
  out << "\nR " << detail::fmt_g17(mask.target_fraction()) << "\npattern " << to_string(mask.kind())
      << "\ncount " << mask.count() << '\n';
  for (auto s : mask.retained()) {
    const auto m = g.centered(s);
    for (int j = 0; j < Dim; ++j) out << (j ? " " : "") << m[j];
    out << '\n';
  }
  detail::check_written(out, path);
}

inline PatternKind parse_pattern_kind(const std::string& s) {
  if (s == "full") return PatternKind::full;
  if (s == "radial" || s == "fixed") return PatternKind::radial;
  if (s == "adapted") return PatternKind::adapted;
  if (s == "custom") return PatternKind::custom;
  throw std::invalid_argument("unknown pattern '" + s + "'");
}

template <int Dim>
FrequencyMask<Dim> read_mask(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  typename Grid<Dim>::Index dims{};
  bool have_dims = false;
  double R = 100.0;
  PatternKind kind = PatternKind::custom;
  long count = -1;
  std::vector<typename Grid<Dim>::Index> entries;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "dims") {
      for (int j = 0; j < Dim; ++j)
        if (!(ss >> dims[j])) throw IoError(path, "line " + std::to_string(lineno) + ": bad dims");
      std::string extra;
      if (ss >> extra) throw IoError(path, "dims do not match a " + std::to_string(Dim) + "D grid");
      have_dims = true;
    } else if (key == "R") {
      if (!(ss >> R)) throw IoError(path, "line " + std::to_string(lineno) + ": bad R");
    } else if (key == "pattern") {
      std::string p;
      ss >> p;
      try {
        kind = parse_pattern_kind(p);
      } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
      }
    } else if (key == "count") {
      if (!(ss >> count)) throw IoError(path, "line " + std::to_string(lineno) + ": bad count");
    } else {
      std::istringstream es(line);
      typename Grid<Dim>::Index m{};
      for (int j = 0; j < Dim; ++j)
        if (!(es >> m[j])) throw IoError(path, "line " + std::to_string(lineno) + ": bad frequency index");
      entries.push_back(m);
    }
  }
  if (!have_dims) throw IoError(path, "missing dims header");
  std::unique_ptr<Grid<Dim>> grid;
  try {
    grid = std::make_unique<Grid<Dim>>(dims);
  } catch (const std::invalid_argument& e) {
    throw IoError(path, e.what());
  }
  std::vector<std::size_t> slots;
  slots.reserve(entries.size());
  for (const auto& m : entries) {
    for (int j = 0; j < Dim; ++j)
      if (m[j] < -(dims[j] / 2) || m[j] > dims[j] - dims[j] / 2 - 1)
        throw IoError(path, "frequency index outside the grid");
    slots.push_back(grid->wrap(m));
  }
  FrequencyMask<Dim> mask(*grid, std::move(slots), R, kind);
  if (count >= 0 && static_cast<std::size_t>(count) != mask.count())
    throw IoError(path, "count header does not match the listed frequencies");
  return mask;
}

// ---------------------------------------------------------------------------
// phase maps

/**
 * Raw 8-bit phase map: magic "SPMR", u16 version, u16 dim, then one u32
 * extent per axis (all little-endian), then one label byte per voxel in
 * row-major order.
 */
template <int Dim>
PhaseMap<Dim> read_phase_map_spmr(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  auto read_bytes = [&](std::uint8_t* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw IoError(path, "truncated header");
  };
  std::uint8_t magic[4];
  read_bytes(magic, 4);
  if (std::string(reinterpret_cast<char*>(magic), 4) != "SPMR") throw IoError(path, "bad magic, expected SPMR");
  std::uint8_t b[4];
  read_bytes(b, 2);
  const unsigned version = b[0] | (b[1] << 8);
  if (version != 1) throw IoError(path, "unsupported SPMR version " + std::to_string(version));
  read_bytes(b, 2);
  const unsigned dim = b[0] | (b[1] << 8);
  if (dim != static_cast<unsigned>(Dim))
    throw IoError(path, "file holds a " + std::to_string(dim) + "D map, expected " + std::to_string(Dim) + "D");
  typename Grid<Dim>::Index dims{};
  for (int j = 0; j < Dim; ++j) {
    read_bytes(b, 4);
    const std::uint32_t v = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    if (v < 2 || v > (1u << 16)) throw IoError(path, "implausible extent " + std::to_string(v));
    dims[j] = static_cast<int>(v);
  }
  PhaseMap<Dim> pm{Grid<Dim>(dims)};
  in.read(reinterpret_cast<char*>(pm.phase.data()), static_cast<std::streamsize>(pm.phase.size()));
  if (static_cast<std::size_t>(in.gcount()) != pm.phase.size()) throw IoError(path, "truncated payload");
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(path, "trailing bytes after payload");
  try {
    pm.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(path, e.what());
  }
  return pm;
}

template <int Dim>
void write_phase_map_spmr(const std::filesystem::path& path, const PhaseMap<Dim>& pm) {
  auto out = detail::open_out(path);
  auto put16 = [&](unsigned v) {
    const char c[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    out.write(c, 2);
  };
  out.write("SPMR", 4);
  put16(1);
  put16(Dim);
  for (int j = 0; j < Dim; ++j) {
    const std::uint32_t v = static_cast<std::uint32_t>(pm.grid.extent(j));
    for (int k = 0; k < 4; ++k) out.put(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  out.write(reinterpret_cast<const char*>(pm.phase.data()), static_cast<std::streamsize>(pm.phase.size()));
  detail::check_written(out, path);
}

/// Label CSV with header `i,j[,k],phase`; extents are taken from the largest index.
template <int Dim>
PhaseMap<Dim> read_phase_map_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  ++lineno;
  std::vector<std::pair<typename Grid<Dim>::Index, long>> rows;
  typename Grid<Dim>::Index dims{};
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cols = detail::split(line, ',');
    if (cols.size() != static_cast<std::size_t>(Dim + 1))
      throw IoError(path, "line " + std::to_string(lineno) + ": expected " + std::to_string(Dim + 1) + " columns");
    typename Grid<Dim>::Index idx{};
    for (int j = 0; j < Dim; ++j) {
      const long v = detail::parse_long(cols[j], path, lineno);
      if (v < 0 || v > (1 << 16)) throw IoError(path, "line " + std::to_string(lineno) + ": index out of range");
      idx[j] = static_cast<int>(v);
      dims[j] = std::max(dims[j], idx[j] + 1);
    }
    const long label = detail::parse_long(cols[Dim], path, lineno);
    if (label < 0 || label > 1) throw IoError(path, "line " + std::to_string(lineno) + ": label outside {0,1}");
    rows.emplace_back(idx, label);
  }
  std::unique_ptr<Grid<Dim>> grid;
  try {
    grid = std::make_unique<Grid<Dim>>(dims);
  } catch (const std::invalid_argument& e) {
    throw IoError(path, e.what());
  }
  if (rows.size() != grid->size()) throw IoError(path, "label count does not fill the grid");
  PhaseMap<Dim> pm(*grid);
  std::vector<char> seen(grid->size(), 0);
  for (const auto& [idx, label] : rows) {
    const auto s = grid->flat(idx);
    if (seen[s]) throw IoError(path, "duplicate voxel");
    seen[s] = 1;
    pm.phase[s] = static_cast<std::uint8_t>(label);
  }
  return pm;
}

template <int Dim>
void write_phase_map_csv(const std::filesystem::path& path, const PhaseMap<Dim>& pm) {
  auto out = detail::open_out(path);
  for (int j = 0; j < Dim; ++j) out << detail::axis_name(j) << ',';
  out << "phase\n";
  for (std::size_t i = 0; i < pm.phase.size(); ++i) {
    const auto idx = pm.grid.unflat(i);
    for (int j = 0; j < Dim; ++j) out << idx[j] << ',';
    out << static_cast<int>(pm.phase[i]) << '\n';
  }
  detail::check_written(out, path);
}

/// Binary greyscale image (P5) of a 2D scalar field scaled to [0, 255]; rows are axis 0.
inline void write_pgm(const std::filesystem::path& path, const ScalarField<2>& field) {
  auto out = detail::open_out(path);
  const int rows = field.grid.extent(0), cols = field.grid.extent(1);
  const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
  const double lo = *lo_it, hi = *hi_it;
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (double v : field.values) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  detail::check_written(out, path);
}

/// Mask image in the centered view: white where retained.
inline ScalarField<2> mask_image(const FrequencyMask<2>& mask) {
  const auto& g = mask.grid();
  ScalarField<2> img(g);
  for (auto s : mask.retained()) {
    const auto m = g.centered(s);
    const int r = m[0] + g.extent(0) / 2, c = m[1] + g.extent(1) / 2;
    img.values[static_cast<std::size_t>(r) * g.extent(1) + c] = 1.0;
  }
  return img;
}

// ---------------------------------------------------------------------------
// reports

inline const std::vector<std::string>& error_report_columns() {
  static const std::vector<std::string> cols{"geometry",   "material",         "pattern",       "R",
                                             "post",       "macro_error",      "micro_error",   "iterations",
                                             "seconds_total", "seconds_gamma", "seconds_constitutive"};
  return cols;
}

inline std::string pattern_label(PatternKind k) { return k == PatternKind::radial ? "fixed" : to_string(k); }

inline void write_error_reports(const std::filesystem::path& path, const std::vector<ErrorReport>& rows) {
  auto out = detail::open_out(path);
  const auto& cols = error_report_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << cols[c] << (c + 1 < cols.size() ? "," : "\n");
  for (const auto& r : rows) {
    out << r.geometry << ',' << r.material << ',' << pattern_label(r.pattern) << ',' << detail::fmt_g17(r.R) << ','
        << to_string(r.post) << ',' << detail::fmt_g17(r.macro_error) << ',' << detail::fmt_g17(r.micro_error) << ','
        << r.iterations << ',' << detail::fmt_g17(r.seconds_total) << ',' << detail::fmt_g17(r.seconds_gamma) << ','
        << detail::fmt_g17(r.seconds_constitutive) << '\n';
  }
  detail::check_written(out, path);
}

inline std::vector<ErrorReport> read_error_reports(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  const auto header = detail::split(detail::trim(line), ',');
  if (header != error_report_columns()) throw IoError(path, "unexpected header");
  std::vector<ErrorReport> rows;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto c = detail::split(line, ',');
    if (c.size() != header.size()) throw IoError(path, "line " + std::to_string(lineno) + ": wrong column count");
    ErrorReport r;
    r.geometry = c[0];
    r.material = c[1];
    try {
      r.pattern = parse_pattern_kind(c[2]);
    } catch (const std::invalid_argument& e) {
      throw IoError(path, "line " + std::to_string(lineno) + ": " + e.what());
    }
    r.R = detail::parse_double(c[3], path, lineno);
    if (c[4] == "raw") {
      r.post = PostKind::raw;
    } else if (c[4] == "compatibility") {
      r.post = PostKind::compatibility;
    } else {
      throw IoError(path, "line " + std::to_string(lineno) + ": unknown post kind '" + c[4] + "'");
    }
    r.macro_error = detail::parse_double(c[5], path, lineno);
    r.micro_error = detail::parse_double(c[6], path, lineno);
    r.iterations = static_cast<int>(detail::parse_long(c[7], path, lineno));
    r.seconds_total = detail::parse_double(c[8], path, lineno);
    r.seconds_gamma = detail::parse_double(c[9], path, lineno);
    r.seconds_constitutive = detail::parse_double(c[10], path, lineno);
    rows.push_back(r);
  }
  return rows;
}

/// One row of a CPU time table. R = 100 marks the unreduced run.
struct TimingRow {
  double R = 100.0;
  double total = 0.0;
  double gamma_mean = 0.0;
  double constitutive_mean = 0.0;
  double compatibility = 0.0;
};

struct TimingTable {
  std::string title;
  std::vector<TimingRow> rows;
};

inline const std::vector<std::string>& timing_columns() {
  static const std::vector<std::string> cols{"R", "total", "gamma_mean", "constitutive_mean", "compatibility"};
  return cols;
}

inline void write_timing_csv(const std::filesystem::path& path, const TimingTable& t) {
  auto out = detail::open_out(path);
  const auto& cols = timing_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << cols[c] << (c + 1 < cols.size() ? "," : "\n");
  for (const auto& r : t.rows)
    out << detail::fmt_g17(r.R) << ',' << detail::fmt_g17(r.total) << ',' << detail::fmt_g17(r.gamma_mean) << ','
        << detail::fmt_g17(r.constitutive_mean) << ',' << detail::fmt_g17(r.compatibility) << '\n';
  detail::check_written(out, path);
}

inline TimingTable read_timing_csv(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw IoError(path, "empty file");
  if (detail::split(detail::trim(line), ',') != timing_columns()) throw IoError(path, "unexpected header");
  TimingTable t;
  t.title = path.stem().string();
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto c = detail::split(line, ',');
    if (c.size() != 5) throw IoError(path, "line " + std::to_string(lineno) + ": wrong column count");
    t.rows.push_back({detail::parse_double(c[0], path, lineno), detail::parse_double(c[1], path, lineno),
                      detail::parse_double(c[2], path, lineno), detail::parse_double(c[3], path, lineno),
                      detail::parse_double(c[4], path, lineno)});
  }
  return t;
}

/// Column-aligned text rendering of a timing table.
inline std::string render_timing_text(const TimingTable& t) {
  std::ostringstream out;
  if (!t.title.empty()) out << t.title << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%8s  %12s  %14s  %18s  %14s\n", "R [%]", "total [s]", "gamma mean [s]",
                "constitutive [s]", "compat. [s]");
  out << buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%8.2f  %12.4f  %14.6f  %18.6f  %14.4f\n", r.R, r.total, r.gamma_mean,
                  r.constitutive_mean, r.compatibility);
    out << buf;
  }
  return out.str();
}

inline void write_timing_text(const std::filesystem::path& path, const TimingTable& t) {
  auto out = detail::open_out(path);
  out << render_timing_text(t);
  detail::check_written(out, path);
}

/// Whitespace-separated error-vs-R data for one pattern, sorted by R.
inline void write_error_plot_data(const std::filesystem::path& path, std::vector<ErrorReport> raw,
                                  const std::vector<ErrorReport>& compat) {
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.R < b.R; });
  auto out = detail::open_out(path);
  out << "# R macro_raw micro_raw macro_compat micro_compat\n";
  for (const auto& r : raw) {
    double mc = std::nan(""), uc = std::nan("");
    for (const auto& c : compat)
      if (c.pattern == r.pattern && c.R == r.R) {
        mc = c.macro_error;
        uc = c.micro_error;
      }
    out << detail::fmt_g17(r.R) << ' ' << detail::fmt_g17(r.macro_error) << ' ' << detail::fmt_g17(r.micro_error) << ' '
        << detail::fmt_g17(mc) << ' ' << detail::fmt_g17(uc) << '\n';
  }
  detail::check_written(out, path);
}

}  // namespace fftmor
