#pragma once

/**
 * @brief Columnar CSV output. Doubles are printed with 17 significant
 * digits so every value re-parses to the identical bit pattern.
 */

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "twolane/diagnostics.hpp"
#include "twolane/harness.hpp"
#include "twolane/simulate.hpp"

namespace twolane {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("csv: not a number: '" + std::string(s) + "'");
  return v;
}

namespace detail {

inline void write_row(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

/// Header `x,rho1,rho2,w1,w2`, one row per cell center; w columns are empty
/// for local runs.
inline void write_snapshot_csv(std::ostream& os, const Snapshot& snap, const Grid& grid) {
  const auto& s = snap.state;
  if (s.n_cells() != grid.n_cells()) throw std::invalid_argument("write_snapshot_csv: grid mismatch");
  const bool has_w = !snap.w.empty();
  os << "x,rho1,rho2,w1,w2\n";
  for (std::size_t j = 0; j < grid.n_cells(); ++j) {
    detail::write_row(os, {format_double(grid.cell_center(j)), format_double(s.rho[0][j]), format_double(s.rho[1][j]),
                           has_w ? format_double(snap.w.w[0][j]) : std::string(), has_w ? format_double(snap.w.w[1][j]) : std::string()});
  }
  if (!os) throw std::runtime_error("write_snapshot_csv: I/O failure");
}

struct SnapshotTable {
  std::vector<double> x;
  std::array<std::vector<double>, n_lanes> rho;
  /// Empty when the file carries no w columns.
  std::array<std::vector<double>, n_lanes> w;
};

inline SnapshotTable read_snapshot_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,rho1,rho2,w1,w2") throw std::invalid_argument("read_snapshot_csv: unexpected header");
  SnapshotTable t;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 5) throw std::invalid_argument("read_snapshot_csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " fields");
    t.x.push_back(parse_double(cells[0]));
    t.rho[0].push_back(parse_double(cells[1]));
    t.rho[1].push_back(parse_double(cells[2]));
    if (!cells[3].empty()) t.w[0].push_back(parse_double(cells[3]));
    if (!cells[4].empty()) t.w[1].push_back(parse_double(cells[4]));
  }
  return t;
}

inline void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records) {
  os << "t,tv_rho1,tv_rho2,tv_w1,tv_w2,tv_w_sum,mass_total,mass_ledger_residual,min1,max1,min2,max2,entropy_residual_max,l1_vs_reference\n";
  for (const auto& d : records) {
    detail::write_row(os, {format_double(d.t), format_double(d.tv_rho[0]), format_double(d.tv_rho[1]), format_double(d.tv_w[0]),
                           format_double(d.tv_w[1]), format_double(d.tv_w_sum), format_double(d.mass_total), format_double(d.mass_ledger_residual),
                           format_double(d.min[0]), format_double(d.max[0]), format_double(d.min[1]), format_double(d.max[1]),
                           format_double(d.entropy_residual_max), d.l1_vs_reference ? format_double(*d.l1_vs_reference) : std::string()});
  }
}

inline void write_l1_table(std::ostream& os, const std::vector<L1Row>& rows) {
  os << "eta,T,l1_lane1,l1_lane2,l1_sum\n";
  for (const auto& r : rows) detail::write_row(os, {format_double(r.eta), format_double(r.t), format_double(r.l1[0]), format_double(r.l1[1]), format_double(r.l1_sum)});
}

inline void write_tv_table(std::ostream& os, const std::vector<TvRow>& rows) {
  os << "eta,t,tv_w_sum,tv_rho_sum,bound\n";
  for (const auto& r : rows)
    detail::write_row(os, {format_double(r.eta), format_double(r.t), format_double(r.tv_w_sum), format_double(r.tv_rho_sum), format_double(r.bound)});
}

inline void write_refinement_table(std::ostream& os, const std::vector<RefinementRow>& rows) {
  os << "n_cells,dx,l1_error,order\n";
  for (const auto& r : rows) detail::write_row(os, {std::to_string(r.n_cells), format_double(r.dx), format_double(r.error), format_double(r.order)});
}

}  // namespace twolane
