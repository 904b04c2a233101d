#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "persuade_sis/equilibrium.hpp"
#include "persuade_sis/model.hpp"
#include "persuade_sis/simulate.hpp"

namespace persuade_sis {

/// Points lo, lo + step, ... not exceeding hi; hi itself is appended when the
/// stepping does not land on it (within 1e-9 of a step).
inline std::vector<double> make_axis(double lo, double hi, double step, bool include_hi = true) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (hi < lo) throw DomainError("grid upper bound below lower bound");
  std::vector<double> axis;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) axis.push_back(lo + step * static_cast<double>(k));
  if (include_hi && hi - axis.back() > 1e-9 * step) axis.push_back(hi);
  return axis;
}

namespace detail {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// written by exactly one worker, so results merge by position.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += threads) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct SweepCell {
  double mu_s = 0.0;
  double y_star = std::numeric_limits<double>::quiet_NaN();
  double z_sbar_star = std::numeric_limits<double>::quiet_NaN();
  double z_ibar_star = std::numeric_limits<double>::quiet_NaN();
  std::optional<SneCase> case_id;
  std::string error;  ///< non-empty when the cell failed

  [[nodiscard]] bool ok() const { return error.empty(); }
};

struct SweepTable {
  std::vector<SweepCell> cells;
  std::optional<std::size_t> argmin;
};

/// Equilibrium infection level across a grid of static signals.
inline SweepTable static_sweep(const ModelParams& p, double mu_lo, double mu_hi, double step,
                               unsigned threads = 1) {
  const Thresholds th = thresholds(p);
  const auto axis = make_axis(mu_lo, mu_hi, step, false);
  SweepTable table;
  table.cells.resize(axis.size());
  detail::parallel_for(axis.size(), threads, [&](std::size_t i) {
    SweepCell& c = table.cells[i];
    c.mu_s = axis[i];
    try {
      const SneResult r = classify_sne(axis[i], p, th);
      c.y_star = r.y_star;
      c.z_sbar_star = r.z_sbar_star;
      c.z_ibar_star = r.z_ibar_star;
      c.case_id = r.case_id;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });
  for (std::size_t i = 0; i < table.cells.size(); ++i) {
    const auto& c = table.cells[i];
    if (c.ok() && (!table.argmin || c.y_star < table.cells[*table.argmin].y_star)) table.argmin = i;
  }
  return table;
}

/// CSV with columns mu_s,y_star,z_sbar_star,z_ibar_star,case_id,is_argmin.
inline void write_sweep_csv(std::ostream& out, const SweepTable& t) {
  out << "mu_s,y_star,z_sbar_star,z_ibar_star,case_id,is_argmin\n";
  out.precision(12);
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    const auto& c = t.cells[i];
    out << c.mu_s << ',' << c.y_star << ',' << c.z_sbar_star << ',' << c.z_ibar_star << ','
        << (c.case_id ? case_number(*c.case_id) : 0) << ',' << (t.argmin == i ? 1 : 0) << '\n';
  }
}

struct StationarityOptions {
  PopulationState init{0.01, 0.5, 0.5};
  SmithConfig smith{};
  double t_max = 500.0;
  double step = 1e-2;
  double tol = 1e-8;
};

struct MuiRow {
  double mu_i = 0.0;
  double mu_s_opt = std::numeric_limits<double>::quiet_NaN();
  double min_y = std::numeric_limits<double>::quiet_NaN();
};

/// Stationary infection levels over a (mu_i, mu_s) grid, computed by
/// integrating the learning dynamics to rest in every cell.
struct MuiGrid {
  std::vector<double> axis;          ///< shared by mu_s and mu_i
  std::vector<std::vector<double>> y;          ///< y[i][j] at (mu_i = axis[i], mu_s = axis[j])
  std::vector<std::vector<char>> converged;
  std::vector<MuiRow> rows;

  [[nodiscard]] std::optional<std::size_t> index_of(double v) const {
    for (std::size_t i = 0; i < axis.size(); ++i)
      if (std::abs(axis[i] - v) < 1e-9) return i;
    return std::nullopt;
  }
};

inline MuiGrid grid_mui(const ModelParams& base, double step, double lo = 0.01, double hi = 1.0,
                        const StationarityOptions& opts = {}, unsigned threads = 1) {
  base.validate();
  MuiGrid g;
  g.axis = make_axis(lo, hi, step);
  const std::size_t n = g.axis.size();
  g.y.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
  g.converged.assign(n, std::vector<char>(n, 0));
  detail::parallel_for(n * n, threads, [&](std::size_t idx) {
    const std::size_t i = idx / n, j = idx % n;
    ModelParams p = base;
    p.mu_i = g.axis[i];
    const auto r = integrate_to_stationarity(opts.init, g.axis[j], p, opts.smith, opts.t_max,
                                             opts.step, opts.tol);
    g.y[i][j] = r.state.y;
    g.converged[i][j] = r.converged ? 1 : 0;
  });
  for (std::size_t i = 0; i < n; ++i) {
    MuiRow row{g.axis[i]};
    for (std::size_t j = 0; j < n; ++j) {
      if (!g.converged[i][j]) continue;
      if (std::isnan(row.min_y) || g.y[i][j] < row.min_y) {
        row.min_y = g.y[i][j];
        row.mu_s_opt = g.axis[j];
      }
    }
    g.rows.push_back(row);
  }
  return g;
}

/// Matrix CSV: header "mu_i\mu_s,<mu_s values>", then one row per mu_i.
inline void write_mui_matrix_csv(std::ostream& out, const MuiGrid& g) {
  out.precision(12);
  out << "mu_i\\mu_s";
  for (double v : g.axis) out << ',' << v;
  out << '\n';
  for (std::size_t i = 0; i < g.axis.size(); ++i) {
    out << g.axis[i];
    for (std::size_t j = 0; j < g.axis.size(); ++j) out << ',' << g.y[i][j];
    out << '\n';
  }
}

/// CSV with columns mu_i,mu_s_opt,min_y.
inline void write_mui_summary_csv(std::ostream& out, const MuiGrid& g) {
  out << "mu_i,mu_s_opt,min_y\n";
  out.precision(12);
  for (const auto& r : g.rows) out << r.mu_i << ',' << r.mu_s_opt << ',' << r.min_y << '\n';
}

}  // namespace persuade_sis
