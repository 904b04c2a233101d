#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "persuade_sis/bisection.hpp"
#include "persuade_sis/model.hpp"

namespace persuade_sis {

/// The five equilibrium regimes under a truthful "infected" signal.
enum class SneCase {
  FullProtection = 1,      ///< (y_P, 0, 0)
  IndifferentSbar = 2,     ///< (y_INT, z_sbar_dagger, 0)
  SbarUnprotected = 3,     ///< (y_EE(1,0), 1, 0)
  InteriorIbar = 4,        ///< (y_EE(1,z_ibar_dagger), 1, z_ibar_dagger)
  NoProtection = 5,        ///< (1 - gamma/beta_u, 1, 1)
};

inline int case_number(SneCase c) { return static_cast<int>(c); }

inline std::string to_string(SneCase c) { return "Case" + std::to_string(case_number(c)); }

struct SneResult {
  double y_star = 0.0;
  double z_sbar_star = 0.0;
  double z_ibar_star = 0.0;
  SneCase case_id = SneCase::SbarUnprotected;
  double mu_s = 0.0;

  [[nodiscard]] PopulationState state() const { return {y_star, z_sbar_star, z_ibar_star}; }
};

struct Thresholds {
  double mu_s_min = 0.0;  // may be negative or exceed 1; clamp only when used as a bound
  double mu_s_max = 0.0;
  double y_star_p = 0.0;
  double y_star_int = 0.0;
};

namespace detail {

inline void require_assumption1(const ModelParams& p) {
  const auto r = validate_assumptions(p);
  if (!r.assumption1())
    throw DomainError(
        "equilibrium characterization requires mu_i = 1, c_p < c_u and gamma < alpha*beta_p");
}

/// (1 - alpha) L (beta_u - gamma); compared against c_p it decides whether the
/// fully unprotected equilibrium can appear.
inline double unprotected_gain(const ModelParams& p) {
  return (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma);
}

}  // namespace detail

inline double y_star_full_protection(const ModelParams& p) {
  return 1.0 - p.gamma / (p.alpha * p.beta_p);
}

inline double y_star_indifferent(const ModelParams& p) {
  return p.c_p / (p.loss * (1.0 - p.alpha) * p.beta_p);
}

/// Lower signal threshold below which nobody protects. Infinite when
/// c_p equals (1-alpha) L (beta_u - gamma).
inline double mu_s_min(const ModelParams& p) {
  const double den = p.gamma * (p.c_p - detail::unprotected_gain(p));
  if (den == 0.0) return -std::numeric_limits<double>::infinity();
  return 1.0 - (p.beta_u - p.gamma) * (p.c_u - p.c_p) / den;
}

inline Thresholds thresholds(const ModelParams& p) {
  p.validate();
  detail::require_assumption1(p);
  Thresholds t;
  t.mu_s_min = mu_s_min(p);
  t.y_star_p = y_star_full_protection(p);
  t.y_star_int = y_star_indifferent(p);

  const double g00 = g_fn(0.0, 0.0, p);
  if (g00 >= 0.0) {
    t.mu_s_max = 0.0;
    return t;
  }
  if (g_fn(0.0, 1.0, p) < 0.0)
    throw NumericalError("mu_s_max: g(0, .) has no root on (0,1)");
  t.mu_s_max = bisect([&](double mu) { return g_fn(0.0, mu, p); }, 0.0, 1.0).root;
  return t;
}

/// Interior root of g(., mu_s) on [0,1]: the equilibrium unprotected share
/// among "infected"-signal recipients in the interior regime.
inline double z_dagger_ibar(double mu_s, const ModelParams& p) {
  detail::check_unit(mu_s, "mu_s");
  return bisect([&](double z) { return g_fn(z, mu_s, p); }, 0.0, 1.0).root;
}

/// Interior strategy of "susceptible"-signal recipients that keeps the
/// endemic level at y_INT with z_ibar = 0.
inline double z_dagger_sbar(double mu_s, const ModelParams& p) {
  const double y_int = y_star_indifferent(p);
  return (p.gamma - p.alpha * p.beta_p * (1.0 - y_int)) /
         (p.beta_p * (1.0 - p.alpha) * (1.0 - y_int) * mu_s);
}

/// Classifies the stationary Nash equilibrium for signal mu_s. Regimes are
/// tested in the order 5, 4, 3, 2, 1 with boundary ties going to the first
/// match.
inline SneResult classify_sne(double mu_s, const ModelParams& p, const Thresholds& th) {
  detail::check_unit(mu_s, "mu_s");
  const double gain = detail::unprotected_gain(p);
  const bool a2 = p.c_p > gain;

  if (a2 && mu_s <= th.mu_s_min)
    return {1.0 - p.gamma / p.beta_u, 1.0, 1.0, SneCase::NoProtection, mu_s};

  if (mu_s < th.mu_s_max && ((a2 && mu_s > th.mu_s_min) || !a2)) {
    const double z = z_dagger_ibar(mu_s, p);
    return {y_ee(1.0, z, mu_s, p), 1.0, z, SneCase::InteriorIbar, mu_s};
  }

  const double y_sbar_only = 1.0 - p.gamma / (p.beta_p * (p.alpha + (1.0 - p.alpha) * mu_s));
  if (mu_s >= th.mu_s_max && y_sbar_only <= th.y_star_int)
    return {y_ee(1.0, 0.0, mu_s, p), 1.0, 0.0, SneCase::SbarUnprotected, mu_s};

  if (th.y_star_p < th.y_star_int && th.y_star_int < y_sbar_only)
    return {th.y_star_int, z_dagger_sbar(mu_s, p), 0.0, SneCase::IndifferentSbar, mu_s};

  if (th.y_star_p >= th.y_star_int)
    return {th.y_star_p, 0.0, 0.0, SneCase::FullProtection, mu_s};

  throw NumericalError("classify_sne: no equilibrium regime matched at mu_s = " +
                       std::to_string(mu_s));
}

inline SneResult classify_sne(double mu_s, const ModelParams& p) {
  return classify_sne(mu_s, p, thresholds(p));
}

/// How far a candidate equilibrium is from satisfying the best-response
/// (mixed complementarity) conditions and the endemic fixed point.
struct ComplementarityResidual {
  double fixed_point = 0.0;  ///< |y* - y_EE(z*)|
  double sbar = 0.0;
  double ibar = 0.0;
  double delta_u_sbar = 0.0;
  double delta_u_ibar = 0.0;

  [[nodiscard]] bool ok(double strategy_tol = 1e-6, double fixed_point_tol = 1e-8) const {
    return fixed_point < fixed_point_tol && sbar < strategy_tol && ibar < strategy_tol;
  }
};

namespace detail {

/// Interior strategies need indifference; z = 0 (all protect) needs
/// delta_u >= 0; z = 1 needs delta_u <= 0.
inline double strategy_violation(double delta, double z) {
  if (z <= 0.0) return std::max(0.0, -delta);
  if (z >= 1.0) return std::max(0.0, delta);
  return std::abs(delta);
}

}  // namespace detail

inline ComplementarityResidual complementarity_residual(const SneResult& r, const ModelParams& p) {
  ComplementarityResidual out;
  const PopulationState s = r.state();
  out.fixed_point = std::abs(r.y_star - y_ee(r.z_sbar_star, r.z_ibar_star, r.mu_s, p));
  out.delta_u_sbar = delta_u(s, Signal::Susceptible, r.mu_s, p);
  out.delta_u_ibar = delta_u(s, Signal::Infected, r.mu_s, p);
  out.sbar = detail::strategy_violation(out.delta_u_sbar, r.z_sbar_star);
  out.ibar = detail::strategy_violation(out.delta_u_ibar, r.z_ibar_star);
  return out;
}

/**
 * Residual of the implicit closed form for the interior root z_ibar_dagger.
 *
 * Substituting h into g = 0 and writing y_EE = 1 - gamma/w gives
 *   z = c_p w / (L (w - gamma)(1-alpha)(beta_u-beta_p))
 *       - (c_u - c_p) / L_eq - beta_p / (beta_u - beta_p)
 * with w = beta_eff(1, z; mu_s) and
 * L_eq = (1-alpha) L (beta_u - beta_p)(1 - mu_s)(1 - y_EE).
 * Returns |z - rhs(z)| at the bisection root.
 */
inline double interior_root_identity_residual(double mu_s, const ModelParams& p) {
  const double z = z_dagger_ibar(mu_s, p);
  const double w = beta_eff(1.0, z, mu_s, p);
  const double y = 1.0 - p.gamma / w;
  const double spread = p.beta_u - p.beta_p;
  const double l_eq = (1.0 - p.alpha) * p.loss * spread * (1.0 - mu_s) * (1.0 - y);
  const double rhs = p.c_p * w / (p.loss * (w - p.gamma) * (1.0 - p.alpha) * spread) -
                     (p.c_u - p.c_p) / l_eq - p.beta_p / spread;
  return std::abs(z - rhs);
}

struct StaticOptimum {
  double mu_s = 0.0;
  SneResult sne;
  bool grid_derived = false;
};

/// Signal minimizing the equilibrium infection level. Under the protection
/// cost condition (Assumption 2) this is mu_s_max; otherwise a grid search
/// over [0.005, 0.995] in steps of 0.005 is used.
inline StaticOptimum optimal_static_signal(const ModelParams& p) {
  const Thresholds th = thresholds(p);
  if (validate_assumptions(p).assumption2()) return {th.mu_s_max, classify_sne(th.mu_s_max, p, th), false};

  StaticOptimum best;
  best.grid_derived = true;
  best.sne.y_star = std::numeric_limits<double>::infinity();
  constexpr int kCells = 199;
  for (int k = 1; k <= kCells; ++k) {
    const double mu = 0.005 * k;
    const SneResult r = classify_sne(mu, p, th);
    if (r.y_star < best.sne.y_star) {
      best.sne = r;
      best.mu_s = mu;
    }
  }
  return best;
}

struct MonotonicityViolation {
  std::size_t index = 0;  ///< position of the first element of the offending pair
  double mu_a = 0.0, mu_b = 0.0;
  double y_a = 0.0, y_b = 0.0;
};

/// Numerical certificate that the equilibrium infection level falls on
/// (max(0, mu_s_min), mu_s_max) and rises on [mu_s_max, 1].
struct MonotonicityReport {
  bool applicable = false;
  std::vector<double> mu_decreasing, y_decreasing;
  std::vector<double> mu_increasing, y_increasing;
  std::optional<MonotonicityViolation> decrease_violation;
  std::optional<MonotonicityViolation> increase_violation;

  [[nodiscard]] bool certified() const {
    return applicable && !decrease_violation && !increase_violation;
  }
};

inline MonotonicityReport lemma1_certificate(const ModelParams& p, std::size_t grid_n) {
  MonotonicityReport rep;
  if (grid_n < 2) throw DomainError("lemma1_certificate: grid_n must be at least 2");
  const Thresholds th = thresholds(p);
  if (!validate_assumptions(p).assumption2() || !(th.mu_s_max > 0.0)) return rep;
  rep.applicable = true;

  auto first_violation = [](const std::vector<double>& mu, const std::vector<double>& y,
                            bool want_decrease) -> std::optional<MonotonicityViolation> {
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
      const bool good = want_decrease ? y[i + 1] < y[i] : y[i + 1] > y[i];
      if (!good) return MonotonicityViolation{i, mu[i], mu[i + 1], y[i], y[i + 1]};
    }
    return std::nullopt;
  };

  // Open interval: endpoints excluded.
  const double lo = std::max(0.0, th.mu_s_min);
  const double hi = th.mu_s_max;
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double mu = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(grid_n + 1);
    rep.mu_decreasing.push_back(mu);
    rep.y_decreasing.push_back(y_ee(1.0, z_dagger_ibar(mu, p), mu, p));
  }
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double mu = hi + (1.0 - hi) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    rep.mu_increasing.push_back(mu);
    rep.y_increasing.push_back(y_ee(1.0, 0.0, mu, p));
  }
  rep.decrease_violation = first_violation(rep.mu_decreasing, rep.y_decreasing, true);
  rep.increase_violation = first_violation(rep.mu_increasing, rep.y_increasing, false);
  return rep;
}

}  // namespace persuade_sis
