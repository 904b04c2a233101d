#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "persuade_sis/model.hpp"

namespace persuade_sis {

/// Sharpness of the logistic relaxation of the Smith switching rule.
struct SmithConfig {
  double sigma = 20.0;

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be >= 0");
  }

  friend bool operator==(const SmithConfig&, const SmithConfig&) = default;
};

/// Piecewise-constant signal: values[k] is applied on [kT/N, (k+1)T/N).
struct ControlSchedule {
  double horizon = 23.0;
  std::vector<double> values;

  static ControlSchedule constant(double horizon, std::size_t n, double mu) {
    return {horizon, std::vector<double>(n, mu)};
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double interval_length() const {
    return horizon / static_cast<double>(values.size());
  }
  [[nodiscard]] double interval_start(std::size_t k) const {
    return horizon * static_cast<double>(k) / static_cast<double>(values.size());
  }

  [[nodiscard]] double value_at(double t) const {
    if (t <= 0.0) return values.front();
    const auto k = static_cast<std::size_t>(t / interval_length());
    return values[std::min(k, values.size() - 1)];
  }

  void validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be > 0");
    if (values.empty()) throw DomainError("control schedule needs at least one interval");
    for (double v : values) detail::check_unit(v, "control value");
  }
};

/// Running cost of the control problem: y, optionally plus c (1 - mu_s)^2.
struct StageCost {
  enum class Kind { PlainY, ModifiedY };
  Kind kind = Kind::PlainY;
  double weight = 0.0;

  static StageCost plain() { return {}; }
  static StageCost modified(double c) { return {Kind::ModifiedY, c}; }

  [[nodiscard]] double operator()(double y, double mu_s) const {
    if (kind == Kind::PlainY) return y;
    const double gap = 1.0 - mu_s;
    return y + weight * gap * gap;
  }

  void validate() const {
    if (kind == Kind::ModifiedY && !(weight >= 0.0)) throw DomainError("cost weight must be >= 0");
  }
};

struct StateDerivative {
  double dy = 0.0;
  double dz_sbar = 0.0;
  double dz_ibar = 0.0;

  [[nodiscard]] double inf_norm() const {
    return std::max({std::abs(dy), std::abs(dz_sbar), std::abs(dz_ibar)});
  }
};

/// 1 / (1 + e^x) without overflow for large |x|.
inline double logistic_complement(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

/// Share of agents that would stay unprotected under the smoothed best
/// response to utility advantage delta.
inline double smoothed_best_response(double delta, const SmithConfig& smith) {
  return logistic_complement(smith.sigma * delta);
}

/**
 * Right-hand side of the coupled epidemic / learning system.
 *
 *   y'      = ((1 - y) beta_eff - gamma) y
 *   z_x'    = (1 - z_x) / (1 + e^{sigma dU[x]}) - z_x / (1 + e^{-sigma dU[x]})
 *
 * The two logistic terms sum to one, so z_x' = q_x - z_x with q_x the smoothed
 * best response.
 */
inline StateDerivative rhs(const PopulationState& s, double mu_s, const ModelParams& p,
                           const SmithConfig& smith) {
  smith.validate();
  StateDerivative d;
  d.dy = ((1.0 - s.y) * beta_eff(s, mu_s, p) - p.gamma) * s.y;
  const double q_sbar = smoothed_best_response(delta_u(s, Signal::Susceptible, mu_s, p), smith);
  const double q_ibar = smoothed_best_response(delta_u(s, Signal::Infected, mu_s, p), smith);
  d.dz_sbar = (1.0 - s.z_sbar) * q_sbar - s.z_sbar * (1.0 - q_sbar);
  d.dz_ibar = (1.0 - s.z_ibar) * q_ibar - s.z_ibar * (1.0 - q_ibar);
  return d;
}

enum class IntegrationMethod { Rk4Fixed, Dopri5Adaptive };

struct IntegrateOptions {
  IntegrationMethod method = IntegrationMethod::Rk4Fixed;
  double step = 1e-3;           ///< RK4 step (shrunk so every control interval has whole steps)
  double abs_tol = 1e-10;       ///< adaptive method only
  double rel_tol = 1e-10;       ///< adaptive method only
  std::size_t output_every = 1; ///< keep every n-th step in the trajectory
  bool record = true;           ///< false keeps only the end points
  bool freeze_strategies = false;
  double clamp_tol = 1e-6;
  StageCost cost{};
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PopulationState> states;
  std::vector<double> applied_mu;
  std::vector<double> cost_integral;
  double max_clamp = 0.0;  ///< largest projection distance applied after a step

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] const PopulationState& final_state() const { return states.back(); }
};

namespace detail {

/// State augmented with the running cost so one RK4 pass integrates both;
/// on the cost component RK4 reduces to Simpson's rule.
using Augmented = std::array<double, 4>;

inline Augmented pack(const PopulationState& s, double cost) {
  return {s.y, s.z_sbar, s.z_ibar, cost};
}
inline PopulationState unpack(const Augmented& a) { return {a[0], a[1], a[2]}; }

/// Same formulas as rhs() without argument checks; the integrator validates
/// its inputs once up front. Kept in sync with rhs() by the unit tests.
inline StateDerivative rhs_unchecked(const PopulationState& s, double mu_s, const ModelParams& p,
                                     const SmithConfig& smith) {
  const double transmission = infected_transmission(s.z_sbar, s.z_ibar, p);
  const double exposure = susceptible_exposure(s.z_sbar, s.z_ibar, mu_s, p);
  const double infection_term = (1.0 - p.alpha) * p.loss * transmission * s.y;

  auto pi_susceptible = [&](double like_i, double like_s) {
    const double num_i = like_i * s.y;
    const double num_s = like_s * (1.0 - s.y);
    const double den = num_i + num_s;
    return den > 0.0 ? num_s / den : 1.0 - s.y;
  };
  const double pi_sbar = pi_susceptible(1.0 - p.mu_i, mu_s);
  const double pi_ibar = pi_susceptible(p.mu_i, 1.0 - mu_s);
  const double du_sbar = pi_sbar * (infection_term - p.c_u) + p.c_u - p.c_p;
  const double du_ibar = pi_ibar * (infection_term - p.c_u) + p.c_u - p.c_p;

  StateDerivative d;
  d.dy = ((1.0 - s.y) * transmission * exposure - p.gamma) * s.y;
  d.dz_sbar = smoothed_best_response(du_sbar, smith) - s.z_sbar;
  d.dz_ibar = smoothed_best_response(du_ibar, smith) - s.z_ibar;
  return d;
}

struct AugmentedSystem {
  const ModelParams& p;
  const SmithConfig& smith;
  const IntegrateOptions& opts;
  double mu_s;

  void operator()(const Augmented& x, Augmented& dxdt, double /*t*/) const {
    // Stages may step marginally outside the box; evaluate at the projection.
    const PopulationState s{std::clamp(x[0], 0.0, 1.0), std::clamp(x[1], 0.0, 1.0),
                            std::clamp(x[2], 0.0, 1.0)};
    const StateDerivative d = rhs_unchecked(s, mu_s, p, smith);
    dxdt[0] = d.dy;
    dxdt[1] = opts.freeze_strategies ? 0.0 : d.dz_sbar;
    dxdt[2] = opts.freeze_strategies ? 0.0 : d.dz_ibar;
    dxdt[3] = opts.cost(s.y, mu_s);
  }
};

/// Projects the population part onto [0,1]^3; returns the distance moved.
inline double project(Augmented& x) {
  double moved = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double c = std::clamp(x[i], 0.0, 1.0);
    moved = std::max(moved, std::abs(c - x[i]));
    x[i] = c;
  }
  return moved;
}

inline void rk4_step(const AugmentedSystem& sys, Augmented& x, double t, double dt) {
  Augmented k1, k2, k3, k4, tmp;
  sys(x, k1, t);
  for (std::size_t i = 0; i < 4; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  sys(tmp, k2, t + 0.5 * dt);
  for (std::size_t i = 0; i < 4; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  sys(tmp, k3, t + 0.5 * dt);
  for (std::size_t i = 0; i < 4; ++i) tmp[i] = x[i] + dt * k3[i];
  sys(tmp, k4, t + dt);
  for (std::size_t i = 0; i < 4; ++i) x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Integrates a piecewise-constant schedule from interval `first` onwards,
/// starting at augmented state `x` at time interval_start(first). Calls
/// `sample(t, x, mu)` at recorded points. Returns the largest clamp.
template <class Sample>
double integrate_intervals(Augmented& x, const ControlSchedule& u, std::size_t first,
                           const ModelParams& p, const SmithConfig& smith,
                           const IntegrateOptions& opts, Sample&& sample) {
  double max_clamp = 0.0;
  auto note_clamp = [&](double moved) {
    max_clamp = std::max(max_clamp, moved);
    if (moved > opts.clamp_tol)
      throw NumericalError("integration left [0,1]^3 by " + std::to_string(moved) +
                           "; reduce the step size");
  };
  const double len = u.interval_length();
  std::size_t step_count = 0;
  for (std::size_t k = first; k < u.size(); ++k) {
    const AugmentedSystem sys{p, smith, opts, u.values[k]};
    const double t0 = u.interval_start(k);
    if (opts.method == IntegrationMethod::Rk4Fixed) {
      const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / opts.step - 1e-9)));
      const double dt = len / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        rk4_step(sys, x, t0 + dt * static_cast<double>(i), dt);
        note_clamp(project(x));
        ++step_count;
        const bool last = k + 1 == u.size() && i + 1 == n;
        if (last || (opts.record && step_count % opts.output_every == 0))
          sample(t0 + dt * static_cast<double>(i + 1), x, u.values[k]);
      }
    } else {
      namespace odeint = boost::numeric::odeint;
      auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol,
                                               odeint::runge_kutta_dopri5<Augmented>());
      const double t1 = t0 + len;
      odeint::integrate_adaptive(stepper, sys, x, t0, t1, std::min(opts.step, len));
      note_clamp(project(x));
      const bool last = k + 1 == u.size();
      if (last || opts.record) sample(t1, x, u.values[k]);
    }
  }
  return max_clamp;
}

}  // namespace detail

/// Integrates the coupled system over [0, T] under a piecewise-constant
/// signal, accumulating the stage cost alongside the state.
inline Trajectory integrate(const PopulationState& s0, const ControlSchedule& u,
                            const ModelParams& p, const SmithConfig& smith,
                            const IntegrateOptions& opts = {}) {
  p.validate();
  smith.validate();
  u.validate();
  opts.cost.validate();
  if (!s0.in_bounds()) throw DomainError("initial state outside [0,1]^3");
  if (!(opts.step > 0.0)) throw DomainError("integration step must be positive");
  if (opts.output_every == 0) throw DomainError("output_every must be >= 1");

  Trajectory tr;
  auto sample = [&tr](double t, const detail::Augmented& x, double mu) {
    tr.times.push_back(t);
    tr.states.push_back(detail::unpack(x));
    tr.applied_mu.push_back(mu);
    tr.cost_integral.push_back(x[3]);
  };
  detail::Augmented x = detail::pack(s0, 0.0);
  sample(0.0, x, u.values.front());
  tr.max_clamp = detail::integrate_intervals(x, u, 0, p, smith, opts, sample);
  return tr;
}

/// Running stage-cost integral at the final sample; this is the integral of y
/// under the plain cost.
inline double integral_of_y(const Trajectory& tr) {
  if (tr.cost_integral.empty()) throw DomainError("empty trajectory");
  return tr.cost_integral.back();
}

/// CSV with columns t,y,z_sbar,z_ibar,mu_s,cost_integral.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  out << "t,y,z_sbar,z_ibar,mu_s,cost_integral\n";
  out.precision(12);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& s = tr.states[i];
    out << tr.times[i] << ',' << s.y << ',' << s.z_sbar << ',' << s.z_ibar << ','
        << tr.applied_mu[i] << ',' << tr.cost_integral[i] << '\n';
  }
}

struct StationaryResult {
  PopulationState state;
  double time = 0.0;
  double rhs_norm = 0.0;
  bool converged = false;
};

/// Integrates under a constant signal until ||rhs||_inf < tol or t_max.
inline StationaryResult integrate_to_stationarity(PopulationState s, double mu_s,
                                                  const ModelParams& p, const SmithConfig& smith,
                                                  double t_max = 500.0, double step = 1e-2,
                                                  double tol = 1e-8) {
  p.validate();
  smith.validate();
  detail::check_unit(mu_s, "mu_s");
  const IntegrateOptions opts{.step = step};
  const detail::AugmentedSystem sys{p, smith, opts, mu_s};
  detail::Augmented x = detail::pack(s, 0.0);
  StationaryResult r;
  const auto n = static_cast<std::size_t>(std::ceil(t_max / step));
  for (std::size_t i = 0; i <= n; ++i) {
    r.state = detail::unpack(x);
    r.time = step * static_cast<double>(i);
    r.rhs_norm = rhs(r.state, mu_s, p, smith).inf_norm();
    if (r.rhs_norm < tol) {
      r.converged = true;
      return r;
    }
    if (i == n) break;
    detail::rk4_step(sys, x, r.time, step);
    if (detail::project(x) > opts.clamp_tol)
      throw NumericalError("stationarity search left [0,1]^3; reduce the step size");
  }
  return r;
}

}  // namespace persuade_sis
