#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include "persuade_sis/equilibrium.hpp"
#include "persuade_sis/model.hpp"
#include "persuade_sis/simulate.hpp"

namespace persuade_sis {

struct SolverOptions {
  std::size_t max_iter = 500;
  double grad_tol = 1e-5;       ///< projected-gradient 2-norm
  double objective_tol = 1e-9;  ///< accepted decrease below this ends a run
  double fd_delta = 1e-5;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  std::size_t max_backtracks = 40;
  std::vector<double> start_levels{0.0, 0.25, 0.5, 0.75, 1.0};
  double credibility_margin = 0.25;  ///< negative disables the feedback start
};

/// Finite-horizon problem: choose a piecewise-constant signal on
/// n_intervals intervals of [0, horizon] minimizing the integrated stage cost.
struct OcpSpec {
  ModelParams params;
  SmithConfig smith;
  double horizon = 23.0;
  std::size_t n_intervals = 46;
  StageCost cost{};
  PopulationState init_state{0.01, 0.5, 0.5};
  ControlSchedule init_guess{};  ///< optional extra start; empty = none
  IntegrateOptions integration{};
  SolverOptions solver{};

  void validate() const {
    params.validate();
    smith.validate();
    cost.validate();
    if (!(horizon > 0.0)) throw DomainError("horizon must be > 0");
    if (n_intervals < 2) throw DomainError("need at least two control intervals");
    if (!init_state.in_bounds()) throw DomainError("initial state outside [0,1]^3");
    if (!init_guess.values.empty()) {
      init_guess.validate();
      if (init_guess.size() != n_intervals) throw DomainError("init_guess has wrong length");
    }
  }

  [[nodiscard]] ControlSchedule constant(double mu) const {
    return ControlSchedule::constant(horizon, n_intervals, mu);
  }

  [[nodiscard]] IntegrateOptions integration_options(bool record) const {
    IntegrateOptions o = integration;
    o.cost = cost;
    o.record = record;
    return o;
  }
};

struct OcpSolution {
  ControlSchedule control;
  Trajectory trajectory;
  double objective = 0.0;
  std::size_t iterations = 0;
  double first_order_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_history;  ///< accepted iterates of the winning start
  std::vector<double> start_objectives;
};

namespace detail {

inline void check_dimensions(const OcpSpec& spec, const ControlSchedule& u) {
  if (u.size() != spec.n_intervals || u.horizon != spec.horizon)
    throw DomainError("control schedule does not match the problem dimensions");
  u.validate();
}

/// Augmented states at every control-interval boundary of the nominal
/// trajectory; a perturbation of interval k only changes the solution from
/// boundary k on, so finite differences restart from there.
inline std::vector<Augmented> boundary_states(const OcpSpec& spec, const ControlSchedule& u,
                                              const IntegrateOptions& opts) {
  std::vector<Augmented> out;
  out.reserve(u.size() + 1);
  Augmented x = pack(spec.init_state, 0.0);
  out.push_back(x);
  for (std::size_t k = 0; k < u.size(); ++k) {
    ControlSchedule one{u.interval_length(), {u.values[k]}};
    integrate_intervals(x, one, 0, spec.params, spec.smith, opts, [](double, const Augmented&, double) {});
    out.push_back(x);
  }
  return out;
}

inline double cost_from(const OcpSpec& spec, const ControlSchedule& u, std::size_t k,
                        Augmented x, const IntegrateOptions& opts) {
  integrate_intervals(x, u, k, spec.params, spec.smith, opts, [](double, const Augmented&, double) {});
  return x[3];
}

inline double projected_gradient_norm(const std::vector<double>& u, const std::vector<double>& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = std::clamp(u[i] - g[i], 0.0, 1.0) - u[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace detail

/// Integrated stage cost under schedule u.
inline double objective(const OcpSpec& spec, const ControlSchedule& u) {
  spec.validate();
  detail::check_dimensions(spec, u);
  const auto tr = integrate(spec.init_state, u, spec.params, spec.smith,
                            spec.integration_options(false));
  return integral_of_y(tr);
}

/// Integral of y alone under u, whatever stage cost the spec carries.
inline double state_integral(OcpSpec spec, const ControlSchedule& u) {
  spec.cost = StageCost::plain();
  return objective(spec, u);
}

/// Central finite-difference gradient with respect to each interval value;
/// one-sided at the box boundary.
inline std::vector<double> gradient(const OcpSpec& spec, const ControlSchedule& u, double delta) {
  spec.validate();
  detail::check_dimensions(spec, u);
  if (!(delta > 0.0)) throw DomainError("finite-difference step must be positive");
  const IntegrateOptions opts = spec.integration_options(false);
  const auto checkpoints = detail::boundary_states(spec, u, opts);
  const double nominal = checkpoints.back()[3];

  std::vector<double> g(u.size(), 0.0);
  ControlSchedule work = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double base = u.values[k];
    const double up = std::min(1.0, base + delta);
    const double down = std::max(0.0, base - delta);
    double j_up = nominal, j_down = nominal;
    if (up != base) {
      work.values[k] = up;
      j_up = detail::cost_from(spec, work, k, checkpoints[k], opts);
    }
    if (down != base) {
      work.values[k] = down;
      j_down = detail::cost_from(spec, work, k, checkpoints[k], opts);
    }
    work.values[k] = base;
    g[k] = (j_up - j_down) / (up - down);
  }
  return g;
}

inline std::vector<double> gradient(const OcpSpec& spec, const ControlSchedule& u) {
  return gradient(spec, u, spec.solver.fd_delta);
}

namespace detail {

struct DescentRun {
  ControlSchedule control;
  double objective = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> history;
};

/// Projected gradient descent with Armijo backtracking. The first trial step
/// of each line search is a Barzilai-Borwein estimate.
inline DescentRun descend(const OcpSpec& spec, ControlSchedule u) {
  const SolverOptions& so = spec.solver;
  DescentRun run;
  run.control = u;
  run.objective = objective(spec, u);
  run.history.push_back(run.objective);

  std::vector<double> g = gradient(spec, u, so.fd_delta);
  double trial = 0.0;
  {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    trial = gmax > 0.0 ? 0.1 / gmax : 1.0;
  }

  for (std::size_t it = 0; it < so.max_iter; ++it) {
    run.residual = projected_gradient_norm(u.values, g);
    if (run.residual < so.grad_tol) {
      run.converged = true;
      return run;
    }

    double step = trial;
    bool accepted = false;
    ControlSchedule cand = u;
    double j_cand = 0.0;
    for (std::size_t bt = 0; bt <= so.max_backtracks; ++bt, step *= so.backtrack) {
      for (std::size_t i = 0; i < u.size(); ++i)
        cand.values[i] = std::clamp(u.values[i] - step * g[i], 0.0, 1.0);
      double decrease = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i)
        decrease += g[i] * (u.values[i] - cand.values[i]);
      j_cand = objective(spec, cand);
      if (j_cand <= run.objective - so.armijo_c1 * decrease) {
        accepted = true;
        break;
      }
    }
    run.iterations = it + 1;
    if (!accepted) {
      // No descent along the projected path: first-order stationary to
      // within finite-difference accuracy.
      run.converged = true;
      return run;
    }

    const double gain = run.objective - j_cand;
    std::vector<double> g_new = gradient(spec, cand, so.fd_delta);
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double s = cand.values[i] - u.values[i];
      ss += s * s;
      sy += s * (g_new[i] - g[i]);
    }
    trial = sy > 0.0 ? std::clamp(ss / sy, 1e-6, 1e6) : 2.0 * step;

    u = cand;
    g = std::move(g_new);
    run.control = u;
    run.objective = j_cand;
    run.history.push_back(j_cand);
    if (gain < so.objective_tol) {
      run.residual = projected_gradient_norm(u.values, g);
      run.converged = true;
      return run;
    }
  }
  run.residual = projected_gradient_norm(u.values, g);
  return run;
}

}  // namespace detail

/**
 * Feedback schedule that keeps the "infected" signal just credible: on each
 * interval it applies the smallest mu_s for which recipients of that signal
 * still prefer protection by at least `margin`, evaluated at the state
 * reached at the start of the interval.
 */
inline ControlSchedule credibility_schedule(const OcpSpec& spec, double margin) {
  spec.validate();
  const ModelParams& p = spec.params;
  ControlSchedule u = spec.constant(1.0);
  const IntegrateOptions opts = spec.integration_options(false);
  detail::Augmented x = detail::pack(spec.init_state, 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const PopulationState s = detail::unpack(x);
    auto advantage = [&](double mu) { return delta_u(s, Signal::Infected, mu, p) - margin; };
    double mu = 1.0;
    if (advantage(0.0) >= 0.0)
      mu = 0.0;
    else if (advantage(1.0) > 0.0)
      mu = bisect(advantage, 0.0, 1.0, 1e-12).root;
    // Bisection may land a hair on the wrong side; step towards 1 until credible.
    while (mu < 1.0 && advantage(mu) < 0.0) mu = std::min(1.0, mu + 1e-9);
    u.values[k] = mu;
    ControlSchedule one{u.interval_length(), {mu}};
    detail::integrate_intervals(x, one, 0, p, spec.smith, opts,
                                [](double, const detail::Augmented&, double) {});
  }
  return u;
}

/// Multi-start projected gradient descent; returns the best local solution.
/// Starts: the optional init_guess, the constant start levels and, when
/// credibility_margin >= 0, the credibility-boundary feedback schedule.
inline OcpSolution solve(const OcpSpec& spec) {
  spec.validate();
  std::vector<ControlSchedule> starts;
  if (!spec.init_guess.values.empty()) starts.push_back(spec.init_guess);
  if (spec.solver.credibility_margin >= 0.0)
    starts.push_back(credibility_schedule(spec, spec.solver.credibility_margin));
  for (double level : spec.solver.start_levels) {
    detail::check_unit(level, "start level");
    starts.push_back(spec.constant(level));
  }
  if (starts.empty()) throw DomainError("solver needs at least one start");

  OcpSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    detail::DescentRun run = detail::descend(spec, start);
    best.start_objectives.push_back(run.objective);
    if (run.objective < best.objective) {
      best.control = std::move(run.control);
      best.objective = run.objective;
      best.iterations = run.iterations;
      best.first_order_residual = run.residual;
      best.converged = run.converged;
      best.objective_history = std::move(run.history);
    }
  }
  best.trajectory = integrate(spec.init_state, best.control, spec.params, spec.smith,
                              spec.integration_options(true));
  return best;
}

struct StaticDynamicComparison {
  StaticOptimum static_signal;
  Trajectory static_trajectory;
  double static_objective = 0.0;
  OcpSolution dynamic;
  double dynamic_objective = 0.0;
  /// Share of sample times where dynamic y(t) <= static y(t) + 1e-6.
  double dominance_fraction = 0.0;
};

/// Fraction of common sample times at which `a` has y no larger than `b` + tol.
inline double dominance_fraction(const Trajectory& a, const Trajectory& b, double tol) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (a.states[i].y <= b.states[i].y + tol) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Optimal static signal versus the solved dynamic schedule. The static
/// schedule is also handed to the solver as an extra start, so the dynamic
/// objective can never be worse than the static one.
inline StaticDynamicComparison compare_static_dynamic(OcpSpec spec) {
  spec.validate();
  StaticDynamicComparison out;
  out.static_signal = optimal_static_signal(spec.params);
  const ControlSchedule fixed = spec.constant(out.static_signal.mu_s);
  out.static_trajectory = integrate(spec.init_state, fixed, spec.params, spec.smith,
                                    spec.integration_options(true));
  out.static_objective = integral_of_y(out.static_trajectory);

  if (spec.init_guess.values.empty()) spec.init_guess = fixed;
  out.dynamic = solve(spec);
  out.dynamic_objective = out.dynamic.objective;
  out.dominance_fraction = dominance_fraction(out.dynamic.trajectory, out.static_trajectory, 1e-6);
  return out;
}

/// CSV with columns k,t_start,t_end,mu_s.
inline void write_control_csv(std::ostream& out, const ControlSchedule& u) {
  out << "k,t_start,t_end,mu_s\n";
  out.precision(12);
  for (std::size_t k = 0; k < u.size(); ++k)
    out << k << ',' << u.interval_start(k) << ',' << u.interval_start(k + 1) << ','
        << u.values[k] << '\n';
}

}  // namespace persuade_sis
