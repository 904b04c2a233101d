#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace persuade_sis {

/// Input outside the mathematical domain of a formula (bad parameters, a
/// fidelity outside [0,1], a non-existent endemic equilibrium).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure could not deliver its contract (no root bracketed,
/// integration blew up, no equilibrium case matched).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Epidemic and economic constants of the protection game.
 *
 * alpha scales the infection risk of a protected susceptible agent, beta_p and
 * beta_u are the transmission rates of protected and unprotected infected
 * agents, c_p is the protection cost, c_u the cost paid by an unprotected
 * infected agent and loss the loss of a susceptible agent upon infection.
 * mu_i is the probability that an infected agent receives the "infected"
 * signal.
 */
struct ModelParams {
  double alpha = 0.45;
  double gamma = 0.2;
  double beta_p = 0.5;
  double beta_u = 0.65;
  double c_p = 25.0;
  double c_u = 32.0;
  double loss = 80.0;
  double mu_i = 1.0;

  /// Throws DomainError unless every field is inside its admissible range.
  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("invalid model parameters: ") + what);
    };
    require(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(std::isfinite(gamma) && gamma > 0.0 && gamma < 1.0, "gamma must lie in (0,1)");
    require(std::isfinite(beta_p) && std::isfinite(beta_u) && beta_p > 0.0 &&
                beta_p < beta_u && beta_u < 1.0,
            "need 0 < beta_p < beta_u < 1");
    require(std::isfinite(c_p) && c_p > 0.0, "c_p must be positive");
    require(std::isfinite(c_u) && c_u > 0.0, "c_u must be positive");
    require(std::isfinite(loss) && loss > 0.0, "loss must be positive");
    require(std::isfinite(mu_i) && mu_i >= 0.0 && mu_i <= 1.0, "mu_i must lie in [0,1]");
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Validating factory; the usual way to build parameters from user input.
inline ModelParams make_params(const ModelParams& p) {
  p.validate();
  return p;
}

/// (y, z_sbar, z_ibar): infected proportion and the unprotected fractions
/// among recipients of the "susceptible" and "infected" signals.
struct PopulationState {
  double y = 0.01;
  double z_sbar = 0.5;
  double z_ibar = 0.5;

  [[nodiscard]] bool in_bounds(double tol = 0.0) const {
    auto ok = [tol](double v) { return v >= -tol && v <= 1.0 + tol; };
    return ok(y) && ok(z_sbar) && ok(z_ibar);
  }

  friend bool operator==(const PopulationState&, const PopulationState&) = default;
};

enum class Signal { Susceptible, Infected };

enum class HealthState { Susceptible, Infected };

struct AssumptionReport {
  bool a1_truthful = false;
  bool a1_costs = false;
  bool a1_recovery = false;
  bool a2_protection_cost = false;

  [[nodiscard]] bool assumption1() const { return a1_truthful && a1_costs && a1_recovery; }
  [[nodiscard]] bool assumption2() const { return a2_protection_cost; }
};

inline AssumptionReport validate_assumptions(const ModelParams& p) {
  AssumptionReport r;
  r.a1_truthful = p.mu_i == 1.0;
  r.a1_costs = p.c_p < p.c_u;
  r.a1_recovery = p.gamma < p.alpha * p.beta_p;
  r.a2_protection_cost = p.c_p > (1.0 - p.alpha) * p.loss * (p.beta_u - p.gamma);
  return r;
}

namespace detail {

inline void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
}

}  // namespace detail

/// Transmission rate of an infected agent averaged over its action:
/// beta_p + (beta_u - beta_p) * (share of infected agents left unprotected).
inline double infected_transmission(double z_sbar, double z_ibar, const ModelParams& p) {
  const double unprotected = z_ibar * p.mu_i + z_sbar * (1.0 - p.mu_i);
  return p.beta_p + (p.beta_u - p.beta_p) * unprotected;
}

/// Susceptibility of a susceptible agent averaged over its action.
inline double susceptible_exposure(double z_sbar, double z_ibar, double mu_s,
                                   const ModelParams& p) {
  const double unprotected = z_sbar * mu_s + z_ibar * (1.0 - mu_s);
  return p.alpha + (1.0 - p.alpha) * unprotected;
}

/// Effective infection rate of the SIS dynamics; lies in [alpha*beta_p, beta_u].
inline double beta_eff(double z_sbar, double z_ibar, double mu_s, const ModelParams& p) {
  detail::check_unit(mu_s, "mu_s");
  return infected_transmission(z_sbar, z_ibar, p) * susceptible_exposure(z_sbar, z_ibar, mu_s, p);
}

inline double beta_eff(const PopulationState& s, double mu_s, const ModelParams& p) {
  return beta_eff(s.z_sbar, s.z_ibar, mu_s, p);
}

/// Likelihood of a signal given the true health state.
inline double signal_likelihood(Signal x, HealthState h, double mu_s, double mu_i) {
  if (h == HealthState::Infected) return x == Signal::Infected ? mu_i : 1.0 - mu_i;
  return x == Signal::Susceptible ? mu_s : 1.0 - mu_s;
}

/// Bayesian posterior probability of being infected after receiving `x`,
/// with the population infected share `y` as prior. When the signal has zero
/// probability under the prior the posterior is defined as the prior itself.
inline double posterior_infected(double y, Signal x, double mu_s, double mu_i) {
  detail::check_unit(y, "y");
  detail::check_unit(mu_s, "mu_s");
  detail::check_unit(mu_i, "mu_i");
  const double num = signal_likelihood(x, HealthState::Infected, mu_s, mu_i) * y;
  const double den =
      num + signal_likelihood(x, HealthState::Susceptible, mu_s, mu_i) * (1.0 - y);
  if (den <= 0.0) return y;
  return num / den;
}

inline double posterior_susceptible(double y, Signal x, double mu_s, double mu_i) {
  return 1.0 - posterior_infected(y, x, mu_s, mu_i);
}

/**
 * Expected-utility advantage of protecting over staying unprotected for an
 * agent that received signal `x`. Positive means protection is strictly
 * preferred.
 *
 * A susceptible agent trades c_p against the avoided fraction (1 - alpha) of
 * the expected infection loss; an infected agent trades c_p against c_u. The
 * two are weighted by the posterior. With mu_i = 1 the "susceptible" signal
 * is conclusive and this reduces to (1-alpha) L B y - c_p.
 */
inline double delta_u(const PopulationState& s, Signal x, double mu_s, const ModelParams& p) {
  const double pi_s = posterior_susceptible(s.y, x, mu_s, p.mu_i);
  const double infection_term =
      (1.0 - p.alpha) * p.loss * infected_transmission(s.z_sbar, s.z_ibar, p) * s.y;
  return pi_s * (infection_term - p.c_u) + p.c_u - p.c_p;
}

/// Nonzero endemic level 1 - gamma / beta_eff of the SIS dynamics with frozen
/// strategies. Throws DomainError when beta_eff <= gamma.
inline double y_ee(double z_sbar, double z_ibar, double mu_s, const ModelParams& p) {
  const double b = beta_eff(z_sbar, z_ibar, mu_s, p);
  if (!(b > p.gamma))
    throw DomainError("endemic equilibrium does not exist (beta_eff <= gamma)");
  return 1.0 - p.gamma / b;
}

/// Utility advantage of protection for "susceptible"-signal recipients at
/// the endemic level reached with z_sbar = 1.
inline double h_fn(double z_ibar, double mu_s, const ModelParams& p) {
  const double y = y_ee(1.0, z_ibar, mu_s, p);
  return (1.0 - p.alpha) * p.loss * (p.beta_p + (p.beta_u - p.beta_p) * z_ibar) * y - p.c_p;
}

/// Numerator of the "infected"-signal utility advantage at z_sbar = 1; its
/// zero in z_ibar is the interior equilibrium strategy.
inline double g_fn(double z_ibar, double mu_s, const ModelParams& p) {
  const double y = y_ee(1.0, z_ibar, mu_s, p);
  return y * (p.c_u - p.c_p) + (1.0 - mu_s) * (1.0 - y) * h_fn(z_ibar, mu_s, p);
}

}  // namespace persuade_sis
