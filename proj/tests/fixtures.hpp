#pragma once

#include <random>

#include "persuade_sis/model.hpp"

namespace fixtures {

using persuade_sis::ModelParams;

// Protection cost above the unprotected gain: minimum at mu_s_max.
inline ModelParams satisfying() { return {}; }

// Cheap protection: equilibrium infection grows with mu_s.
inline ModelParams violating() {
  ModelParams p;
  p.beta_p = 0.7;
  p.beta_u = 0.9;
  p.c_p = 19.0;
  p.c_u = 20.0;
  return p;
}

// Setup used for the static/dynamic comparison.
inline ModelParams comparison() {
  ModelParams p;
  p.c_p = 20.0;
  p.c_u = 25.0;
  return p;
}

// Random parameters with mu_i = 1, c_p < c_u and gamma < alpha beta_p.
inline ModelParams random_assumption1(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  p.alpha = 0.2 + 0.6 * u(rng);
  p.beta_u = 0.4 + 0.55 * u(rng);
  p.beta_p = p.beta_u * (0.4 + 0.55 * u(rng));
  p.gamma = p.alpha * p.beta_p * (0.2 + 0.75 * u(rng));
  p.loss = 20.0 + 120.0 * u(rng);
  p.c_p = 2.0 + 40.0 * u(rng);
  p.c_u = p.c_p * (1.02 + 1.5 * u(rng));
  p.mu_i = 1.0;
  return p;
}

}  // namespace fixtures
