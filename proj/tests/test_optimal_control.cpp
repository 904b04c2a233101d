#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "persuade_sis/optimal_control.hpp"

namespace {

using namespace persuade_sis;

OcpSpec small_spec() {
  OcpSpec s;
  s.params = fixtures::comparison();
  s.horizon = 6.0;
  s.n_intervals = 6;
  s.integration.step = 1e-2;
  s.solver.max_iter = 60;
  s.solver.start_levels = {0.0, 1.0};
  return s;
}

// Least-squares slope at the centre of a quadratic through five samples.
double parabola_slope(const std::vector<double>& offsets, const std::vector<double>& values) {
  // Normal equations for v = a + b t + c t^2 with symmetric offsets: b = sum(t v) / sum(t^2).
  double stv = 0.0, st2 = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    stv += offsets[i] * values[i];
    st2 += offsets[i] * offsets[i];
  }
  return stv / st2;
}

TEST(Objective, DiseaseFreeStartCostsNothing) {
  OcpSpec s = small_spec();
  s.init_state = {0.0, 0.5, 0.5};
  EXPECT_EQ(objective(s, s.constant(0.3)), 0.0);
  for (double g : gradient(s, s.constant(0.3))) EXPECT_EQ(g, 0.0);
  const auto sol = solve(s);
  EXPECT_EQ(sol.objective, 0.0);
  EXPECT_EQ(sol.first_order_residual, 0.0);
  EXPECT_TRUE(sol.converged);
}

TEST(Objective, PenaltyVanishesAtFullFidelity) {
  OcpSpec plain = small_spec(), penalised = small_spec();
  penalised.cost = StageCost::modified(0.8);
  EXPECT_DOUBLE_EQ(objective(plain, plain.constant(1.0)), objective(penalised, penalised.constant(1.0)));
  EXPECT_DOUBLE_EQ(state_integral(penalised, penalised.constant(0.4)),
                   objective(plain, plain.constant(0.4)));
}

TEST(Objective, RejectsMismatchedSchedule) {
  const OcpSpec s = small_spec();
  EXPECT_THROW(objective(s, ControlSchedule::constant(s.horizon, 3, 0.5)), DomainError);
  EXPECT_THROW(objective(s, ControlSchedule::constant(2.0, s.n_intervals, 0.5)), DomainError);
}

TEST(Gradient, MatchesParabolaFit) {
  OcpSpec s;
  s.params = fixtures::comparison();
  ControlSchedule u = s.constant(0.5);
  const auto g = gradient(s, u);
  int tested = 0;
  for (std::size_t k = 0; k < u.size(); k += 5) {
    const std::vector<double> offsets{-4e-5, -2e-5, 0.0, 2e-5, 4e-5};
    std::vector<double> values;
    for (double d : offsets) {
      ControlSchedule v = u;
      v.values[k] += d;
      values.push_back(objective(s, v));
    }
    const double slope = parabola_slope(offsets, values);
    // Early intervals can be exactly flat while everyone still protects.
    if (std::abs(slope) < 1e-4) continue;
    EXPECT_NEAR(g[k], slope, 1e-4 * std::abs(slope)) << "interval " << k;
    ++tested;
  }
  EXPECT_GE(tested, 3);
}

TEST(Gradient, DirectionalDerivativeMatchesInnerProduct) {
  OcpSpec s;
  s.params = fixtures::comparison();
  ControlSchedule u = s.constant(0.5);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  std::vector<double> dir(u.size());
  for (auto& v : dir) v = r(rng);
  for (std::size_t k = 0; k < u.size(); ++k) u.values[k] = 0.5 + 0.3 * r(rng);
  const auto g = gradient(s, u);
  const double h = 1e-5;
  ControlSchedule up = u, down = u;
  for (std::size_t k = 0; k < u.size(); ++k) {
    up.values[k] += h * dir[k];
    down.values[k] -= h * dir[k];
  }
  const double fd = (objective(s, up) - objective(s, down)) / (2.0 * h);
  double inner = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) inner += g[k] * dir[k];
  EXPECT_NEAR(fd, inner, 1e-3 * std::abs(inner));
}

TEST(Gradient, StepHalvingAgreement) {
  OcpSpec s;
  s.params = fixtures::comparison();
  const ControlSchedule u = s.constant(0.6);
  const auto a = gradient(s, u, 1e-5);
  const auto b = gradient(s, u, 5e-6);
  for (std::size_t k = 0; k < a.size(); ++k)
    EXPECT_NEAR(a[k], b[k], 1e-3 * std::max(std::abs(a[k]), 1e-6)) << k;
}

TEST(Gradient, OneSidedAtBoxBoundary) {
  const OcpSpec s = small_spec();
  const auto at_one = gradient(s, s.constant(1.0));
  const auto at_zero = gradient(s, s.constant(0.0));
  for (double g : at_one) EXPECT_TRUE(std::isfinite(g));
  for (double g : at_zero) EXPECT_TRUE(std::isfinite(g));
}

TEST(Solve, FeasibleAndNoWorseThanAnyStart) {
  const OcpSpec s = small_spec();
  const auto sol = solve(s);
  for (double v : sol.control.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (double j : sol.start_objectives) EXPECT_LE(sol.objective, j + 1e-15);
  for (double level : {0.0, 0.25, 0.5, 0.75, 1.0})
    EXPECT_LE(sol.objective, objective(s, s.constant(level)));
  for (std::size_t i = 1; i < sol.objective_history.size(); ++i)
    EXPECT_LE(sol.objective_history[i], sol.objective_history[i - 1]);
  EXPECT_NEAR(sol.objective, objective(s, sol.control), 1e-12);
  EXPECT_NEAR(integral_of_y(sol.trajectory), sol.objective, 1e-12);
}

TEST(Solve, CredibilityScheduleIsFeasible) {
  const OcpSpec s = small_spec();
  const auto u = credibility_schedule(s, 0.25);
  ASSERT_EQ(u.size(), s.n_intervals);
  for (double v : u.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Compare, ShortHorizonObjectivesAgree) {
  OcpSpec s;
  s.params = fixtures::comparison();
  s.horizon = 0.1;
  s.n_intervals = 4;
  s.integration.step = 1e-3;
  s.solver.max_iter = 30;
  const auto cmp = compare_static_dynamic(s);
  EXPECT_LE(cmp.dynamic_objective, cmp.static_objective + 1e-15);
  EXPECT_NEAR(cmp.dynamic_objective, cmp.static_objective, 2e-3);
}

TEST(Compare, DynamicNeverWorseThanStatic) {
  const auto cmp = compare_static_dynamic(small_spec());
  EXPECT_LE(cmp.dynamic_objective, cmp.static_objective);
  EXPECT_GE(cmp.dominance_fraction, 0.0);
  EXPECT_LE(cmp.dominance_fraction, 1.0);
}

TEST(Compare, DominanceFractionCountsSamples) {
  Trajectory a, b;
  for (double y : {0.1, 0.2, 0.3, 0.4}) {
    a.states.push_back({y, 1, 0});
    a.times.push_back(y);
  }
  for (double y : {0.2, 0.2, 0.2, 0.2}) {
    b.states.push_back({y, 1, 0});
    b.times.push_back(y);
  }
  EXPECT_DOUBLE_EQ(dominance_fraction(a, b, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(dominance_fraction(a, b, 0.25), 1.0);
}

TEST(Csv, ControlHeaderAndRows) {
  std::ostringstream out;
  write_control_csv(out, ControlSchedule{2.0, {0.25, 0.75}});
  EXPECT_EQ(out.str(), "k,t_start,t_end,mu_s\n0,0,1,0.25\n1,1,2,0.75\n");
}

}  // namespace
