#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "persuade_sis/sweep.hpp"

namespace {

using namespace persuade_sis;

TEST(Axis, StepsAndUpperBound) {
  const auto a = make_axis(0.01, 1.0, 0.02);
  EXPECT_EQ(a.size(), 51u);
  EXPECT_EQ(a.back(), 1.0);
  EXPECT_NEAR(a[49], 0.99, 1e-12);
  EXPECT_EQ(make_axis(0.01, 0.96, 0.005, false).size(), 191u);
  EXPECT_EQ(make_axis(0.3, 0.3, 0.1).size(), 1u);
  EXPECT_THROW(make_axis(0.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(make_axis(1.0, 0.0, 0.1), DomainError);
}

TEST(StaticSweep, SinglePointEqualsClassification) {
  const ModelParams p;
  const auto t = static_sweep(p, 0.3, 0.3, 0.005);
  ASSERT_EQ(t.cells.size(), 1u);
  const auto r = classify_sne(0.3, p);
  EXPECT_EQ(t.cells[0].y_star, r.y_star);
  EXPECT_EQ(t.cells[0].z_ibar_star, r.z_ibar_star);
  EXPECT_EQ(*t.cells[0].case_id, r.case_id);
  EXPECT_EQ(*t.argmin, 0u);
}

TEST(StaticSweep, MinimumNearUpperThreshold) {
  const ModelParams p;
  const auto t = static_sweep(p, 0.01, 0.96, 0.005);
  ASSERT_TRUE(t.argmin);
  EXPECT_NEAR(t.cells[*t.argmin].mu_s, 0.566, 0.005);
  for (const auto& c : t.cells) EXPECT_TRUE(c.ok()) << c.error;
}

TEST(StaticSweep, DeterministicAcrossRunsAndThreads) {
  const ModelParams p = fixtures::violating();
  const auto a = static_sweep(p, 0.01, 0.96, 0.005, 1);
  const auto b = static_sweep(p, 0.01, 0.96, 0.005, 4);
  std::ostringstream sa, sb;
  write_sweep_csv(sa, a);
  write_sweep_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')),
            "mu_s,y_star,z_sbar_star,z_ibar_star,case_id,is_argmin");
}

TEST(StaticSweep, RequiresTruthfulInfectedSignal) {
  ModelParams p;
  p.mu_i = 0.5;
  EXPECT_THROW(static_sweep(p, 0.1, 0.2, 0.05), DomainError);
}

class CoarseGrid : public ::testing::Test {
protected:
  // Axis 0.01 + 0.098 k maps onto itself under v -> 1 - v.
  static void SetUpTestSuite() { grid_ = new MuiGrid(grid_mui(ModelParams{}, 0.098)); }
  static void TearDownTestSuite() { delete grid_; }
  static MuiGrid* grid_;
};
MuiGrid* CoarseGrid::grid_ = nullptr;

TEST_F(CoarseGrid, EveryCellReachesStationarity) {
  for (const auto& row : grid_->converged)
    for (char ok : row) EXPECT_TRUE(ok);
}

TEST_F(CoarseGrid, MirrorSymmetry) {
  const auto& g = *grid_;
  int pairs = 0;
  for (std::size_t i = 0; i < g.axis.size(); ++i)
    for (std::size_t j = 0; j < g.axis.size(); ++j) {
      const auto mi = g.index_of(1.0 - g.axis[i]);
      const auto mj = g.index_of(1.0 - g.axis[j]);
      if (!mi || !mj) continue;
      EXPECT_NEAR(g.y[i][j], g.y[*mi][*mj], 1e-4);
      ++pairs;
    }
  EXPECT_GT(pairs, 50);
}

TEST_F(CoarseGrid, TruthfulRowAgreesWithEquilibriumClassification) {
  const auto& g = *grid_;
  const std::size_t last = g.axis.size() - 1;
  ASSERT_EQ(g.axis[last], 1.0);
  for (std::size_t j = 0; j < g.axis.size(); ++j)
    EXPECT_NEAR(g.y[last][j], classify_sne(g.axis[j], ModelParams{}).y_star, 1e-2)
        << "mu_s = " << g.axis[j];
}

TEST_F(CoarseGrid, CsvShapes) {
  std::ostringstream m, s;
  write_mui_matrix_csv(m, *grid_);
  write_mui_summary_csv(s, *grid_);
  std::istringstream mi(m.str()), si(s.str());
  std::string line;
  std::size_t rows = 0;
  while (std::getline(mi, line)) ++rows;
  EXPECT_EQ(rows, grid_->axis.size() + 1);
  std::getline(si, line);
  EXPECT_EQ(line, "mu_i,mu_s_opt,min_y");
}

TEST(Grid, ParallelMatchesSerial) {
  StationarityOptions o;
  o.t_max = 50.0;
  const auto a = grid_mui(ModelParams{}, 0.25, 0.01, 1.0, o, 1);
  const auto b = grid_mui(ModelParams{}, 0.25, 0.01, 1.0, o, 3);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.converged, b.converged);
}

}  // namespace
