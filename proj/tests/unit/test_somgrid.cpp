#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "dpsom/errors.hpp"
#include "dpsom/log.hpp"
#include "dpsom/somgrid/classic_som.hpp"
#include "dpsom/somgrid/grid.hpp"
#include "generators.hpp"

using namespace dpsom;
using som::GridNode;
using som::GridSpec;

TEST(GridSpec, IndexMappingIsBijective) {
  const GridSpec g(3, 5);
  EXPECT_EQ(g.size(), 15);
  for (int j = 0; j < g.size(); ++j) {
    const auto n = g.node(j);
    EXPECT_EQ(n.row, j / 5);
    EXPECT_EQ(n.col, j % 5);
    EXPECT_EQ(g.index(n), j);
  }
  EXPECT_THROW(g.node(15), IndexError);
  EXPECT_THROW(g.node(-1), IndexError);
}

TEST(GridSpec, ParseAndValidate) {
  EXPECT_EQ(GridSpec::parse("8x8"), GridSpec(8, 8));
  EXPECT_EQ(GridSpec::parse("16x4").cols(), 4);
  EXPECT_EQ(GridSpec(4, 6).to_string(), "4x6");
  EXPECT_THROW(GridSpec(1, 8), ConfigError);
  EXPECT_THROW(GridSpec::parse("8"), ConfigError);
  EXPECT_THROW(GridSpec::parse("ax3"), ConfigError);
}

TEST(Neighbors, WrapAroundCorner) {
  const GridSpec g(8, 8);
  const auto n = som::neighbors(g, 0);
  EXPECT_EQ(g.node(n[0]), (GridNode{7, 0}));
  EXPECT_EQ(g.node(n[1]), (GridNode{1, 0}));
  EXPECT_EQ(g.node(n[2]), (GridNode{0, 7}));
  EXPECT_EQ(g.node(n[3]), (GridNode{0, 1}));
  EXPECT_THROW(som::neighbors(g, 64), IndexError);
}

TEST(Neighbors, TwoByTwoIsAMultiset) {
  const GridSpec g(2, 2);
  auto n = som::neighbors(g, 0);
  std::multiset<int> got(n.begin(), n.end());
  EXPECT_EQ(got, (std::multiset<int>{2, 2, 1, 1}));
}

TEST(Neighbors, UnionCoversEveryGridUpTo12) {
  for (int r = 2; r <= 12; ++r) {
    for (int c = 2; c <= 12; ++c) {
      const GridSpec g(r, c);
      std::set<int> seen;
      for (int j = 0; j < g.size(); ++j)
        for (const int e : som::neighbors(g, j)) seen.insert(e);
      EXPECT_EQ(static_cast<int>(seen.size()), g.size()) << r << "x" << c;
    }
  }
}

TEST(Neighbors, CountMatrixMatchesLists) {
  const GridSpec g(2, 3);
  const Matrix a = som::neighbor_count_matrix(g);
  for (int j = 0; j < g.size(); ++j) {
    EXPECT_EQ(a.col(j).sum(), 4.0);
    for (const int e : som::neighbors(g, j)) EXPECT_GE(a(e, j), 1.0);
  }
}

TEST(GridDistance, Examples) {
  const GridSpec g(8, 8);
  EXPECT_EQ(som::grid_distance(g, g.index({0, 0}), g.index({7, 7})), 2);
  EXPECT_EQ(som::grid_distance(g, g.index({0, 0}), g.index({4, 4})), 8);
  for (int i = 0; i < g.size(); ++i) EXPECT_EQ(som::grid_distance(g, i, i), 0);
  EXPECT_THROW(som::grid_distance(g, 0, 64), IndexError);
}

TEST(GridDistance, IsAMetricOnSmallGrids) {
  for (int r = 2; r <= 12; r += 3) {
    for (int c = 2; c <= 12; c += 5) {
      const GridSpec g(r, c);
      const int k = g.size();
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          const int dij = som::grid_distance(g, i, j);
          EXPECT_EQ(dij, som::grid_distance(g, j, i));
          EXPECT_EQ(dij, oracle::torus_distance(r, c, i, j));
          EXPECT_EQ(dij == 0, i == j);
          for (int m = 0; m < k; m += 3) EXPECT_LE(dij, som::grid_distance(g, i, m) + som::grid_distance(g, m, j));
        }
      }
    }
  }
}

TEST(Bmu, ExactMatchAndTieBreak) {
  Matrix c = Matrix::Zero(8, 2);
  for (int k = 0; k < 8; ++k) c(k, 0) = k;
  EXPECT_EQ(som::bmu(c, RowVector{{5.0, 0.0}}), 5);
  Matrix t = Matrix::Constant(8, 2, 10.0);
  t.row(3) << 1.0, 0.0;
  t.row(7) << -1.0, 0.0;
  EXPECT_EQ(som::bmu(t, RowVector{{0.0, 0.0}}), 3);
  EXPECT_THROW(som::bmu(c, RowVector{{1.0, 2.0, 3.0}}), DimensionError);
}

TEST(Bmu, MatchesExhaustiveScan) {
  gen_fixture::Gen g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix c = g.matrix(9, 3);
    const RowVector x = g.matrix(1, 3);
    int best = 0;
    double best_d = 1e300;
    for (int k = 0; k < 9; ++k) {
      const double d = (c.row(k) - x).squaredNorm();
      if (d < best_d) best_d = d, best = k;
    }
    EXPECT_EQ(som::bmu(c, x), best);
  }
}

TEST(SomUpdate, UnitGainMovesWinnerOntoSample) {
  const GridSpec g(3, 3);
  Matrix c = Matrix::Zero(9, 2);
  for (int k = 0; k < 9; ++k) c.row(k) << k, -k;
  const Matrix before = c;
  const RowVector x{{4.2, -3.9}};
  const int w = som::som_update(c, g, x, 1.0, 0.0);
  EXPECT_EQ(w, 4);
  EXPECT_EQ(c.row(4), x);
  for (int k = 0; k < 9; ++k)
    if (k != 4) EXPECT_EQ(c.row(k), before.row(k));
}

TEST(SomFit, ConvergesOntoDistinctPoints) {
  // 16 points on a Clifford torus: a 4x4 grid can map onto them exactly.
  const GridSpec g(4, 4);
  Matrix pts(16, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double a = 2 * M_PI * r / 4, b = 2 * M_PI * c / 4;
      pts.row(r * 4 + c) << std::cos(a), std::sin(a), std::cos(b), std::sin(b);
    }
  }
  Matrix data(16 * 16, 4);
  for (int copy = 0; copy < 16; ++copy) data.middleRows(copy * 16, 16) = pts;
  som::SomSchedule schedule;
  schedule.total_steps = 40000;
  schedule.final_radius = 0.1;
  const auto state = som::som_fit(data, g, schedule, 3);
  std::set<int> matched;
  for (int k = 0; k < 16; ++k) {
    const int nearest = som::bmu(pts, state.centroids.row(k));
    EXPECT_LT((state.centroids.row(k) - pts.row(nearest)).norm(), 1e-2);
    matched.insert(nearest);
  }
  EXPECT_EQ(matched.size(), 16u);
  EXPECT_LE(state.quantization_history.back(), state.quantization_history.front());
}

TEST(SomFit, TopographicOrganisation) {
  gen_fixture::Gen g(12);
  Matrix data(400, 2);
  for (int i = 0; i < 400; ++i) {
    const double cx = i < 200 ? -2.0 : 2.0;
    data.row(i) << cx + 0.5 * g.normal(), 0.5 * g.normal();
  }
  const GridSpec grid(4, 4);
  som::SomSchedule schedule;
  schedule.total_steps = 8000;
  const auto state = som::som_fit(data, grid, schedule, 5);
  double adjacent = 0.0, all = 0.0;
  int n_adj = 0, n_all = 0;
  for (int i = 0; i < 16; ++i) {
    for (const int j : som::neighbors(grid, i)) {
      adjacent += (state.centroids.row(i) - state.centroids.row(j)).norm();
      ++n_adj;
    }
    for (int j = 0; j < 16; ++j) {
      if (i == j) continue;
      all += (state.centroids.row(i) - state.centroids.row(j)).norm();
      ++n_all;
    }
  }
  EXPECT_LT(adjacent / n_adj, all / n_all);
}

TEST(SomFit, QuantizationErrorNeverIncreasesOverRandomFixtures) {
  gen_fixture::Gen g(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix data = g.matrix(g.integer(20, 80), g.integer(1, 4));
    const GridSpec grid(g.integer(2, 4), g.integer(2, 4));
    som::SomSchedule schedule;
    schedule.total_steps = data.rows() * g.integer(1, 6);
    const auto state = som::som_fit(data, grid, schedule, trial);
    ASSERT_GE(state.quantization_history.size(), 1u);
    EXPECT_LE(state.quantization_history.back(), state.quantization_history.front() + 1e-12);
    EXPECT_TRUE(state.centroids.allFinite());
    EXPECT_EQ(state.iteration, schedule.total_steps);
  }
}

TEST(SomFit, ErrorsAndWarnings) {
  const GridSpec grid(2, 2);
  som::SomSchedule schedule;
  EXPECT_THROW(som::som_fit(Matrix(0, 2), grid, schedule, 0), InputError);
  schedule.total_steps = 0;
  EXPECT_THROW(som::som_fit(Matrix::Ones(5, 2), grid, schedule, 0), ConfigError);
  schedule.total_steps = 10;
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
  som::som_fit(Matrix::Random(3, 2), grid, schedule, 0);
  set_warning_sink(nullptr);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(SomFit, DeterministicGivenSeed) {
  const Matrix data = gen_fixture::Gen(14).matrix(50, 3);
  som::SomSchedule schedule;
  schedule.total_steps = 500;
  const GridSpec grid(3, 3);
  EXPECT_EQ(som::som_fit(data, grid, schedule, 1).centroids, som::som_fit(data, grid, schedule, 1).centroids);
}
