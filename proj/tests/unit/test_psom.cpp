#include <cmath>

#include <gtest/gtest.h>

#include "dpsom/errors.hpp"
#include "dpsom/log.hpp"
#include "dpsom/ndcore/gradient_check.hpp"
#include "dpsom/ndcore/ops.hpp"
#include "dpsom/psom/assignments.hpp"
#include "generators.hpp"

using namespace dpsom;
using som::GridSpec;

namespace {

constexpr double kRowTol = 1e-9;

void expect_row_stochastic(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    EXPECT_NEAR(m.row(i).sum(), 1.0, kRowTol);
    EXPECT_GT(m.row(i).minCoeff(), 0.0);
    EXPECT_LE(m.row(i).maxCoeff(), 1.0);
  }
}

}  // namespace

TEST(SoftAssignments, SingleCentroidIsOne) {
  const Matrix s = psom::soft_assignments(gen_fixture::Gen(1).matrix(5, 3), Matrix::Zero(1, 3), 10.0);
  EXPECT_TRUE(s.isOnes(0.0));
}

TEST(SoftAssignments, EquidistantCentroidsSplitEvenly) {
  const Matrix z{{0.0, 0.0}};
  const Matrix mu{{1.0, 0.0}, {0.0, -1.0}};
  const Matrix s = psom::soft_assignments(z, mu, 10.0);
  EXPECT_NEAR(s(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.5, 1e-15);
}

TEST(SoftAssignments, ScalarHandEvaluation) {
  const Matrix s = psom::soft_assignments(Matrix{{0.0}}, Matrix{{0.0}, {1.0}}, 1.0);
  EXPECT_NEAR(s(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(SoftAssignments, RejectsBadAlphaAndShapes) {
  EXPECT_THROW(psom::soft_assignments(Matrix::Zero(2, 2), Matrix::Zero(3, 2), 0.0), ConfigError);
  EXPECT_THROW(psom::soft_assignments(Matrix::Zero(2, 2), Matrix::Zero(3, 3), 1.0), DimensionError);
}

TEST(SoftAssignments, MatchesOracleAndIsRowStochastic) {
  gen_fixture::Gen g(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix z = g.matrix(g.integer(1, 12), g.integer(1, 4), 2.0);
    const Matrix mu = g.matrix(g.integer(1, 9), z.cols(), 2.0);
    const double alpha = g.real(0.5, 20.0);
    const Matrix s = psom::soft_assignments(z, mu, alpha);
    expect_row_stochastic(s);
    EXPECT_LT(gen_fixture::max_abs_diff(s, oracle::soft_assignments(gen_fixture::to_rows(z), gen_fixture::to_rows(mu), alpha)),
              1e-12);
  }
}

TEST(SoftAssignments, InvariantUnderRigidMotion) {
  gen_fixture::Gen g(3);
  const Matrix z = g.matrix(7, 2), mu = g.matrix(4, 2);
  const double th = 0.7;
  Matrix rot{{std::cos(th), -std::sin(th)}, {std::sin(th), std::cos(th)}};
  const RowVector shift{{3.0, -1.5}};
  const Matrix z2 = (z * rot).rowwise() + shift;
  const Matrix mu2 = (mu * rot).rowwise() + shift;
  EXPECT_LT((psom::soft_assignments(z, mu, 10.0) - psom::soft_assignments(z2, mu2, 10.0)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(TargetDistribution, UniformStaysUniform) {
  const Matrix s = Matrix::Constant(6, 4, 0.25);
  EXPECT_TRUE(psom::target_distribution(s).isApprox(s, 1e-15));
}

TEST(TargetDistribution, SingleRowIsAFixedPoint) {
  EXPECT_TRUE(psom::target_distribution(Matrix{{0.8, 0.2}}).isApprox(Matrix{{0.8, 0.2}}, 1e-15));
  gen_fixture::Gen g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix s = g.row_stochastic(1, g.integer(1, 10), 0.5);
    EXPECT_LT((psom::target_distribution(s) - s).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TargetDistribution, TwoRowFixtureMatchesOracle) {
  const Matrix s{{0.9, 0.1}, {0.6, 0.4}};
  const Matrix t = psom::target_distribution(s);
  // f = (1.5, 0.5): row 0 -> (0.54, 0.02), row 1 -> (0.24, 0.32)
  EXPECT_NEAR(t(0, 0), 0.54 / 0.56, 1e-15);
  EXPECT_NEAR(t(1, 1), 0.32 / 0.56, 1e-15);
  EXPECT_LT(gen_fixture::max_abs_diff(t, oracle::target_distribution(gen_fixture::to_rows(s))), 1e-15);
}

TEST(TargetDistribution, ZeroFrequencyIsClampedWithWarning) {
  int warnings = 0;
  set_warning_sink([&](const std::string&) { ++warnings; });
  const Matrix t = psom::target_distribution(Matrix{{0.5, 0.5}}, RowVector{{1.0, 0.0}});
  set_warning_sink(nullptr);
  EXPECT_EQ(warnings, 1);
  EXPECT_TRUE(t.allFinite());
  EXPECT_NEAR(t.sum(), 1.0, 1e-12);
}

TEST(TargetDistribution, RandomFixturesRowStochasticAndMatchOracle) {
  gen_fixture::Gen g(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix s = g.row_stochastic(g.integer(1, 15), g.integer(2, 9), g.real(0.2, 3.0));
    const Matrix t = psom::target_distribution(s);
    expect_row_stochastic(t);
    EXPECT_LT(gen_fixture::max_abs_diff(t, oracle::target_distribution(gen_fixture::to_rows(s))), 1e-12);
  }
}

TEST(CahLoss, Examples) {
  const Matrix s = gen_fixture::Gen(6).row_stochastic(4, 3);
  EXPECT_EQ(psom::cah_loss(s, s), 0.0);
  EXPECT_NEAR(psom::cah_loss(Matrix{{0.5, 0.5}}, Matrix{{1.0, 0.0}}), std::log(2.0), 1e-15);
  EXPECT_THROW(psom::cah_loss(s, Matrix::Zero(4, 2)), DimensionError);
}

TEST(CahLoss, NonNegativeAndMatchesOracle) {
  gen_fixture::Gen g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix s = g.row_stochastic(g.integer(1, 10), g.integer(1, 8), g.real(0.1, 2.0));
    const Matrix t = g.row_stochastic(s.rows(), s.cols(), g.real(0.1, 2.0));
    const double v = psom::cah_loss(s, t);
    EXPECT_GE(v, 0.0);
    EXPECT_NEAR(v, oracle::cah(gen_fixture::to_rows(s), gen_fixture::to_rows(t)), 1e-12);
  }
}

TEST(SsomLoss, UniformIsFourLogK) {
  for (const auto& grid : {GridSpec(2, 2), GridSpec(4, 4), GridSpec(3, 7)}) {
    const int k = grid.size();
    EXPECT_NEAR(psom::ssom_loss(Matrix::Constant(5, k, 1.0 / k), grid), 4.0 * std::log(k), 1e-12);
  }
}

TEST(SsomLoss, OneHotIsFinite) {
  Matrix s = Matrix::Zero(3, 16);
  s(0, 0) = s(1, 5) = s(2, 15) = 1.0;
  EXPECT_TRUE(std::isfinite(psom::ssom_loss(s, GridSpec(4, 4))));
}

TEST(SsomLoss, MatchesTripleLoopOracle) {
  gen_fixture::Gen g(8);
  for (int trial = 0; trial < 30; ++trial) {
    const GridSpec grid(g.integer(2, 5), g.integer(2, 5));
    const Matrix s = g.row_stochastic(g.integer(1, 10), grid.size(), g.real(0.2, 2.0));
    EXPECT_NEAR(psom::ssom_loss(s, grid), oracle::ssom(gen_fixture::to_rows(s), grid.rows(), grid.cols()), 1e-12);
  }
  EXPECT_THROW(psom::ssom_loss(Matrix::Constant(1, 5, 0.2), GridSpec(2, 2)), DimensionError);
}

TEST(SsomLoss, NeighbourhoodMassBeatsScatteredMass) {
  gen_fixture::Gen g(9);
  const GridSpec grid(4, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const Matrix w = g.row_stochastic(1, 5);
    const int centre = g.integer(0, 15);
    const auto nb = som::neighbors(grid, centre);
    Matrix packed = Matrix::Zero(1, 16), scattered = Matrix::Zero(1, 16);
    packed(0, centre) = w(0, 0);
    for (int k = 0; k < 4; ++k) packed(0, nb[static_cast<std::size_t>(k)]) = w(0, k + 1);
    // Same masses on one colour of the checkerboard, where no two nodes touch.
    const int shift = g.integer(0, 1);
    for (int k = 0; k < 5; ++k) scattered(0, 2 * k + ((k / 2) % 2 == 0 ? shift : 1 - shift)) = w(0, k);
    EXPECT_LT(psom::ssom_loss(packed, grid), psom::ssom_loss(scattered, grid));
  }
}

TEST(PsomLoss, CombinesTerms) {
  gen_fixture::Gen g(10);
  const GridSpec grid(3, 3);
  const Matrix s = g.row_stochastic(6, 9), t = psom::target_distribution(s);
  EXPECT_EQ(psom::psom_loss(s, t, grid, 0.0), psom::cah_loss(s, t));
  const auto rows = gen_fixture::to_rows(s);
  const double expected = oracle::cah(rows, gen_fixture::to_rows(t)) + oracle::ssom(rows, 3, 3);
  EXPECT_NEAR(psom::psom_loss(s, t, grid, 1.0), expected, 1e-12);
  EXPECT_NEAR(psom::psom_loss(s, t, grid, 0.25),
              psom::cah_loss(s, t) + 0.25 * psom::ssom_loss(s, grid), 1e-14);
  EXPECT_THROW(psom::psom_loss(s, t, grid, -1.0), ConfigError);
}

TEST(TapeForms, AgreeWithMatrixForms) {
  gen_fixture::Gen g(11);
  const GridSpec grid(3, 4);
  const Matrix z = g.matrix(7, 3), mu = g.matrix(12, 3);
  nd::Tape tape;
  const auto s = psom::soft_assignments(tape.constant(z), tape.constant(mu), 10.0);
  const Matrix s_ref = psom::soft_assignments(z, mu, 10.0);
  EXPECT_LT((s.value() - s_ref).cwiseAbs().maxCoeff(), 1e-14);
  const Matrix t = psom::target_distribution(s_ref);
  EXPECT_NEAR(psom::cah_loss(s, t).scalar(), psom::cah_loss(s_ref, t), 1e-12);
  EXPECT_NEAR(psom::ssom_loss(s, grid).scalar(), psom::ssom_loss(s_ref, grid), 1e-12);
}

TEST(TapeForms, GradientsMatchFiniteDifferences) {
  gen_fixture::Gen g(12);
  const GridSpec grid(2, 3);
  nd::ParamVector p;
  p.add_block("z", 5, 2);
  p.add_block("mu", 6, 2);
  p.values() = g.matrix(p.size(), 1).col(0);
  const Matrix t = g.row_stochastic(5, 6);
  for (const bool use_ssom : {false, true}) {
    auto loss = [&](nd::Tape& tape, const nd::ParamVector& q, bool grad) {
      const auto z = grad ? tape.variable(q.block("z")) : tape.constant(q.block("z"));
      const auto mu = grad ? tape.variable(q.block("mu")) : tape.constant(q.block("mu"));
      const auto s = psom::soft_assignments(z, mu, 10.0);
      return std::make_tuple(use_ssom ? psom::ssom_loss(s, grid) : psom::cah_loss(s, t), z, mu);
    };
    nd::Tape tape;
    auto [l, z, mu] = loss(tape, p, true);
    tape.backward(l);
    nd::ParamVector analytic = p.zeros_like();
    analytic.block("z") = tape.grad(z);
    analytic.block("mu") = tape.grad(mu);
    const auto f = [&](const nd::ParamVector& q) {
      nd::Tape tp;
      return std::get<0>(loss(tp, q, false)).scalar();
    };
    EXPECT_TRUE(nd::check_gradient(f, p, analytic, 1e-5, 1e-6).passed()) << (use_ssom ? "ssom" : "cah");
  }
}
