#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mfo/errors.hpp"
#include "mfo/lbfgs.hpp"

namespace mfo {
namespace {

void expect_monotone(const LbfgsResult& r) {
  for (size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].value, r.trace[i - 1].value);
}

TEST(Lbfgs, QuadraticConvergesQuickly) {
  Eigen::VectorXd a(5);
  a << 1, -2, 0.5, 3, -0.25;
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * (x - a);
    return (x - a).squaredNorm();
  };
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Zero(5));
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LT((r.x - a).norm(), 1e-8);
  expect_monotone(r);
}

TEST(Lbfgs, IllConditionedQuadratic) {
  Eigen::VectorXd scale(4);
  scale << 1, 10, 100, 1000;
  const Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * scale.cwiseProduct(x - Eigen::VectorXd::Ones(4));
    return (x - Eigen::VectorXd::Ones(4)).cwiseAbs2().dot(scale);
  };
  LbfgsConfig cfg;
  cfg.gradient_tolerance = 1e-9;
  cfg.relative_decrease_tolerance = 0;
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Zero(4), cfg);
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_LT((r.x - Eigen::VectorXd::Ones(4)).norm(), 1e-9);
}

TEST(Lbfgs, Rosenbrock) {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  LbfgsConfig cfg;
  cfg.max_iterations = 200;
  cfg.gradient_tolerance = 1e-10;
  cfg.relative_decrease_tolerance = 0;
  const auto r = lbfgs_minimize(f, Eigen::Vector2d(-1.2, 1), cfg);
  EXPECT_LE(r.iterations, 200);
  EXPECT_LT((r.x - Eigen::Vector2d(1, 1)).norm(), 1e-6);
  expect_monotone(r);
}

TEST(Lbfgs, ZeroGradientStart) {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * x;
    return x.squaredNorm();
  };
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(r.termination, Termination::kConverged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.evaluations, 1);
}

TEST(Lbfgs, NonFiniteStartThrows) {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = x;
    return std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(lbfgs_minimize(f, Eigen::VectorXd::Ones(2)), NumericError);
}

TEST(Lbfgs, ConvergedImpliesSmallGradient) {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    // smooth, non-quadratic
    g.resize(x.size());
    double v = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      v += std::cosh(x[i] - 0.1 * i);
      g[i] = std::sinh(x[i] - 0.1 * i);
    }
    return v;
  };
  LbfgsConfig cfg;
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Constant(6, 2.0), cfg);
  ASSERT_EQ(r.termination, Termination::kConverged);
  EXPECT_LE(r.gradient.norm(), cfg.gradient_tolerance);
  expect_monotone(r);
}

TEST(Lbfgs, NonFiniteRegionsAreBacktracked) {
  // log barrier: infinite outside x > 0
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(1);
    if (x[0] <= 0) {
      g[0] = std::numeric_limits<double>::quiet_NaN();
      return std::numeric_limits<double>::infinity();
    }
    g[0] = 1 - 1 / x[0];
    return x[0] - std::log(x[0]);
  };
  const auto r = lbfgs_minimize(f, Eigen::VectorXd::Constant(1, 8.0));
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  expect_monotone(r);
}

TEST(Lbfgs, Deterministic) {
  const Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 4 * x.array().cube().matrix() - x;
    return x.array().pow(4).sum() - 0.5 * x.squaredNorm();
  };
  const auto a = lbfgs_minimize(f, Eigen::VectorXd::LinSpaced(5, 0.1, 2));
  const auto b = lbfgs_minimize(f, Eigen::VectorXd::LinSpaced(5, 0.1, 2));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.trace.size(), b.trace.size());
}

TEST(Lbfgs, ConfigValidation) {
  LbfgsConfig c;
  c.c1 = 0.95;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LbfgsConfig{};
  c.memory = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Lbfgs, TraceCsv) {
  std::vector<IterationRecord> t{{0, 2.5, 1.0, 0.0, 1}, {1, 0.5, 0.25, 1.0, 3}};
  EXPECT_EQ(trace_to_csv(t), "iteration,objective,gradient_norm,step,evaluations\n0,2.5,1,0,1\n1,0.5,0.25,1,3\n");
  EXPECT_STREQ(termination_name(Termination::kLineSearchFailure), "line-search-failure");
  EXPECT_STREQ(termination_name(Termination::kMaxIterations), "max-iter");
}

}  // namespace
}  // namespace mfo
