#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "chvi/potential.hpp"

using namespace chvi;

namespace {

PotentialSpec spec_of(PotentialKind kind) {
  PotentialSpec s;
  s.kind = kind;
  return s;
}

const PotentialSpec logarithmic = spec_of(PotentialKind::Logarithmic);
const PotentialSpec obstacle = spec_of(PotentialKind::Obstacle);

// Plain bisection on x + eps*log((1+x)/(1-x)) = r over [0, r], r in (0, 1).
double bisect_log_resolvent(double r, double eps) {
  double lo = 0.0, hi = r;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    if (m + eps * std::log((1.0 + m) / (1.0 - m)) > r)
      hi = m;
    else
      lo = m;
  }
  return 0.5 * (lo + hi);
}

struct Sample {
  PotentialSpec spec;
  double r;
  double eps;
};

std::vector<Sample> random_samples(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> r_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> log_eps(std::log(1e-2), 0.0);
  std::vector<Sample> out;
  for (int i = 0; i < count; ++i) {
    const PotentialSpec &s = i % 2 ? obstacle : logarithmic;
    out.push_back({s, r_dist(rng), std::exp(log_eps(rng))});
  }
  return out;
}

} // namespace

TEST(Potential, LogarithmicAtOriginIsZero) {
  const YosidaEval y = resolvent(logarithmic, 0.0, 0.1);
  EXPECT_EQ(y.resolvent, 0.0);
  EXPECT_EQ(y.yosida, 0.0);
  EXPECT_EQ(y.moreau, 0.0);
}

TEST(Potential, ObstacleProjection) {
  const YosidaEval y = resolvent(obstacle, 1.5, 0.1);
  EXPECT_EQ(y.resolvent, 1.0);
  EXPECT_NEAR(y.yosida, 5.0, 1e-14);
  EXPECT_NEAR(y.moreau, 1.25, 1e-14);
  EXPECT_EQ(y.residual, 0.0);
}

TEST(Potential, LogarithmicResolventPinned) {
  // 40-digit bisection, frozen
  constexpr double x_star = 0.4123194811138828860414198;
  constexpr double yosida = 0.8768051888611711395858019;
  constexpr double moreau = 0.2136247883885123918697829;
  const YosidaEval y = resolvent(logarithmic, 0.5, 0.1);
  EXPECT_GT(y.resolvent, 0.0);
  EXPECT_LT(y.resolvent, 0.5);
  EXPECT_NEAR(y.resolvent, x_star, 1e-14);
  EXPECT_NEAR(y.resolvent, bisect_log_resolvent(0.5, 0.1), 1e-14);
  EXPECT_NEAR(y.yosida, yosida, 1e-12);
  EXPECT_NEAR(y.moreau, moreau, 1e-13);
  EXPECT_LE(y.residual, 1e-12);
}

TEST(Potential, RejectsInvalidArguments) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(resolvent(logarithmic, nan, 0.1), InvalidArgument);
  EXPECT_THROW(resolvent(logarithmic, inf, 0.1), InvalidArgument);
  EXPECT_THROW(resolvent(logarithmic, 0.3, 0.0), InvalidArgument);
  EXPECT_THROW(resolvent(logarithmic, 0.3, -0.1), InvalidArgument);
  EXPECT_THROW(resolvent(obstacle, 0.3, nan), InvalidArgument);
  EXPECT_NO_THROW(resolvent(logarithmic, 0.3, 1.0));
}

TEST(Potential, Normalization) {
  for (auto kind : {PotentialKind::Logarithmic, PotentialKind::Obstacle, PotentialKind::DoubleWellSmooth}) {
    const PotentialSpec s = spec_of(kind);
    EXPECT_EQ(s.j(0.0), 0.0);
    EXPECT_EQ(s.beta(0.0), 0.0);
  }
  EXPECT_TRUE(std::isinf(logarithmic.j(1.5)));
  EXPECT_TRUE(std::isinf(obstacle.j(-1.0001)));
  EXPECT_EQ(obstacle.j(0.7), 0.0);
  EXPECT_NEAR(logarithmic.j(0.5), 0.5 * std::log(0.5) + 1.5 * std::log(1.5), 1e-15);
  EXPECT_NEAR(logarithmic.j(1.0), 2.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(logarithmic.beta(0.5), std::log(3.0), 1e-15);
}

TEST(Potential, KindNames) {
  for (auto kind : {PotentialKind::Logarithmic, PotentialKind::Obstacle, PotentialKind::DoubleWellSmooth})
    EXPECT_EQ(parse_potential_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_potential_kind("quartic").has_value());
}

TEST(Potential, CurveIsOddForLogarithmic) {
  const std::vector<double> grid{-0.2, 0.0, 0.2};
  const auto c = yosida_curve(logarithmic, 0.5, grid);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].yosida, 0.0);
  EXPECT_NEAR(c[0].yosida, -c[2].yosida, 1e-15);
  EXPECT_GT(c[2].yosida, 0.0);
}

TEST(Potential, CurveObstacle) {
  const std::vector<double> grid{-2.0, 0.0, 2.0};
  const auto c = yosida_curve(obstacle, 0.1, grid);
  EXPECT_NEAR(c[0].yosida, -10.0, 1e-13);
  EXPECT_EQ(c[1].yosida, 0.0);
  EXPECT_NEAR(c[2].yosida, 10.0, 1e-13);
}

TEST(Potential, CurveRequiresSortedGrid) {
  const std::vector<double> grid{0.2, 0.1};
  EXPECT_THROW(yosida_curve(obstacle, 0.1, grid), InvalidArgument);
}

TEST(Potential, SmallerEpsApproximatesBetaBetter) {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i)
    grid.push_back(-0.9 + 1.8 * i / 100.0);
  auto max_error = [&](double eps) {
    double e = 0.0;
    for (const auto &y : yosida_curve(logarithmic, eps, grid))
      e = std::max(e, std::abs(y.yosida - logarithmic.beta(y.r)));
    return e;
  };
  EXPECT_LT(max_error(0.01), max_error(0.1));
}

TEST(Potential, PointwiseConvergenceIsMonotone) {
  for (double r : {-0.95, -0.5, 0.1, 0.7, 0.99}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const double err = std::abs(resolvent(logarithmic, r, eps).yosida - logarithmic.beta(r));
      EXPECT_LT(err, prev) << "r=" << r << " eps=" << eps;
      prev = err;
    }
    EXPECT_LT(prev, 1e-2 * std::abs(logarithmic.beta(r)) + 1e-3);
  }
}

TEST(Potential, ResidualsOnRandomSamples) {
  for (const auto &s : random_samples(10000, 7)) {
    const YosidaEval y = resolvent(s.spec, s.r, s.eps);
    ASSERT_LE(y.residual, 1e-12) << "r=" << s.r << " eps=" << s.eps;
    if (s.spec.kind == PotentialKind::Logarithmic) {
      // x may round to +-1 in double; the gap 1 - |x| is kept in log form
      ASSERT_GT(y.boundary_gap, 0.0);
      ASSERT_GE(y.resolvent, -1.0);
      ASSERT_LE(y.resolvent, 1.0);
    } else {
      ASSERT_GE(y.resolvent, -1.0);
      ASSERT_LE(y.resolvent, 1.0);
    }
  }
}

TEST(Potential, MonotoneLipschitzNonexpansive) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r_dist(-3.0, 3.0);
  for (const auto &s : random_samples(4000, 13)) {
    const double r2 = r_dist(rng);
    const double lo = std::min(s.r, r2), hi = std::max(s.r, r2);
    const YosidaEval a = resolvent(s.spec, lo, s.eps);
    const YosidaEval b = resolvent(s.spec, hi, s.eps);
    ASSERT_LE(a.yosida, b.yosida + 1e-12);
    ASSERT_LE(std::abs(b.yosida - a.yosida), (hi - lo) / s.eps * (1.0 + 1e-12) + 1e-12);
    ASSERT_LE(std::abs(b.resolvent - a.resolvent), (hi - lo) + 1e-14);
  }
}

TEST(Potential, EnvelopeOrdering) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> log_eps(std::log(1e-3), 0.0);
  for (const PotentialSpec &s : {logarithmic, obstacle}) {
    for (int i = 0; i < 2000; ++i) {
      const double r = r_dist(rng);
      double e1 = std::exp(log_eps(rng)), e2 = std::exp(log_eps(rng));
      if (e1 > e2)
        std::swap(e1, e2);
      const double m1 = resolvent(s, r, e1).moreau;
      const double m2 = resolvent(s, r, e2).moreau;
      ASSERT_GE(m2, 0.0);
      ASSERT_LE(m2, m1 + 1e-14);
      ASSERT_LE(m1, s.j(r) + 1e-14);
    }
  }
}

TEST(Potential, MoreauDerivativeIsYosida) {
  constexpr double h = 1e-6;
  std::mt19937_64 rng(19);
  for (const auto &s : random_samples(2000, 23)) {
    if (s.spec.kind == PotentialKind::Obstacle && std::abs(std::abs(s.r) - 1.0) < 1e-4)
      continue; // second derivative jumps at the obstacle
    const double fd = (resolvent(s.spec, s.r + h, s.eps).moreau - resolvent(s.spec, s.r - h, s.eps).moreau) / (2 * h);
    const double y = resolvent(s.spec, s.r, s.eps).yosida;
    ASSERT_LE(std::abs(fd - y), 1e-6 * std::max(1.0, std::abs(y))) << "r=" << s.r << " eps=" << s.eps;
  }
}

TEST(Potential, L1BoundObstacle) {
  const std::vector<double> eps{0.1, 0.01};
  const L1BoundResult r = verify_l1_bound(obstacle, eps, -3.0, 3.0, 1000);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.c1, 0.5);
  EXPECT_LE(r.c2, 0.5);
}

TEST(Potential, L1BoundLogarithmic) {
  const std::vector<double> eps{0.1, 0.01, 0.001};
  const L1BoundResult r = verify_l1_bound(logarithmic, eps, -5.0, 5.0, 2000);
  EXPECT_TRUE(r.ok);
  EXPECT_GT(r.c2, 0.0);
  ASSERT_EQ(r.c2_per_eps.size(), 3u);
  // spread between rungs shrinks and all stay below the eps-free constant
  EXPECT_LE(std::abs(r.c2_per_eps[2] - r.c2_per_eps[1]), std::abs(r.c2_per_eps[1] - r.c2_per_eps[0]));
  double limit = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double x = -1.0 + 2.0 * i / 20000.0;
    const double b = logarithmic.beta(x);
    limit = std::max(limit, 0.5 * std::abs(b) - b * x);
  }
  EXPECT_LE(r.c2, limit * (1.0 + 1e-6));
}

TEST(Potential, L1BoundSinglePoint) {
  const std::vector<double> eps{0.5};
  const L1BoundResult r = verify_l1_bound(logarithmic, eps, 0.0, 0.0, 1);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.c2, 0.0);
}

TEST(Potential, L1BoundHoldsOnEverySample) {
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  for (const PotentialSpec &s : {logarithmic, obstacle}) {
    const L1BoundResult r = verify_l1_bound(s, eps, -5.0, 5.0, 2000);
    ASSERT_TRUE(r.ok);
    for (double e : eps)
      for (int i = 0; i < 2000; ++i) {
        const double x = -5.0 + 10.0 * i / 1999.0;
        const double b = resolvent(s, x, e).yosida;
        ASSERT_GE(b * x, r.c1 * std::abs(b) - r.c2 - 1e-12);
      }
  }
}

TEST(Potential, SmoothControlBypassesRegularization) {
  PotentialSpec s = spec_of(PotentialKind::DoubleWellSmooth);
  s.scale = 0.25;
  for (double r : {-2.0, -0.3, 0.0, 0.8, 3.0}) {
    const NonlinearEval a = regularized_nonlinearity(s, 0.1, r);
    const NonlinearEval b = regularized_nonlinearity(s, 0.001, r);
    EXPECT_EQ(a.value, b.value);
    EXPECT_DOUBLE_EQ(a.value, s.beta(r));
    EXPECT_DOUBLE_EQ(a.energy, s.j(r));
  }
  s.scale = 0.0;
  const NonlinearEval z = regularized_nonlinearity(s, 0.1, 0.7);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.slope, 0.0);
  EXPECT_EQ(z.energy, 0.0);
}

TEST(Potential, SingularSlopeMatchesDifferenceQuotient) {
  for (const PotentialSpec &s : {logarithmic, obstacle})
    for (double r : {-1.7, -0.4, 0.2, 0.95, 1.3}) {
      const double h = 1e-7;
      const double fd = (regularized_nonlinearity(s, 0.05, r + h).value -
                         regularized_nonlinearity(s, 0.05, r - h).value) / (2 * h);
      EXPECT_NEAR(regularized_nonlinearity(s, 0.05, r).slope, fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
}
