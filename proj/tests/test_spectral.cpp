#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "chvi/spectral.hpp"

using namespace chvi;

namespace {

constexpr double pi = std::numbers::pi;

// Stiffness matrix int phi_i' phi_j' dx of the first n sine modes by
// composite 5-point Gauss-Legendre quadrature, and its eigendecomposition.
struct DenseOracle {
  Eigen::MatrixXd K;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd Q;

  explicit DenseOracle(int n) : K(Eigen::MatrixXd::Zero(n, n)) {
    const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                          0.2369268850561891};
    const int panels = 400;
    for (int p = 0; p < panels; ++p) {
      const double a = static_cast<double>(p) / panels, half = 0.5 / panels;
      for (int q = 0; q < 5; ++q) {
        const double x = a + half * (1.0 + gx[q]);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double di = std::sqrt(2.0) * (i + 1) * pi * std::cos((i + 1) * pi * x);
            const double dj = std::sqrt(2.0) * (j + 1) * pi * std::cos((j + 1) * pi * x);
            K(i, j) += half * gw[q] * di * dj;
          }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    lambda = es.eigenvalues();
    Q = es.eigenvectors();
  }

  Eigen::MatrixXd power(double s) const {
    return Q * lambda.array().pow(s).matrix().asDiagonal() * Q.transpose();
  }
};

SpectralField random_field(const Grid &g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  SpectralField f = SpectralField::zero(g);
  for (int k = 0; k < g.size(); ++k)
    f.coeffs[k] = d(rng);
  return f;
}

SpectralField mode(const Grid &g, int index, double value = 1.0) {
  SpectralField f = SpectralField::zero(g);
  f.coeffs[index] = value;
  return f;
}

double rel(const Eigen::VectorXd &a, const Eigen::VectorXd &b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

} // namespace

TEST(Spectral, GridValidation) {
  EXPECT_THROW(Grid(3, 8), InvalidArgument);
  EXPECT_THROW(Grid(1, 3), InvalidArgument);
  const Grid g(1, 31);
  EXPECT_EQ(g.size(), 31);
  EXPECT_DOUBLE_EQ(g.h(), 1.0 / 32.0);
  EXPECT_EQ(Grid(2, 5).size(), 25);
}

TEST(Spectral, Eigenvalues) {
  const Grid g1(1, 8);
  for (int k = 0; k < 8; ++k)
    EXPECT_NEAR(g1.eigenvalues()[k], (k + 1) * (k + 1) * pi * pi, 1e-12);
  const Grid g2(2, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      EXPECT_NEAR(g2.eigenvalues()[k * 4 + l], ((k + 1) * (k + 1) + (l + 1) * (l + 1)) * pi * pi, 1e-12);
  EXPECT_GT(g2.eigenvalues().minCoeff(), 0.0);
}

TEST(Spectral, SineIsModeOne) {
  const Grid g(1, 31);
  const auto values = sample(g, [](double x, double) { return std::sin(pi * x); });
  const SpectralField f = to_spectral(values, g);
  EXPECT_NEAR(f.coeffs[0], 1.0 / std::sqrt(2.0), 1e-14);
  for (int k = 1; k < g.size(); ++k)
    EXPECT_LE(std::abs(f.coeffs[k]), 1e-12);
}

TEST(Spectral, ZeroValues) {
  const Grid g(1, 16);
  const std::vector<double> zeros(16, 0.0);
  EXPECT_EQ(to_spectral(zeros, g).coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spectral, TwoModesAgainstDirectSum) {
  const Grid g(1, 31);
  const double h = g.h();
  std::vector<double> values(31);
  for (int i = 0; i < 31; ++i) {
    const double x = (i + 1) * h;
    values[i] = std::sin(pi * x) + 0.5 * std::sin(3 * pi * x);
  }
  const SpectralField f = to_spectral(values, g);
  for (int k = 0; k < 31; ++k) {
    double direct = 0.0;
    for (int i = 0; i < 31; ++i)
      direct += h * std::sqrt(2.0) * std::sin((k + 1) * pi * (i + 1) * h) * values[i];
    EXPECT_NEAR(f.coeffs[k], direct, 1e-13);
    if (k != 0 && k != 2)
      EXPECT_LE(std::abs(f.coeffs[k]), 1e-12);
  }
  EXPECT_NEAR(f.coeffs[0] / f.coeffs[2], 2.0, 1e-12);
}

TEST(Spectral, ShapeMismatch) {
  const Grid g(1, 8);
  const std::vector<double> wrong(9, 0.0);
  EXPECT_THROW(to_spectral(wrong, g), InvalidArgument);
  EXPECT_THROW(to_spectral(std::vector<double>(8, 0.0), Grid(2, 8)), InvalidArgument);
}

TEST(Spectral, RoundTrip1D2D) {
  for (const Grid &g : {Grid(1, 63), Grid(2, 12)}) {
    const SpectralField f = random_field(g, 3);
    const Eigen::VectorXd x = to_physical(f);
    const SpectralField back = to_spectral(std::span<const double>(x.data(), x.size()), g);
    EXPECT_LE(rel(back.coeffs, f.coeffs), 1e-12);
  }
}

TEST(Spectral, TwoDimensionalProductMode) {
  const Grid g(2, 8);
  const auto values = sample(g, [](double x, double y) { return std::sin(pi * x) * std::sin(2 * pi * y); });
  const SpectralField f = to_spectral(values, g);
  EXPECT_NEAR(f.coeffs[0 * 8 + 1], 0.5, 1e-14);
  EXPECT_NEAR(f.coeffs.norm(), 0.5, 1e-13);
}

TEST(Spectral, PowerExamples) {
  const Grid g(1, 16);
  const SpectralField f = random_field(g, 5);
  EXPECT_EQ(apply_power(f, 0.0).coeffs, f.coeffs);
  const SpectralField m1 = apply_power(mode(g, 0), 1.0);
  EXPECT_NEAR(m1.coeffs[0], pi * pi, 1e-13);
  EXPECT_NEAR(m1.coeffs[0], 9.8696044, 1e-7);
  EXPECT_LE(rel(apply_power(apply_power(f, -1.0), 1.0).coeffs, f.coeffs), 1e-12);
}

TEST(Spectral, UnitModeNorms) {
  const Norms n = norms(mode(Grid(1, 8), 0));
  EXPECT_NEAR(n.H, 1.0, 1e-15);
  EXPECT_NEAR(n.V, pi, 1e-14);
  EXPECT_NEAR(n.Vprime, 1.0 / pi, 1e-15);
  EXPECT_NEAR(n.DA, pi * pi, 1e-13);
  const Norms z = norms(SpectralField::zero(Grid(1, 8)));
  EXPECT_EQ(z.H + z.V + z.Vprime + z.DA, 0.0);
}

TEST(Spectral, DenseOracleAtEight) {
  const Grid g(1, 8);
  const DenseOracle oracle(8);
  EXPECT_LE(rel(oracle.lambda, g.eigenvalues()), 1e-12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SpectralField u = random_field(g, seed);
    const SpectralField v = random_field(g, seed + 100);
    const Eigen::VectorXd &c = u.coeffs;
    const Norms n = norms(u);
    EXPECT_NEAR(n.H, std::sqrt(c.dot(c)), 1e-12 * n.H);
    EXPECT_NEAR(n.V, std::sqrt(c.dot(oracle.K * c)), 1e-12 * n.V);
    EXPECT_NEAR(n.Vprime, std::sqrt(c.dot(oracle.power(-1.0) * c)), 1e-12 * n.Vprime);
    EXPECT_NEAR(n.DA, std::sqrt(c.dot(oracle.power(2.0) * c)), 1e-12 * n.DA);
    for (double s : {-1.5, -0.5, 0.5, 1.0, 2.0})
      EXPECT_LE(rel(apply_power(u, s).coeffs, oracle.power(s) * c), 1e-12) << "s=" << s;
    const double dense = v.coeffs.dot(oracle.power(-1.0) * c);
    EXPECT_NEAR(inner_Vprime(u, v), dense, 1e-12 * std::abs(dense) + 1e-15);
    EXPECT_NEAR(inner_V(u, v), v.coeffs.dot(oracle.K * c), 1e-12 * (n.V * norms(v).V));
  }
}

TEST(Spectral, InnerProducts) {
  const Grid g(1, 16);
  const SpectralField u = random_field(g, 8), v = random_field(g, 9);
  EXPECT_DOUBLE_EQ(inner_Vprime(u, v), inner_Vprime(v, u));
  EXPECT_NEAR(inner_Vprime(u, u), std::pow(norms(u).Vprime, 2), 1e-14);
  EXPECT_EQ(inner_Vprime(mode(g, 1), mode(g, 4)), 0.0);
  EXPECT_NEAR(inner_H(u, u), std::pow(norms(u).H, 2), 1e-12);
  EXPECT_THROW(inner_Vprime(u, SpectralField::zero(Grid(1, 8))), InvalidArgument);
}

TEST(Spectral, InterpolationAndPoincare) {
  for (const Grid &g : {Grid(1, 63), Grid(2, 10)}) {
    const double mu1 = g.eigenvalues().minCoeff();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Norms n = norms(random_field(g, seed));
      EXPECT_LE(n.H * n.H, n.V * n.Vprime * (1 + 1e-14));
      EXPECT_LE(n.Vprime, n.H / std::sqrt(mu1) * (1 + 1e-14));
      EXPECT_LE(n.H / std::sqrt(mu1), n.V / mu1 * (1 + 1e-14));
    }
  }
  const Norms m = norms(mode(Grid(1, 8), 0));
  EXPECT_NEAR(m.Vprime, m.H / pi, 1e-15);
  EXPECT_NEAR(m.H / pi, m.V / (pi * pi), 1e-15);
}

TEST(Spectral, SemigroupAndParsevalAt63) {
  const Grid g(1, 63);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SpectralField u = random_field(g, seed);
    for (auto [s1, s2] : {std::pair{0.5, 0.5}, {-1.0, 2.0}, {0.25, -0.75}, {1.5, -1.5}})
      EXPECT_LE(rel(apply_power(apply_power(u, s1), s2).coeffs, apply_power(u, s1 + s2).coeffs), 1e-12);
    const Eigen::VectorXd x = to_physical(u);
    EXPECT_NEAR(g.h() * x.squaredNorm(), u.coeffs.squaredNorm(), 1e-12 * u.coeffs.squaredNorm());
  }
}

TEST(Spectral, ParsevalTwoDimensions) {
  const Grid g(2, 15);
  const SpectralField u = random_field(g, 4);
  const Eigen::VectorXd x = to_physical(u);
  EXPECT_NEAR(g.h() * g.h() * x.squaredNorm(), u.coeffs.squaredNorm(), 1e-12 * u.coeffs.squaredNorm());
}
