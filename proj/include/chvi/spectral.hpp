#ifndef CHVI_SPECTRAL_HPP
#define CHVI_SPECTRAL_HPP

// Operator calculus for the Dirichlet Laplacian A on the unit interval/square
// in its exact eigenbasis phi_k(x) = sqrt(2) sin(k pi x) (unit L2 norm).
// Fields are coefficient vectors; A^s and the H, V, V', D(A) norms are
// diagonal weighted sums.

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chvi/errors.hpp"

namespace chvi {

/// Sine collocation on m interior points of the unit interval, evaluating the
/// first n modes. With m >= n the discrete transform is exact on those modes.
struct Collocation {
  int points = 0;         // m
  int modes = 0;          // n
  double weight = 0.0;    // 1/(m+1), trapezoid weight per axis
  Eigen::MatrixXd basis;  // m x n, basis(i,k) = sqrt(2) sin((k+1) pi x_i)

  static Collocation make(int points, int modes) {
    Collocation c;
    c.points = points;
    c.modes = modes;
    c.weight = 1.0 / (points + 1);
    c.basis.resize(points, modes);
    for (int i = 0; i < points; ++i) {
      for (int k = 0; k < modes; ++k) {
        // reduce (i+1)(k+1) mod 2(m+1) so the sine argument stays small
        const long long q = (static_cast<long long>(i + 1) * (k + 1)) % (2LL * (points + 1));
        c.basis(i, k) = std::numbers::sqrt2 * std::sin(std::numbers::pi * q / (points + 1));
      }
    }
    return c;
  }
};

/// Spectral grid on (0,1)^dim with n modes per axis, collocated on the n
/// interior points x_i = i h, h = 1/(n+1). Cheap to copy; the precomputed
/// tables are shared and immutable.
class Grid {
public:
  Grid() = default;

  Grid(int dim, int n) {
    if (dim != 1 && dim != 2)
      throw InvalidArgument("Grid: dim must be 1 or 2");
    if (n < 4)
      throw InvalidArgument("Grid: n must be >= 4");
    auto t = std::make_shared<Tables>();
    t->dim = dim;
    t->n = n;
    t->colloc = Collocation::make(n, n);
    const int size = dim == 1 ? n : n * n;
    t->eigen.resize(size);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    if (dim == 1) {
      for (int k = 0; k < n; ++k)
        t->eigen[k] = pi2 * (k + 1.0) * (k + 1.0);
    } else {
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          t->eigen[k * n + l] = pi2 * ((k + 1.0) * (k + 1.0) + (l + 1.0) * (l + 1.0));
    }
    tables_ = std::move(t);
  }

  int dim() const { return tables_->dim; }
  int n() const { return tables_->n; }
  double h() const { return 1.0 / (tables_->n + 1); }
  /// Number of modes (and of collocation points): n^dim.
  int size() const { return static_cast<int>(tables_->eigen.size()); }
  const Eigen::VectorXd &eigenvalues() const { return tables_->eigen; }
  const Collocation &collocation() const { return tables_->colloc; }
  bool valid() const { return static_cast<bool>(tables_); }

  friend bool operator==(const Grid &a, const Grid &b) {
    return a.tables_ == b.tables_ || (a.valid() && b.valid() && a.dim() == b.dim() && a.n() == b.n());
  }

private:
  struct Tables {
    int dim = 1;
    int n = 0;
    Eigen::VectorXd eigen;
    Collocation colloc;
  };
  std::shared_ptr<const Tables> tables_;
};

/// A field expanded in the sine eigenbasis. Coefficients are ordered by mode
/// index k (1-D) or k*n + l (2-D).
struct SpectralField {
  Grid grid;
  Eigen::VectorXd coeffs;

  static SpectralField zero(const Grid &g) { return {g, Eigen::VectorXd::Zero(g.size())}; }
};

struct Norms {
  double H = 0.0;
  double V = 0.0;
  double Vprime = 0.0;
  double DA = 0.0;
};

namespace detail {

inline void require_same_grid(const SpectralField &u, const SpectralField &v, const char *where) {
  if (!(u.grid == v.grid) || u.coeffs.size() != v.coeffs.size())
    throw InvalidArgument(std::string(where) + ": grid mismatch");
}

} // namespace detail

/// Point values of the modes of a dim-dimensional coefficient vector at the
/// points of a collocation table (row-major in 2-D: index i*m + j).
inline Eigen::VectorXd synthesize(const Collocation &c, int dim, const Eigen::VectorXd &coeffs) {
  if (dim == 1)
    return c.basis * coeffs;
  const int n = c.modes;
  const int m = c.points;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> C(coeffs.data(), n, n);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> U = c.basis * C * c.basis.transpose();
  return Eigen::Map<const Eigen::VectorXd>(U.data(), static_cast<Eigen::Index>(m) * m);
}

/// Discrete sine analysis: inverse of synthesize on the first n modes.
inline Eigen::VectorXd analyze(const Collocation &c, int dim, const Eigen::VectorXd &values) {
  if (dim == 1)
    return c.weight * (c.basis.transpose() * values);
  const int n = c.modes;
  const int m = c.points;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> U(values.data(), m, m);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C =
      (c.weight * c.weight) * (c.basis.transpose() * U * c.basis);
  return Eigen::Map<const Eigen::VectorXd>(C.data(), static_cast<Eigen::Index>(n) * n);
}

/// Coefficients of the sine interpolant of collocation values (boundary
/// values are implicitly zero).
inline SpectralField to_spectral(std::span<const double> values, const Grid &grid) {
  if (static_cast<int>(values.size()) != grid.size())
    throw InvalidArgument("to_spectral: expected " + std::to_string(grid.size()) + " values, got " +
                          std::to_string(values.size()));
  Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  return {grid, analyze(grid.collocation(), grid.dim(), v)};
}

inline Eigen::VectorXd to_physical(const SpectralField &u) {
  return synthesize(u.grid.collocation(), u.grid.dim(), u.coeffs);
}

/// coeffs_k <- mu_k^s coeffs_k
inline SpectralField apply_power(const SpectralField &u, double s) {
  if (s == 0.0)
    return u;
  const Eigen::VectorXd &mu = u.grid.eigenvalues();
  SpectralField out{u.grid, u.coeffs};
  for (Eigen::Index k = 0; k < out.coeffs.size(); ++k)
    out.coeffs[k] *= std::pow(mu[k], s);
  return out;
}

inline Norms norms(const SpectralField &u) {
  const Eigen::VectorXd &mu = u.grid.eigenvalues();
  double h = 0.0, v = 0.0, vp = 0.0, da = 0.0;
  for (Eigen::Index k = 0; k < u.coeffs.size(); ++k) {
    const double c2 = u.coeffs[k] * u.coeffs[k];
    h += c2;
    v += mu[k] * c2;
    vp += c2 / mu[k];
    da += mu[k] * mu[k] * c2;
  }
  return {std::sqrt(h), std::sqrt(v), std::sqrt(vp), std::sqrt(da)};
}

inline double inner_H(const SpectralField &u, const SpectralField &v) {
  detail::require_same_grid(u, v, "inner_H");
  return u.coeffs.dot(v.coeffs);
}

/// (u, v)_* = <v, A^{-1} u>
inline double inner_Vprime(const SpectralField &u, const SpectralField &v) {
  detail::require_same_grid(u, v, "inner_Vprime");
  return (u.coeffs.array() * v.coeffs.array() / u.grid.eigenvalues().array()).sum();
}

inline double inner_V(const SpectralField &u, const SpectralField &v) {
  detail::require_same_grid(u, v, "inner_V");
  return (u.coeffs.array() * v.coeffs.array() * u.grid.eigenvalues().array()).sum();
}

/// Collocation points of the grid along one axis.
inline std::vector<double> axis_points(const Grid &g) {
  std::vector<double> x(g.n());
  for (int i = 0; i < g.n(); ++i)
    x[i] = (i + 1) * g.h();
  return x;
}

/// Samples f at the collocation points (row-major in 2-D).
template <class F>
std::vector<double> sample(const Grid &g, F &&f) {
  const auto x = axis_points(g);
  std::vector<double> out;
  out.reserve(g.size());
  if (g.dim() == 1) {
    for (double xi : x)
      out.push_back(f(xi, 0.0));
  } else {
    for (double xi : x)
      for (double yj : x)
        out.push_back(f(xi, yj));
  }
  return out;
}

} // namespace chvi

#endif // CHVI_SPECTRAL_HPP
