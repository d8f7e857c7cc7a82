#ifndef CHVI_DYNAMICS_HPP
#define CHVI_DYNAMICS_HPP

// Implicit Euler time stepping for the Yosida-regularized viscous
// Cahn-Hilliard system with inertia
//
//   alpha u_tt + u_t + A w = 0,
//   w = delta u_t + A u + beta_eps(u) - lambda u,
//
// written as a first-order system in (u, v = u_t), together with the discrete
// energy ledger.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "chvi/errors.hpp"
#include "chvi/potential.hpp"
#include "chvi/spectral.hpp"

namespace chvi {

struct SimConfig {
  double alpha = 1.0;
  double delta = 1.0;
  double lambda = 0.0;
  double eps = 0.1;
  double T = 1.0;
  double dt = 1e-3;
  PotentialSpec potential;
  Grid grid;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  bool dealias = false;
  int max_halvings = 10;

  /// Number of macro steps covering [0, T].
  std::int64_t steps() const { return std::max<std::int64_t>(1, std::llround(T / dt)); }

  /// Throws InvalidArgument naming the first offending field.
  void validate() const {
    auto fail = [](const std::string &what) { throw InvalidArgument("SimConfig: " + what); };
    if (!(std::isfinite(alpha) && alpha > 0.0))
      fail("alpha must be > 0");
    if (!(std::isfinite(delta) && delta > 0.0))
      fail("delta must be > 0");
    if (!(std::isfinite(lambda) && lambda >= 0.0))
      fail("lambda must be >= 0");
    if (!(std::isfinite(eps) && eps > 0.0 && eps < 1.0))
      fail("eps must lie in (0,1)");
    if (!(std::isfinite(T) && T > 0.0))
      fail("T must be > 0");
    if (!(std::isfinite(dt) && dt > 0.0 && dt <= T))
      fail("dt must lie in (0, T]");
    if (!(std::isfinite(newton_tol) && newton_tol > 0.0))
      fail("newton tolerance must be > 0");
    if (newton_max_iter < 1)
      fail("newton max_iter must be >= 1");
    if (!grid.valid())
      fail("grid not set");
  }
};

struct SimState {
  SpectralField u;
  SpectralField v;
  double t = 0.0;
  std::int64_t step = 0;
  double dissipation_integral = 0.0; // running sum of dt (delta |v|_H^2 + |v|_V'^2)

  static SimState zero(const Grid &g) { return {SpectralField::zero(g), SpectralField::zero(g), 0.0, 0, 0.0}; }
};

struct EnergyLedger {
  double kinetic = 0.0;   // alpha/2 |v|_V'^2
  double dirichlet = 0.0; // 1/2 |A^{1/2} u|_H^2
  double potential = 0.0; // quadrature of j_eps(u)
  double concave = 0.0;   // lambda/2 |u|_H^2
  double total = 0.0;
  double inequality_residual = 0.0;
};

/// Outcome of one macro step.
struct StepOutcome {
  SimState state;
  int newton_iters = 0;
  int halvings = 0;       // deepest dt-halving level used
  double residual = 0.0;  // V' norm of the final nonlinear residual
};

/// (I + eps A)^{-1} applied to both initial fields. u0 must take values in
/// [-1,1] at the collocation points (tolerance 1e-12).
inline std::pair<SpectralField, SpectralField> regularize_initial_data(const SpectralField &u0,
                                                                       const SpectralField &u1, double eps) {
  if (!(std::isfinite(eps) && eps > 0.0))
    throw InvalidArgument("regularize_initial_data: eps must be > 0");
  detail::require_same_grid(u0, u1, "regularize_initial_data");
  const Eigen::VectorXd nodes = to_physical(u0);
  const double peak = nodes.size() ? nodes.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 1.0 + 1e-12)
    throw ConstraintViolation("regularize_initial_data: max|u0| = " + std::to_string(peak) + " exceeds 1");
  const Eigen::ArrayXd damp = 1.0 / (1.0 + eps * u0.grid.eigenvalues().array());
  SpectralField a{u0.grid, (u0.coeffs.array() * damp).matrix()};
  SpectralField b{u1.grid, (u1.coeffs.array() * damp).matrix()};
  return {std::move(a), std::move(b)};
}

/// Stateless stepper bound to one configuration. Holds the collocation table
/// used for the nonlinear term (the grid's own, or a 3/2-padded one).
class Integrator {
public:
  explicit Integrator(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    cfg_.potential.lambda = cfg_.lambda;
    const int n = cfg_.grid.n();
    colloc_ = cfg_.dealias ? Collocation::make((3 * (n + 1)) / 2 - 1, n) : cfg_.grid.collocation();
  }

  const SimConfig &config() const { return cfg_; }
  const Collocation &nonlinear_collocation() const { return colloc_; }

  /// Quadrature weight of one nonlinear collocation node.
  double node_weight() const { return cfg_.grid.dim() == 1 ? colloc_.weight : colloc_.weight * colloc_.weight; }

  /// Point values of u at the nonlinear collocation nodes.
  Eigen::VectorXd nodes(const Eigen::VectorXd &coeffs) const { return synthesize(colloc_, cfg_.grid.dim(), coeffs); }

  /// Coefficients of the interpolant of beta_eps(u).
  Eigen::VectorXd beta_coeffs(const Eigen::VectorXd &u_coeffs) const {
    const Eigen::VectorXd x = nodes(u_coeffs);
    Eigen::VectorXd b(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      b[i] = regularized_nonlinearity(cfg_.potential, cfg_.eps, x[i]).value;
    return analyze(colloc_, cfg_.grid.dim(), b);
  }

  /// Quadrature of j_eps(u) over the domain.
  double potential_energy(const Eigen::VectorXd &u_coeffs) const {
    const Eigen::VectorXd x = nodes(u_coeffs);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      sum += regularized_nonlinearity(cfg_.potential, cfg_.eps, x[i]).energy;
    return node_weight() * sum;
  }

  EnergyLedger energy(const SimState &s) const {
    const Norms nu = norms(s.u);
    const Norms nv = norms(s.v);
    EnergyLedger e;
    e.kinetic = 0.5 * cfg_.alpha * nv.Vprime * nv.Vprime;
    e.dirichlet = 0.5 * nu.V * nu.V;
    e.potential = potential_energy(s.u.coeffs);
    e.concave = 0.5 * cfg_.lambda * nu.H * nu.H;
    e.total = e.kinetic + e.dirichlet + e.potential - e.concave;
    return e;
  }

  /// One macro step of size dt. On Newton failure the step is redone as two
  /// half steps, recursively, up to max_halvings levels.
  StepOutcome advance(const SimState &s) const {
    StepOutcome out;
    out.state = s;
    substep(out, cfg_.dt, 0);
    out.state.step = s.step + 1;
    out.state.t = static_cast<double>(out.state.step) * cfg_.dt;
    return out;
  }

  SimState step(const SimState &s) const { return advance(s).state; }

private:
  struct Attempt {
    bool converged = false;
    int iters = 0;
    double residual = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u;
    Eigen::VectorXd v;
  };

  void substep(StepOutcome &out, double dt, int level) const {
    Attempt a = solve(out.state.u.coeffs, out.state.v.coeffs, dt);
    out.newton_iters += a.iters;
    if (a.converged) {
      out.state.u.coeffs = std::move(a.u);
      out.state.v.coeffs = std::move(a.v);
      const Norms nv = norms(out.state.v);
      out.state.dissipation_integral += dt * (cfg_.delta * nv.H * nv.H + nv.Vprime * nv.Vprime);
      out.residual = a.residual;
      return;
    }
    if (level >= cfg_.max_halvings)
      throw StepFailure("Newton did not converge after " + std::to_string(level) +
                            " dt halvings (residual " + std::to_string(a.residual) + ")",
                        a.residual);
    out.halvings = std::max(out.halvings, level + 1);
    substep(out, 0.5 * dt, level + 1);
    substep(out, 0.5 * dt, level + 1);
  }

  // Newton on the new velocity v; u_new = u + dt v. The residual is the
  // momentum equation multiplied by A^{-1}:
  //   G(v) = A^{-1}((alpha/dt + 1) v - (alpha/dt) v_old) + delta v
  //          + A u_new + P beta_eps(u_new) - lambda u_new,
  // whose Jacobian is symmetric. The V' norm of the original residual equals
  // |A^{1/2} G|_H.
  Attempt solve(const Eigen::VectorXd &u_old, const Eigen::VectorXd &v_old, double dt) const {
    const Eigen::VectorXd &mu = cfg_.grid.eigenvalues();
    const int dim = cfg_.grid.dim();
    const double a_dt = cfg_.alpha / dt;
    const Eigen::ArrayXd diag =
        (a_dt + 1.0) / mu.array() + cfg_.delta + dt * mu.array() - dt * cfg_.lambda;
    const Eigen::ArrayXd rhs = a_dt * v_old.array() / mu.array();

    Attempt at;
    Eigen::VectorXd v = v_old;
    Eigen::VectorXd u = u_old + dt * v;
    Eigen::VectorXd G(mu.size());
    Eigen::VectorXd slopes;
    auto residual = [&]() {
      const Eigen::VectorXd x = nodes(u);
      Eigen::VectorXd b(x.size());
      slopes.resize(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const NonlinearEval e = regularized_nonlinearity(cfg_.potential, cfg_.eps, x[i]);
        b[i] = e.value;
        slopes[i] = e.slope;
      }
      G = (diag * v.array() - rhs + mu.array() * u_old.array() - cfg_.lambda * u_old.array()).matrix() +
          analyze(colloc_, dim, b);
      return std::sqrt((mu.array() * G.array().square()).sum());
    };

    double res = residual();
    for (int it = 0; it <= cfg_.newton_max_iter; ++it) {
      if (!std::isfinite(res))
        break;
      at.residual = res;
      if (res <= cfg_.newton_tol) {
        at.converged = true;
        at.u = std::move(u);
        at.v = std::move(v);
        return at;
      }
      if (it == cfg_.newton_max_iter)
        break;
      Eigen::MatrixXd J = dt * nonlinear_jacobian(slopes);
      J.diagonal() += diag.matrix();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(J);
      if (ldlt.info() != Eigen::Success)
        break;
      v -= ldlt.solve(G);
      u = u_old + dt * v;
      ++at.iters;
      res = residual();
    }
    at.residual = res;
    return at;
  }

  // Galerkin matrix of pointwise multiplication by d at the collocation
  // nodes: w^dim E^T diag(d) E (tensorized in 2-D).
  Eigen::MatrixXd nonlinear_jacobian(const Eigen::VectorXd &d) const {
    const Eigen::MatrixXd &E = colloc_.basis;
    const int n = colloc_.modes;
    const int m = colloc_.points;
    if (cfg_.grid.dim() == 1)
      return colloc_.weight * (E.transpose() * d.asDiagonal() * E);
    // Q(i, k*n + k') = E(i,k) E(i,k')
    Eigen::MatrixXd Q(m, n * n);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < n; ++k)
        for (int kp = 0; kp < n; ++kp)
          Q(i, k * n + kp) = E(i, k) * E(i, kp);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> D(d.data(), m, m);
    const Eigen::MatrixXd P = Q.transpose() * D * Q; // P((k,k'),(l,l'))
    Eigen::MatrixXd J(n * n, n * n);
    const double w2 = colloc_.weight * colloc_.weight;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int kp = 0; kp < n; ++kp)
          for (int lp = 0; lp < n; ++lp)
            J(k * n + l, kp * n + lp) = w2 * P(k * n + kp, l * n + lp);
    return J;
  }

  SimConfig cfg_;
  Collocation colloc_;
};

inline SimState step(const SimState &state, const SimConfig &cfg) { return Integrator(cfg).step(state); }

inline EnergyLedger energy(const SimState &state, const SimConfig &cfg) { return Integrator(cfg).energy(state); }

/// Per-step diagnostics of the discrete energy balance
///   E(t^{n+1}) + dt (delta |v^{n+1}|_H^2 + |v^{n+1}|_V'^2) <= E(t^n).
struct BalanceCheck {
  double inequality_residual = 0.0; // max(0, lhs - rhs)
  double defect = 0.0;              // rhs - lhs, the numerical dissipation of the step
};

inline BalanceCheck energy_balance(const EnergyLedger &before, const EnergyLedger &after, double dissipation_increment) {
  const double lhs = after.total + dissipation_increment;
  return {std::max(0.0, lhs - before.total), before.total - lhs};
}

} // namespace chvi

#endif // CHVI_DYNAMICS_HPP
