#ifndef CHVI_MONITOR_HPP
#define CHVI_MONITOR_HPP

// Running a-priori estimate monitors for a trajectory of the regularized
// system. Every quantity is a supremum or a right-endpoint time quadrature
// over the observed steps.

#include <array>
#include <cmath>
#include <numbers>

#include "chvi/dynamics.hpp"

namespace chvi {

struct EstimateReport {
  double sup_V_of_u = 0.0;
  double L2_H_of_ut = 0.0;
  double sup_Vprime_of_ut = 0.0;
  double L2_DA_of_u = 0.0;
  double sup_L1_of_jeps = 0.0;
  double L1L1_of_beta = 0.0;
  double Vprime_dual_of_beta_proxy = 0.0;

  static constexpr std::array<const char *, 7> names{
      "sup_V_of_u",   "L2_H_of_ut",     "sup_Vprime_of_ut",         "L2_DA_of_u",
      "sup_L1_of_jeps", "L1L1_of_beta", "Vprime_dual_of_beta_proxy"};

  std::array<double, 7> values() const {
    return {sup_V_of_u,     L2_H_of_ut,   sup_Vprime_of_ut,          L2_DA_of_u,
            sup_L1_of_jeps, L1L1_of_beta, Vprime_dual_of_beta_proxy};
  }
};

/// Dual-norm proxy for beta_eps(u) in (H^1(0,t;H))': the supremum over a
/// fixed dictionary of 16 test functions phi(t,x) = cos(m pi t/T) e_k(x),
/// m = 0..3, k = first four spatial modes, of
///   |int_0^t (beta_eps(u), phi) ds| / |phi|_{H^1(0,t;H)}.
class DualityProbe {
public:
  static constexpr int spatial = 4;
  static constexpr int temporal = 4;
  static constexpr int count = spatial * temporal;

  DualityProbe(const Grid &g, double T) : T_(T) {
    for (int k = 0; k < spatial; ++k)
      mode_[k] = g.dim() == 1 ? k : k * g.n(); // (k+1, 1) in 2-D
  }

  /// Adds dt * (g, phi(t)) for the Galerkin coefficients g of beta_eps(u(t)).
  void accumulate(const Eigen::VectorXd &beta_coeffs, double t, double dt) {
    for (int k = 0; k < spatial; ++k)
      for (int m = 0; m < temporal; ++m)
        pairing_[k * temporal + m] += dt * beta_coeffs[mode_[k]] * std::cos(omega(m) * t);
  }

  /// Current ratio maximized over the dictionary, using the exact
  /// H^1(0,t) norm of each temporal profile.
  double ratio(double t) const {
    if (t <= 0.0)
      return 0.0;
    double best = 0.0;
    for (int m = 0; m < temporal; ++m) {
      const double norm = std::sqrt(h1_norm_squared(m, t));
      for (int k = 0; k < spatial; ++k)
        best = std::max(best, std::abs(pairing_[k * temporal + m]) / norm);
    }
    return best;
  }

private:
  double omega(int m) const { return m * std::numbers::pi / T_; }

  double h1_norm_squared(int m, double t) const {
    if (m == 0)
      return t;
    const double w = omega(m);
    const double s = std::sin(2.0 * w * t) / (4.0 * w);
    return (t / 2.0 + s) + w * w * (t / 2.0 - s);
  }

  double T_;
  std::array<int, spatial> mode_{};
  std::array<double, count> pairing_{};
};

/// Incremental estimate monitor. Feed the initial state, then every
/// accepted step.
class EstimateMonitor {
public:
  explicit EstimateMonitor(const Integrator &integrator)
      : integ_(&integrator), probe_(integrator.config().grid, integrator.config().T) {}

  void observe(const SimState &s) {
    const Norms nu = norms(s.u);
    const Norms nv = norms(s.v);
    const double J = integ_->potential_energy(s.u.coeffs);
    rep_.sup_V_of_u = std::max(rep_.sup_V_of_u, nu.V);
    rep_.sup_Vprime_of_ut = std::max(rep_.sup_Vprime_of_ut, nv.Vprime);
    rep_.sup_L1_of_jeps = std::max(rep_.sup_L1_of_jeps, J);
    if (!started_) {
      started_ = true;
      last_t_ = s.t;
      return;
    }
    const double dt = s.t - last_t_;
    last_t_ = s.t;
    l2_h_ut_ += dt * nv.H * nv.H;
    l2_da_u_ += dt * nu.DA * nu.DA;
    rep_.L2_H_of_ut = std::sqrt(l2_h_ut_);
    rep_.L2_DA_of_u = std::sqrt(l2_da_u_);

    rep_.L1L1_of_beta += dt * beta_l1(s.u.coeffs);
    probe_.accumulate(integ_->beta_coeffs(s.u.coeffs), s.t, dt);
    rep_.Vprime_dual_of_beta_proxy = std::max(rep_.Vprime_dual_of_beta_proxy, probe_.ratio(s.t));
  }

  /// |beta_eps(u)|_{L^1(Omega)} by nodal quadrature.
  double beta_l1(const Eigen::VectorXd &u_coeffs) const {
    const Eigen::VectorXd x = integ_->nodes(u_coeffs);
    const SimConfig &cfg = integ_->config();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      sum += std::abs(regularized_nonlinearity(cfg.potential, cfg.eps, x[i]).value);
    return integ_->node_weight() * sum;
  }

  const EstimateReport &report() const { return rep_; }

private:
  const Integrator *integ_;
  DualityProbe probe_;
  EstimateReport rep_;
  bool started_ = false;
  double last_t_ = 0.0;
  double l2_h_ut_ = 0.0;
  double l2_da_u_ = 0.0;
};

/// eps-independent upper bound on |beta_eps(u_eps)|_{L1(0,T;L1)} for any
/// trajectory started from data dominated by (u0, u1).
///
/// The discrete energy inequality bounds sup |u|_V, sup |u_t|_V' and the
/// dissipation by E = alpha/2 |u1|_V'^2 + 1/2 |u0|_V^2 + J(u0) (requires
/// lambda < mu_1 for coercivity). These bound the right side of the weak form
/// tested with u, hence the pairing <<beta_eps(u), u>>, and the structural
/// inequality beta_eps(r) r >= c1 |beta_eps(r)| - c2 turns that into an L1
/// bound. Returns +inf when lambda >= mu_1.
inline double beta_mass_bound(const SimConfig &cfg, const SpectralField &u0, const SpectralField &u1, double J0,
                              double c1, double c2) {
  const double mu1 = cfg.grid.eigenvalues().minCoeff();
  const double kappa = 1.0 - cfg.lambda / mu1;
  if (!(kappa > 0.0) || !(c1 > 0.0))
    return std::numeric_limits<double>::infinity();
  const Norms n0 = norms(u0);
  const Norms n1 = norms(u1);
  const double E = 0.5 * cfg.alpha * n1.Vprime * n1.Vprime + 0.5 * n0.V * n0.V + J0;
  const double sup_uV = std::sqrt(2.0 * E / kappa);
  const double sup_vVp = std::sqrt(2.0 * E / cfg.alpha);
  const double T = cfg.T;
  double B = cfg.alpha * sup_vVp * sup_uV / mu1;                        // end-point term
  B += cfg.alpha * n1.Vprime * n0.Vprime;                                // initial term
  B += cfg.alpha * (0.5 * cfg.dt * n1.Vprime * n1.Vprime + E);           // alpha |u_t|^2_{L2 V'}
  B += std::sqrt(E) * std::sqrt(T) * sup_uV / mu1;                       // (u_t, u)_* term
  B += cfg.delta * std::sqrt(E / cfg.delta) * std::sqrt(T) * sup_uV / std::sqrt(mu1); // delta (u_t, u)
  B += cfg.lambda * T * sup_uV * sup_uV / mu1;                           // lambda |u|^2_{L2 H}
  return (B + c2 * T) / c1;
}

} // namespace chvi

#endif // CHVI_MONITOR_HPP
