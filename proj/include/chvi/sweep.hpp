#ifndef CHVI_SWEEP_HPP
#define CHVI_SWEEP_HPP

// The eps -> 0 harness: one simulation per rung of a descending eps ladder at
// fixed discretization, then Cauchy differences between neighbouring rungs,
// duality pairings of beta_eps(u_eps) with u_eps, and a time-concentration
// index of the L1 profile of beta_eps(u_eps).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "chvi/dynamics.hpp"
#include "chvi/monitor.hpp"
#include "chvi/simulation.hpp"

namespace chvi {

struct SweepPlan {
  SimConfig base;              // eps is overridden per rung
  std::vector<double> eps_ladder{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  int stored_fields = 0;       // checkpoint stride handed to the observer; 0 = none
  bool joint_refine = false;   // dt_i = base.dt * eps_i / eps_0
  bool regularize_initial = true; // false: every rung starts from (u0, u1) as given
  SpectralField u0;
  SpectralField u1;

  void validate() const {
    if (eps_ladder.size() < 3)
      throw InvalidArgument("SweepPlan: eps ladder needs at least 3 rungs");
    for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
      const double e = eps_ladder[i];
      if (!(e > 0.0 && e < 1.0))
        throw InvalidArgument("SweepPlan: eps values must lie in (0,1)");
      if (i > 0 && !(e < eps_ladder[i - 1]))
        throw InvalidArgument("SweepPlan: eps ladder must be strictly decreasing");
    }
    if (!(u0.grid == base.grid) || !(u1.grid == base.grid))
      throw InvalidArgument("SweepPlan: initial data not on the base grid");
  }

  SimConfig rung_config(std::size_t i) const {
    SimConfig c = base;
    c.eps = eps_ladder.at(i);
    if (joint_refine)
      c.dt = base.dt * eps_ladder[i] / eps_ladder.front();
    return c;
  }
};

/// Stored output of one rung.
struct RungResult {
  double eps = 0.0;
  double dt = 0.0;
  std::vector<Eigen::VectorXd> u; // coefficients at every step, index 0 = initial
  std::vector<Eigen::VectorXd> v;
  std::vector<double> times;
  std::vector<double> eta_profile; // |beta_eps(u(t))|_{L1}
  std::vector<StepRecord> records;
  EstimateReport monitors;
  double duality_pairing = 0.0;   // dt sum (P beta_eps(u^n), u^n)
  double duality_identity_rhs = 0.0; // right side of the tested weak form, own trajectory
  double concentration_index = 1.0;
  double eta_mass = 0.0;          // L1(0,T;L1) norm of beta_eps(u)
  double max_excess = 0.0;        // max over t, x of (|u| - 1)_+
  std::vector<EnergyLedger> energy_snapshots;
  double max_inequality_residual = 0.0;
};

struct SweepReport {
  std::vector<double> eps;
  std::vector<RungResult> rungs;
  std::vector<double> cauchy_L2V_of_u;      // entry i: rung i+1 vs rung i
  std::vector<double> cauchy_L2Vprime_of_ut;
  std::vector<double> duality_pairing;
  std::vector<std::vector<double>> eta_time_profile;
  std::vector<double> concentration_index;
  std::vector<std::vector<EnergyLedger>> energy_snapshots;
  std::vector<double> snapshot_times;
  bool complete = false;
  std::string failure;
};

/// Fractions of T at which energy snapshots are taken.
inline constexpr std::array<double, 5> snapshot_fractions{0.0, 0.25, 0.5, 0.75, 1.0};

/// Right side of the weak form tested with u itself, in the discrete form
/// implied by implicit Euler (summation by parts):
///   -alpha (v^N, u^N)_* + alpha (v^0, u^0)_* + alpha dt sum (v^{n-1}, v^n)_*
///   - dt sum (v^n, u^n)_* - delta dt sum (v^n, u^n) - dt sum |u^n|_V^2
///   + lambda dt sum |u^n|_H^2.
/// For an exact trajectory it equals dt sum (P beta_eps(u^n), u^n).
inline double duality_identity_rhs(const std::vector<Eigen::VectorXd> &u, const std::vector<Eigen::VectorXd> &v,
                                   const Eigen::VectorXd &mu, double dt, double alpha, double delta, double lambda) {
  const std::size_t N = u.size() - 1;
  auto star = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    return (a.array() * b.array() / mu.array()).sum();
  };
  double rhs = -alpha * star(v[N], u[N]) + alpha * star(v[0], u[0]);
  for (std::size_t n = 1; n <= N; ++n) {
    rhs += alpha * dt * star(v[n - 1], v[n]);
    rhs -= dt * star(v[n], u[n]);
    rhs -= delta * dt * v[n].dot(u[n]);
    rhs -= dt * (mu.array() * u[n].array().square()).sum();
    rhs += lambda * dt * u[n].squaredNorm();
  }
  return rhs;
}

/// Observer invoked for every rung state (including the initial one).
using RungObserver = std::function<void(std::size_t rung, const Integrator &, const SimState &, const StepRecord &)>;

/// Runs one rung from already-regularized initial data.
inline RungResult run_rung(const SimConfig &cfg, SimState initial, std::size_t rung_index = 0,
                           const RungObserver &observer = {}) {
  const Integrator integ(cfg);
  Simulation sim(integ, std::move(initial));
  EstimateMonitor monitor(integ);
  RungResult r;
  r.eps = cfg.eps;
  r.dt = cfg.dt;
  const Eigen::VectorXd &mu = cfg.grid.eigenvalues();
  auto record = [&]() {
    const SimState &s = sim.state();
    const StepRecord &rec = sim.last();
    monitor.observe(s);
    r.u.push_back(s.u.coeffs);
    r.v.push_back(s.v.coeffs);
    r.times.push_back(s.t);
    r.eta_profile.push_back(monitor.beta_l1(s.u.coeffs));
    r.records.push_back(rec);
    r.max_excess = std::max(r.max_excess, std::max(0.0, rec.max_abs_u - 1.0));
    r.max_inequality_residual = std::max(r.max_inequality_residual, rec.energy.inequality_residual);
    if (s.step > 0)
      r.duality_pairing += cfg.dt * integ.beta_coeffs(s.u.coeffs).dot(s.u.coeffs);
    if (observer)
      observer(rung_index, integ, s, rec);
  };
  record();
  while (!sim.finished()) {
    sim.advance();
    record();
  }
  r.monitors = monitor.report();
  r.duality_identity_rhs = duality_identity_rhs(r.u, r.v, mu, cfg.dt, cfg.alpha, cfg.delta, cfg.lambda);

  double mass = 0.0, peak = 0.0;
  for (std::size_t n = 0; n < r.eta_profile.size(); ++n) {
    if (n > 0)
      mass += cfg.dt * r.eta_profile[n];
    peak = std::max(peak, r.eta_profile[n]);
  }
  r.eta_mass = mass;
  const double horizon = cfg.dt * static_cast<double>(r.eta_profile.size() - 1);
  r.concentration_index = mass > 0.0 ? std::max(1.0, peak * horizon / mass) : 1.0;

  for (double f : snapshot_fractions) {
    const auto idx = static_cast<std::size_t>(std::llround(f * static_cast<double>(r.records.size() - 1)));
    r.energy_snapshots.push_back(r.records[idx].energy);
  }
  return r;
}

/// Initial state of a rung: (I + eps A)^{-1} regularization for the singular
/// kinds; the smooth control kind uses the data as given.
inline SimState rung_initial_state(const SimConfig &cfg, const SpectralField &u0, const SpectralField &u1,
                                   bool regularize = true) {
  SimState s = SimState::zero(cfg.grid);
  if (regularize && cfg.potential.singular()) {
    auto [a, b] = regularize_initial_data(u0, u1, cfg.eps);
    s.u = std::move(a);
    s.v = std::move(b);
  } else {
    s.u = u0;
    s.v = u1;
  }
  return s;
}

/// L2(0,T;X) distance between two stored trajectories with weights w_k,
/// sampled on the coarser time grid.
inline double trajectory_distance(const std::vector<Eigen::VectorXd> &a, double dt_a,
                                  const std::vector<Eigen::VectorXd> &b, double dt_b, const Eigen::ArrayXd &w) {
  const bool a_coarse = dt_a >= dt_b;
  const auto &coarse = a_coarse ? a : b;
  const auto &fine = a_coarse ? b : a;
  const double dtc = std::max(dt_a, dt_b);
  const auto ratio = static_cast<std::size_t>(std::max(1LL, std::llround(dtc / std::min(dt_a, dt_b))));
  double sum = 0.0;
  for (std::size_t n = 1; n < coarse.size(); ++n) {
    const std::size_t m = std::min(n * ratio, fine.size() - 1);
    sum += dtc * (w * (coarse[n] - fine[m]).array().square()).sum();
  }
  return std::sqrt(sum);
}

/// Runs every rung and assembles the report. A step failure stops the sweep
/// and returns the partial report with complete = false.
inline SweepReport run_sweep(const SweepPlan &plan, const RungObserver &observer = {}) {
  plan.validate();
  SweepReport rep;
  rep.eps = plan.eps_ladder;
  for (double f : snapshot_fractions)
    rep.snapshot_times.push_back(f * plan.base.T);
  for (std::size_t i = 0; i < plan.eps_ladder.size(); ++i) {
    const SimConfig cfg = plan.rung_config(i);
    try {
      rep.rungs.push_back(run_rung(cfg, rung_initial_state(cfg, plan.u0, plan.u1, plan.regularize_initial), i, observer));
    } catch (const StepFailure &e) {
      rep.failure = "rung " + std::to_string(i) + " (eps=" + std::to_string(cfg.eps) + "): " + e.what();
      break;
    }
  }
  const Eigen::ArrayXd mu = plan.base.grid.eigenvalues().array();
  for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
    const RungResult &r = rep.rungs[i];
    rep.duality_pairing.push_back(r.duality_pairing);
    rep.eta_time_profile.push_back(r.eta_profile);
    rep.concentration_index.push_back(r.concentration_index);
    rep.energy_snapshots.push_back(r.energy_snapshots);
    if (i > 0) {
      const RungResult &p = rep.rungs[i - 1];
      rep.cauchy_L2V_of_u.push_back(trajectory_distance(p.u, p.dt, r.u, r.dt, mu));
      rep.cauchy_L2Vprime_of_ut.push_back(trajectory_distance(p.v, p.dt, r.v, r.dt, 1.0 / mu));
    }
  }
  rep.complete = rep.failure.empty() && rep.rungs.size() == plan.eps_ladder.size();
  return rep;
}

/// Outcome of the limsup check on the duality pairings.
struct DualityVerdict {
  bool pass = false;
  double rhs = 0.0;          // weak-form surrogate on the finest rung
  double tolerance = 0.0;
  std::vector<double> gaps;  // duality_pairing[i] - rhs
};

/// Compares every rung's pairing with the weak-form right side evaluated on
/// the finest rung. Passes iff the gaps of the two finest rungs are one-signed
/// (<= tolerance) and the gap magnitude does not grow between them.
/// Default tolerance: 1e-3 |rhs| (1e-12 when rhs vanishes).
inline DualityVerdict duality_limsup_check(const SweepReport &rep, double rel_tol = 1e-3) {
  if (!rep.complete || rep.rungs.size() < 2)
    throw InvalidArgument("duality_limsup_check: sweep report is incomplete");
  DualityVerdict v;
  v.rhs = rep.rungs.back().duality_identity_rhs;
  v.tolerance = v.rhs != 0.0 ? rel_tol * std::abs(v.rhs) : 1e-12;
  for (double lhs : rep.duality_pairing)
    v.gaps.push_back(lhs - v.rhs);
  const double g_last = v.gaps.back();
  const double g_prev = v.gaps[v.gaps.size() - 2];
  v.pass = g_last <= v.tolerance && g_prev <= v.tolerance && std::abs(g_last) <= std::abs(g_prev) + v.tolerance;
  return v;
}

/// Least-squares slope of log(value) against log(eps). Zero values are
/// skipped; returns 0 with fewer than two usable points.
inline double loglog_slope(const std::vector<double> &eps, const std::vector<double> &values) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size() && i < values.size(); ++i) {
    if (values[i] > 0.0 && eps[i] > 0.0) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() < 2)
    return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

} // namespace chvi

#endif // CHVI_SWEEP_HPP
