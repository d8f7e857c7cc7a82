#ifndef CHVI_SIMULATION_HPP
#define CHVI_SIMULATION_HPP

#include <cstdint>

#include "chvi/dynamics.hpp"

namespace chvi {

/// Everything reported for one accepted step (one row of the run CSV).
struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  EnergyLedger energy;
  double dissipation_integral = 0.0;
  double dissipation_increment = 0.0;
  double defect = 0.0; // E(t^n) - E(t^{n+1}) - dissipation increment
  double max_abs_u = 0.0;
  Norms u_norms;
  Norms v_norms;
  int newton_iters = 0;
  int halvings = 0;
};

/// Energy ledger, norms and max |u| of a single state; the balance fields
/// are left at zero.
inline StepRecord state_record(const Integrator &integ, const SimState &s) {
  StepRecord r;
  r.step = s.step;
  r.t = s.t;
  r.energy = integ.energy(s);
  r.dissipation_integral = s.dissipation_integral;
  r.u_norms = norms(s.u);
  r.v_norms = norms(s.v);
  const Eigen::VectorXd x = to_physical(s.u);
  r.max_abs_u = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  return r;
}

/// Sequential driver of one trajectory from a given initial state.
class Simulation {
public:
  Simulation(const Integrator &integrator, SimState initial) : integ_(&integrator), state_(std::move(initial)) {
    last_ = state_record(*integ_, state_);
  }

  const SimState &state() const { return state_; }
  const StepRecord &last() const { return last_; }
  const Integrator &integrator() const { return *integ_; }
  bool finished() const { return state_.step >= integ_->config().steps(); }

  const StepRecord &advance() {
    StepOutcome out = integ_->advance(state_);
    state_ = std::move(out.state);
    StepRecord r = state_record(*integ_, state_);
    r.newton_iters = out.newton_iters;
    r.halvings = out.halvings;
    r.dissipation_increment = state_.dissipation_integral - last_.dissipation_integral;
    const BalanceCheck b = energy_balance(last_.energy, r.energy, r.dissipation_increment);
    r.energy.inequality_residual = b.inequality_residual;
    r.defect = b.defect;
    last_ = r;
    return last_;
  }

private:
  const Integrator *integ_;
  SimState state_;
  StepRecord last_;
};

/// Tolerance of the per-step discrete energy inequality.
inline double energy_tolerance(double initial_energy) { return 1e-8 * (1.0 + initial_energy); }

} // namespace chvi

#endif // CHVI_SIMULATION_HPP
