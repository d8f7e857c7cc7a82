#ifndef CHVI_INITIAL_DATA_HPP
#define CHVI_INITIAL_DATA_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

#include "chvi/checkpoint.hpp"
#include "chvi/config.hpp"
#include "chvi/spectral.hpp"

namespace chvi {

/// amplitude * sin(pi x) (times sin(pi y) in 2-D).
inline SpectralField mode1_field(const Grid &g, double amplitude) {
  return to_spectral(sample(g,
                            [&](double x, double y) {
                              const double s = std::sin(std::numbers::pi * x);
                              return amplitude * (g.dim() == 1 ? s : s * std::sin(std::numbers::pi * y));
                            }),
                     g);
}

/// Smooth random field on the first four modes per axis, coefficients
/// decaying like 1/k^2, rescaled so that the largest collocation value has
/// magnitude |amplitude|.
inline SpectralField random_modes_field(const Grid &g, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // 53 random bits -> [-1, 1); independent of the library's distributions
  auto uniform = [&rng]() { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
  SpectralField f = SpectralField::zero(g);
  const int n = g.n();
  const int active = std::min(4, n);
  if (g.dim() == 1) {
    for (int k = 0; k < active; ++k)
      f.coeffs[k] = uniform() / ((k + 1.0) * (k + 1.0));
  } else {
    for (int k = 0; k < active; ++k)
      for (int l = 0; l < active; ++l)
        f.coeffs[k * n + l] = uniform() / ((k + 1.0) * (k + 1.0) * (l + 1.0) * (l + 1.0));
  }
  const double peak = to_physical(f).cwiseAbs().maxCoeff();
  if (peak > 0.0)
    f.coeffs *= std::abs(amplitude) / peak;
  return f;
}

/// (u0, u1) described by a run configuration, before any eps regularization.
inline std::pair<SpectralField, SpectralField> initial_data(const RunConfig &rc) {
  const Grid &g = rc.sim.grid;
  switch (rc.init_kind) {
  case InitKind::Mode1:
    return {mode1_field(g, rc.init_amplitude.value_or(0.0)), SpectralField::zero(g)};
  case InitKind::Modes:
    return {random_modes_field(g, rc.init_amplitude.value_or(0.0), rc.seed.value_or(0)), SpectralField::zero(g)};
  case InitKind::File: {
    const Checkpoint c = read_checkpoint(rc.init_path);
    if (static_cast<int>(c.dim) != g.dim() || static_cast<int>(c.n) != g.n())
      throw ConfigError("init.path: checkpoint grid does not match dim/n");
    SpectralField u0 = SpectralField::zero(g), u1 = SpectralField::zero(g);
    u0.coeffs = Eigen::Map<const Eigen::VectorXd>(c.u.data(), static_cast<Eigen::Index>(c.u.size()));
    u1.coeffs = Eigen::Map<const Eigen::VectorXd>(c.v.data(), static_cast<Eigen::Index>(c.v.size()));
    return {std::move(u0), std::move(u1)};
  }
  }
  throw ConfigError("unknown init.kind");
}

} // namespace chvi

#endif // CHVI_INITIAL_DATA_HPP
