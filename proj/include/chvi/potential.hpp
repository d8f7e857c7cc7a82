#ifndef CHVI_POTENTIAL_HPP
#define CHVI_POTENTIAL_HPP

// Convex-analysis kernel for the monotone part of the free energy: the convex
// function j with domain [-1,1], its subdifferential beta, and the
// Moreau-Yosida family (resolvent, Yosida approximation, Moreau envelope).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chvi/errors.hpp"

namespace chvi {

enum class PotentialKind { Logarithmic, Obstacle, DoubleWellSmooth };

inline std::string_view to_string(PotentialKind kind) {
  switch (kind) {
  case PotentialKind::Logarithmic:
    return "logarithmic";
  case PotentialKind::Obstacle:
    return "obstacle";
  case PotentialKind::DoubleWellSmooth:
    return "double_well";
  }
  return "unknown";
}

inline std::optional<PotentialKind> parse_potential_kind(std::string_view name) {
  if (name == "logarithmic")
    return PotentialKind::Logarithmic;
  if (name == "obstacle")
    return PotentialKind::Obstacle;
  if (name == "double_well")
    return PotentialKind::DoubleWellSmooth;
  return std::nullopt;
}

/// The convex part j (with beta = dj) and the concave shift lambda of F.
///
/// Logarithmic: j(u) = (1-u)log(1-u) + (1+u)log(1+u) on [-1,1].
/// Obstacle:    j = indicator of [-1,1].
/// DoubleWellSmooth: j(u) = scale * u^4 on all of R (control case). A zero
/// scale switches the nonlinearity off entirely.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Logarithmic;
  double lambda = 0.0;
  double scale = 1.0;

  static constexpr double domain_lo = -1.0;
  static constexpr double domain_hi = 1.0;

  bool singular() const noexcept { return kind != PotentialKind::DoubleWellSmooth; }

  /// j(r); +infinity outside the domain for the singular kinds.
  double j(double r) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
    case PotentialKind::Logarithmic: {
      const double a = std::abs(r);
      if (a > 1.0)
        return inf;
      const double s = 1.0 - a;
      if (s == 0.0)
        return 2.0 * std::log(2.0);
      return (1.0 - a) * std::log1p(-a) + (1.0 + a) * std::log1p(a);
    }
    case PotentialKind::Obstacle:
      return std::abs(r) <= 1.0 ? 0.0 : inf;
    case PotentialKind::DoubleWellSmooth:
      return scale * r * r * r * r;
    }
    return inf;
  }

  /// Single-valued section of beta on the interior of the domain.
  double beta(double r) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
    case PotentialKind::Logarithmic:
      if (r >= 1.0)
        return inf;
      if (r <= -1.0)
        return -inf;
      return std::log1p(r) - std::log1p(-r);
    case PotentialKind::Obstacle:
      if (r > 1.0)
        return inf;
      if (r < -1.0)
        return -inf;
      return 0.0;
    case PotentialKind::DoubleWellSmooth:
      return 4.0 * scale * r * r * r;
    }
    return 0.0;
  }
};

/// One evaluation of the Moreau-Yosida family at r.
struct YosidaEval {
  double r = 0.0;
  double eps = 0.0;
  double resolvent = 0.0; // x with x + eps*beta(x) = r
  double yosida = 0.0;    // (r - x)/eps
  double moreau = 0.0;    // j(x) + (r - x)^2/(2 eps)
  double residual = 0.0;  // |x + eps*beta(x) - r|
  double slope = 0.0;     // derivative of the Yosida map at r
  double boundary_gap = std::numeric_limits<double>::infinity(); // 1 - |x| for the singular kinds
};

namespace detail {

// Smallest admissible value of the log argument near the boundary.
inline constexpr double log_floor = 1e-300;

// Safeguarded Newton for a strictly monotone f on [lo, hi] with a sign change.
// fdf(x, f, df) fills value and derivative. Returns the best iterate found.
template <class F>
double bracketed_newton(F &&fdf, double lo, double hi, double x, bool increasing) {
  double f = 0.0;
  double df = 0.0;
  double best_x = x;
  double best_f = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    fdf(x, f, df);
    if (std::abs(f) < best_f) {
      best_f = std::abs(f);
      best_x = x;
    }
    if (f == 0.0)
      return x;
    if ((f > 0.0) == increasing)
      hi = x;
    else
      lo = x;
    double next = x - f / df;
    if (!(next > lo && next < hi) || !std::isfinite(next))
      next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      break;
    x = next;
  }
  return best_x;
}

inline YosidaEval logarithmic_resolvent(double r, double eps) {
  // Odd symmetry: solve for |r| and mirror.
  const double sign = r < 0.0 ? -1.0 : 1.0;
  const double a = std::abs(r);
  YosidaEval e;
  e.r = r;
  e.eps = eps;
  double x = 0.0;
  double gap = 1.0;
  double residual = 0.0;
  const double r_half = 0.5 + eps * std::log(3.0);
  if (a == 0.0) {
    x = 0.0;
    gap = 1.0;
  } else if (a <= r_half) {
    auto g = [&](double y, double &f, double &df) {
      f = y + eps * (std::log1p(y) - std::log1p(-y)) - a;
      df = 1.0 + 2.0 * eps / ((1.0 - y) * (1.0 + y));
    };
    const double hi = std::min(a, 0.5);
    x = bracketed_newton(g, 0.0, hi, std::min(a / (1.0 + 2.0 * eps), hi), true);
    double f = 0.0, df = 0.0;
    g(x, f, df);
    residual = std::abs(f);
    gap = 1.0 - x;
  } else {
    // Near the boundary work with l = log(1 - x) so the gap stays representable.
    const double l_min = std::log(log_floor);
    auto f_of = [&](double l, double &f, double &df) {
      const double s = std::exp(l);
      f = (1.0 - s) + eps * (std::log(2.0 - s) - l) - a;
      df = -s - eps * s / (2.0 - s) - eps;
    };
    double f = 0.0, df = 0.0;
    f_of(l_min, f, df);
    double l = l_min;
    if (f > 0.0) {
      // Root inside the representable range; initial guess from the
      // asymptotic balance (1 - a)/eps + log 2 = l.
      const double l_hi = std::log(0.5);
      const double guess = std::clamp((1.0 - a) / eps + std::log(2.0), l_min, l_hi);
      l = bracketed_newton(f_of, l_min, l_hi, guess, false);
      f_of(l, f, df);
    }
    residual = std::abs(f);
    gap = std::exp(l);
    x = 1.0 - gap;
  }
  e.resolvent = sign * x;
  e.boundary_gap = gap;
  // r - x computed through the gap near the boundary.
  const double diff = a <= r_half ? a - x : (a - 1.0) + gap;
  e.yosida = sign * diff / eps;
  const double jx = gap >= 1.0 ? 0.0
                               : gap * std::log(std::max(gap, log_floor)) + (2.0 - gap) * std::log(2.0 - gap);
  e.moreau = (a <= r_half ? (1.0 - x) * std::log1p(-x) + (1.0 + x) * std::log1p(x) : jx) +
             diff * diff / (2.0 * eps);
  e.residual = residual;
  e.slope = 2.0 / (gap * (2.0 - gap) + 2.0 * eps);
  return e;
}

inline YosidaEval obstacle_resolvent(double r, double eps) {
  YosidaEval e;
  e.r = r;
  e.eps = eps;
  e.resolvent = std::clamp(r, -1.0, 1.0);
  const double diff = r - e.resolvent;
  e.yosida = diff / eps;
  e.moreau = diff * diff / (2.0 * eps);
  e.residual = 0.0;
  // a.e. derivative; the corner |r| = 1 goes to the inner branch
  e.slope = std::abs(r) > 1.0 ? 1.0 / eps : 0.0;
  e.boundary_gap = 1.0 - std::abs(e.resolvent);
  return e;
}

inline YosidaEval double_well_resolvent(double r, double eps, double scale) {
  YosidaEval e;
  e.r = r;
  e.eps = eps;
  const double sign = r < 0.0 ? -1.0 : 1.0;
  const double a = std::abs(r);
  const double c = 4.0 * scale * eps;
  double x = a;
  if (a > 0.0 && c > 0.0) {
    auto g = [&](double y, double &f, double &df) {
      f = y + c * y * y * y - a;
      df = 1.0 + 3.0 * c * y * y;
    };
    x = bracketed_newton(g, 0.0, a, a / (1.0 + c * a * a), true);
    double f = 0.0, df = 0.0;
    g(x, f, df);
    e.residual = std::abs(f);
  }
  e.resolvent = sign * x;
  const double diff = a - x;
  e.yosida = sign * diff / eps;
  e.moreau = scale * x * x * x * x + diff * diff / (2.0 * eps);
  const double bp = 12.0 * scale * x * x;
  e.slope = bp / (1.0 + eps * bp);
  return e;
}

} // namespace detail

/// Resolvent x = (I + eps*beta)^{-1}(r) together with the Yosida value and
/// Moreau envelope at r.
///
/// Logarithmic: safeguarded Newton on the strictly increasing map
/// x -> x + eps*beta(x), switched to the variable log(1 - |x|) close to the
/// boundary. If the root lies closer to the boundary than the log floor
/// (|r| - 1 > ~690 eps) the gap is pinned at the floor and the residual
/// reports the mismatch. Obstacle: exact projection.
inline YosidaEval resolvent(const PotentialSpec &spec, double r, double eps) {
  if (!std::isfinite(r))
    throw InvalidArgument("resolvent: r must be finite");
  if (!std::isfinite(eps) || eps <= 0.0 || eps > 1.0)
    throw InvalidArgument("resolvent: eps must lie in (0,1]");
  switch (spec.kind) {
  case PotentialKind::Logarithmic:
    return detail::logarithmic_resolvent(r, eps);
  case PotentialKind::Obstacle:
    return detail::obstacle_resolvent(r, eps);
  case PotentialKind::DoubleWellSmooth:
    return detail::double_well_resolvent(r, eps, spec.scale);
  }
  throw InvalidArgument("resolvent: unknown potential kind");
}

inline std::vector<YosidaEval> yosida_curve(const PotentialSpec &spec, double eps,
                                            std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] <= grid[i]))
      throw InvalidArgument("yosida_curve: grid must be sorted");
  }
  std::vector<YosidaEval> out;
  out.reserve(grid.size());
  for (double r : grid)
    out.push_back(resolvent(spec, r, eps));
  return out;
}

/// Result of the search for eps-uniform constants in
/// beta_eps(r) r >= c1 |beta_eps(r)| - c2.
struct L1BoundResult {
  double c1 = 0.5;
  double c2 = 0.0;
  bool ok = false;
  std::vector<double> c2_per_eps;  // same order as the input ladder
  double worst_r = 0.0;            // sample attaining c2
  double worst_eps = 0.0;
};

/// c1 is fixed to 1/2; c2 is the smallest constant certifying every sample.
/// ok is false if some per-eps constant is not finite, or if the per-eps
/// constants fail to settle along the ladder (increments growing as eps
/// decreases), in which case worst_r/worst_eps name the offending sample.
inline L1BoundResult verify_l1_bound(const PotentialSpec &spec, std::span<const double> eps_list,
                                     double r_lo, double r_hi, int samples) {
  if (eps_list.empty())
    throw InvalidArgument("verify_l1_bound: empty eps list");
  if (samples < 1 || !(r_lo <= r_hi))
    throw InvalidArgument("verify_l1_bound: need samples >= 1 and r_lo <= r_hi");
  L1BoundResult res;
  const double c1 = res.c1;
  double worst = -1.0;
  for (double eps : eps_list) {
    if (!(eps > 0.0 && eps < 1.0))
      throw InvalidArgument("verify_l1_bound: eps must lie in (0,1)");
    double c2_eps = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double r = samples == 1 ? r_lo : r_lo + (r_hi - r_lo) * i / (samples - 1);
      const double b = resolvent(spec, r, eps).yosida;
      const double need = std::max(0.0, c1 * std::abs(b) - b * r);
      if (need > c2_eps)
        c2_eps = need;
      if (need > worst) {
        worst = need;
        res.worst_r = r;
        res.worst_eps = eps;
      }
    }
    res.c2_per_eps.push_back(c2_eps);
  }
  res.c2 = std::max(0.0, worst);
  res.ok = std::isfinite(res.c2);

  // Settling test along the ladder sorted by decreasing eps.
  std::vector<std::size_t> order(eps_list.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return eps_list[a] > eps_list[b]; });
  for (std::size_t i = 2; i < order.size() && res.ok; ++i) {
    const double d_prev = std::abs(res.c2_per_eps[order[i - 1]] - res.c2_per_eps[order[i - 2]]);
    const double d_last = std::abs(res.c2_per_eps[order[i]] - res.c2_per_eps[order[i - 1]]);
    if (d_last > d_prev + 1e-12) {
      res.ok = false;
      res.worst_eps = eps_list[order[i]];
    }
  }
  return res;
}

/// Value, slope and energy of the nonlinearity used by the time stepper.
struct NonlinearEval {
  double value = 0.0;  // beta_eps(r)
  double slope = 0.0;  // a.e. derivative
  double energy = 0.0; // j_eps(r)
};

/// Yosida-regularized nonlinearity for the singular kinds. The smooth control
/// kind bypasses the regularization and returns beta, beta', j themselves, so
/// its dynamics do not depend on eps.
inline NonlinearEval regularized_nonlinearity(const PotentialSpec &spec, double eps, double r) {
  if (spec.kind == PotentialKind::DoubleWellSmooth) {
    const double c = spec.scale;
    return {4.0 * c * r * r * r, 12.0 * c * r * r, c * r * r * r * r};
  }
  const YosidaEval e = resolvent(spec, r, eps);
  return {e.yosida, e.slope, e.moreau};
}

} // namespace chvi

#endif // CHVI_POTENTIAL_HPP
