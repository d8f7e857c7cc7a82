#ifndef CHVI_CONFIG_HPP
#define CHVI_CONFIG_HPP

// Flat key=value run configuration.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "chvi/dynamics.hpp"
#include "chvi/errors.hpp"

namespace chvi {

enum class InitKind { Mode1, Modes, File };

struct RunConfig {
  SimConfig sim;
  bool has_eps = false;
  int output_every = 100;
  std::optional<std::uint64_t> seed;
  InitKind init_kind = InitKind::Mode1;
  std::optional<double> init_amplitude;
  std::string init_path;
};

/// Shortest text that parses back to the same double (17 significant digits).
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline const std::set<std::string_view> &config_keys() {
  static const std::set<std::string_view> keys{
      "dim",    "n",          "alpha",           "delta",       "lambda", "eps",       "T",
      "dt",     "potential.kind", "output.every", "newton.tol",  "newton.max_iter",
      "dealias", "seed",      "init.kind",       "init.amplitude", "init.path"};
  return keys;
}

struct Entry {
  std::string value;
  int line = 0;
};

inline double parse_real(const Entry &e, std::string_view key) {
  double x = 0.0;
  const char *first = e.value.data();
  const char *last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || !std::isfinite(x))
    throw ConfigError(std::string(key) + ": not a finite number: '" + e.value + "'", e.line);
  return x;
}

inline std::int64_t parse_int(const Entry &e, std::string_view key) {
  std::int64_t x = 0;
  const char *first = e.value.data();
  const char *last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(std::string(key) + ": not an integer: '" + e.value + "'", e.line);
  return x;
}

} // namespace detail

/// Parses and validates a configuration. eps is required unless
/// require_eps is false (sweeps supply their own ladder).
inline RunConfig parse_config(std::string_view text, bool require_eps = true) {
  std::map<std::string, detail::Entry, std::less<>> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected key=value, got '" + std::string(line) + "'", line_no);
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (!detail::config_keys().contains(key))
      throw ConfigError("unknown key '" + key + "'", line_no);
    if (entries.contains(key))
      throw ConfigError("duplicate key '" + key + "'", line_no);
    entries[key] = {value, line_no};
  }

  auto need = [&](std::string_view key) -> const detail::Entry & {
    auto it = entries.find(key);
    if (it == entries.end())
      throw ConfigError("missing required key '" + std::string(key) + "'");
    return it->second;
  };
  auto real = [&](std::string_view key) { return detail::parse_real(need(key), key); };
  auto range = [&](std::string_view key, bool ok, const char *what) {
    if (!ok)
      throw ConfigError(std::string(key) + " " + what, need(key).line);
  };

  RunConfig rc;
  SimConfig &c = rc.sim;

  const auto dim = detail::parse_int(need("dim"), "dim");
  range("dim", dim == 1 || dim == 2, "must be 1 or 2");
  const auto n = detail::parse_int(need("n"), "n");
  range("n", n >= 4 && n <= 4096, "must lie in [4, 4096]");
  c.grid = Grid(static_cast<int>(dim), static_cast<int>(n));

  c.alpha = real("alpha");
  range("alpha", c.alpha > 0.0, "must be strictly positive");
  c.delta = real("delta");
  range("delta", c.delta > 0.0, "must be strictly positive (viscous case only)");
  c.lambda = real("lambda");
  range("lambda", c.lambda >= 0.0, "must be >= 0");
  if (entries.contains("eps") || require_eps) {
    c.eps = real("eps");
    range("eps", c.eps > 0.0 && c.eps < 1.0, "must lie in (0,1)");
    rc.has_eps = true;
  }
  c.T = real("T");
  range("T", c.T > 0.0, "must be > 0");
  c.dt = real("dt");
  range("dt", c.dt > 0.0 && c.dt <= c.T, "must lie in (0, T]");

  const auto &kind = need("potential.kind");
  if (kind.value == "linear") {
    c.potential.kind = PotentialKind::DoubleWellSmooth;
    c.potential.scale = 0.0;
  } else if (auto k = parse_potential_kind(kind.value)) {
    c.potential.kind = *k;
  } else {
    throw ConfigError("potential.kind must be logarithmic, obstacle, double_well or linear", kind.line);
  }
  c.potential.lambda = c.lambda;

  if (entries.contains("output.every")) {
    rc.output_every = static_cast<int>(detail::parse_int(need("output.every"), "output.every"));
    range("output.every", rc.output_every >= 1, "must be >= 1");
  }
  if (entries.contains("newton.tol")) {
    c.newton_tol = real("newton.tol");
    range("newton.tol", c.newton_tol > 0.0, "must be > 0");
  }
  if (entries.contains("newton.max_iter")) {
    const auto it = detail::parse_int(need("newton.max_iter"), "newton.max_iter");
    range("newton.max_iter", it >= 1 && it <= 10000, "must lie in [1, 10000]");
    c.newton_max_iter = static_cast<int>(it);
  }
  if (entries.contains("dealias")) {
    const auto &d = need("dealias");
    range("dealias", d.value == "0" || d.value == "1", "must be 0 or 1");
    c.dealias = d.value == "1";
  }
  if (entries.contains("seed")) {
    const auto s = detail::parse_int(need("seed"), "seed");
    range("seed", s >= 0, "must be >= 0");
    rc.seed = static_cast<std::uint64_t>(s);
  }

  const auto &ik = need("init.kind");
  if (ik.value == "mode1")
    rc.init_kind = InitKind::Mode1;
  else if (ik.value == "modes")
    rc.init_kind = InitKind::Modes;
  else if (ik.value == "file")
    rc.init_kind = InitKind::File;
  else
    throw ConfigError("init.kind must be mode1, modes or file", ik.line);

  if (rc.init_kind != InitKind::File) {
    rc.init_amplitude = real("init.amplitude");
  } else if (entries.contains("init.amplitude")) {
    rc.init_amplitude = real("init.amplitude");
  }
  if (rc.init_kind == InitKind::Modes && !rc.seed)
    throw ConfigError("init.kind=modes requires seed");
  if (rc.init_kind == InitKind::File) {
    rc.init_path = need("init.path").value;
    range("init.path", !rc.init_path.empty(), "must not be empty");
  } else if (entries.contains("init.path")) {
    rc.init_path = need("init.path").value;
  }
  return rc;
}

/// Canonical text of a configuration: every key that carries a value, in a
/// fixed order, numbers with 17 significant digits.
inline std::string normalize(const RunConfig &rc) {
  const SimConfig &c = rc.sim;
  std::ostringstream os;
  os << "dim=" << c.grid.dim() << '\n' << "n=" << c.grid.n() << '\n';
  os << "alpha=" << format_double(c.alpha) << '\n';
  os << "delta=" << format_double(c.delta) << '\n';
  os << "lambda=" << format_double(c.lambda) << '\n';
  if (rc.has_eps)
    os << "eps=" << format_double(c.eps) << '\n';
  os << "T=" << format_double(c.T) << '\n';
  os << "dt=" << format_double(c.dt) << '\n';
  const bool linear = c.potential.kind == PotentialKind::DoubleWellSmooth && c.potential.scale == 0.0;
  os << "potential.kind=" << (linear ? std::string_view("linear") : to_string(c.potential.kind)) << '\n';
  os << "output.every=" << rc.output_every << '\n';
  os << "newton.tol=" << format_double(c.newton_tol) << '\n';
  os << "newton.max_iter=" << c.newton_max_iter << '\n';
  os << "dealias=" << (c.dealias ? 1 : 0) << '\n';
  if (rc.seed)
    os << "seed=" << *rc.seed << '\n';
  os << "init.kind=" << (rc.init_kind == InitKind::Mode1 ? "mode1" : rc.init_kind == InitKind::Modes ? "modes" : "file")
     << '\n';
  if (rc.init_amplitude)
    os << "init.amplitude=" << format_double(*rc.init_amplitude) << '\n';
  if (!rc.init_path.empty())
    os << "init.path=" << rc.init_path << '\n';
  return os.str();
}

/// 64-bit FNV-1a hash.
inline std::uint64_t content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t config_hash(const RunConfig &rc) { return content_hash(normalize(rc)); }

} // namespace chvi

#endif // CHVI_CONFIG_HPP
