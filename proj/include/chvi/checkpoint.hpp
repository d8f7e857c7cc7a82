#ifndef CHVI_CHECKPOINT_HPP
#define CHVI_CHECKPOINT_HPP

// CHVI1 field checkpoints. Layout, all little-endian:
//
//   "CHVI1\0"          6 bytes
//   dim                u32
//   n                  u32
//   step               u64
//   t                  f64
//   eps                f64
//   u coefficients     n^dim f64
//   v coefficients     n^dim f64
//   dissipation        f64

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "chvi/dynamics.hpp"
#include "chvi/errors.hpp"

namespace chvi {

inline constexpr std::array<char, 6> checkpoint_magic{'C', 'H', 'V', 'I', '1', '\0'};

struct Checkpoint {
  std::uint32_t dim = 1;
  std::uint32_t n = 0;
  std::uint64_t step = 0;
  double t = 0.0;
  double eps = 0.0;
  std::vector<double> u;
  std::vector<double> v;
  double dissipation = 0.0;
};

namespace detail {

template <class T>
void put_le(std::vector<unsigned char> &out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <class T>
T get_le(const unsigned char *p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

} // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Checkpoint &c) {
  const std::size_t modes = c.u.size();
  if (c.v.size() != modes)
    throw InvalidArgument("encode_checkpoint: u and v sizes differ");
  std::vector<unsigned char> out(checkpoint_magic.begin(), checkpoint_magic.end());
  out.reserve(6 + 4 + 4 + 8 * 3 + 16 * modes + 8);
  detail::put_le(out, c.dim);
  detail::put_le(out, c.n);
  detail::put_le(out, c.step);
  detail::put_le(out, c.t);
  detail::put_le(out, c.eps);
  for (double x : c.u)
    detail::put_le(out, x);
  for (double x : c.v)
    detail::put_le(out, x);
  detail::put_le(out, c.dissipation);
  return out;
}

inline Checkpoint decode_checkpoint(const std::vector<unsigned char> &bytes) {
  constexpr std::size_t header = 6 + 4 + 4 + 8 + 8 + 8;
  if (bytes.size() < header)
    throw CheckpointError("checkpoint truncated: " + std::to_string(bytes.size()) + " bytes");
  if (std::memcmp(bytes.data(), checkpoint_magic.data(), checkpoint_magic.size()) != 0)
    throw CheckpointError("checkpoint has wrong magic");
  Checkpoint c;
  const unsigned char *p = bytes.data() + 6;
  c.dim = detail::get_le<std::uint32_t>(p);
  c.n = detail::get_le<std::uint32_t>(p + 4);
  c.step = detail::get_le<std::uint64_t>(p + 8);
  c.t = detail::get_le<double>(p + 16);
  c.eps = detail::get_le<double>(p + 24);
  if ((c.dim != 1 && c.dim != 2) || c.n == 0 || c.n > 4096)
    throw CheckpointError("checkpoint has invalid shape (dim " + std::to_string(c.dim) + ", n " +
                          std::to_string(c.n) + ")");
  const std::size_t modes = c.dim == 1 ? c.n : static_cast<std::size_t>(c.n) * c.n;
  const std::size_t expected = header + 16 * modes + 8;
  if (bytes.size() != expected)
    throw CheckpointError("checkpoint payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(expected));
  p = bytes.data() + header;
  c.u.resize(modes);
  c.v.resize(modes);
  for (std::size_t k = 0; k < modes; ++k, p += 8)
    c.u[k] = detail::get_le<double>(p);
  for (std::size_t k = 0; k < modes; ++k, p += 8)
    c.v[k] = detail::get_le<double>(p);
  c.dissipation = detail::get_le<double>(p);
  return c;
}

inline Checkpoint make_checkpoint(const SimState &s, double eps) {
  Checkpoint c;
  c.dim = static_cast<std::uint32_t>(s.u.grid.dim());
  c.n = static_cast<std::uint32_t>(s.u.grid.n());
  c.step = static_cast<std::uint64_t>(s.step);
  c.t = s.t;
  c.eps = eps;
  c.u.assign(s.u.coeffs.data(), s.u.coeffs.data() + s.u.coeffs.size());
  c.v.assign(s.v.coeffs.data(), s.v.coeffs.data() + s.v.coeffs.size());
  c.dissipation = s.dissipation_integral;
  return c;
}

inline void write_checkpoint(const std::filesystem::path &path, const Checkpoint &c) {
  const auto bytes = encode_checkpoint(c);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f)
    throw IoError("write failed: " + path.string());
}

inline Checkpoint read_checkpoint(const std::filesystem::path &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

/// State stored in a checkpoint, checked against the grid and eps of the run
/// that wants to continue from it.
inline SimState restore_state(const Checkpoint &c, const Grid &grid, double eps) {
  if (static_cast<int>(c.dim) != grid.dim() || static_cast<int>(c.n) != grid.n())
    throw CheckpointError("checkpoint grid (dim " + std::to_string(c.dim) + ", n " + std::to_string(c.n) +
                          ") does not match config (dim " + std::to_string(grid.dim()) + ", n " +
                          std::to_string(grid.n()) + ")");
  if (std::bit_cast<std::uint64_t>(c.eps) != std::bit_cast<std::uint64_t>(eps))
    throw CheckpointError("checkpoint eps " + std::to_string(c.eps) + " does not match config eps " +
                          std::to_string(eps));
  SimState s = SimState::zero(grid);
  s.u.coeffs = Eigen::Map<const Eigen::VectorXd>(c.u.data(), static_cast<Eigen::Index>(c.u.size()));
  s.v.coeffs = Eigen::Map<const Eigen::VectorXd>(c.v.data(), static_cast<Eigen::Index>(c.v.size()));
  s.t = c.t;
  s.step = static_cast<std::int64_t>(c.step);
  s.dissipation_integral = c.dissipation;
  return s;
}

inline SimState resume(const std::filesystem::path &path, const SimConfig &cfg) {
  return restore_state(read_checkpoint(path), cfg.grid, cfg.eps);
}

} // namespace chvi

#endif // CHVI_CHECKPOINT_HPP
