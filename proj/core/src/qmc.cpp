#include "layerpot/qmc.hpp"

#include <cmath>
#include <numbers>

namespace layerpot {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SeedStreams::seed(std::string_view stream) const {
  // FNV-1a of the stream name, mixed with the root.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root_ ^ splitmix64(h));
}

double radical_inverse(unsigned base, std::uint64_t idx) {
  const double inv = 1.0 / base;
  double f = inv, r = 0;
  while (idx > 0) {
    r += f * static_cast<double>(idx % base);
    idx /= base;
    f *= inv;
  }
  return r;
}

ShiftedHalton3::ShiftedHalton3(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (int k = 0; k < 3; ++k) {
    s = splitmix64(s);
    shift_[k] = static_cast<double>(s >> 11) * 0x1.0p-53;
  }
}

Vec3 ShiftedHalton3::point(std::uint64_t idx) const {
  static constexpr unsigned kBases[3] = {2, 3, 5};
  Vec3 p;
  for (int k = 0; k < 3; ++k) {
    double u = radical_inverse(kBases[k], idx + 1) + shift_[k];
    p[k] = u - std::floor(u);
  }
  return p;
}

Vec3 cube_to_ball(const Vec3& u) {
  const double r = std::cbrt(u[0]);
  const double ct = 2.0 * u[1] - 1.0;
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  const double ph = 2.0 * std::numbers::pi * u[2];
  return {r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
}

std::vector<Vec3> unit_ball_samples(std::size_t count, std::uint64_t seed) {
  ShiftedHalton3 h(seed);
  std::vector<Vec3> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = cube_to_ball(h.point(i));
  return out;
}

}  // namespace layerpot
