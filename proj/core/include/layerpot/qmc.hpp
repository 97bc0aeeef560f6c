#pragma once

#include "layerpot/linalg.hpp"

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace layerpot {

/// Splits a root seed into independent named streams, so that adding a consumer
/// never perturbs the draws of another.
class SeedStreams {
 public:
  explicit SeedStreams(std::uint64_t root) : root_(root) {}

  std::uint64_t root() const { return root_; }
  std::uint64_t seed(std::string_view stream) const;
  std::mt19937_64 engine(std::string_view stream) const { return std::mt19937_64(seed(stream)); }

 private:
  std::uint64_t root_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Radical inverse of idx in the given base.
double radical_inverse(unsigned base, std::uint64_t idx);

/// Halton points in bases (2,3,5) with a Cranley-Patterson rotation derived from the seed.
class ShiftedHalton3 {
 public:
  explicit ShiftedHalton3(std::uint64_t seed);
  Vec3 point(std::uint64_t idx) const;

 private:
  Vec3 shift_;
};

/// Volume-preserving map from the unit cube onto the unit ball.
Vec3 cube_to_ball(const Vec3& u);

/// Deterministic low-discrepancy sample of the unit ball, `count` points.
std::vector<Vec3> unit_ball_samples(std::size_t count, std::uint64_t seed);

}  // namespace layerpot
