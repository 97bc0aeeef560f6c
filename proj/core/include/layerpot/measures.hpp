#pragma once

// Finite atomic measures in R^3: generators, ball counts, growth and density statistics,
// restriction, push-forward and mollification.

#include "layerpot/linalg.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace layerpot::measures {

struct Meta {
  std::string family;
  int level = 0;
  int resolution = 0;
  std::uint64_t seed = 0;
};

struct DiscreteMeasure {
  std::vector<Vec3> points;
  std::vector<double> weights;
  Meta meta;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double total_mass() const;
};

/// Throws DomainError if weights are not positive or sizes differ.
void validate(const DiscreteMeasure& mu);

struct Ball {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  Ball dilate(double lambda) const { return {center, lambda * radius}; }
  bool contains_closed(const Vec3& p) const { return (p - center).norm() <= radius; }
};

/// Axis-parallel cube [c - l/2, c + l/2]^3.
struct Cube {
  Vec3 center = Vec3::Zero();
  double side = 1.0;
  Cube dilate(double lambda) const { return {center, lambda * side}; }
  bool contains_closed(const Vec3& p) const { return ((p - center).cwiseAbs().array() <= 0.5 * side).all(); }
};

struct SimilarityMap {
  double ratio;
  Vec3 fixed_point;
  Vec3 operator()(const Vec3& p) const { return fixed_point + ratio * (p - fixed_point); }
};

struct IfsSpec {
  std::string name;
  std::vector<SimilarityMap> maps;

  static IfsSpec tetrix();
  static IfsSpec garnett3d();
  static IfsSpec preset(const std::string& name);

  /// Similarity dimension, assuming a common ratio.
  double similarity_dimension() const;
  /// True when the images of the unit cube have pairwise disjoint interiors.
  bool open_set_condition() const;
};

struct PlanePatch {
  int n = 16;
};
struct Sphere {
  int n = 256;
};
struct LipschitzGraph {
  double amp = 0.1;
  double freq = 6.0;
  int n = 16;
};
struct Ifs {
  IfsSpec spec;
  int level = 3;
};
/// At every odd generation a fraction `skew` of the mass goes to map `child`; skew = 1
/// keeps only that child.
struct Lacunary {
  IfsSpec spec;
  int level = 4;
  double skew = 1.0;
  int child = 0;
};

using Family = std::variant<PlanePatch, Sphere, LipschitzGraph, Ifs, Lacunary>;

DiscreteMeasure generate(const Family& family, std::uint64_t seed = 0);

/// mu(B(c, r)); open ball unless `closed`.
double ball_mass(const DiscreteMeasure& mu, const Vec3& c, double r, bool closed = false);

/// Smallest distance between two distinct atoms (infinity for fewer than two atoms).
double min_spacing(const DiscreteMeasure& mu);
double diameter(const DiscreteMeasure& mu);
/// Smallest axis-parallel cube containing the support.
Cube bounding_cube(const DiscreteMeasure& mu);
Vec3 barycenter(const DiscreteMeasure& mu);

/// Radii below this are atomic: 2 x min spacing.
double atomic_scale(const DiscreteMeasure& mu);

struct GrowthReport {
  double c0_hat = 0;
  std::vector<double> r_grid;
  std::vector<double> per_radius_max;  // max over centers of mu(B(x,r))/r^n
  double atomic_scale = 0;
  bool atomic_flag = false;  // some radius below the atomic scale was used
};

/// Centers: every atom plus `extra_centers` random points in the bounding cube.
GrowthReport growth_report(const DiscreteMeasure& mu, std::span<const double> r_grid,
                           std::size_t extra_centers = 64, std::uint64_t seed = 0, double exponent = 2.0);

struct DensityProfile {
  std::vector<double> r_grid;
  std::vector<double> theta_vals;  // mu(B(x,r)) / (2r)^2
  double upper_hat = 0;
  double lower_hat = 0;
  std::size_t first_safe = 0;      // first index at or above the atomic scale
};

DensityProfile density_profile(const DiscreteMeasure& mu, const Vec3& x, std::span<const double> r_grid);

DiscreteMeasure restrict(const DiscreteMeasure& mu, const Ball& b);
DiscreteMeasure restrict(const DiscreteMeasure& mu, const Cube& q);

/// Push-forward by p -> m p + shift; weights unchanged.
DiscreteMeasure pushforward(const DiscreteMeasure& mu, const Mat3& m, const Vec3& shift = Vec3::Zero());

/// phi(z) = 105/(32 pi) (1 - |z|^2)^2 on the unit ball; integral 1, max 105/(32 pi) < 2.
double mollifier(const Vec3& z);
double mollifier_radial(double s);

/// Replaces each atom (p, w) by Gauss nodes of w phi_eps(. - p); weights renormalized per atom.
DiscreteMeasure mollify(const DiscreteMeasure& nu, double eps, int quad_order = 3);

/// nu_eps(B(c, r)) computed by quadrature of the mollified density over the ball.
double mollified_ball_mass(const DiscreteMeasure& nu, double eps, const Vec3& c, double r, int order = 24);

/// sum_i g(p_i) w_i.
template <class G>
double integrate(const DiscreteMeasure& mu, G&& g) {
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += g(mu.points[i]) * mu.weights[i];
  return s;
}

}  // namespace layerpot::measures
