#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace layerpot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ambient dimension is n+1 = 3 throughout; n is the dimension of the Riesz kernel.
inline constexpr int kN = 2;

/// Surface area of the unit sphere S^2, i.e. 2 pi^{3/2} / Gamma(3/2).
inline constexpr double kSphereArea = 4.0 * std::numbers::pi;

inline Mat3 sym_part(const Mat3& a) { return 0.5 * (a + a.transpose()); }
inline Mat3 skew_part(const Mat3& a) { return 0.5 * (a - a.transpose()); }

/// Max-entry matrix norm; the norm used for oscillation of matrix fields.
inline double max_entry_norm(const Mat3& a) { return a.cwiseAbs().maxCoeff(); }

inline double ball_volume(double r) { return 4.0 / 3.0 * std::numbers::pi * r * r * r; }

}  // namespace layerpot
