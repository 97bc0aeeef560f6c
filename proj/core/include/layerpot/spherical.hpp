#pragma once

// Real orthonormal spherical harmonics on S^2, a product quadrature, and expansions of
// vector-valued functions on the sphere.

#include "layerpot/dini.hpp"
#include "layerpot/linalg.hpp"

#include <array>
#include <functional>
#include <vector>

namespace layerpot::sph {

/// Degree j >= 0 and order ell in 1..2j+1; ell corresponds to m = ell - j - 1.
struct HarmonicIndex {
  int j = 0;
  int ell = 1;
};

inline int harmonic_count(int jmax) { return (jmax + 1) * (jmax + 1); }
inline int flat_index(int j, int ell) { return j * j + ell - 1; }

/// Real harmonic without Condon-Shortley phase: m > 0 uses cos(m phi), m < 0 sin(|m| phi).
/// With this convention the degree-1 harmonics are sqrt(3/4pi) (zeta_2, zeta_3, zeta_1) for ell = 1, 2, 3.
double eval_harmonic(const HarmonicIndex& idx, const Vec3& zeta);

/// All harmonics up to jmax at zeta, in flat_index order. Throws DomainError if |zeta| != 1.
std::vector<double> eval_harmonics(int jmax, const Vec3& zeta);

struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int exactness = 0;
};

/// Gauss-Legendre in cos(theta) (L nodes) times 2L equispaced azimuths; exact to degree 2L-1.
SphereQuadrature build_quadrature(int level);

using SphereFn = std::function<Vec3(const Vec3&)>;

struct Decomposition {
  int jmax = 0;
  std::array<std::vector<double>, 3> coeffs;  // per component, flat_index order
  double residual = 0;                        // L^2(S^2) norm of K minus reconstruction
  double norm = 0;                            // L^2(S^2) norm of K
  Vec3 x = Vec3::Zero();
  double delta = 0;

  double coeff(int component, int j, int ell) const { return coeffs[component][flat_index(j, ell)]; }
};

Decomposition decompose(const SphereFn& k, int jmax, const SphereQuadrature& quad);

Vec3 reconstruct(const Decomposition& dec, const Vec3& zeta);

struct DecayReport {
  double even_max = 0;
  std::vector<int> odd_j;
  std::vector<double> odd_max;     // max over ell and components of |k_{j,ell}|
  double envelope_c = 0;           // smallest C with odd_max <= C I_omega(l)^{1/2} j^{-7/2}
  double envelope_lsq = 0;         // least-squares C on the log scale
  std::vector<double> slack;       // envelope / odd_max per odd j (inf when below noise)
  double slope = 0;                // log-log slope over odd j in [3, jmax] above the noise floor
  int slope_points = 0;
  bool vacuous = false;            // no odd coefficient above the noise floor
  double noise_floor = 0;
};

/// Coefficient envelope exponent (n+5)(n-1)/2 at n = 2.
inline constexpr double kEnvelopeExponent = 3.5;

DecayReport decay_report(const Decomposition& dec, const dini::OscillationModulus& omega, double cube_side,
                         double noise_rel = 1e-13);

}  // namespace layerpot::sph
