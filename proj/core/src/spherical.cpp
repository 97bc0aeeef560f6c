#include "layerpot/spherical.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/gauss.hpp"
#include "layerpot/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace layerpot::sph {

namespace {

constexpr double kPi = std::numbers::pi;

void check_unit(const Vec3& zeta) {
  if (!(std::abs(zeta.norm() - 1.0) <= 1e-12)) throw DomainError("harmonics need a unit vector");
}

// Fully normalized associated Legendre values pbar[j][m], m <= j, such that
// pbar_j^m(cos t) * {1, sqrt2 cos(m phi), sqrt2 sin(m phi)} is orthonormal on S^2.
std::vector<std::vector<double>> normalized_legendre(int jmax, double ct, double st) {
  std::vector<std::vector<double>> p(jmax + 1);
  for (int j = 0; j <= jmax; ++j) p[j].assign(j + 1, 0.0);
  p[0][0] = 1.0 / std::sqrt(4 * kPi);
  for (int m = 1; m <= jmax; ++m) p[m][m] = std::sqrt((2.0 * m + 1) / (2.0 * m)) * st * p[m - 1][m - 1];
  for (int m = 0; m < jmax; ++m) p[m + 1][m] = std::sqrt(2.0 * m + 3) * ct * p[m][m];
  for (int m = 0; m <= jmax; ++m) {
    for (int j = m + 2; j <= jmax; ++j) {
      const double jj = j, mm = m;
      const double a = std::sqrt((4 * jj * jj - 1) / (jj * jj - mm * mm));
      const double b = std::sqrt(((jj - 1) * (jj - 1) - mm * mm) / (4 * (jj - 1) * (jj - 1) - 1));
      p[j][m] = a * (ct * p[j - 1][m] - b * p[j - 2][m]);
    }
  }
  return p;
}

std::vector<double> harmonics_unchecked(int jmax, const Vec3& zeta) {
  const double ct = std::clamp(zeta[2], -1.0, 1.0);
  const double st = std::hypot(zeta[0], zeta[1]);
  const double phi = std::atan2(zeta[1], zeta[0]);
  const auto p = normalized_legendre(jmax, ct, st);
  std::vector<double> out(static_cast<std::size_t>(harmonic_count(jmax)));
  for (int j = 0; j <= jmax; ++j) {
    for (int m = -j; m <= j; ++m) {
      const int am = std::abs(m);
      double v = p[j][am];
      if (m > 0) v *= std::numbers::sqrt2 * std::cos(am * phi);
      if (m < 0) v *= std::numbers::sqrt2 * std::sin(am * phi);
      out[static_cast<std::size_t>(flat_index(j, m + j + 1))] = v;
    }
  }
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double eval_harmonic(const HarmonicIndex& idx, const Vec3& zeta) {
  if (idx.j < 0 || idx.ell < 1 || idx.ell > 2 * idx.j + 1) throw DomainError("invalid harmonic index");
  check_unit(zeta);
  return harmonics_unchecked(idx.j, zeta)[static_cast<std::size_t>(flat_index(idx.j, idx.ell))];
}

std::vector<double> eval_harmonics(int jmax, const Vec3& zeta) {
  if (jmax < 0) throw DomainError("jmax must be >= 0");
  check_unit(zeta);
  return harmonics_unchecked(jmax, zeta);
}

SphereQuadrature build_quadrature(int level) {
  if (level < 1) throw DomainError("quadrature level must be >= 1");
  const auto g = gauss_legendre(level);
  SphereQuadrature q;
  q.exactness = 2 * level - 1;
  const int na = 2 * level;
  for (int i = 0; i < level; ++i) {
    const double ct = g.x[i];
    const double st = std::sqrt(std::max(0.0, 1 - ct * ct));
    for (int k = 0; k < na; ++k) {
      const double phi = 2 * kPi * k / na;
      q.nodes.emplace_back(st * std::cos(phi), st * std::sin(phi), ct);
      q.weights.push_back(g.w[i] * 2 * kPi / na);
    }
  }
  return q;
}

Decomposition decompose(const SphereFn& k, int jmax, const SphereQuadrature& quad) {
  if (jmax < 0) throw DomainError("jmax must be >= 0");
  if (quad.exactness < 2 * jmax)
    throw DomainError("quadrature exactness " + std::to_string(quad.exactness) + " is below 2 jmax");
  const std::size_t nq = quad.nodes.size();
  const auto nh = static_cast<std::size_t>(harmonic_count(jmax));
  std::vector<std::vector<double>> phi(nq);
  std::vector<Vec3> kv(nq);
  parallel_for(nq, [&](std::size_t q) {
    phi[q] = harmonics_unchecked(jmax, quad.nodes[q]);
    kv[q] = k(quad.nodes[q]);
  });

  Decomposition dec;
  dec.jmax = jmax;
  for (auto& c : dec.coeffs) c.assign(nh, 0.0);
  parallel_for(nh, [&](std::size_t h) {
    std::vector<double> t[3];
    for (auto& v : t) v.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      const double wp = quad.weights[q] * phi[q][h];
      for (int c = 0; c < 3; ++c) t[c][q] = wp * kv[q][c];
    }
    for (int c = 0; c < 3; ++c) dec.coeffs[c][h] = pairwise_sum(t[c]);
  });

  std::vector<double> nrm(nq), res(nq);
  parallel_for(nq, [&](std::size_t q) {
    Vec3 rec = Vec3::Zero();
    for (std::size_t h = 0; h < nh; ++h)
      for (int c = 0; c < 3; ++c) rec[c] += dec.coeffs[c][h] * phi[q][h];
    nrm[q] = quad.weights[q] * kv[q].squaredNorm();
    res[q] = quad.weights[q] * (kv[q] - rec).squaredNorm();
  });
  dec.norm = std::sqrt(pairwise_sum(nrm));
  dec.residual = std::sqrt(pairwise_sum(res));
  return dec;
}

Vec3 reconstruct(const Decomposition& dec, const Vec3& zeta) {
  const auto phi = eval_harmonics(dec.jmax, zeta);
  Vec3 out = Vec3::Zero();
  for (std::size_t h = 0; h < phi.size(); ++h)
    for (int c = 0; c < 3; ++c) out[c] += dec.coeffs[c][h] * phi[h];
  return out;
}

DecayReport decay_report(const Decomposition& dec, const dini::OscillationModulus& omega, double cube_side,
                         double noise_rel) {
  DecayReport rep;
  double coeff_max = 0;
  for (const auto& c : dec.coeffs)
    for (double v : c) coeff_max = std::max(coeff_max, std::abs(v));
  rep.noise_floor = noise_rel * std::max(dec.norm, coeff_max);

  for (int j = 0; j <= dec.jmax; ++j) {
    double m = 0;
    for (int ell = 1; ell <= 2 * j + 1; ++ell)
      for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(dec.coeff(c, j, ell)));
    if (j % 2 == 0) {
      rep.even_max = std::max(rep.even_max, m);
    } else {
      rep.odd_j.push_back(j);
      rep.odd_max.push_back(m);
    }
  }

  const bool zero_omega = omega.family() == dini::Family::constant && omega.parameter() == 0;
  const double i_omega = zero_omega ? 0.0 : dini::dini_small(omega, cube_side);
  const double scale = std::sqrt(i_omega);
  std::vector<double> ratios, sx, sy;
  for (std::size_t i = 0; i < rep.odd_j.size(); ++i) {
    if (!(rep.odd_max[i] > rep.noise_floor)) continue;
    const double env = scale * std::pow(rep.odd_j[i], -kEnvelopeExponent);
    ratios.push_back(env > 0 ? rep.odd_max[i] / env : std::numeric_limits<double>::infinity());
    if (rep.odd_j[i] >= 3) {
      sx.push_back(rep.odd_j[i]);
      sy.push_back(rep.odd_max[i]);
    }
  }
  rep.vacuous = ratios.empty();
  if (!rep.vacuous) {
    rep.envelope_c = *std::max_element(ratios.begin(), ratios.end());
    double lsum = 0;
    for (double r : ratios) lsum += std::log(r);
    rep.envelope_lsq = std::exp(lsum / static_cast<double>(ratios.size()));
  }
  for (std::size_t i = 0; i < rep.odd_j.size(); ++i) {
    const double env = rep.envelope_c * scale * std::pow(rep.odd_j[i], -kEnvelopeExponent);
    rep.slack.push_back(rep.odd_max[i] > rep.noise_floor ? env / rep.odd_max[i]
                                                         : std::numeric_limits<double>::infinity());
  }
  rep.slope_points = static_cast<int>(sx.size());
  if (sx.size() >= 2) rep.slope = log_log_slope(sx, sy);
  return rep;
}

}  // namespace layerpot::sph
