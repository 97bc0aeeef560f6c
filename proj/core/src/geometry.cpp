#include "layerpot/operators.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace layerpot::ops {

namespace {

// Plain Nelder-Mead with the standard coefficients and a fixed iteration count.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                            const Eigen::VectorXd& step, int iterations) {
  const auto n = static_cast<std::size_t>(x0.size());
  std::vector<Eigen::VectorXd> s(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][static_cast<Eigen::Index>(i)] += step[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
  std::vector<std::size_t> idx(n + 1);
  for (int it = 0; it < iterations; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
    Eigen::VectorXd c = Eigen::VectorXd::Zero(x0.size());
    for (std::size_t i = 0; i < n; ++i) c += s[idx[i]];
    c /= static_cast<double>(n);
    const Eigen::VectorXd xr = c + (c - s[worst]);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const Eigen::VectorXd xe = c + 2.0 * (c - s[worst]);
      const double fe = f(xe);
      s[worst] = fe < fr ? xe : xr;
      fv[worst] = std::min(fe, fr);
      continue;
    }
    if (fr < fv[second]) {
      s[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const Eigen::VectorXd xc = fr < fv[worst] ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (s[worst] - c));
    const double fc = f(xc);
    if (fc < std::min(fr, fv[worst])) {
      s[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      s[idx[i]] = s[best] + 0.5 * (s[idx[i]] - s[best]);
      fv[idx[i]] = f(s[idx[i]]);
    }
  }
  return s[static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin())];
}

Vec3 normal_from_angles(double th, double ph) {
  return {std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
}

std::pair<double, double> angles_from_normal(const Vec3& n) {
  return {std::acos(std::clamp(n[2], -1.0, 1.0)), std::atan2(n[1], n[0])};
}

struct Inside {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

Inside open_ball_atoms(const DiscreteMeasure& mu, const Ball& b) {
  Inside in;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if ((mu.points[i] - b.center).norm() < b.radius) {
      in.points.push_back(mu.points[i]);
      in.weights.push_back(mu.weights[i]);
    }
  }
  if (in.points.empty()) throw DomainError("ball carries no mass");
  return in;
}

double beta_of(const Inside& in, const Ball& b, const Plane& l) {
  std::vector<double> t(in.points.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = l.distance(in.points[i]) / b.radius * in.weights[i];
  return pairwise_sum(t) / std::pow(b.radius, kN);
}

// Smallest principal axis of the weighted second moment about `about`.
Vec3 pca_normal(const Inside& in, const Vec3& about) {
  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < in.points.size(); ++i) {
    const Vec3 d = in.points[i] - about;
    cov += in.weights[i] * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return es.eigenvectors().col(0).normalized();
}

double bounded_theta(const DiscreteMeasure& mu, const Vec3& c, double r) {
  return ball_mass(mu, c, r) / std::pow(r, kN);
}

}  // namespace

Plane Plane::through(const Vec3& point, const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0)) throw DomainError("plane normal must be non-zero");
  const Vec3 u = normal / n;
  return {u, u.dot(point)};
}

double beta_plane(const DiscreteMeasure& mu, const Ball& b, const Plane& l) {
  if (!(b.radius > 0)) throw DomainError("beta needs a ball of positive radius");
  return beta_of(open_ball_atoms(mu, b), b, l);
}

BetaResult beta_flatness(const DiscreteMeasure& mu, const Ball& b, const std::optional<Plane>& plane) {
  if (!(b.radius > 0)) throw DomainError("beta needs a ball of positive radius");
  const Inside in = open_ball_atoms(mu, b);
  BetaResult out;
  if (plane) {
    out.beta = out.beta_pca = beta_of(in, b, *plane);
    out.plane = out.pca_plane = *plane;
    return out;
  }
  const double m = std::accumulate(in.weights.begin(), in.weights.end(), 0.0);
  Vec3 bary = Vec3::Zero();
  for (std::size_t i = 0; i < in.points.size(); ++i) bary += in.weights[i] * in.points[i];
  bary /= m;
  out.pca_plane = Plane::through(bary, pca_normal(in, bary));
  out.beta_pca = beta_of(in, b, out.pca_plane);
  const auto [th0, ph0] = angles_from_normal(out.pca_plane.normal);
  auto f = [&](const Eigen::VectorXd& v) { return beta_of(in, b, Plane{normal_from_angles(v[0], v[1]), v[2]}); };
  const Eigen::VectorXd best = nelder_mead(f, Eigen::Vector3d(th0, ph0, out.pca_plane.offset),
                                           Eigen::Vector3d(0.1, 0.1, 0.1 * b.radius), 200);
  const Plane nm{normal_from_angles(best[0], best[1]), best[2]};
  const double beta_nm = beta_of(in, b, nm);
  if (beta_nm < out.beta_pca) {
    out.beta = beta_nm;
    out.plane = nm;
  } else {
    out.beta = out.beta_pca;
    out.plane = out.pca_plane;
  }
  return out;
}

double AlphaSpec::operator()(double t) const { return t + std::pow(t, beta) + omega(t); }

double AlphaSpec::dini_small(double r) const {
  if (!(r > 0)) throw DomainError("dini integral needs r > 0");
  const bool zero_omega = omega.family() == dini::Family::constant && omega.parameter() == 0;
  return r + std::pow(r, beta) / beta + (zero_omega ? 0.0 : dini::dini_small(omega, r));
}

double theta_mu(const DiscreteMeasure& mu, const Ball& b) {
  if (!(b.radius > 0)) throw DomainError("theta_mu needs a ball of positive radius");
  return bounded_theta(mu, b.center, b.radius);
}

GeometryFunctionals geometry_functionals(const DiscreteMeasure& mu, const Ball& b, double gamma, int n_scale,
                                         const AlphaSpec& alpha, int j_terms) {
  if (!(gamma > 0 && gamma <= 1)) throw DomainError("gamma must lie in (0, 1]");
  if (n_scale < 0 || j_terms < 1) throw DomainError("n_scale >= 0 and j_terms >= 1 required");
  GeometryFunctionals g;
  g.theta_B = theta_mu(mu, b);
  std::vector<double> pg, pn;
  for (int j = 0; j < j_terms; ++j) pg.push_back(std::exp2(-gamma * j) * theta_mu(mu, b.dilate(std::exp2(j))));
  for (int j = n_scale; j < n_scale + j_terms; ++j)
    pn.push_back(alpha(std::exp2(-j)) * theta_mu(mu, b.dilate(std::exp2(j))));
  g.P_gamma = pairwise_sum(pg);
  g.P_N_omega = pairwise_sum(pn);
  return g;
}

MeanOscillation mean_oscillation(const DiscreteMeasure& mu, const kernels::KernelSpec& k, const Ball& b,
                                 double delta) {
  if (!(delta > 0)) throw DomainError("mean_oscillation needs delta > 0");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if ((mu.points[i] - b.center).norm() < b.radius) idx.push_back(i);
  if (idx.empty()) throw DomainError("ball carries no mass");
  const std::vector<double> ones(mu.size(), 1.0);
  std::vector<Vec3> t1(idx.size());
  parallel_for(idx.size(), [&](std::size_t a) { t1[a] = apply_truncated(k, mu, delta, ones, mu.points[idx[a]]); });
  std::vector<double> w(idx.size()), comp[3];
  for (auto& c : comp) c.resize(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    w[a] = mu.weights[idx[a]];
    for (int c = 0; c < 3; ++c) comp[c][a] = w[a] * t1[a][c];
  }
  const double mass = pairwise_sum(w);
  MeanOscillation out;
  out.mean = Vec3(pairwise_sum(comp[0]), pairwise_sum(comp[1]), pairwise_sum(comp[2])) / mass;
  std::vector<double> dev(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) dev[a] = w[a] * (t1[a] - out.mean).squaredNorm();
  out.value = pairwise_sum(dev) / mass;
  return out;
}

bool CriterionReport::all_pass() const {
  return std::all_of(hypotheses.begin(), hypotheses.end(), [](const HypothesisResult& h) { return h.pass; });
}

bool CriterionReport::hypothesis_pass(int k) const {
  if (k < 1 || k > 5) throw DomainError("hypothesis index must be in 1..5");
  const std::string prefix = "(" + std::to_string(k);
  bool any = false, all = true;
  for (const auto& h : hypotheses) {
    if (h.name.rfind(prefix, 0) != 0) continue;
    any = true;
    all = all && h.pass;
  }
  return any && all;
}

CriterionReport criterion_check(const DiscreteMeasure& mu, const Ball& b, const CriterionParams& p,
                                const field::MatrixField& a) {
  validate(mu);
  CriterionReport rep;
  const double scale = std::exp2(p.n_scale);
  const Ball big = b.dilate(scale);
  rep.scale_flag = big.radius > diameter(mu);
  auto add = [&](std::string name, double measured, double bound) {
    rep.hypotheses.push_back({std::move(name), measured <= bound, measured, bound});
  };
  add("(1) r(B) <= lambda", b.radius, p.lambda);

  const double theta_b = theta_mu(mu, b);
  const double theta_big = theta_mu(mu, big);
  AlphaSpec alpha = p.alpha;
  alpha.omega = a.declared_modulus();
  const auto p0 = geometry_functionals(mu, b, 1.0, 0, alpha);
  const auto pn = geometry_functionals(mu, b, 1.0, p.n_scale, alpha);
  add("(2a) P^0 <= C0 Theta(B)", p0.P_N_omega, p.c0 * theta_b);
  add("(2b) P^N <= C0 I_alpha(2^-N) Theta(2^N B)", pn.P_N_omega,
      p.c0 * alpha.dini_small(1.0 / scale) * theta_big);

  // Local density bound over centres in B and radii above the atomic scale.
  double local = 0;
  {
    std::vector<Vec3> centers;
    for (std::size_t i = 0; i < mu.size(); ++i)
      if ((mu.points[i] - b.center).norm() < b.radius) centers.push_back(mu.points[i]);
    const double r_lo = std::min(atomic_scale(mu), big.radius);
    const auto radii = dini::geometric_grid(r_lo, big.radius, 8);
    std::vector<double> best(centers.size(), 0.0);
    parallel_for(centers.size(), [&](std::size_t i) {
      for (double r : radii) best[i] = std::max(best[i], bounded_theta(mu, centers[i], r));
    });
    for (double v : best) local = std::max(local, v);
  }
  add("(2c) Theta(B(x,r)) <= C0 Theta(2^N B)", local, p.c0 * theta_big);

  const double delta = p.truncation > 0 ? p.truncation : 0.5 * min_spacing(mu);
  auto frozen = std::make_shared<const kernels::FrozenKernel>(std::make_shared<const field::MatrixField>(a),
                                                              p.averaging);
  const auto t = kernels::KernelSpec::frozen(frozen);
  const DiscreteMeasure local_mu = restrict(mu, big);
  double norm_t = 0;
  if (local_mu.size() >= 2) {
    auto grid = default_delta_grid(local_mu);
    for (double& g : grid) g = std::max(g, delta);
    norm_t = opnorm(t, local_mu, grid, p.opnorm).sup;
  }
  add("(3) ||T|| on mu|2^N B <= C0' Theta(2^N B)", norm_t, p.c0_prime * theta_big);

  // Flatness against the best plane through the centre of B.
  double beta = 0;
  {
    const Inside in = open_ball_atoms(mu, b);
    const auto [th0, ph0] = angles_from_normal(pca_normal(in, b.center));
    auto f = [&](const Eigen::VectorXd& v) {
      return beta_of(in, b, Plane::through(b.center, normal_from_angles(v[0], v[1])));
    };
    const Eigen::Vector2d x0(th0, ph0);
    const double start = f(x0);
    const Eigen::VectorXd best = nelder_mead(f, x0, Eigen::Vector2d(0.1, 0.1), 200);
    beta = std::min(start, f(best));
  }
  add("(4) beta_L(B) <= delta_flat Theta(B)", beta, p.delta_flat * theta_b);

  const auto mo = mean_oscillation(mu, t, b, delta);
  const double mass_b = ball_mass(mu, b.center, b.radius);
  add("(5) int_B |T1 - m|^2 <= tau Theta(2^N B)^2 mu(B)", mass_b * mo.value,
      p.tau * theta_big * theta_big * mass_b);
  return rep;
}

}  // namespace layerpot::ops
