#include "layerpot/measures.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/gauss.hpp"
#include "layerpot/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace layerpot::measures {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes and weights on [0, 1].
void gauss_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  const auto g = gauss_legendre(n);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (1 - g.x[i]);
    w[i] = 0.5 * g.w[i];
  }
}

// Product rule on the unit ball: radial Gauss in s with weight s^2, Gauss in cos(theta),
// equispaced azimuth. Returns nodes and volume weights.
void ball_rule(int nr, int nc, int na, std::vector<Vec3>& nodes, std::vector<double>& weights) {
  std::vector<double> sr, wr, sc, wc;
  gauss_unit(nr, sr, wr);
  gauss_unit(nc, sc, wc);
  nodes.clear();
  weights.clear();
  for (int a = 0; a < nr; ++a) {
    for (int b = 0; b < nc; ++b) {
      const double ct = 2 * sc[b] - 1, st = std::sqrt(std::max(0.0, 1 - ct * ct));
      for (int c = 0; c < na; ++c) {
        const double ph = 2 * kPi * (c + 0.5) / na;
        nodes.emplace_back(sr[a] * st * std::cos(ph), sr[a] * st * std::sin(ph), sr[a] * ct);
        weights.push_back(wr[a] * sr[a] * sr[a] * 2 * wc[b] * 2 * kPi / na);
      }
    }
  }
}

DiscreteMeasure ifs_points(const IfsSpec& spec, int level, double skew, int child, bool lacunary) {
  if (level < 1) throw DomainError("ifs level must be >= 1");
  if (spec.maps.empty()) throw DomainError("ifs needs at least one map");
  if (!spec.open_set_condition()) throw DomainError("ifs images of the unit cube overlap (open-set check failed)");
  const std::size_t k = spec.maps.size();
  if (lacunary && (!(skew > 0) || skew > 1 || child < 0 || static_cast<std::size_t>(child) >= k))
    throw DomainError("lacunary needs skew in (0, 1] and a valid child index");
  DiscreteMeasure mu;
  mu.points = {Vec3(0.5, 0.5, 0.5)};
  mu.weights = {1.0};
  for (int g = 1; g <= level; ++g) {
    const bool routed = lacunary && (g % 2 == 1);
    DiscreteMeasure next;
    for (std::size_t f = 0; f < k; ++f) {
      double share = 1.0 / static_cast<double>(k);
      if (routed) share = f == static_cast<std::size_t>(child) ? skew : (1 - skew) / static_cast<double>(k - 1);
      if (share <= 0) continue;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        next.points.push_back(spec.maps[f](mu.points[i]));
        next.weights.push_back(mu.weights[i] * share);
      }
    }
    mu.points = std::move(next.points);
    mu.weights = std::move(next.weights);
  }
  return mu;
}

}  // namespace

double DiscreteMeasure::total_mass() const { return pairwise_sum(weights); }

void validate(const DiscreteMeasure& mu) {
  if (mu.points.size() != mu.weights.size()) throw DomainError("measure has mismatched points and weights");
  for (double w : mu.weights)
    if (!(w > 0) || !std::isfinite(w)) throw DomainError("measure weights must be positive and finite");
  for (const Vec3& p : mu.points)
    if (!p.allFinite()) throw DomainError("measure points must be finite");
}

IfsSpec IfsSpec::tetrix() {
  IfsSpec s{"tetrix", {}};
  for (const Vec3& fp : {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(1, 0, 1), Vec3(0, 1, 1)}) s.maps.push_back({0.5, fp});
  return s;
}

IfsSpec IfsSpec::garnett3d() {
  IfsSpec s{"garnett3d", {}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        const bool even = i % 2 == 0 && j % 2 == 0 && k % 2 == 0;
        const bool odd = i % 2 == 1 && j % 2 == 1 && k % 2 == 1;
        if (!even && !odd) continue;
        // f(x) = x/4 + c/4 has fixed point c/3.
        s.maps.push_back({0.25, Vec3(i, j, k) / 3.0});
      }
  return s;
}

IfsSpec IfsSpec::preset(const std::string& name) {
  if (name == "tetrix") return tetrix();
  if (name == "garnett3d") return garnett3d();
  throw ConfigError("unknown ifs preset '" + name + "' (expected tetrix or garnett3d)");
}

double IfsSpec::similarity_dimension() const {
  if (maps.empty()) return 0;
  return std::log(static_cast<double>(maps.size())) / std::log(1.0 / maps.front().ratio);
}

bool IfsSpec::open_set_condition() const {
  auto lower = [](const SimilarityMap& m) { return Vec3((1 - m.ratio) * m.fixed_point); };
  for (std::size_t a = 0; a < maps.size(); ++a) {
    for (std::size_t b = a + 1; b < maps.size(); ++b) {
      const Vec3 la = lower(maps[a]), lb = lower(maps[b]);
      bool overlap = true;
      for (int c = 0; c < 3; ++c) {
        const double lo = std::max(la[c], lb[c]);
        const double hi = std::min(la[c] + maps[a].ratio, lb[c] + maps[b].ratio);
        if (hi - lo <= 1e-12) overlap = false;
      }
      if (overlap) return false;
    }
  }
  return true;
}

DiscreteMeasure generate(const Family& family, std::uint64_t seed) {
  DiscreteMeasure mu;
  mu.meta.seed = seed;
  if (const auto* p = std::get_if<PlanePatch>(&family)) {
    if (p->n < 2) throw DomainError("plane_patch needs N >= 2");
    const double h = 1.0 / p->n;
    for (int i = 0; i < p->n; ++i)
      for (int j = 0; j < p->n; ++j) {
        mu.points.emplace_back((i + 0.5) * h, (j + 0.5) * h, 0.0);
        mu.weights.push_back(h * h);
      }
    mu.meta.family = "plane_patch";
    mu.meta.resolution = p->n;
  } else if (const auto* s = std::get_if<Sphere>(&family)) {
    if (s->n < 2) throw DomainError("sphere needs N >= 2");
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < s->n; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / s->n;
      const double r = std::sqrt(std::max(0.0, 1 - z * z));
      const double ph = golden * k;
      mu.points.emplace_back(r * std::cos(ph), r * std::sin(ph), z);
      mu.weights.push_back(4 * kPi / s->n);
    }
    mu.meta.family = "sphere";
    mu.meta.resolution = s->n;
  } else if (const auto* g = std::get_if<LipschitzGraph>(&family)) {
    if (g->n < 2) throw DomainError("lipschitz_graph needs N >= 2");
    const double h = 1.0 / g->n;
    for (int i = 0; i < g->n; ++i)
      for (int j = 0; j < g->n; ++j) {
        const double u = (i + 0.5) * h, v = (j + 0.5) * h;
        const double su = std::sin(g->freq * u), sv = std::sin(g->freq * v);
        const double hu = g->amp * g->freq * std::cos(g->freq * u) * sv;
        const double hv = g->amp * g->freq * su * std::cos(g->freq * v);
        mu.points.emplace_back(u, v, g->amp * su * sv);
        mu.weights.push_back(h * h * std::sqrt(1 + hu * hu + hv * hv));
      }
    mu.meta.family = "lipschitz_graph";
    mu.meta.resolution = g->n;
  } else if (const auto* f = std::get_if<Ifs>(&family)) {
    mu = ifs_points(f->spec, f->level, 1.0, 0, false);
    mu.meta.family = "ifs:" + f->spec.name;
    mu.meta.level = f->level;
    mu.meta.seed = seed;
  } else if (const auto* l = std::get_if<Lacunary>(&family)) {
    mu = ifs_points(l->spec, l->level, l->skew, l->child, true);
    mu.meta.family = "lacunary:" + l->spec.name;
    mu.meta.level = l->level;
    mu.meta.seed = seed;
  }
  return mu;
}

double ball_mass(const DiscreteMeasure& mu, const Vec3& c, double r, bool closed) {
  const double r2 = r * r;
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d2 = (mu.points[i] - c).squaredNorm();
    if (d2 < r2 || (closed && d2 == r2)) s += mu.weights[i];
  }
  return s;
}

double min_spacing(const DiscreteMeasure& mu) {
  const std::size_t n = mu.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return mu.points[a][0] < mu.points[b][0]; });
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    const Vec3& p = mu.points[idx[a]];
    for (std::size_t b = a + 1; b < n; ++b) {
      const Vec3& q = mu.points[idx[b]];
      if (q[0] - p[0] >= best) break;
      const double d = (q - p).norm();
      if (d > 0 && d < best) best = d;
    }
  }
  return best;
}

double diameter(const DiscreteMeasure& mu) {
  double best = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = i + 1; j < mu.size(); ++j) best = std::max(best, (mu.points[i] - mu.points[j]).squaredNorm());
  return std::sqrt(best);
}

Cube bounding_cube(const DiscreteMeasure& mu) {
  if (mu.empty()) return {Vec3::Zero(), 1.0};
  Vec3 lo = mu.points[0], hi = mu.points[0];
  for (const Vec3& p : mu.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double side = std::max((hi - lo).maxCoeff(), 1e-12);
  return {0.5 * (lo + hi), side};
}

Vec3 barycenter(const DiscreteMeasure& mu) {
  Vec3 s = Vec3::Zero();
  for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weights[i] * mu.points[i];
  return s / mu.total_mass();
}

double atomic_scale(const DiscreteMeasure& mu) { return 2.0 * min_spacing(mu); }

GrowthReport growth_report(const DiscreteMeasure& mu, std::span<const double> r_grid, std::size_t extra_centers,
                           std::uint64_t seed, double exponent) {
  GrowthReport rep;
  rep.r_grid.assign(r_grid.begin(), r_grid.end());
  rep.atomic_scale = atomic_scale(mu);
  std::vector<Vec3> centers = mu.points;
  const Cube q = bounding_cube(mu);
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t k = 0; k < extra_centers; ++k) {
    const double a = u(eng), b = u(eng), c = u(eng);
    centers.push_back(q.center + q.side * Vec3(a, b, c));
  }
  rep.per_radius_max.assign(rep.r_grid.size(), 0.0);
  parallel_for(rep.r_grid.size(), [&](std::size_t k) {
    const double r = rep.r_grid[k];
    double best = 0;
    for (const Vec3& c : centers) best = std::max(best, ball_mass(mu, c, r) / std::pow(r, exponent));
    rep.per_radius_max[k] = best;
  });
  bool any_safe = false;
  for (std::size_t k = 0; k < rep.r_grid.size(); ++k) {
    if (rep.r_grid[k] < rep.atomic_scale) {
      rep.atomic_flag = true;
      continue;
    }
    any_safe = true;
    rep.c0_hat = std::max(rep.c0_hat, rep.per_radius_max[k]);
  }
  if (!any_safe)
    for (double v : rep.per_radius_max) rep.c0_hat = std::max(rep.c0_hat, v);
  return rep;
}

DensityProfile density_profile(const DiscreteMeasure& mu, const Vec3& x, std::span<const double> r_grid) {
  DensityProfile p;
  p.r_grid.assign(r_grid.begin(), r_grid.end());
  const double atomic = atomic_scale(mu);
  p.first_safe = p.r_grid.size();
  for (std::size_t k = 0; k < p.r_grid.size(); ++k) {
    const double r = p.r_grid[k];
    p.theta_vals.push_back(ball_mass(mu, x, r) / (4 * r * r));
    if (r >= atomic && p.first_safe == p.r_grid.size()) p.first_safe = k;
  }
  std::size_t lo = p.first_safe < p.r_grid.size() ? p.first_safe : 0;
  p.upper_hat = 0;
  p.lower_hat = std::numeric_limits<double>::infinity();
  for (std::size_t k = lo; k < p.r_grid.size(); ++k) {
    if (p.r_grid[k] < atomic && p.first_safe < p.r_grid.size()) continue;
    p.upper_hat = std::max(p.upper_hat, p.theta_vals[k]);
    p.lower_hat = std::min(p.lower_hat, p.theta_vals[k]);
  }
  if (p.theta_vals.empty()) p.lower_hat = 0;
  return p;
}

namespace {

template <class Pred>
DiscreteMeasure restrict_if(const DiscreteMeasure& mu, Pred&& inside) {
  DiscreteMeasure out;
  out.meta = mu.meta;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (inside(mu.points[i])) {
      out.points.push_back(mu.points[i]);
      out.weights.push_back(mu.weights[i]);
    }
  return out;
}

}  // namespace

DiscreteMeasure restrict(const DiscreteMeasure& mu, const Ball& b) {
  return restrict_if(mu, [&](const Vec3& p) { return b.contains_closed(p); });
}

DiscreteMeasure restrict(const DiscreteMeasure& mu, const Cube& q) {
  return restrict_if(mu, [&](const Vec3& p) { return q.contains_closed(p); });
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const Mat3& m, const Vec3& shift) {
  DiscreteMeasure out = mu;
  for (Vec3& p : out.points) p = m * p + shift;
  return out;
}

double mollifier_radial(double s) {
  if (s >= 1) return 0.0;
  const double t = 1 - s * s;
  return 105.0 / (32.0 * kPi) * t * t;
}

double mollifier(const Vec3& z) { return mollifier_radial(z.norm()); }

DiscreteMeasure mollify(const DiscreteMeasure& nu, double eps, int quad_order) {
  if (!(eps > 0)) throw DomainError("mollify needs eps > 0");
  if (quad_order < 1) throw DomainError("mollify needs quad_order >= 1");
  std::vector<Vec3> nodes;
  std::vector<double> vol;
  ball_rule(quad_order, quad_order, quad_order, nodes, vol);
  std::vector<double> shape(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) shape[k] = vol[k] * mollifier(nodes[k]);
  const double norm = pairwise_sum(shape);
  DiscreteMeasure out;
  out.meta = nu.meta;
  out.points.reserve(nu.size() * nodes.size());
  out.weights.reserve(nu.size() * nodes.size());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      out.points.push_back(nu.points[i] + eps * nodes[k]);
      out.weights.push_back(nu.weights[i] * (shape[k] / norm));
    }
  }
  return out;
}

double mollified_ball_mass(const DiscreteMeasure& nu, double eps, const Vec3& c, double r, int order) {
  if (!(eps > 0) || !(r > 0)) throw DomainError("mollified_ball_mass needs eps, r > 0");
  std::vector<Vec3> nodes;
  std::vector<double> vol;
  ball_rule(order, order, 2 * order, nodes, vol);
  double total = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const Vec3& p = nu.points[i];
    const double d = (p - c).norm();
    if (d >= r + eps) continue;
    // Integrate over the smaller of the two balls; the integrand vanishes outside the other.
    double s = 0;
    if (r <= eps) {
      for (std::size_t k = 0; k < nodes.size(); ++k)
        s += vol[k] * mollifier((c + r * nodes[k] - p) / eps);
      s *= r * r * r / (eps * eps * eps);
    } else {
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Vec3 y = p + eps * nodes[k];
        if ((y - c).squaredNorm() < r * r) s += vol[k] * mollifier(nodes[k]);
      }
    }
    total += nu.weights[i] * s;
  }
  return total;
}

}  // namespace layerpot::measures
