#include "layerpot/operators.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace layerpot::ops {

Vec3 apply_truncated(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                     std::span<const double> f, const Vec3& x) {
  if (f.size() != mu.size()) throw DomainError("apply_truncated: f must have one value per atom");
  const std::size_t n = mu.size();
  std::vector<double> terms[3];
  for (auto& t : terms) t.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!((x - mu.points[j]).norm() > delta)) continue;
    const Vec3 kw = k(x, mu.points[j]) * mu.weights[j];
    for (int c = 0; c < 3; ++c) terms[c][j] = kw[c] * f[j];
  }
  return {pairwise_sum(terms[0]), pairwise_sum(terms[1]), pairwise_sum(terms[2])};
}

Eigen::MatrixXd assemble(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                         std::size_t max_atoms) {
  const std::size_t n = mu.size();
  if (n > max_atoms)
    throw BudgetError("assemble: " + std::to_string(n) + " atoms exceed the dense budget of " +
                      std::to_string(max_atoms) + "; use opnorm, which streams rows");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * ni, ni);
  parallel_for(n, [&](std::size_t i) {
    const Vec3& x = mu.points[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (!((x - mu.points[j]).norm() > delta)) continue;
      const Vec3 kw = k(x, mu.points[j]) * mu.weights[j];
      for (int c = 0; c < 3; ++c) m(3 * static_cast<Eigen::Index>(i) + c, static_cast<Eigen::Index>(j)) = kw[c];
    }
  });
  return m;
}

Eigen::VectorXd matvec_pairwise(const Eigen::MatrixXd& m, std::span<const double> f) {
  if (static_cast<std::size_t>(m.cols()) != f.size()) throw DomainError("matvec_pairwise: size mismatch");
  Eigen::VectorXd out(m.rows());
  std::vector<double> terms(f.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (std::size_t j = 0; j < f.size(); ++j) terms[j] = m(r, static_cast<Eigen::Index>(j)) * f[j];
    out[r] = pairwise_sum(terms);
  }
  return out;
}

SchurBound schur_bound(const dini::OscillationModulus& theta, double d, const DiscreteMeasure& mu, double R,
                       double delta, std::optional<double> c0) {
  validate(mu);
  SchurBound sb;
  const std::size_t n = mu.size();
  // |K(x, y)| <= theta(|x-y|)/|x-y|^d is symmetric, so the column sums equal the row sums.
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> rt(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = (mu.points[i] - mu.points[j]).norm();
      if (i == j || !(r > delta)) continue;
      rt[j] = theta(r) / std::pow(r, d) * mu.weights[j];
    }
    rows[i] = pairwise_sum(rt);
  });
  for (double v : rows) sb.discrete = std::max(sb.discrete, v);
  if (c0) {
    sb.c0 = *c0;
  } else if (n > 0) {
    const double lo = std::min(atomic_scale(mu), R);
    const auto grid = dini::geometric_grid(std::isfinite(lo) && lo > 0 ? lo : R, R, 8);
    sb.c0 = growth_report(mu, grid, 0, 0, d).c0_hat;
  }
  double i_theta = 0;
  if (theta.family() != dini::Family::constant || theta.parameter() != 0) {
    try {
      i_theta = dini::dini_small(theta, R);
    } catch (const NotDiniError&) {
      i_theta = std::numeric_limits<double>::infinity();
    }
  }
  sb.analytic = sb.c0 * std::pow(2.0, d) * theta.kappa() * theta.kappa() / std::numbers::ln2 * i_theta;
  return sb;
}

CompareResult compare_T_R(const DiscreteMeasure& mu, const field::MatrixField& a, const measures::Cube& q,
                          const CompareOptions& opts) {
  CompareResult out;
  out.cube = q;
  DiscreteMeasure nu = mu;
  auto fld = std::make_shared<const field::MatrixField>(a);
  if (opts.normalize) {
    auto cn = field::normalize_cov(a, q.center, opts.radius_factor * q.side, opts.averaging);
    out.s = cn.s;
    nu = measures::pushforward(mu, cn.s_inv);
    fld = std::make_shared<const field::MatrixField>(std::move(cn.hat_a));
  }
  const std::vector<double> grid = opts.delta_grid.empty() ? default_delta_grid(nu) : opts.delta_grid;
  auto frozen = std::make_shared<const kernels::FrozenKernel>(fld, opts.averaging);
  const auto t = opnorm(kernels::KernelSpec::frozen(frozen), nu, grid, opts.opnorm);
  const auto r = opnorm(kernels::KernelSpec::riesz(), nu, grid, opts.opnorm);
  const auto d = opnorm(kernels::KernelSpec::frozen_minus_riesz(frozen), nu, grid, opts.opnorm);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CompareRow row;
    row.delta = grid[k];
    row.norm_T = t.per_delta[k].sigma_max;
    row.norm_R = r.per_delta[k].sigma_max;
    row.diff_norm = d.per_delta[k].sigma_max;
    row.ratio = (1 + row.norm_T) / (1 + row.norm_R);
    out.rows.push_back(row);
  }
  out.norm_T = t.sup;
  out.norm_R = r.sup;
  out.diff_norm = d.sup;
  out.ratio = (1 + out.norm_T) / (1 + out.norm_R);
  return out;
}

}  // namespace layerpot::ops
