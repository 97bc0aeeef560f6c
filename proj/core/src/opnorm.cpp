// Largest singular value of the truncated operator on L^2(mu).
//
// With D = diag(w), the operator f -> T f has norm sigma_max(C) where
// C_(i,c),j = sqrt(w_i w_j) K_c(x_i, x_j) [|x_i - x_j| > delta]. Power iteration and
// Lanczos both run on G = C^T C.

#include "layerpot/errors.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/parallel.hpp"
#include "layerpot/qmc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace layerpot::ops {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using NormalOp = std::function<void(const VectorXd&, VectorXd&)>;

VectorXd random_start(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(eng);
  return v / v.norm();
}

OpNormEstimate power_method(std::size_t n, const NormalOp& gop, const OpNormOptions& opts) {
  OpNormEstimate best;
  best.method = OpNormMethod::power;
  const int restarts = std::max(1, opts.restarts);
  for (int rs = 0; rs < restarts; ++rs) {
    VectorXd v = random_start(n, splitmix64(opts.seed + 0x51ed270b27a2d5c3ULL * (rs + 1)));
    VectorXd y(v.size());
    double lambda = 0, prev = -1, res = 1;
    int it = 0;
    bool done = false;
    for (; it < opts.max_iter; ++it) {
      gop(v, y);
      lambda = v.dot(y);
      if (lambda <= 0 || y.norm() == 0) {
        lambda = 0;
        res = 0;
        done = true;
        break;
      }
      res = (y - lambda * v).norm() / lambda;
      const bool settled = std::abs(lambda - prev) <= opts.tol * lambda;
      prev = lambda;
      v = y / y.norm();
      if (res * res <= opts.tol && settled) {
        done = true;
        ++it;
        break;
      }
    }
    if (!done)
      throw ConvergenceError("power iteration did not converge within " + std::to_string(opts.max_iter) +
                                 " iterations (last residual " + std::to_string(res) + ")",
                             res);
    const double sigma = std::sqrt(std::max(lambda, 0.0));
    best.iterations += it;
    if (sigma >= best.sigma_max) {
      best.sigma_max = sigma;
      best.residual = res;
    }
  }
  return best;
}

OpNormEstimate lanczos(std::size_t n, const NormalOp& gop, const OpNormOptions& opts) {
  OpNormEstimate est;
  est.method = OpNormMethod::lanczos;
  const Eigen::Index basis = static_cast<Eigen::Index>(std::min<std::size_t>(n, 400));
  VectorXd start = random_start(n, splitmix64(opts.seed + 0x51ed270b27a2d5c3ULL));
  int total = 0;
  double res = 1;
  while (total < opts.max_iter) {
    MatrixXd q(static_cast<Eigen::Index>(n), basis);
    std::vector<double> alpha, beta;
    q.col(0) = start;
    VectorXd w(static_cast<Eigen::Index>(n));
    double theta = 0;
    VectorXd ritz;
    for (Eigen::Index k = 0; k < basis; ++k) {
      gop(q.col(k), w);
      ++total;
      const double a = q.col(k).dot(w);
      alpha.push_back(a);
      w -= a * q.col(k);
      if (k > 0) w -= beta.back() * q.col(k - 1);
      for (int pass = 0; pass < 2; ++pass) {
        const VectorXd h = q.leftCols(k + 1).transpose() * w;
        w -= q.leftCols(k + 1) * h;
      }
      const double b = w.norm();
      const auto m = static_cast<Eigen::Index>(alpha.size());
      Eigen::SelfAdjointEigenSolver<MatrixXd> es;
      VectorXd diag = Eigen::Map<VectorXd>(alpha.data(), m);
      VectorXd sub = m > 1 ? VectorXd(Eigen::Map<VectorXd>(beta.data(), m - 1)) : VectorXd(0);
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      theta = es.eigenvalues()(m - 1);
      const VectorXd s = es.eigenvectors().col(m - 1);
      if (theta <= 0) {
        est.sigma_max = 0;
        est.iterations = total;
        est.residual = 0;
        return est;
      }
      res = std::abs(b * s(m - 1)) / theta;
      const bool exhausted = b <= 1e-14 * theta || k + 1 == static_cast<Eigen::Index>(n);
      if (res * res <= opts.tol || exhausted) {
        est.sigma_max = std::sqrt(theta);
        est.iterations = total;
        est.residual = exhausted ? 0.0 : res;
        return est;
      }
      if (k + 1 == basis || total >= opts.max_iter) {
        ritz = q.leftCols(m) * s;
        break;
      }
      beta.push_back(b);
      q.col(k + 1) = w / b;
    }
    start = ritz / ritz.norm();
  }
  throw ConvergenceError("Lanczos did not converge within " + std::to_string(opts.max_iter) +
                             " iterations (last residual " + std::to_string(res) + ")",
                         res);
}

OpNormEstimate run_method(const MatrixXd& c, const OpNormOptions& opts) {
  if (opts.method == OpNormMethod::svd) {
    OpNormEstimate est;
    est.method = OpNormMethod::svd;
    if (c.size() == 0) return est;
    Eigen::BDCSVD<MatrixXd> svd(c);
    est.sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    return est;
  }
  VectorXd tmp(c.rows());
  NormalOp gop = [&](const VectorXd& v, VectorXd& out) {
    tmp.noalias() = c * v;
    out.noalias() = c.transpose() * tmp;
  };
  return opts.method == OpNormMethod::power ? power_method(static_cast<std::size_t>(c.cols()), gop, opts)
                                            : lanczos(static_cast<std::size_t>(c.cols()), gop, opts);
}

// Weighted kernel data for one (kernel, measure); dense below opts.dense_limit atoms.
class Engine {
 public:
  Engine(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double min_delta, const OpNormOptions& opts)
      : k_(k), mu_(mu), n_(mu.size()), dense_(mu.size() <= opts.dense_limit), min_delta_(min_delta) {
    sw_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sw_[i] = std::sqrt(mu.weights[i]);
    riesz_ = std::get_if<kernels::Riesz>(&k.variant()) != nullptr;
    if (riesz_) riesz_scale_ = std::get<kernels::Riesz>(k.variant()).scale;
    if (!dense_) return;
    const auto n = static_cast<Eigen::Index>(n_);
    full_ = MatrixXd::Zero(3 * n, n);
    dist_ = MatrixXd::Zero(n, n);
    parallel_for(n_, [&](std::size_t i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double d = (mu.points[i] - mu.points[j]).norm();
        dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
        if (i == j || !(d > min_delta_)) continue;
        const Vec3 kv = k_(mu.points[i], mu.points[j]) * (sw_[i] * sw_[j]);
        for (int c = 0; c < 3; ++c)
          full_(3 * static_cast<Eigen::Index>(i) + c, static_cast<Eigen::Index>(j)) = kv[c];
      }
    });
  }

  bool dense() const { return dense_; }
  std::size_t size() const { return n_; }

  std::size_t pair_count(double delta) const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && distance(i, j) > delta) ++count;
    return count;
  }

  MatrixXd masked(double delta) const {
    const auto n = static_cast<Eigen::Index>(n_);
    MatrixXd c = MatrixXd::Zero(3 * n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (dist_(i, j) > delta)
          for (int r = 0; r < 3; ++r) c(3 * i + r, j) = full_(3 * i + r, j);
    return c;
  }

  // G v for the streamed path; rows are processed in fixed blocks and reduced in order.
  void normal_apply(double delta, const VectorXd& v, VectorXd& out) const {
    constexpr std::size_t kBlocks = 64;
    const auto n = static_cast<Eigen::Index>(n_);
    std::vector<VectorXd> partial(kBlocks, VectorXd::Zero(n));
    parallel_for(kBlocks, [&](std::size_t b) {
      const std::size_t lo = n_ * b / kBlocks, hi = n_ * (b + 1) / kBlocks;
      std::vector<Vec3> row(n_);
      VectorXd& acc = partial[b];
      for (std::size_t i = lo; i < hi; ++i) {
        Vec3 u = Vec3::Zero();
        const Vec3& x = mu_.points[i];
        for (std::size_t j = 0; j < n_; ++j) {
          const Vec3 z = x - mu_.points[j];
          const double q = z.dot(z);
          if (i == j || !(q > delta * delta)) {
            row[j].setZero();
            continue;
          }
          Vec3 kv;
          if (riesz_) {
            kv = z * (riesz_scale_ / (q * std::sqrt(q)));
          } else {
            kv = k_(x, mu_.points[j]);
          }
          row[j] = kv * (sw_[i] * sw_[j]);
          u += row[j] * v[static_cast<Eigen::Index>(j)];
        }
        for (std::size_t j = 0; j < n_; ++j) acc[static_cast<Eigen::Index>(j)] += row[j].dot(u);
      }
    });
    out = VectorXd::Zero(n);
    for (const auto& p : partial) out += p;
  }

 private:
  double distance(std::size_t i, std::size_t j) const {
    if (dense_) return dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return (mu_.points[i] - mu_.points[j]).norm();
  }

  const kernels::KernelSpec& k_;
  const DiscreteMeasure& mu_;
  std::size_t n_;
  bool dense_;
  double min_delta_;
  std::vector<double> sw_;
  bool riesz_ = false;
  double riesz_scale_ = 1.0;
  MatrixXd full_;
  MatrixXd dist_;
};

OpNormEstimate solve(const Engine& e, double delta, const OpNormOptions& opts) {
  OpNormEstimate est;
  if (e.dense()) {
    est = run_method(e.masked(delta), opts);
  } else {
    if (opts.method == OpNormMethod::svd)
      throw BudgetError("svd oracle needs the dense path; raise dense_limit or use power/lanczos");
    NormalOp gop = [&](const VectorXd& v, VectorXd& out) { e.normal_apply(delta, v, out); };
    est = opts.method == OpNormMethod::power ? power_method(e.size(), gop, opts) : lanczos(e.size(), gop, opts);
  }
  est.delta = delta;
  return est;
}

}  // namespace

std::string to_string(OpNormMethod m) {
  switch (m) {
    case OpNormMethod::power: return "power";
    case OpNormMethod::lanczos: return "lanczos";
    case OpNormMethod::svd: return "svd";
  }
  return "?";
}

OpNormMethod opnorm_method_from_string(const std::string& s) {
  if (s == "power") return OpNormMethod::power;
  if (s == "lanczos") return OpNormMethod::lanczos;
  if (s == "svd") return OpNormMethod::svd;
  throw ConfigError("unknown opnorm method '" + s + "' (expected power, lanczos or svd)");
}

OpNormEstimate opnorm_dense(const Eigen::MatrixXd& c, const OpNormOptions& opts) { return run_method(c, opts); }

OpNormSweep opnorm(const kernels::KernelSpec& k, const DiscreteMeasure& mu, std::span<const double> delta_grid,
                   const OpNormOptions& opts) {
  validate(mu);
  OpNormSweep sweep;
  if (delta_grid.empty()) return sweep;
  for (double d : delta_grid)
    if (!(d > 0)) throw DomainError("truncation radii must be positive");
  const double min_delta = *std::min_element(delta_grid.begin(), delta_grid.end());
  const Engine engine(k, mu, min_delta, opts);
  std::map<std::size_t, OpNormEstimate> by_pairs;
  for (double delta : delta_grid) {
    const std::size_t pairs = engine.pair_count(delta);
    OpNormEstimate est;
    if (auto it = by_pairs.find(pairs); it != by_pairs.end()) {
      // The admissible set only grows as delta decreases, so equal counts mean equal operators.
      est = it->second;
      est.delta = delta;
    } else if (pairs == 0) {
      est.delta = delta;
      est.method = opts.method;
    } else {
      est = solve(engine, delta, opts);
    }
    est.pairs = pairs;
    by_pairs.emplace(pairs, est);
    sweep.per_delta.push_back(est);
    if (est.sigma_max > sweep.sup || sweep.per_delta.size() == 1) {
      sweep.sup = est.sigma_max;
      sweep.argsup_delta = delta;
    }
  }
  return sweep;
}

OpNormEstimate opnorm(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                      const OpNormOptions& opts) {
  const double grid[1] = {delta};
  return opnorm(k, mu, grid, opts).per_delta.front();
}

std::vector<double> default_delta_grid(const DiscreteMeasure& mu, std::size_t count, double lo_factor) {
  const double h = min_spacing(mu);
  const double diam = diameter(mu);
  if (!std::isfinite(h) || !(diam > 0)) return {1.0};
  const double lo = lo_factor * h;
  if (!(diam > lo)) return {lo};
  return dini::geometric_grid(lo, diam, count);
}

}  // namespace layerpot::ops
