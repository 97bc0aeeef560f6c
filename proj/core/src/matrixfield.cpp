#include "layerpot/matrixfield.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/parallel.hpp"
#include "layerpot/qmc.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace layerpot::field {

namespace {

constexpr double kInvE = 0.36787944117144233;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Shared unit-ball samples, one vector per (count, seed).
std::shared_ptr<const std::vector<Vec3>> ball_samples(std::size_t count, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::uint64_t>, std::shared_ptr<const std::vector<Vec3>>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{count, seed}];
  if (!slot) slot = std::make_shared<const std::vector<Vec3>>(unit_ball_samples(count, seed));
  return slot;
}

Mat3 pairwise_mat_sum(const std::vector<Mat3>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    Mat3 s = Mat3::Zero();
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_mat_sum(v, lo, mid) + pairwise_mat_sum(v, mid, hi);
}

}  // namespace

double RadialProfile::operator()(double s) const {
  switch (kind) {
    case Kind::log_dini:
      if (s <= 0) return 0.0;
      if (s <= kInvE) return std::pow(-std::log(s), -exponent - 1.0);
      if (s < 1) return (1.0 - s) / (1.0 - kInvE);
      return 0.0;
    case Kind::holder: return std::pow(std::min(std::max(s, 0.0), 1.0), exponent);
  }
  return 0.0;
}

MatrixField::MatrixField(FamilyParams params, double lambda) : params_(std::move(params)), lambda_(lambda) {
  if (!(lambda >= 1)) throw DomainError("ellipticity constant must be >= 1");
  if (const auto* t = std::get_if<Transformed>(&params_); t && !t->base)
    throw DomainError("transformed field without a base field");
}

std::string MatrixField::family_name() const {
  return std::visit(overloaded{[](const Identity&) { return std::string("identity"); },
                               [](const Constant&) { return std::string("constant"); },
                               [](const LogDini&) { return std::string("log_dini"); },
                               [](const Holder&) { return std::string("holder"); },
                               [](const RadialBlend&) { return std::string("radial_blend"); },
                               [](const Transformed&) { return std::string("transformed"); }},
                    params_);
}

bool MatrixField::is_constant() const {
  return std::visit(overloaded{[](const Identity&) { return true; }, [](const Constant&) { return true; },
                               [](const Transformed& t) { return t.base->is_constant(); },
                               [](const auto&) { return false; }},
                    params_);
}

Mat3 MatrixField::operator()(const Vec3& x) const {
  return std::visit(
      overloaded{[](const Identity&) -> Mat3 { return Mat3::Identity(); },
                 [](const Constant& c) -> Mat3 { return c.a0; },
                 [&](const LogDini& p) -> Mat3 {
                   RadialProfile prof{RadialProfile::Kind::log_dini, p.gamma};
                   return Mat3::Identity() * (1.0 + prof(x.norm()));
                 },
                 [&](const Holder& p) -> Mat3 {
                   return Mat3::Identity() * (1.0 + p.amplitude * std::pow(std::min(x.norm(), 1.0), p.alpha));
                 },
                 [&](const RadialBlend& p) -> Mat3 { return p.a0 + p.profile(x.norm()) * (p.a1 - p.a0); },
                 [&](const Transformed& t) -> Mat3 { return t.s_inv * (*t.base)(t.s * x) * t.s_inv; }},
      params_);
}

dini::OscillationModulus MatrixField::declared_modulus() const {
  if (modulus_override_) return *modulus_override_;
  using dini::OscillationModulus;
  return std::visit(overloaded{[](const Identity&) { return OscillationModulus::constant(0.0); },
                               [](const Constant&) { return OscillationModulus::constant(0.0); },
                               [](const LogDini& p) { return OscillationModulus::log_power(p.gamma); },
                               [](const Holder& p) { return OscillationModulus::power(p.alpha); },
                               [](const RadialBlend& p) {
                                 return p.profile.kind == RadialProfile::Kind::log_dini
                                            ? OscillationModulus::log_power(p.profile.exponent)
                                            : OscillationModulus::power(p.profile.exponent);
                               },
                               [](const Transformed& t) { return t.base->declared_modulus(); }},
                    params_);
}

Mat3 evaluate(const MatrixField& a, const Vec3& x) { return a(x); }

EllipticityReport ellipticity_report(const MatrixField& a, std::span<const Vec3> sample_points) {
  if (sample_points.empty()) throw DomainError("ellipticity_report needs at least one sample point");
  EllipticityReport rep;
  for (const Vec3& x : sample_points) {
    const Mat3 m = a(x);
    Eigen::SelfAdjointEigenSolver<Mat3> es(sym_part(m), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(2);
    if (!(lmin > 0)) {
      rep.pass = false;
      rep.lambda_hat = std::numeric_limits<double>::infinity();
      rep.offending_point = x;
      return rep;
    }
    Eigen::JacobiSVD<Mat3> svd(m);
    rep.lambda_hat = std::max({rep.lambda_hat, lmax, 1.0 / lmin, svd.singularValues()(0)});
  }
  rep.pass = rep.lambda_hat <= a.lambda() * (1 + 1e-12);
  return rep;
}

Mat3 ball_average(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts) {
  if (!(r > 0)) throw DomainError("ball_average needs r > 0");
  if (a.is_constant() || r < kDegenerateRadius) return a(x);
  const auto samples = ball_samples(std::max<std::size_t>(opts.budget, 1), opts.seed);
  std::vector<Mat3> vals(samples->size());
  for (std::size_t i = 0; i < samples->size(); ++i) vals[i] = a(x + r * (*samples)[i]);
  return pairwise_mat_sum(vals, 0, vals.size()) / static_cast<double>(vals.size());
}

double ball_oscillation(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts) {
  if (!(r > 0)) throw DomainError("ball_oscillation needs r > 0");
  if (a.is_constant()) return 0.0;
  const Mat3 avg = ball_average(a, x, r, opts);
  const auto samples = ball_samples(std::max<std::size_t>(opts.budget, 1), opts.seed);
  std::vector<double> dev(samples->size());
  for (std::size_t i = 0; i < samples->size(); ++i) dev[i] = max_entry_norm(a(x + r * (*samples)[i]) - avg);
  return pairwise_sum(dev) / static_cast<double>(dev.size());
}

double oscillation_estimate(const MatrixField& a, double r, std::span<const Vec3> centers,
                            const AveragingOptions& opts) {
  if (centers.empty()) throw DomainError("oscillation_estimate needs at least one center");
  std::vector<double> per(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) { per[i] = ball_oscillation(a, centers[i], r, opts); });
  return *std::max_element(per.begin(), per.end());
}

Mat3 sqrt_spd(const Mat3& m) {
  const double scale = max_entry_norm(m);
  if (!m.allFinite() || max_entry_norm(m - m.transpose()) > 1e-12 * scale)
    throw DomainError("sqrt_spd needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  if (!(es.eigenvalues()(0) > 0)) throw DomainError("sqrt_spd needs a positive definite matrix");
  const Mat3 v = es.eigenvectors();
  Mat3 s = v * es.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
  return sym_part(s);
}

CovNormalization normalize_cov(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts) {
  const Mat3 avg = ball_average(a, x, r, opts);
  const Mat3 s = sqrt_spd(sym_part(avg));
  const Mat3 s_inv = s.inverse();
  auto base = std::make_shared<const MatrixField>(a);
  MatrixField hat(Transformed{base, s, s_inv}, a.lambda() * a.lambda());
  return {s, s_inv, std::move(hat), x, r};
}

}  // namespace layerpot::field
