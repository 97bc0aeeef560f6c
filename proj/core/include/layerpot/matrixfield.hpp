#pragma once

// Uniformly elliptic 3x3 matrix fields A(x), their ball averages and mean oscillation,
// and the change of variables that turns a ball-averaged symmetric part into Id.

#include "layerpot/dini.hpp"
#include "layerpot/linalg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace layerpot::field {

/// Radial profile p(s) in [0, 1] used by the log_dini and radial_blend families.
struct RadialProfile {
  enum class Kind { log_dini, holder };
  Kind kind = Kind::log_dini;
  double exponent = 0.25;  // gamma for log_dini, alpha for holder

  /// log_dini: (-ln s)^{-gamma-1} for s <= 1/e, linear down to 0 on [1/e, 1], 0 beyond.
  /// holder:   min(s, 1)^alpha, alpha-Hoelder at 0 and constant for s >= 1.
  double operator()(double s) const;
};

struct Identity {};
struct Constant {
  Mat3 a0;
};
/// a_ij(x) = delta_ij (1 + p(|x|)) with the log_dini profile.
struct LogDini {
  double gamma;
};
/// A(x) = Id (1 + amplitude * min(|x|, 1)^alpha).
struct Holder {
  double alpha;
  double amplitude;
};
/// A(x) = A0 + p(|x|) (A1 - A0).
struct RadialBlend {
  Mat3 a0;
  Mat3 a1;
  RadialProfile profile;
};

class MatrixField;

/// Ahat(y) = S^{-1} A(S y) S^{-1}.
struct Transformed {
  std::shared_ptr<const MatrixField> base;
  Mat3 s;
  Mat3 s_inv;
};

using FamilyParams = std::variant<Identity, Constant, LogDini, Holder, RadialBlend, Transformed>;

class MatrixField {
 public:
  MatrixField(FamilyParams params, double lambda);

  static MatrixField identity() { return {Identity{}, 1.0}; }
  static MatrixField constant(const Mat3& a0, double lambda) { return {Constant{a0}, lambda}; }
  static MatrixField log_dini(double gamma, double lambda = 2.0) { return {LogDini{gamma}, lambda}; }

  const FamilyParams& params() const { return params_; }
  double lambda() const { return lambda_; }
  std::string family_name() const;

  /// True when A is constant in space (averages are exact).
  bool is_constant() const;

  Mat3 operator()(const Vec3& x) const;

  /// Modulus of oscillation declared for the family (used for budgets and alpha_A).
  dini::OscillationModulus declared_modulus() const;
  void set_declared_modulus(dini::OscillationModulus m) { modulus_override_ = std::move(m); }

 private:
  FamilyParams params_;
  double lambda_;
  std::optional<dini::OscillationModulus> modulus_override_;
};

Mat3 evaluate(const MatrixField& a, const Vec3& x);

struct EllipticityReport {
  double lambda_hat = 1.0;
  bool pass = true;
  std::optional<Vec3> offending_point;  // set when A_s is not positive definite
};

/// lambda_hat = max over samples of max(lambda_max(A_s), 1/lambda_min(A_s), |A|_op).
EllipticityReport ellipticity_report(const MatrixField& a, std::span<const Vec3> sample_points);

struct AveragingOptions {
  std::size_t budget = 512;
  std::uint64_t seed = 0;
};

/// Radius below which ball_average returns the point value.
inline constexpr double kDegenerateRadius = 1e-12;

/// Average of A over B(x, r). Exact for constant families; otherwise a shifted-Halton
/// quadrature that is a pure function of (A, x, r, budget, seed).
Mat3 ball_average(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts);

/// Monte-Carlo mean oscillation over B(x, r): mean |A(z) - A_avg| in the max-entry norm.
double ball_oscillation(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts);

/// Max of ball_oscillation over the centers; a lower bound for omega_A(r).
double oscillation_estimate(const MatrixField& a, double r, std::span<const Vec3> centers,
                            const AveragingOptions& opts);

/// Symmetric positive-definite square root. Throws DomainError on non-SPD input.
Mat3 sqrt_spd(const Mat3& m);

struct CovNormalization {
  Mat3 s;
  Mat3 s_inv;
  MatrixField hat_a;
  Vec3 center;
  double radius;
};

/// S = sqrt of the symmetric part of the average of A over B(x, r) and
/// Ahat(y) = S^{-1} A(S y) S^{-1}; the average of Ahat_s over S^{-1}(B(x, r)) is Id.
CovNormalization normalize_cov(const MatrixField& a, const Vec3& x, double r, const AveragingOptions& opts);

}  // namespace layerpot::field
