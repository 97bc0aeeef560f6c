#pragma once

// Truncated singular integrals on discrete measures, operator norms on L^2(mu), the
// Schur bound, the T-versus-Riesz comparison and the geometric functionals of the
// local rectifiability criterion.

#include "layerpot/dini.hpp"
#include "layerpot/kernels.hpp"
#include "layerpot/matrixfield.hpp"
#include "layerpot/measures.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace layerpot::ops {

using measures::Ball;
using measures::DiscreteMeasure;

/// sum over atoms y with |x - y| > delta of K(x, y) f(y) w(y), pairwise summation over atoms.
Vec3 apply_truncated(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                     std::span<const double> f, const Vec3& x);

inline constexpr std::size_t kDefaultAssembleBudget = 8192;

/// Dense 3N x N matrix: block (i, j) = K(x_i, x_j) w_j [|x_i - x_j| > delta], rows 3i..3i+2.
/// Throws BudgetError above max_atoms; use opnorm (row-streamed) instead.
Eigen::MatrixXd assemble(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                         std::size_t max_atoms = kDefaultAssembleBudget);

/// M f with the same pairwise tree as apply_truncated; bit-identical to it.
Eigen::VectorXd matvec_pairwise(const Eigen::MatrixXd& m, std::span<const double> f);

enum class OpNormMethod { power, lanczos, svd };
std::string to_string(OpNormMethod m);
OpNormMethod opnorm_method_from_string(const std::string& s);

struct OpNormOptions {
  OpNormMethod method = OpNormMethod::power;
  double tol = 1e-10;        // target accuracy of the Rayleigh quotient
  int max_iter = 10000;
  int restarts = 3;
  std::uint64_t seed = 0;
  std::size_t dense_limit = 2048;  // above this N the kernel is streamed row by row
};

struct OpNormEstimate {
  double delta = 0;
  double sigma_max = 0;
  OpNormMethod method = OpNormMethod::power;
  int iterations = 0;
  double residual = 0;   // |G v - lambda v| / lambda for G = C^T C
  std::size_t pairs = 0; // admissible ordered pairs
};

struct OpNormSweep {
  std::vector<OpNormEstimate> per_delta;
  double sup = 0;
  double argsup_delta = 0;
};

/// Largest singular value of a dense matrix by the chosen method.
OpNormEstimate opnorm_dense(const Eigen::MatrixXd& c, const OpNormOptions& opts);

/// L^2(mu) -> L^2(mu; R^3) norm of the truncated operator for every delta on the grid.
OpNormSweep opnorm(const kernels::KernelSpec& k, const DiscreteMeasure& mu, std::span<const double> delta_grid,
                   const OpNormOptions& opts = {});
OpNormEstimate opnorm(const kernels::KernelSpec& k, const DiscreteMeasure& mu, double delta,
                      const OpNormOptions& opts = {});

/// Geometric grid from lo_factor x min spacing to the diameter.
std::vector<double> default_delta_grid(const DiscreteMeasure& mu, std::size_t count = 12, double lo_factor = 0.5);

struct SchurBound {
  double analytic = 0;  // c0 2^d kappa^2 / ln 2 * I_theta(R)
  double discrete = 0;  // max of weighted row and column sums of theta(|x-y|)/|x-y|^d
  double c0 = 0;        // growth constant used by the analytic budget
};

/// Discrete Schur bound for the (theta, d)-kernel truncated at delta (delta = 0: all pairs).
SchurBound schur_bound(const dini::OscillationModulus& theta, double d, const DiscreteMeasure& mu, double R,
                       double delta = 0.0, std::optional<double> c0 = std::nullopt);

struct CompareOptions {
  bool normalize = false;
  /// Normalization ball is B(x_Q, radius_factor * l(Q)); 4 n Lambda is the large choice.
  double radius_factor = 1.0;
  field::AveragingOptions averaging{};
  OpNormOptions opnorm{};
  std::vector<double> delta_grid;  // empty: default grid on the (pushed-forward) measure
};

struct CompareRow {
  double delta = 0;
  double norm_T = 0;
  double norm_R = 0;
  double diff_norm = 0;
  double ratio = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double norm_T = 0;     // sup over the grid
  double norm_R = 0;
  double diff_norm = 0;
  double ratio = 0;      // (1 + norm_T)/(1 + norm_R)
  Mat3 s = Mat3::Identity();
  measures::Cube cube;
};

/// T uses the frozen kernel, R the Riesz kernel; diff is T - R/(4 pi).
CompareResult compare_T_R(const DiscreteMeasure& mu, const field::MatrixField& a, const measures::Cube& q,
                          const CompareOptions& opts);

struct Plane {
  Vec3 normal = Vec3::UnitZ();  // unit
  double offset = 0;            // plane {x : <normal, x> = offset}
  double distance(const Vec3& p) const { return std::abs(normal.dot(p) - offset); }
  static Plane through(const Vec3& point, const Vec3& normal);
};

struct BetaResult {
  double beta = 0;
  Plane plane;
  double beta_pca = 0;
  Plane pca_plane;
};

/// beta^L(B) = r^{-n} int_B dist(x, L)/r dmu.
double beta_plane(const DiscreteMeasure& mu, const Ball& b, const Plane& l);
/// With a plane: beta^L. Without: PCA start then Nelder-Mead (200 iterations).
BetaResult beta_flatness(const DiscreteMeasure& mu, const Ball& b, const std::optional<Plane>& plane = std::nullopt);

/// alpha_A(t) = t + t^beta + omega(t).
struct AlphaSpec {
  dini::OscillationModulus omega = dini::OscillationModulus::constant(0.0);
  double beta = 0.5;
  double operator()(double t) const;
  /// I_alpha(r).
  double dini_small(double r) const;
};

/// Theta_mu(B) = mu(B)/r(B)^n.
double theta_mu(const DiscreteMeasure& mu, const Ball& b);

struct GeometryFunctionals {
  double theta_B = 0;
  double P_gamma = 0;
  double P_N_omega = 0;
};

GeometryFunctionals geometry_functionals(const DiscreteMeasure& mu, const Ball& b, double gamma, int n_scale,
                                         const AlphaSpec& alpha, int j_terms = 40);

/// m_B(T_{mu,delta} 1, mu) and the average over B of |T 1 - m_B|^2.
struct MeanOscillation {
  Vec3 mean = Vec3::Zero();
  double value = 0;
};

MeanOscillation mean_oscillation(const DiscreteMeasure& mu, const kernels::KernelSpec& k, const Ball& b,
                                 double delta);

struct CriterionParams {
  double c0 = 10.0;
  double c0_prime = 10.0;
  int n_scale = 2;
  double delta_flat = 0.05;
  double tau = 0.1;
  double lambda = 1.0;
  double gamma = 1.0;           // unused by the hypotheses; recorded
  double truncation = 0.0;      // delta for T; 0 means 0.5 x min spacing
  AlphaSpec alpha{};
  OpNormOptions opnorm{};
  field::AveragingOptions averaging{};
};

struct HypothesisResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double bound = 0;
};

struct CriterionReport {
  std::vector<HypothesisResult> hypotheses;  // (1), (2a), (2b), (2c), (3), (4), (5)
  bool scale_flag = false;                   // 2^N r(B) exceeds diam(supp mu)
  bool all_pass() const;
  bool hypothesis_pass(int k) const;         // k in 1..5
};

CriterionReport criterion_check(const DiscreteMeasure& mu, const Ball& b, const CriterionParams& p,
                                const field::MatrixField& a);

}  // namespace layerpot::ops
