#pragma once

// Doubling moduli of oscillation and their Dini integrals.
//
//   small-scale integral   I(r)   = int_0^r theta(t) dt/t
//   large-scale integral   L^d(r) = r^d int_r^inf theta(t) dt/t^{d+1}
//   tau(r)    = I(r) + L^n(r)
//   tauhat(R) = I(R) + L^{n-1}(R)          (n = 2)

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace layerpot::dini {

enum class Family { power, log_power, constant, tabulated };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// A nonnegative doubling function theta on (0, inf) from a closed family.
///
///  - power(alpha):   t^alpha
///  - log_power(g):   (-ln t)^{-g-2} for t <= 1/e, capped at theta(1/e) = 1 above
///  - constant(c):    c
///  - tabulated:      piecewise linear in log t through (t_i, theta_i), clamped outside
class OscillationModulus {
 public:
  static OscillationModulus power(double alpha);
  static OscillationModulus log_power(double gamma);
  static OscillationModulus constant(double c);
  /// kappa must be supplied for tabulated moduli; validate it with check_doubling.
  static OscillationModulus tabulated(std::vector<double> t, std::vector<double> theta, double kappa);

  Family family() const { return family_; }
  /// alpha, gamma or c depending on the family; unused for tabulated.
  double parameter() const { return param_; }
  double kappa() const { return kappa_; }
  const std::vector<double>& table_t() const { return t_; }
  const std::vector<double>& table_theta() const { return theta_; }

  double operator()(double t) const;

  /// Points where theta is not smooth (cap, table nodes); quadrature splits there.
  std::vector<double> breakpoints() const;

 private:
  OscillationModulus(Family f, double p, double kappa) : family_(f), param_(p), kappa_(kappa) {}

  Family family_;
  double param_;
  double kappa_;
  std::vector<double> t_;
  std::vector<double> theta_;
};

/// Throws DomainError for t <= 0.
double eval_modulus(const OscillationModulus& theta, double t);

enum class Method { automatic, closed_form, quadrature };

struct QuadratureOptions {
  int max_panels = 2048;     // budget of Gauss panels per integral
  double rel_tol = 1e-13;
  Method method = Method::automatic;
};

using ScalarFn = std::function<double(double)>;

/// int_0^r f(t) dt/t, computed on the log axis. `breaks` are kinks of f.
double integrate_small(const ScalarFn& f, double r, std::span<const double> breaks = {},
                       const QuadratureOptions& opts = {});
/// r^d int_r^inf f(t) dt/t^{d+1}.
double integrate_large(const ScalarFn& f, double d, double r, std::span<const double> breaks = {},
                       const QuadratureOptions& opts = {});

/// Small-scale Dini integral. Throws NotDiniError when it diverges.
double dini_small(const OscillationModulus& theta, double r, const QuadratureOptions& opts = {});
/// Large-scale Dini integral with exponent d. Throws NotDiniError when it diverges.
double dini_large(const OscillationModulus& theta, double d, double r, const QuadratureOptions& opts = {});

struct TauBudgets {
  double tau;      // tau(r)
  double tau_hat;  // tauhat(R)
};

TauBudgets tau_budgets(const OscillationModulus& theta, double r, double R,
                       const QuadratureOptions& opts = {});

/// tau(t) = I(t) + L^2(t) as a function.
ScalarFn tau_function(const OscillationModulus& theta, const QuadratureOptions& opts = {});

/// I_tau(r) = int_0^r tau(t) dt/t (double Dini integral).
double dini_small_of_tau(const OscillationModulus& theta, double r, const QuadratureOptions& opts = {});

struct DoublingReport {
  bool holds = true;
  double worst_ratio = 1.0;
  double worst_t = 0.0;
  double worst_s = 0.0;
};

/// Checks theta(t) <= kappa theta(s) for all grid pairs with t/2 <= s <= t.
DoublingReport check_doubling(const OscillationModulus& theta, double kappa, std::span<const double> t_grid);

struct DiniProfile {
  std::vector<double> r_grid;
  std::vector<double> I_values;
  std::vector<double> L_values;
  double d = 0;
};

DiniProfile dini_profile(const OscillationModulus& theta, double d, std::span<const double> r_grid,
                         const QuadratureOptions& opts = {});

/// Geometric grid of `count` points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

}  // namespace layerpot::dini
