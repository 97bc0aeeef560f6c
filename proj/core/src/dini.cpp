#include "layerpot/dini.hpp"

#include "layerpot/errors.hpp"
#include "layerpot/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace layerpot::dini {

namespace {

constexpr double kInvE = 0.36787944117144233;  // e^{-1}

template <int N>
struct GaussRule {
  std::array<double, N> x{};
  std::array<double, N> w{};
  GaussRule() {
    for (int i = 0; i < N; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= N; ++k) {
          double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1 - z * z) * dp * dp);
    }
  }
};

const GaussRule<10>& g10() {
  static const GaussRule<10> r;
  return r;
}
const GaussRule<20>& g20() {
  static const GaussRule<20> r;
  return r;
}

template <int N>
double gauss(const GaussRule<N>& g, const ScalarFn& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0;
  for (int i = 0; i < N; ++i) s += g.w[i] * f(c + h * g.x[i]);
  return s * h;
}

struct Budget {
  int used = 0;
  int max;
  void take() {
    if (++used > max) throw BudgetError("Dini quadrature exceeded its panel budget");
  }
};

double adaptive(const ScalarFn& f, double a, double b, double whole, double rel_tol, Budget& budget,
                int depth = 0) {
  budget.take();
  const double lo = gauss(g10(), f, a, b);
  const double hi = gauss(g20(), f, a, b);
  if (!std::isfinite(hi)) throw NotDiniError("Dini integrand is not finite");
  const double err = std::abs(hi - lo);
  if (err <= rel_tol * std::max(std::abs(hi), std::abs(whole)) || depth > 40 || err < 1e-300) return hi;
  const double m = 0.5 * (a + b);
  return adaptive(f, a, m, whole, rel_tol, budget, depth + 1) + adaptive(f, m, b, whole, rel_tol, budget, depth + 1);
}

// int_0^inf g(v) dv on doubling intervals with cuts at `cuts` (v > 0, sorted).
double integrate_half_line(const ScalarFn& g, std::vector<double> cuts, const QuadratureOptions& opts) {
  std::sort(cuts.begin(), cuts.end());
  Budget budget{0, opts.max_panels};
  const double last_cut = cuts.empty() ? 0.0 : cuts.back();
  std::size_t ci = 0;
  double total = 0, a = 0, width = 1;
  for (int k = 0; k < 4096; ++k) {
    double b = a + width;
    while (ci < cuts.size() && cuts[ci] <= a) ++ci;
    if (ci < cuts.size() && cuts[ci] < b) b = cuts[ci];
    const double piece = adaptive(g, a, b, total, opts.rel_tol, budget);
    total += piece;
    if (!std::isfinite(total)) throw NotDiniError("Dini integral diverges");
    if (b >= last_cut && b >= 32 && std::abs(piece) <= 1e-14 * std::abs(total)) return total;
    if (b >= last_cut && b >= 64 && total == 0) return 0.0;
    if (b == a + width) width *= 2;
    a = b;
    if (a > 1e300) break;
  }
  throw NotDiniError("Dini integral does not converge");
}

double log_interp(const std::vector<double>& t, const std::vector<double>& y, double x) {
  if (x <= t.front()) return y.front();
  if (x >= t.back()) return y.back();
  auto it = std::upper_bound(t.begin(), t.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - t.begin());
  const double l0 = std::log(t[i - 1]), l1 = std::log(t[i]);
  const double s = (std::log(x) - l0) / (l1 - l0);
  return y[i - 1] + s * (y[i] - y[i - 1]);
}

void check_positive(double r, const char* what) {
  if (!(r > 0) || !std::isfinite(r)) throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::power: return "power";
    case Family::log_power: return "log_power";
    case Family::constant: return "constant";
    case Family::tabulated: return "tabulated";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "power") return Family::power;
  if (s == "log_power") return Family::log_power;
  if (s == "constant") return Family::constant;
  if (s == "tabulated") return Family::tabulated;
  throw ConfigError("unknown modulus family '" + s + "'");
}

OscillationModulus OscillationModulus::power(double alpha) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw DomainError("power modulus needs alpha >= 0");
  return {Family::power, alpha, std::exp2(alpha)};
}

OscillationModulus OscillationModulus::log_power(double gamma) {
  if (!(gamma > -1) || !std::isfinite(gamma)) throw DomainError("log_power modulus needs gamma > -1");
  return {Family::log_power, gamma, std::pow(1.0 + std::numbers::ln2, gamma + 2.0)};
}

OscillationModulus OscillationModulus::constant(double c) {
  if (!(c >= 0) || !std::isfinite(c)) throw DomainError("constant modulus needs c >= 0");
  return {Family::constant, c, 1.0};
}

OscillationModulus OscillationModulus::tabulated(std::vector<double> t, std::vector<double> theta, double kappa) {
  if (t.size() < 2 || t.size() != theta.size()) throw DomainError("tabulated modulus needs >= 2 matching nodes");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0)) throw DomainError("tabulated abscissae must be positive");
    if (i > 0 && !(t[i] > t[i - 1])) throw DomainError("tabulated abscissae must be strictly increasing");
    if (!(theta[i] >= 0)) throw DomainError("tabulated ordinates must be nonnegative");
  }
  if (!(kappa >= 1)) throw DomainError("doubling constant must be >= 1");
  OscillationModulus m(Family::tabulated, 0.0, kappa);
  m.t_ = std::move(t);
  m.theta_ = std::move(theta);
  return m;
}

double OscillationModulus::operator()(double t) const {
  switch (family_) {
    case Family::power: return std::pow(t, param_);
    case Family::log_power: return t <= kInvE ? std::pow(-std::log(t), -param_ - 2.0) : 1.0;
    case Family::constant: return param_;
    case Family::tabulated: return log_interp(t_, theta_, t);
  }
  return 0;
}

std::vector<double> OscillationModulus::breakpoints() const {
  if (family_ == Family::log_power) return {kInvE};
  if (family_ == Family::tabulated) return t_;
  return {};
}

double eval_modulus(const OscillationModulus& theta, double t) {
  check_positive(t, "t");
  return theta(t);
}

namespace {

using LogFn = std::function<double(double)>;  // g(ln t)

// int_0^inf g(lr - v) dv, i.e. int_0^r f(t) dt/t with g = f o exp.
double small_log(const LogFn& g, double lr, std::span<const double> log_breaks, const QuadratureOptions& opts) {
  std::vector<double> cuts;
  for (double lb : log_breaks)
    if (lb < lr) cuts.push_back(lr - lb);
  return integrate_half_line([&](double v) { return g(lr - v); }, cuts, opts);
}

// int_0^inf g(lr + v) e^{-dv} dv, i.e. r^d int_r^inf f(t) dt/t^{d+1}.
double large_log(const LogFn& g, double d, double lr, std::span<const double> log_breaks,
                 const QuadratureOptions& opts) {
  std::vector<double> cuts;
  for (double lb : log_breaks)
    if (lb > lr) cuts.push_back(lb - lr);
  return integrate_half_line([&](double v) { return g(lr + v) * std::exp(-d * v); }, cuts, opts);
}

std::vector<double> log_breaks(const OscillationModulus& th) {
  auto b = th.breakpoints();
  for (double& x : b) x = std::log(x);
  return b;
}

// theta(e^lt) without forming e^lt, so that tails far below the smallest double stay exact.
double theta_log(const OscillationModulus& th, double lt) {
  const double p = th.parameter();
  switch (th.family()) {
    case Family::power: return std::exp(p * lt);
    case Family::log_power: return lt <= -1.0 ? std::pow(-lt, -p - 2.0) : 1.0;
    case Family::constant: return p;
    case Family::tabulated: {
      const auto& t = th.table_t();
      const auto& y = th.table_theta();
      if (lt <= std::log(t.front())) return y.front();
      if (lt >= std::log(t.back())) return y.back();
      return th(std::exp(lt));
    }
  }
  return 0;
}

bool small_closed_form(const OscillationModulus& th, double lr, double& out) {
  const double p = th.parameter();
  switch (th.family()) {
    case Family::power:
      out = std::exp(p * lr) / p;
      return true;
    case Family::log_power:
      out = lr <= -1.0 ? std::pow(-lr, -p - 1.0) / (p + 1.0) : 1.0 / (p + 1.0) + lr + 1.0;
      return true;
    case Family::constant:
      out = 0.0;
      return true;
    case Family::tabulated: return false;
  }
  return false;
}

bool large_closed_form(const OscillationModulus& th, double d, double lr, double& out) {
  const double p = th.parameter();
  switch (th.family()) {
    case Family::power:
      out = std::exp(p * lr) / (d - p);
      return true;
    case Family::log_power:
      if (lr < -1.0) return false;
      out = 1.0 / d;
      return true;
    case Family::constant:
      out = p / d;
      return true;
    case Family::tabulated: return false;
  }
  return false;
}

void check_small(const OscillationModulus& th) {
  if (th.family() == Family::power && th.parameter() <= 0)
    throw NotDiniError("modulus is not DS: power family with alpha <= 0");
  if (th.family() == Family::constant && th.parameter() > 0)
    throw NotDiniError("modulus is not DS: constant family with c > 0");
  if (th.family() == Family::tabulated && th.table_theta().front() > 0)
    throw NotDiniError("modulus is not DS: tabulated ordinate at the first node is positive");
}

void check_large(const OscillationModulus& th, double d) {
  check_positive(d, "d");
  if (th.family() == Family::power && th.parameter() >= d)
    throw NotDiniError("modulus is not DL_d: power family with alpha >= d");
}

double dini_small_log(const OscillationModulus& th, double lr, const QuadratureOptions& opts) {
  double out = 0;
  if (opts.method != Method::quadrature && small_closed_form(th, lr, out)) return out;
  if (opts.method == Method::closed_form) throw DomainError("no closed form for this modulus");
  if (th.family() == Family::constant) return 0.0;
  const auto br = log_breaks(th);
  return small_log([&](double lt) { return theta_log(th, lt); }, lr, br, opts);
}

double dini_large_log(const OscillationModulus& th, double d, double lr, const QuadratureOptions& opts) {
  double out = 0;
  if (opts.method != Method::quadrature && large_closed_form(th, d, lr, out)) return out;
  if (opts.method == Method::closed_form) throw DomainError("no closed form for this modulus");
  const auto br = log_breaks(th);
  return large_log([&](double lt) { return theta_log(th, lt); }, d, lr, br, opts);
}

}  // namespace

double integrate_small(const ScalarFn& f, double r, std::span<const double> breaks, const QuadratureOptions& opts) {
  check_positive(r, "r");
  std::vector<double> lb;
  for (double b : breaks)
    if (b > 0) lb.push_back(std::log(b));
  return small_log([&](double lt) { return f(std::exp(lt)); }, std::log(r), lb, opts);
}

double integrate_large(const ScalarFn& f, double d, double r, std::span<const double> breaks,
                       const QuadratureOptions& opts) {
  check_positive(r, "r");
  check_positive(d, "d");
  std::vector<double> lb;
  for (double b : breaks)
    if (b > 0) lb.push_back(std::log(b));
  return large_log([&](double lt) { return f(std::exp(lt)); }, d, std::log(r), lb, opts);
}

double dini_small(const OscillationModulus& theta, double r, const QuadratureOptions& opts) {
  check_positive(r, "r");
  check_small(theta);
  return dini_small_log(theta, std::log(r), opts);
}

double dini_large(const OscillationModulus& theta, double d, double r, const QuadratureOptions& opts) {
  check_positive(r, "r");
  check_large(theta, d);
  return dini_large_log(theta, d, std::log(r), opts);
}

TauBudgets tau_budgets(const OscillationModulus& theta, double r, double R, const QuadratureOptions& opts) {
  return {dini_small(theta, r, opts) + dini_large(theta, kN, r, opts),
          dini_small(theta, R, opts) + dini_large(theta, kN - 1, R, opts)};
}

ScalarFn tau_function(const OscillationModulus& theta, const QuadratureOptions& opts) {
  return [theta, opts](double t) { return dini_small(theta, t, opts) + dini_large(theta, kN, t, opts); };
}

double dini_small_of_tau(const OscillationModulus& theta, double r, const QuadratureOptions& opts) {
  check_positive(r, "r");
  check_small(theta);
  check_large(theta, kN);
  if (theta.family() == Family::constant) return 0.0;
  if (theta.family() == Family::log_power && theta.parameter() <= 0)
    throw NotDiniError("tau is not DS: log_power family needs gamma > 0");
  if (theta.family() == Family::power && opts.method != Method::quadrature) {
    // I_tau = r^a/a^2 + r^a/(a (2 - a)).
    const double a = theta.parameter();
    return std::pow(r, a) / (a * a) + std::pow(r, a) / (a * (kN - a));
  }
  const auto br = log_breaks(theta);
  auto tau_log = [&](double lt) { return dini_small_log(theta, lt, opts) + dini_large_log(theta, kN, lt, opts); };
  return small_log(tau_log, std::log(r), br, opts);
}

DoublingReport check_doubling(const OscillationModulus& theta, double kappa, std::span<const double> t_grid) {
  DoublingReport rep;
  std::vector<double> t(t_grid.begin(), t_grid.end());
  std::sort(t.begin(), t.end());
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = eval_modulus(theta, t[i]);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      if (t[k] < 0.5 * t[i]) continue;
      double ratio;
      if (v[k] == 0)
        ratio = v[i] == 0 ? 1.0 : std::numeric_limits<double>::infinity();
      else
        ratio = v[i] / v[k];
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_t = t[i];
        rep.worst_s = t[k];
      }
    }
  }
  rep.holds = rep.worst_ratio <= kappa * (1 + 1e-12);
  return rep;
}

DiniProfile dini_profile(const OscillationModulus& theta, double d, std::span<const double> r_grid,
                         const QuadratureOptions& opts) {
  DiniProfile p;
  p.d = d;
  p.r_grid.assign(r_grid.begin(), r_grid.end());
  for (double r : p.r_grid) {
    p.I_values.push_back(dini_small(theta, r, opts));
    p.L_values.push_back(dini_large(theta, d, r, opts));
  }
  return p;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  check_positive(lo, "grid start");
  check_positive(hi, "grid end");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double q = std::log(hi / lo);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo * std::exp(q * static_cast<double>(i) / (count - 1));
  if (count > 1) g.back() = hi;
  return g;
}

}  // namespace layerpot::dini
