// layerpot: command-line driver for the layer potential laboratory.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include "layerpot/errors.hpp"
#include "layerpot/experiments.hpp"
#include "layerpot/io.hpp"
#include "layerpot/kernels.hpp"
#include "layerpot/matrixfield.hpp"
#include "layerpot/measures.hpp"
#include "layerpot/operators.hpp"
#include "layerpot/spherical.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <memory>
#include <optional>

namespace {

using namespace layerpot;

constexpr int kExitPass = 0;
constexpr int kExitCheck = 1;
constexpr int kExitUsage = 2;

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    io::write_file(out_path, text);
}

field::MatrixField load_field(const std::string& spec) {
  if (spec.empty() || spec == "identity") return field::MatrixField::identity();
  if (spec.rfind("log_dini:", 0) == 0) return field::MatrixField::log_dini(std::stod(spec.substr(9)));
  if (!spec.empty() && spec.front() == '{') return io::field_from_json(spec);
  return io::field_from_json(io::read_file(spec));
}

measures::DiscreteMeasure load_measure(const std::string& path) { return io::measure_from_json(io::read_file(path)); }

struct MeasureArgs {
  std::string family = "plane";
  int n = 16;
  int level = 3;
  std::string ifs = "tetrix";
  double skew = 1.0;
  int child = 0;
  double amp = 0.1;
  double freq = 6.0;
  std::uint64_t seed = 0;
  std::string out;
};

measures::DiscreteMeasure make_measure(const MeasureArgs& a) {
  if (a.family == "plane") return measures::generate(measures::PlanePatch{a.n}, a.seed);
  if (a.family == "sphere") return measures::generate(measures::Sphere{a.n}, a.seed);
  if (a.family == "graph") return measures::generate(measures::LipschitzGraph{a.amp, a.freq, a.n}, a.seed);
  if (a.family == "ifs") return measures::generate(measures::Ifs{measures::IfsSpec::preset(a.ifs), a.level}, a.seed);
  if (a.family == "lacunary")
    return measures::generate(measures::Lacunary{measures::IfsSpec::preset(a.ifs), a.level, a.skew, a.child}, a.seed);
  throw ConfigError("unknown measure family '" + a.family + "' (plane, sphere, graph, ifs, lacunary)");
}

std::vector<double> delta_grid(const measures::DiscreteMeasure& mu, const std::string& deltas, int count) {
  if (!deltas.empty()) return io::parse_list(deltas);
  return ops::default_delta_grid(mu, static_cast<std::size_t>(count));
}

kernels::KernelSpec make_kernel(const std::string& name, const std::string& field_spec,
                                const field::AveragingOptions& ao) {
  if (name == "riesz") return kernels::KernelSpec::riesz();
  if (name == "frozen" || name == "frozen-minus-riesz") {
    auto fk = std::make_shared<const kernels::FrozenKernel>(
        std::make_shared<const field::MatrixField>(load_field(field_spec)), ao);
    return name == "frozen" ? kernels::KernelSpec::frozen(fk) : kernels::KernelSpec::frozen_minus_riesz(fk);
  }
  if (name == "const") {
    const auto a = load_field(field_spec);
    if (!a.is_constant()) throw ConfigError("kernel 'const' needs a constant field");
    return kernels::KernelSpec::const_grad(a(Vec3::Zero()));
  }
  throw ConfigError("unknown kernel '" + name + "' (riesz, const, frozen, frozen-minus-riesz)");
}

int report_bundle(const exp::ReportBundle& r, const std::string& out_dir, const std::vector<std::string>& plots) {
  std::cout << r.digest;
  if (!out_dir.empty()) {
    exp::write_bundle(r, out_dir);
    for (const auto& p : exp::emit_plotdata(r, plots, out_dir)) std::cerr << "wrote " << p << '\n';
  }
  return r.pass ? kExitPass : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"layerpot: layer potentials and Riesz transforms on discrete measures in R^3"};
  app.require_subcommand(1);
  int rc = kExitPass;

  // gen-measure
  MeasureArgs ma;
  auto* gen = app.add_subcommand("gen-measure", "Generate a discrete measure as JSON");
  gen->add_option("--family", ma.family, "plane, sphere, graph, ifs, lacunary")->capture_default_str();
  gen->add_option("--n", ma.n, "Resolution (plane/graph side, sphere points)")->capture_default_str();
  gen->add_option("--level", ma.level, "IFS or lacunary level")->capture_default_str();
  gen->add_option("--ifs", ma.ifs, "IFS preset: tetrix, garnett3d")->capture_default_str();
  gen->add_option("--skew", ma.skew, "Lacunary mass share of the chosen child")->capture_default_str();
  gen->add_option("--child", ma.child, "Lacunary child map index")->capture_default_str();
  gen->add_option("--amp", ma.amp, "Lipschitz graph amplitude")->capture_default_str();
  gen->add_option("--freq", ma.freq, "Lipschitz graph frequency")->capture_default_str();
  gen->add_option("--seed", ma.seed, "Seed")->capture_default_str();
  gen->add_option("-o,--out", ma.out, "Output file (default stdout)");
  gen->callback([&] { emit(ma.out, io::measure_to_json(make_measure(ma)) + "\n"); });

  // oscillation
  std::string osc_field = "log_dini:0.25", osc_radii, osc_out;
  std::size_t osc_budget = 4096;
  std::uint64_t osc_seed = 0;
  auto* osc = app.add_subcommand("oscillation", "Estimate the mean oscillation of a matrix field");
  osc->add_option("--field", osc_field, "Field JSON file, inline JSON, identity or log_dini:<gamma>")
      ->capture_default_str();
  osc->add_option("--radii", osc_radii, "Comma separated radii (default e^-4 .. e^-10)");
  osc->add_option("--budget", osc_budget, "Ball averaging samples")->capture_default_str();
  osc->add_option("--seed", osc_seed, "Averaging seed")->capture_default_str();
  osc->add_option("-o,--out", osc_out, "CSV output (default stdout)");
  osc->callback([&] {
    const auto a = load_field(osc_field);
    std::vector<double> radii;
    if (osc_radii.empty())
      for (int k = 4; k <= 10; ++k) radii.push_back(std::exp(-k));
    else
      radii = io::parse_list(osc_radii);
    io::Table t{"oscillation", {"r", "omega_hat"}, {}};
    for (double r : radii) {
      const std::vector<Vec3> centers{Vec3::Zero(), Vec3(0.5 * r, 0, 0), Vec3(r, 0, 0)};
      t.add_row({r, field::oscillation_estimate(a, r, centers, {osc_budget, osc_seed})});
    }
    emit(osc_out, t.to_csv());
  });

  // opnorm
  std::string on_measure, on_kernel = "riesz", on_field = "identity", on_method = "power", on_deltas, on_out;
  int on_count = 12;
  std::uint64_t on_seed = 0;
  auto* on = app.add_subcommand("opnorm", "Operator norm of a truncated kernel on a measure");
  on->add_option("--measure", on_measure, "Measure JSON file")->required();
  on->add_option("--kernel", on_kernel, "riesz, const, frozen, frozen-minus-riesz")->capture_default_str();
  on->add_option("--field", on_field, "Field for const/frozen kernels")->capture_default_str();
  on->add_option("--method", on_method, "power, lanczos, svd")->capture_default_str();
  on->add_option("--deltas", on_deltas, "Comma separated truncation radii (default geometric grid)");
  on->add_option("--grid-count", on_count, "Points of the default grid")->capture_default_str();
  on->add_option("--seed", on_seed, "Start-vector seed")->capture_default_str();
  on->add_option("-o,--out", on_out, "CSV output (default stdout)");
  on->callback([&] {
    const auto mu = load_measure(on_measure);
    ops::OpNormOptions oo;
    oo.method = ops::opnorm_method_from_string(on_method);
    oo.seed = on_seed;
    const auto grid = delta_grid(mu, on_deltas, on_count);
    const auto s = ops::opnorm(make_kernel(on_kernel, on_field, {}), mu, grid, oo);
    io::Table t{"opnorm", {"delta", "sigma_max", "iterations", "residual", "pairs"}, {}};
    for (const auto& e : s.per_delta)
      t.add_row({e.delta, e.sigma_max, double(e.iterations), e.residual, double(e.pairs)});
    emit(on_out, t.to_csv());
    std::cerr << "sup " << io::format_double(s.sup) << " at delta " << io::format_double(s.argsup_delta) << '\n';
  });

  // compare
  std::string cmp_measure, cmp_field = "log_dini:0.25", cmp_method = "lanczos", cmp_deltas, cmp_out;
  int cmp_n = 16;
  double cmp_ell = 0.5, cmp_rf = 1.0;
  bool cmp_no_norm = false;
  std::size_t cmp_budget = 512;
  auto* cmp = app.add_subcommand("compare", "Compare the frozen-coefficient operator with the Riesz transform");
  cmp->add_option("--measure", cmp_measure, "Measure JSON file (default: plane patch in the cube)");
  cmp->add_option("--n", cmp_n, "Plane patch resolution when no measure is given")->capture_default_str();
  cmp->add_option("--ell", cmp_ell, "Cube side")->capture_default_str();
  cmp->add_option("--field", cmp_field, "Field")->capture_default_str();
  cmp->add_option("--radius-factor", cmp_rf, "Normalization ball radius in units of ell")->capture_default_str();
  cmp->add_flag("--no-normalize", cmp_no_norm, "Skip the covariance normalization");
  cmp->add_option("--method", cmp_method, "power, lanczos, svd")->capture_default_str();
  cmp->add_option("--budget", cmp_budget, "Ball averaging samples")->capture_default_str();
  cmp->add_option("--deltas", cmp_deltas, "Comma separated truncation radii");
  cmp->add_option("-o,--out", cmp_out, "CSV output (default stdout)");
  cmp->callback([&] {
    measures::DiscreteMeasure mu;
    if (cmp_measure.empty()) {
      mu = measures::generate(measures::PlanePatch{cmp_n});
      for (auto& p : mu.points) p = cmp_ell * (p - Vec3(0.5, 0.5, 0.0));
      for (auto& w : mu.weights) w *= cmp_ell * cmp_ell;
    } else {
      mu = load_measure(cmp_measure);
    }
    ops::CompareOptions co;
    co.normalize = !cmp_no_norm;
    co.radius_factor = cmp_rf;
    co.averaging.budget = cmp_budget;
    co.opnorm.method = ops::opnorm_method_from_string(cmp_method);
    if (!cmp_deltas.empty()) co.delta_grid = io::parse_list(cmp_deltas);
    const auto r = ops::compare_T_R(mu, load_field(cmp_field), measures::Cube{Vec3::Zero(), cmp_ell}, co);
    io::Table t{"compare", {"delta", "norm_T", "norm_R", "diff_norm", "ratio"}, {}};
    for (const auto& row : r.rows) t.add_row({row.delta, row.norm_T, row.norm_R, row.diff_norm, row.ratio});
    emit(cmp_out, t.to_csv());
  });

  // sph-decomp
  std::string sd_field = "log_dini:0.25", sd_x = "0.02,0,0", sd_out;
  int sd_jmax = 24, sd_level = 0;
  double sd_delta = 0.01, sd_side = 0.25;
  bool sd_riesz = false;
  auto* sd = app.add_subcommand("sph-decomp", "Spherical-harmonic coefficients of the difference kernel K3");
  sd->add_option("--field", sd_field, "Field")->capture_default_str();
  sd->add_option("--x", sd_x, "Base point")->capture_default_str();
  sd->add_option("--delta", sd_delta, "Truncation scale")->capture_default_str();
  sd->add_option("--cube-side", sd_side, "Normalization radius")->capture_default_str();
  sd->add_option("--jmax", sd_jmax, "Maximal degree")->capture_default_str();
  sd->add_option("--level", sd_level, "Quadrature level (default jmax + 16)");
  sd->add_flag("--riesz", sd_riesz, "Decompose the Riesz kernel restricted to the sphere instead");
  sd->add_option("-o,--out", sd_out, "CSV output (default stdout)");
  sd->callback([&] {
    const auto quad = sph::build_quadrature(sd_level > 0 ? sd_level : sd_jmax + 16);
    sph::Decomposition dec;
    if (sd_riesz) {
      dec = sph::decompose([](const Vec3& z) { return z; }, sd_jmax, quad);
    } else {
      const auto cn = field::normalize_cov(load_field(sd_field), Vec3::Zero(), sd_side, {});
      const Vec3 x = io::parse_vec3(sd_x);
      dec = sph::decompose([&](const Vec3& z) { return kernels::k3_diff(cn.hat_a, x, sd_delta, z, {}); }, sd_jmax,
                           quad);
    }
    io::Table t{"sph", {"component", "j", "ell", "coeff"}, {}};
    for (int c = 0; c < 3; ++c)
      for (int j = 0; j <= sd_jmax; ++j)
        for (int ell = 1; ell <= 2 * j + 1; ++ell) t.add_row({double(c), double(j), double(ell), dec.coeff(c, j, ell)});
    emit(sd_out, t.to_csv());
    std::cerr << "residual " << io::format_double(dec.residual) << '\n';
  });

  // criterion
  std::string cr_measure, cr_center, cr_field = "identity";
  double cr_radius = 0.0625;
  ops::CriterionParams cp;
  auto* cr = app.add_subcommand("criterion", "Evaluate the hypotheses of the local criterion on a ball");
  cr->add_option("--measure", cr_measure, "Measure JSON file")->required();
  cr->add_option("--center", cr_center, "Ball center x,y,z")->required();
  cr->add_option("--radius", cr_radius, "Ball radius")->capture_default_str();
  cr->add_option("--field", cr_field, "Field")->capture_default_str();
  cr->add_option("--c0", cp.c0, "C0")->capture_default_str();
  cr->add_option("--c0-prime", cp.c0_prime, "C0'")->capture_default_str();
  cr->add_option("--n-scale", cp.n_scale, "N")->capture_default_str();
  cr->add_option("--delta-flat", cp.delta_flat, "Flatness constant")->capture_default_str();
  cr->add_option("--tau", cp.tau, "Mean oscillation constant")->capture_default_str();
  cr->add_option("--lambda", cp.lambda, "Scale bound")->capture_default_str();
  cr->callback([&] {
    const auto mu = load_measure(cr_measure);
    const auto rep = ops::criterion_check(mu, measures::Ball{io::parse_vec3(cr_center), cr_radius}, cp,
                                          load_field(cr_field));
    for (const auto& h : rep.hypotheses)
      std::cout << (h.pass ? "PASS " : "FAIL ") << h.name << ": measured " << io::format_double(h.measured)
                << ", bound " << io::format_double(h.bound) << '\n';
    if (rep.scale_flag) std::cout << "note: 2^N r(B) exceeds the diameter of the support\n";
    rc = rep.all_pass() ? kExitPass : kExitCheck;
  });

  // mollify
  std::string mo_measure, mo_out;
  double mo_eps = 0.1;
  int mo_order = 3;
  auto* mo = app.add_subcommand("mollify", "Mollify a measure");
  mo->add_option("--measure", mo_measure, "Measure JSON file")->required();
  mo->add_option("--eps", mo_eps, "Mollification radius")->capture_default_str();
  mo->add_option("--order", mo_order, "Quadrature order per atom")->capture_default_str();
  mo->add_option("-o,--out", mo_out, "Output file (default stdout)");
  mo->callback([&] {
    const auto nu = measures::mollify(load_measure(mo_measure), mo_eps, mo_order);
    emit(mo_out, io::measure_to_json(nu) + "\n");
  });

  // run
  std::string run_config, run_experiment, run_out;
  std::vector<std::string> run_set, run_plot;
  std::optional<std::uint64_t> run_seed;
  int run_criterion = 0;
  auto* run = app.add_subcommand("run", "Run a config-driven experiment");
  run->add_option("--config", run_config, "Experiment config JSON");
  run->add_option("--experiment", run_experiment, "Experiment name (instead of a config)");
  run->add_option("--criterion", run_criterion, "Run the experiment of an acceptance criterion (1..10)");
  run->add_option("--seed", run_seed, "Root seed (overrides the config)");
  run->add_option("--output-dir", run_out, "Directory for summary.json, digest.txt and CSVs");
  run->add_option("--set", run_set, "Parameter override key=value (repeatable; wins over the config)");
  run->add_option("--plot", run_plot, "Plot selector x,y or table:x,y (repeatable)");
  run->callback([&] {
    exp::ExperimentConfig cfg;
    if (!run_config.empty()) cfg = exp::config_from_json(io::read_file(run_config));
    if (!run_experiment.empty()) cfg.experiment = run_experiment;
    if (run_criterion != 0) cfg.experiment = exp::experiment_for_criterion(run_criterion);
    if (cfg.experiment.empty()) throw ConfigError("run needs --config, --experiment or --criterion");
    if (run_seed) cfg.seed = *run_seed;
    if (!run_out.empty()) cfg.output_dir = run_out;
    for (const auto& kv : run_set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    const auto r = exp::run_experiment(cfg);
    rc = report_bundle(r, cfg.output_dir, run_plot);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NotDiniError& e) {
    std::cerr << "invalid modulus: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return kExitCheck;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheck;
  }
  return rc;
}
