#include "layerpot/experiments.hpp"

#include "experiments_internal.hpp"
#include "layerpot/errors.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

namespace layerpot::exp {

namespace detail {

namespace {

[[noreturn]] void bad_param(const std::string& key, const std::string& what) {
  throw ConfigError("parameter '" + key + "': " + what);
}

}  // namespace

double Params::num(const std::string& key, double dflt) const {
  if (!j_.contains(key)) return dflt;
  const auto& v = j_.at(key);
  if (v.is_number()) return v.get<double>();
  bad_param(key, "expected a number, got " + v.dump());
}

int Params::integer(const std::string& key, int dflt) const {
  if (!j_.contains(key)) return dflt;
  const auto& v = j_.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number() && v.get<double>() == std::floor(v.get<double>())) return static_cast<int>(v.get<double>());
  bad_param(key, "expected an integer, got " + v.dump());
}

bool Params::flag(const std::string& key, bool dflt) const {
  if (!j_.contains(key)) return dflt;
  const auto& v = j_.at(key);
  if (v.is_boolean()) return v.get<bool>();
  bad_param(key, "expected true or false, got " + v.dump());
}

std::string Params::str(const std::string& key, const std::string& dflt) const {
  if (!j_.contains(key)) return dflt;
  const auto& v = j_.at(key);
  if (v.is_string()) return v.get<std::string>();
  bad_param(key, "expected a string, got " + v.dump());
}

std::vector<double> Params::list(const std::string& key, std::vector<double> dflt) const {
  if (!j_.contains(key)) return dflt;
  const auto& v = j_.at(key);
  if (v.is_string()) return io::parse_list(v.get<std::string>());
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) bad_param(key, "expected a list of numbers, got " + v.dump());
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (v.is_number()) return {v.get<double>()};
  bad_param(key, "expected a list of numbers, got " + v.dump());
}

void Context::check(int criterion, std::string name, bool pass, double measured, double threshold,
                    std::string detail) {
  out.checks.push_back({criterion, std::move(name), pass, measured, threshold, std::move(detail)});
}

io::Table& Context::table(std::string name, std::vector<std::string> header) {
  out.tables.push_back({std::move(name), std::move(header), {}});
  return out.tables.back();
}

}  // namespace detail

namespace {

using detail::json;

const std::vector<std::pair<std::string, std::function<void(detail::Context&)>>>& registry() {
  static const std::vector<std::pair<std::string, std::function<void(detail::Context&)>>> r{
      {"kernel-identities", detail::kernel_identities},
      {"dini-calculus", detail::dini_calculus},
      {"oscillation-profile", detail::oscillation_profile},
      {"opnorm-sweep", detail::opnorm_sweep},
      {"compare-TR", detail::compare_tr},
      {"cantor-growth", detail::cantor_growth},
      {"sph-decay", detail::sph_decay},
      {"criterion", detail::criterion},
      {"mollify-check", detail::mollify_check},
  };
  return r;
}

std::string joined_names() {
  std::string s;
  for (const auto& n : experiment_names()) s += (s.empty() ? "" : ", ") + n;
  return s;
}

json override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::string digest_text(const ReportBundle& r) {
  std::ostringstream d;
  d << "experiment " << r.experiment << " seed " << r.seed << " schema " << io::kSchemaVersion << '\n';
  std::size_t failed = 0;
  for (const auto& c : r.checks) {
    if (!c.pass) ++failed;
    d << (c.pass ? "PASS " : "FAIL ");
    if (c.criterion > 0) d << "[" << c.criterion << "] ";
    d << c.name << ": measured " << io::format_double(c.measured) << ", threshold "
      << io::format_double(c.threshold);
    if (!c.detail.empty()) d << " (" << c.detail << ")";
    d << '\n';
  }
  d << (failed == 0 ? "all " + std::to_string(r.checks.size()) + " checks passed"
                    : std::to_string(failed) + " of " + std::to_string(r.checks.size()) + " checks failed")
    << '\n';
  return d.str();
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

}  // namespace

ExperimentConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig cfg;
  try {
    if (!j.contains("experiment")) throw ConfigError("config: missing key \"experiment\"");
    cfg.experiment = j.at("experiment").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw ConfigError("config: \"params\" must be an object");
      cfg.params_json = j.at("params").dump();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [k, v] : j.items())
    if (k != "experiment" && k != "seed" && k != "output_dir" && k != "params")
      throw ConfigError("config: unknown key \"" + k + "\"");
  return cfg;
}

const io::Table* ReportBundle::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

std::string experiment_for_criterion(int criterion) {
  switch (criterion) {
    case 1: return "kernel-identities";
    case 2: return "dini-calculus";
    case 3: return "oscillation-profile";
    case 4: return "compare-TR";
    case 5: return "cantor-growth";
    case 6: return "sph-decay";
    case 7:
    case 9: return "opnorm-sweep";
    case 8: return "mollify-check";
    case 10: return "criterion";
    default: throw ConfigError("no acceptance criterion " + std::to_string(criterion) + " (1..10)");
  }
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
  const auto it = std::find_if(registry().begin(), registry().end(),
                               [&](const auto& e) { return e.first == cfg.experiment; });
  if (it == registry().end())
    throw ConfigError("unknown experiment '" + cfg.experiment + "' (known: " + joined_names() + ")");

  json params;
  try {
    params = json::parse(cfg.params_json.empty() ? "{}" : cfg.params_json);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("params: invalid JSON: ") + e.what());
  }
  if (!params.is_object()) throw ConfigError("params must be a JSON object");
  for (const auto& [k, v] : cfg.overrides) params[k] = override_value(v);

  const auto t0 = std::chrono::steady_clock::now();
  ReportBundle out;
  out.experiment = cfg.experiment;
  out.seed = cfg.seed;
  out.tables.reserve(32);
  detail::Context cx{detail::Params(params), SeedStreams(cfg.seed), out};
  it->second(cx);
  out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const CheckResult& c) { return c.pass; });
  io::Table checks{"checks", {"criterion", "name", "pass", "measured", "threshold"}, {}};
  json jchecks = json::array();
  for (const auto& c : out.checks) {
    checks.add_row(std::vector<std::string>{std::to_string(c.criterion), c.name, c.pass ? "1" : "0",
                                            io::format_double(c.measured), io::format_double(c.threshold)});
    jchecks.push_back({{"criterion", c.criterion},
                       {"name", c.name},
                       {"pass", c.pass},
                       {"measured", c.measured},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
  }
  out.tables.push_back(std::move(checks));
  json tables = json::object();
  for (const auto& t : out.tables) tables[t.name] = {{"columns", t.header}, {"rows", t.rows.size()}};
  json summary = {{"schema_version", io::kSchemaVersion},
                  {"experiment", out.experiment},
                  {"seed", out.seed},
                  {"pass", out.pass},
                  {"params", params},
                  {"values", cx.values},
                  {"checks", jchecks},
                  {"tables", tables}};
  out.summary_json = summary.dump(2) + "\n";
  out.digest = digest_text(out);
  return out;
}

void write_bundle(const ReportBundle& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  io::write_file((base / "summary.json").string(), report.summary_json);
  io::write_file((base / "digest.txt").string(), report.digest);
  for (const auto& t : report.tables) io::write_file((base / (sanitize(t.name) + ".csv")).string(), t.to_csv());
}

std::vector<std::string> emit_plotdata(const ReportBundle& report, const std::vector<std::string>& selectors,
                                       const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  std::vector<std::string> paths;
  for (const auto& sel : selectors) {
    std::string tname, cols = sel;
    if (const auto colon = sel.find(':'); colon != std::string::npos) {
      tname = sel.substr(0, colon);
      cols = sel.substr(colon + 1);
    }
    const auto comma = cols.find(',');
    if (comma == std::string::npos) throw ConfigError("selector '" + sel + "' must look like x,y or table:x,y");
    const std::string x = cols.substr(0, comma), y = cols.substr(comma + 1);

    const io::Table* hit = nullptr;
    for (const auto& t : report.tables) {
      if (!tname.empty() && t.name != tname) continue;
      if (t.column(x) >= 0 && t.column(y) >= 0) {
        hit = &t;
        break;
      }
    }
    io::Table out{"plot", {x, y}, {}};
    if (hit) {
      const int ix = hit->column(x), iy = hit->column(y);
      for (const auto& r : hit->rows) out.add_row(std::vector<std::string>{r[ix], r[iy]});
    } else if (!report.tables.empty()) {
      std::string avail;
      for (const auto& t : report.tables) {
        avail += "\n  " + t.name + ":";
        for (const auto& h : t.header) avail += " " + h;
      }
      throw ConfigError("selector '" + sel + "' matches no table; available fields:" + avail);
    }
    const std::string stem = sanitize(report.experiment) + "_" + (hit ? sanitize(hit->name) + "_" : "") +
                             sanitize(x) + "_" + sanitize(y) + ".csv";
    const std::string path = (std::filesystem::path(dir) / stem).string();
    io::write_file(path, out.to_csv());
    paths.push_back(path);
  }
  return paths;
}

}  // namespace layerpot::exp
