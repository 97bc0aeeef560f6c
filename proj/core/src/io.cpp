#include "layerpot/io.hpp"

#include "layerpot/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace layerpot::io {

using nlohmann::json;

namespace {

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw ConfigError(std::string(what) + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": bad value for \"" + key + "\": " + e.what());
  }
}

json mat_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Mat3 mat_from(const json& j, const char* what) {
  std::vector<double> v;
  try {
    if (j.is_array() && j.size() == 3 && j[0].is_array()) {
      for (const auto& row : j)
        for (const auto& x : row) v.push_back(x.get<double>());
    } else {
      v = j.get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": matrix must be 9 numbers: " + e.what());
  }
  if (v.size() != 9) throw ConfigError(std::string(what) + ": matrix must have 9 entries");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(3 * r + c)];
  return m;
}

json modulus_json(const dini::OscillationModulus& m) {
  json j;
  j["family"] = dini::to_string(m.family());
  switch (m.family()) {
    case dini::Family::power: j["alpha"] = m.parameter(); break;
    case dini::Family::log_power: j["gamma"] = m.parameter(); break;
    case dini::Family::constant: j["c"] = m.parameter(); break;
    case dini::Family::tabulated:
      j["t"] = m.table_t();
      j["theta"] = m.table_theta();
      break;
  }
  j["kappa"] = m.kappa();
  return j;
}

dini::OscillationModulus modulus_from(const json& j) {
  const char* what = "modulus";
  const auto fam = dini::family_from_string(get<std::string>(j, "family", what));
  switch (fam) {
    case dini::Family::power: return dini::OscillationModulus::power(get<double>(j, "alpha", what));
    case dini::Family::log_power: return dini::OscillationModulus::log_power(get<double>(j, "gamma", what));
    case dini::Family::constant: return dini::OscillationModulus::constant(get<double>(j, "c", what));
    case dini::Family::tabulated:
      return dini::OscillationModulus::tabulated(get<std::vector<double>>(j, "t", what),
                                                 get<std::vector<double>>(j, "theta", what),
                                                 get<double>(j, "kappa", what));
  }
  throw ConfigError("modulus: unknown family");
}

json profile_json(const field::RadialProfile& p) {
  return {{"kind", p.kind == field::RadialProfile::Kind::log_dini ? "log_dini" : "holder"},
          {"exponent", p.exponent}};
}

field::RadialProfile profile_from(const json& j) {
  const auto kind = get<std::string>(j, "kind", "profile");
  field::RadialProfile p;
  if (kind == "log_dini")
    p.kind = field::RadialProfile::Kind::log_dini;
  else if (kind == "holder")
    p.kind = field::RadialProfile::Kind::holder;
  else
    throw ConfigError("profile: unknown kind \"" + kind + "\" (log_dini, holder)");
  p.exponent = get<double>(j, "exponent", "profile");
  return p;
}

json field_json(const field::MatrixField& a) {
  json j;
  j["family"] = a.family_name();
  j["lambda"] = a.lambda();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, field::Constant>) {
          j["a0"] = mat_json(p.a0);
        } else if constexpr (std::is_same_v<T, field::LogDini>) {
          j["gamma"] = p.gamma;
        } else if constexpr (std::is_same_v<T, field::Holder>) {
          j["alpha"] = p.alpha;
          j["amplitude"] = p.amplitude;
        } else if constexpr (std::is_same_v<T, field::RadialBlend>) {
          j["a0"] = mat_json(p.a0);
          j["a1"] = mat_json(p.a1);
          j["profile"] = profile_json(p.profile);
        } else if constexpr (std::is_same_v<T, field::Transformed>) {
          j["s"] = mat_json(p.s);
          j["base"] = field_json(*p.base);
        }
      },
      a.params());
  j["modulus"] = modulus_json(a.declared_modulus());
  return j;
}

field::MatrixField field_from(const json& j) {
  const char* what = "field";
  const auto fam = get<std::string>(j, "family", what);
  const double lambda = j.contains("lambda") ? get<double>(j, "lambda", what) : 0.0;
  auto with_lambda = [&](double dflt) { return lambda > 0 ? lambda : dflt; };
  std::optional<field::MatrixField> a;
  if (fam == "identity") {
    a = field::MatrixField::identity();
  } else if (fam == "constant") {
    a = field::MatrixField(field::Constant{mat_from(j.at("a0"), what)}, with_lambda(1.0));
  } else if (fam == "log_dini") {
    a = field::MatrixField(field::LogDini{get<double>(j, "gamma", what)}, with_lambda(2.0));
  } else if (fam == "holder") {
    a = field::MatrixField(field::Holder{get<double>(j, "alpha", what), get<double>(j, "amplitude", what)},
                           with_lambda(2.0));
  } else if (fam == "radial_blend") {
    if (!j.contains("a0") || !j.contains("a1")) throw ConfigError("field: radial_blend needs a0 and a1");
    a = field::MatrixField(field::RadialBlend{mat_from(j.at("a0"), what), mat_from(j.at("a1"), what),
                                              profile_from(j.at("profile"))},
                           with_lambda(2.0));
  } else if (fam == "transformed") {
    if (!j.contains("s") || !j.contains("base")) throw ConfigError("field: transformed needs s and base");
    const Mat3 s = mat_from(j.at("s"), what);
    auto base = std::make_shared<const field::MatrixField>(field_from(j.at("base")));
    a = field::MatrixField(field::Transformed{base, s, s.inverse()}, with_lambda(base->lambda() * base->lambda()));
  } else {
    throw ConfigError("field: unknown family \"" + fam +
                      "\" (identity, constant, log_dini, holder, radial_blend, transformed)");
  }
  if (j.contains("modulus")) a->set_declared_modulus(modulus_from(j.at("modulus")));
  return *a;
}

}  // namespace

std::string modulus_to_json(const dini::OscillationModulus& m) {
  json j = modulus_json(m);
  j["schema_version"] = kSchemaVersion;
  return j.dump();
}

dini::OscillationModulus modulus_from_json(std::string_view text) { return modulus_from(parse(text, "modulus")); }

std::string field_to_json(const field::MatrixField& a) {
  json j = field_json(a);
  j["schema_version"] = kSchemaVersion;
  return j.dump();
}

field::MatrixField field_from_json(std::string_view text) {
  try {
    return field_from(parse(text, "field"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
}

std::string measure_to_json(const measures::DiscreteMeasure& mu) {
  json j;
  j["schema_version"] = kSchemaVersion;
  json pts = json::array();
  for (const auto& p : mu.points) pts.push_back({p[0], p[1], p[2]});
  j["points"] = std::move(pts);
  j["weights"] = mu.weights;
  j["meta"] = {{"family", mu.meta.family},
               {"level", mu.meta.level},
               {"resolution", mu.meta.resolution},
               {"seed", mu.meta.seed}};
  return j.dump();
}

measures::DiscreteMeasure measure_from_json(std::string_view text) {
  const json j = parse(text, "measure");
  const char* what = "measure";
  measures::DiscreteMeasure mu;
  try {
    for (const auto& p : get<std::vector<std::vector<double>>>(j, "points", what)) {
      if (p.size() != 3) throw ConfigError("measure: every point needs 3 coordinates");
      mu.points.emplace_back(p[0], p[1], p[2]);
    }
    mu.weights = get<std::vector<double>>(j, "weights", what);
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      mu.meta.family = m.value("family", std::string());
      mu.meta.level = m.value("level", 0);
      mu.meta.resolution = m.value("resolution", 0);
      mu.meta.seed = m.value("seed", std::uint64_t{0});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
  try {
    measures::validate(mu);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
  return mu;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void Table::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '[')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == ']')) tok.remove_suffix(1);
    double v = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      throw ConfigError("cannot parse number '" + std::string(tok) + "' in list '" + std::string(text) + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

Vec3 parse_vec3(std::string_view text) {
  const auto v = parse_list(text);
  if (v.size() != 3) throw ConfigError("expected 3 numbers, got '" + std::string(text) + "'");
  return {v[0], v[1], v[2]};
}

Mat3 parse_mat3(std::string_view text) {
  std::string flat(text);
  for (char& c : flat)
    if (c == '[' || c == ']') c = ' ';
  const auto v = parse_list(flat);
  if (v.size() != 9) throw ConfigError("expected 9 numbers for a matrix, got '" + std::string(text) + "'");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(3 * r + c)];
  return m;
}

}  // namespace layerpot::io
