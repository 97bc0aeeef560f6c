#pragma once

// JSON (de)serialization of moduli, matrix fields and measures; CSV tables; small parsers.

#include "layerpot/dini.hpp"
#include "layerpot/linalg.hpp"
#include "layerpot/matrixfield.hpp"
#include "layerpot/measures.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace layerpot::io {

inline constexpr int kSchemaVersion = 1;

// {"family":"power","alpha":0.5,"kappa":1.4142}, tabulated: {"family":"tabulated","t":[..],"theta":[..],"kappa":..}
std::string modulus_to_json(const dini::OscillationModulus& m);
dini::OscillationModulus modulus_from_json(std::string_view text);

// {"family":"log_dini","gamma":0.25,"lambda":2.0}; constant: {"family":"constant","a0":[9 entries row-major],...}
std::string field_to_json(const field::MatrixField& a);
field::MatrixField field_from_json(std::string_view text);

// {"points":[[x,y,z],...],"weights":[...],"meta":{...}}
std::string measure_to_json(const measures::DiscreteMeasure& mu);
measures::DiscreteMeasure measure_from_json(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> values) { rows.push_back(std::move(values)); }
  std::string to_csv() const;
  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// "a,b,c" -> {a, b, c}. Throws ConfigError on malformed input.
std::vector<double> parse_list(std::string_view text);
Vec3 parse_vec3(std::string_view text);
/// Row-major list of 9 numbers or a JSON array of 3 rows.
Mat3 parse_mat3(std::string_view text);

}  // namespace layerpot::io
