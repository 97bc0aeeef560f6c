#pragma once

#include "layerpot/experiments.hpp"
#include "layerpot/qmc.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace layerpot::exp::detail {

using nlohmann::json;

class Params {
 public:
  explicit Params(json j) : j_(std::move(j)) {}

  double num(const std::string& key, double dflt) const;
  int integer(const std::string& key, int dflt) const;
  bool flag(const std::string& key, bool dflt) const;
  std::string str(const std::string& key, const std::string& dflt) const;
  std::vector<double> list(const std::string& key, std::vector<double> dflt) const;
  const json& raw() const { return j_; }

 private:
  json j_;
};

struct Context {
  Params params;
  SeedStreams seeds;
  ReportBundle& out;
  json values = json::object();

  void check(int criterion, std::string name, bool pass, double measured, double threshold,
             std::string detail = {});
  io::Table& table(std::string name, std::vector<std::string> header);
};

void kernel_identities(Context& cx);
void dini_calculus(Context& cx);
void oscillation_profile(Context& cx);
void opnorm_sweep(Context& cx);
void compare_tr(Context& cx);
void cantor_growth(Context& cx);
void sph_decay(Context& cx);
void criterion(Context& cx);
void mollify_check(Context& cx);

}  // namespace layerpot::exp::detail
