#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faft/csv.hpp"
#include "faft/errors.hpp"
#include "faft/mc.hpp"

namespace faft {

/// Flat key-value configuration with dotted sections (dgp.N=800). Lines
/// starting with '#' are comments. Unknown keys are reported after loading
/// so typos do not silently fall back to defaults.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
  }

  static KeyValueConfig from_string(const std::string& text,
                                    const std::string& origin = "<inline>") {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const std::string stripped = detail::trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ValidationError(origin + ":" + std::to_string(line_no) +
                              ": expected key=value, got '" + stripped + "'");
      const std::string key = detail::trim(stripped.substr(0, eq));
      const std::string value = detail::trim(stripped.substr(eq + 1));
      if (key.empty())
        throw ValidationError(origin + ":" + std::to_string(line_no) +
                              ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return parse_double(key, it->second);
  }

  long get_int(const std::string& key, long dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return parse_int(key, it->second);
  }

  long require_int(const std::string& key) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end())
      throw ValidationError(origin_ + ": missing required key '" + key + "'");
    return parse_int(key, it->second);
  }

  bool get_bool(const std::string& key, bool dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ValidationError(origin_ + ": " + key + ": expected true/false, got '" +
                          it->second + "'");
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ','))
      out.push_back(parse_double(key, detail::trim(tok)));
    if (out.empty())
      throw ValidationError(origin_ + ": " + key + ": empty list");
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key,
                                           const std::vector<std::string>& dflt) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<std::string> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(detail::trim(tok));
    return out;
  }

  /// Keys present in the file that no getter ever consumed.
  std::vector<std::string> untouched() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!touched_.count(k)) out.push_back(k);
    return out;
  }

  const std::string& origin() const { return origin_; }

 private:
  double parse_double(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ValidationError(origin_ + ": " + key + ": expected number, got '" + v + "'");
    return x;
  }

  long parse_int(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ValidationError(origin_ + ": " + key + ": expected integer, got '" + v + "'");
    return x;
  }

  std::string origin_ = "<inline>";
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
};

namespace detail {

inline std::string format_fraction(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

/// Builds an ExperimentSpec from a config. Scalar split.* keys set the
/// tuning; comma lists for split.mu0 / split.lambda1 / split.lambda2 expand
/// into a tuning grid (cross product).
inline ExperimentSpec load_experiment_spec(const KeyValueConfig& cfg) {
  ExperimentSpec spec;

  spec.dgp.N = static_cast<int>(cfg.require_int("dgp.N"));
  spec.dgp.T = static_cast<int>(cfg.require_int("dgp.T"));
  spec.dgp.r = static_cast<int>(cfg.get_int("dgp.r", 3));
  spec.dgp.c = cfg.get_double("dgp.c", 1.25);
  spec.dgp.theta1 = cfg.get_double("dgp.theta1", 0.5);
  const auto alphas = cfg.get_double_list("dgp.alphas", {1.0, 1.0, 1.0});
  const auto d2 = cfg.get_double_list("dgp.D2diag", {3.0, 2.0, 1.0});
  if (static_cast<int>(alphas.size()) != spec.dgp.r ||
      static_cast<int>(d2.size()) != spec.dgp.r)
    throw ValidationError(cfg.origin() +
                          ": dgp.alphas / dgp.D2diag must have length dgp.r");
  spec.dgp.alphas = Eigen::Map<const Eigen::VectorXd>(alphas.data(), spec.dgp.r);
  spec.dgp.D2diag = Eigen::Map<const Eigen::VectorXd>(d2.data(), spec.dgp.r);
  spec.dgp.beta = Eigen::VectorXd::Zero(spec.dgp.r);
  spec.dgp.pi_perturb = cfg.get_double("dgp.pi_perturb", 24.0);
  spec.dgp.rho_mean = cfg.get_double("dgp.rho_mean", 0.3);
  spec.dgp.rho_scale = cfg.get_double("dgp.rho_scale", 0.5);
  spec.dgp.cs_dependence = cfg.get_bool("dgp.cs_dependence", false);
  spec.dgp.xi = cfg.get_double("dgp.xi", 0.4);
  spec.dgp.K = static_cast<int>(cfg.get_int("dgp.K", 5));
  spec.dgp.garch = cfg.get_bool("dgp.garch", false);
  spec.dgp.garch_params.omega = cfg.get_double("dgp.garch_omega", 0.1);
  spec.dgp.garch_params.alpha = cfg.get_double("dgp.garch_alpha", 0.1);
  spec.dgp.garch_params.eta = cfg.get_double("dgp.garch_eta", 0.2);
  spec.dgp.seed = static_cast<std::uint64_t>(cfg.get_int("dgp.seed", 42));

  for (double b : cfg.get_double_list("mc.beta_grid", {0.0}))
    spec.beta_grid.push_back(Eigen::VectorXd::Constant(spec.dgp.r, b));
  for (const auto& name :
       cfg.get_string_list("mc.tests", {"g1", "g2adj", "g3adj", "g4adj"}))
    spec.tests.push_back(parse_test_spec(name));
  spec.replications = static_cast<int>(cfg.get_int("mc.replications", 500));
  spec.nominal_level = cfg.get_double("mc.nominal_level", 0.05);
  spec.feasible = cfg.get_bool("mc.feasible", true);
  if (cfg.has("mc.r_max")) {
    if (cfg.has("mc.r"))
      throw ValidationError(cfg.origin() + ": give either mc.r or mc.r_max, not both");
    spec.r_selection.use_icp1 = true;
    spec.r_selection.r_max = static_cast<int>(cfg.get_int("mc.r_max", 10));
  } else {
    spec.r_selection.use_icp1 = false;
    spec.r_selection.r = static_cast<int>(cfg.get_int("mc.r", 3));
  }

  SplitConfig base;
  base.pi0 = cfg.get_double("split.pi0", 0.5);
  base.tau0 = cfg.get_double("split.tau0", 0.8);
  const auto mu_grid = cfg.get_double_list("split.mu0", {0.40});
  const auto l1_grid = cfg.get_double_list("split.lambda1", {1.0});
  const auto l2_grid = cfg.get_double_list("split.lambda2", {0.65});
  for (double mu : mu_grid)
    for (double l1 : l1_grid)
      for (double l2 : l2_grid) {
        TuningPoint tp;
        tp.cfg = base;
        tp.cfg.mu0 = mu;
        tp.cfg.lambda1 = l1;
        tp.cfg.lambda2 = l2;
        std::string label;
        if (mu_grid.size() > 1 || (l1_grid.size() == 1 && l2_grid.size() == 1))
          label += "mu0=" + detail::format_fraction(mu);
        if (l1_grid.size() > 1)
          label += (label.empty() ? "" : ",") + std::string("l1=") +
                   detail::format_fraction(l1);
        if (l2_grid.size() > 1)
          label += (label.empty() ? "" : ",") + std::string("l2=") +
                   detail::format_fraction(l2);
        tp.label = label;
        spec.tunings.push_back(std::move(tp));
      }

  const auto unknown = cfg.untouched();
  if (!unknown.empty()) {
    std::string msg = cfg.origin() + ": unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
  spec.validate();
  return spec;
}

}  // namespace faft
