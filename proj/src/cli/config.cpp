#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace qfc::cli {

namespace {

using nlohmann::json;

int levenshtein(const std::string& a, const std::string& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<int> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

std::string suggest(const std::string& key, const std::vector<std::string>& known) {
  int best = 3;  // only suggest close misses
  std::string pick;
  for (const auto& k : known) {
    const int d = levenshtein(key, k);
    if (d < best) {
      best = d;
      pick = k;
    }
  }
  return pick;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigValidationError(msg); }

/// Rejects keys outside `allowed`, with a did-you-mean hint.
void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) != allowed.end()) continue;
    std::string msg = "unknown key \"" + item.key() + "\" in " + where;
    const std::string near = suggest(item.key(), allowed);
    if (!near.empty()) msg += " (did you mean \"" + near + "\"?)";
    fail(msg);
  }
}

double get_number(const json& obj, const std::string& where, const std::string& key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

double require_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where + " is missing required key \"" + key + "\"");
  return get_number(obj, where, key, 0.0);
}

int get_int(const json& obj, const std::string& where, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    fail(where + "." + key + " must be an integer");
  }
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

Eigen::Matrix2d require_matrix(const json& obj, const std::string& where,
                               const std::string& key) {
  if (!obj.contains(key)) fail(where + " is missing required key \"" + key + "\"");
  const auto& v = obj.at(key);
  const bool shaped = v.is_array() && v.size() == 2 && v[0].is_array() && v[0].size() == 2 &&
                      v[1].is_array() && v[1].size() == 2;
  if (!shaped) fail(where + "." + key + " must be a 2x2 array of numbers");
  Eigen::Matrix2d m;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (!v[i][j].is_number()) fail(where + "." + key + " must be a 2x2 array of numbers");
      m(i, j) = v[i][j].get<double>();
    }
  }
  return m;
}

Eigen::Vector2d require_vector2(const json& obj, const std::string& where,
                                const std::string& key) {
  if (!obj.contains(key)) fail(where + " is missing required key \"" + key + "\"");
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(where + "." + key + " must be an array of two numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void check_symmetric(const Eigen::Matrix2d& m, const std::string& name) {
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + m.norm())) fail(name + " must be symmetric");
}

void check_psd(const Eigen::Matrix2d& m, const std::string& name) {
  check_symmetric(m, name);
  const double tol = 1e-12 * (1.0 + m.norm());
  if (m(0, 0) < -tol || m(1, 1) < -tol || m.determinant() < -tol * (1.0 + m.norm())) {
    fail(name + " must be positive semidefinite");
  }
}

Scenario parse_scenario(const json& root) {
  if (!root.contains("scenario")) fail("config is missing required key \"scenario\"");
  if (!root.at("scenario").is_string()) fail("scenario must be a string");
  const std::string name = root.at("scenario").get<std::string>();
  if (name == "riccati") return Scenario::kRiccati;
  if (name == "filter") return Scenario::kFilter;
  if (name == "oracle") return Scenario::kOracle;
  if (name == "lqg") return Scenario::kLqg;
  if (name == "hjb-check") return Scenario::kHjbCheck;
  if (name == "mc") return Scenario::kMc;
  fail("unknown scenario \"" + name +
       "\" (expected riccati, filter, oracle, lqg, hjb-check, or mc)");
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kRiccati: return "riccati";
    case Scenario::kFilter: return "filter";
    case Scenario::kOracle: return "oracle";
    case Scenario::kLqg: return "lqg";
    case Scenario::kHjbCheck: return "hjb-check";
    case Scenario::kMc: return "mc";
  }
  return "?";
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(origin + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigParseError(origin + ": top level must be a JSON object");

  ScenarioConfig cfg;
  cfg.scenario = parse_scenario(root);
  const std::string scen = to_string(cfg.scenario);

  // Scenario-specific key sets: anything else is rejected outright, so a
  // config cannot carry silently ignored settings.
  std::vector<std::string> allowed = {"scenario", "params", "dt", "seed", "write_series",
                                      "out_dir"};
  std::vector<std::string> required = {"scenario", "params"};
  switch (cfg.scenario) {
    case Scenario::kRiccati:
      allowed.insert(allowed.end(), {"state0", "horizon"});
      required.insert(required.end(), {"state0", "horizon"});
      break;
    case Scenario::kFilter:
      allowed.insert(allowed.end(), {"state0", "horizon", "controls"});
      required.insert(required.end(), {"state0", "horizon"});
      break;
    case Scenario::kOracle:
      allowed.insert(allowed.end(), {"state0", "horizon", "controls", "grid"});
      required.insert(required.end(), {"state0", "horizon", "grid"});
      break;
    case Scenario::kLqg:
      allowed.insert(allowed.end(), {"cost", "t0", "x0"});
      required.insert(required.end(), {"cost", "x0"});
      break;
    case Scenario::kHjbCheck:
      allowed.insert(allowed.end(), {"cost", "t0", "n_check", "box"});
      required.insert(required.end(), {"cost"});
      break;
    case Scenario::kMc:
      allowed.insert(allowed.end(), {"cost", "t0", "x0", "n_traj", "workers"});
      required.insert(required.end(), {"cost", "x0"});
      break;
  }
  check_keys(root, "config", allowed);
  for (const auto& key : required) {
    if (!root.contains(key)) {
      fail("scenario \"" + scen + "\" is missing required key \"" + key + "\"");
    }
  }

  {
    const auto& p = root.at("params");
    if (!p.is_object()) fail("params must be an object");
    check_keys(p, "params", {"mass", "hbar", "mu", "kappa", "kappa_tilde"});
    cfg.params.mass = get_number(p, "params", "mass", 1.0);
    cfg.params.hbar = get_number(p, "params", "hbar", 1.0);
    cfg.params.mu = get_number(p, "params", "mu", 0.0);
    cfg.params.kappa = get_number(p, "params", "kappa", 0.0);
    cfg.params.kappa_tilde = get_number(p, "params", "kappa_tilde", 0.0);
  }

  if (root.contains("state0")) {
    const auto& s = root.at("state0");
    if (!s.is_object()) fail("state0 must be an object");
    check_keys(s, "state0", {"q_bar", "p_bar", "eta_re", "eta_im"});
    cfg.state0.q_bar = get_number(s, "state0", "q_bar", 0.0);
    cfg.state0.p_bar = get_number(s, "state0", "p_bar", 0.0);
    cfg.state0.eta_re = get_number(s, "state0", "eta_re", 1.0);
    cfg.state0.eta_im = get_number(s, "state0", "eta_im", 0.0);
  }

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    if (!g.is_object()) fail("grid must be an object");
    check_keys(g, "grid", {"x_min", "x_max", "n_points"});
    GridConfig gc;
    gc.x_min = require_number(g, "grid", "x_min");
    gc.x_max = require_number(g, "grid", "x_max");
    gc.n_points = get_int(g, "grid", "n_points", 1024);
    cfg.grid = gc;
  }

  if (root.contains("cost")) {
    const auto& c = root.at("cost");
    if (!c.is_object()) fail("cost must be an object");
    check_keys(c, "cost", {"A", "E", "R", "horizon"});
    CostConfig cc;
    cc.A = require_matrix(c, "cost", "A");
    cc.E = require_matrix(c, "cost", "E");
    cc.R = require_matrix(c, "cost", "R");
    cc.horizon = require_number(c, "cost", "horizon");
    cfg.cost = cc;
  }

  if (root.contains("controls")) {
    const auto& u = root.at("controls");
    if (!u.is_object()) fail("controls must be an object");
    check_keys(u, "controls", {"f", "v"});
    cfg.controls.f = get_number(u, "controls", "f", 0.0);
    cfg.controls.v = get_number(u, "controls", "v", 0.0);
  }

  if (root.contains("box")) {
    const auto& b = root.at("box");
    if (!b.is_object()) fail("box must be an object");
    check_keys(b, "box", {"q_max", "p_max"});
    cfg.box.q_max = get_number(b, "box", "q_max", 2.0);
    cfg.box.p_max = get_number(b, "box", "p_max", 2.0);
  }

  cfg.dt = get_number(root, "config", "dt", cfg.dt);
  cfg.t0 = get_number(root, "config", "t0", cfg.t0);
  cfg.horizon = get_number(root, "config", "horizon", cfg.horizon);
  if (root.contains("x0")) cfg.x0 = require_vector2(root, "config", "x0");
  cfg.n_traj = get_int(root, "config", "n_traj", cfg.n_traj);
  cfg.n_check = get_int(root, "config", "n_check", cfg.n_check);
  cfg.workers = get_int(root, "config", "workers", cfg.workers);
  cfg.write_series = get_bool(root, "config", "write_series", cfg.write_series);
  if (root.contains("seed")) {
    const auto& v = root.at("seed");
    const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
    if (!ok) fail("seed must be a nonnegative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  if (root.contains("out_dir")) {
    if (!root.at("out_dir").is_string()) fail("out_dir must be a string");
    cfg.out_dir = root.at("out_dir").get<std::string>();
  }

  // --- semantic validation -------------------------------------------------
  auto check_positive = [&](double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << name << " must be positive (got " << v << ")";
      fail(os.str());
    }
  };

  check_positive(cfg.params.mass, "params.mass");
  check_positive(cfg.params.hbar, "params.hbar");
  if (!std::isfinite(cfg.params.mu)) fail("params.mu must be finite");
  if (!(cfg.params.kappa >= 0.0) || !std::isfinite(cfg.params.kappa)) {
    fail("params.kappa must be >= 0");
  }
  if (!(cfg.params.kappa_tilde >= 0.0) || !std::isfinite(cfg.params.kappa_tilde)) {
    fail("params.kappa_tilde must be >= 0");
  }
  check_positive(cfg.dt, "dt");

  if (root.contains("state0")) {
    if (!(cfg.state0.eta_re > kEtaReFloor)) {
      std::ostringstream os;
      os << "state0.eta_re must be greater than 1e-12 (got " << cfg.state0.eta_re << ")";
      fail(os.str());
    }
    if (!std::isfinite(cfg.state0.eta_im) || !std::isfinite(cfg.state0.q_bar) ||
        !std::isfinite(cfg.state0.p_bar)) {
      fail("state0 fields must be finite");
    }
  }

  const bool needs_fixed_point = cfg.scenario == Scenario::kRiccati ||
                                 cfg.scenario == Scenario::kLqg ||
                                 cfg.scenario == Scenario::kHjbCheck ||
                                 cfg.scenario == Scenario::kMc;
  if (needs_fixed_point && cfg.params.kappa == 0.0 && cfg.params.mu == 0.0) {
    fail("scenario \"" + scen +
         "\" needs the covariance fixed point: set params.kappa > 0 or params.mu != 0");
  }

  switch (cfg.scenario) {
    case Scenario::kRiccati:
    case Scenario::kFilter:
    case Scenario::kOracle:
      check_positive(cfg.horizon, "horizon");
      break;
    default:
      break;
  }

  if (cfg.grid) {
    if (!(cfg.grid->x_max > cfg.grid->x_min)) fail("grid.x_max must exceed grid.x_min");
    if (!is_power_of_two(cfg.grid->n_points) || cfg.grid->n_points < 256) {
      fail("grid.n_points must be a power of two, at least 256");
    }
  }

  if (cfg.cost) {
    check_psd(cfg.cost->A, "cost.A");
    check_symmetric(cfg.cost->E, "cost.E");
    if (!(cfg.cost->E(0, 0) > 0.0) || !(cfg.cost->E.determinant() > 0.0)) {
      fail("cost.E must be positive definite");
    }
    check_psd(cfg.cost->R, "cost.R");
    if (!(cfg.cost->horizon > cfg.t0)) fail("cost.horizon must exceed t0");
    const double steps = (cfg.cost->horizon - cfg.t0) / cfg.dt;
    if (steps < 4.0) fail("dt too coarse: need at least 4 steps between t0 and cost.horizon");
  }

  if (cfg.scenario == Scenario::kMc && cfg.n_traj < 2) fail("n_traj must be >= 2");
  if (cfg.workers < 1) fail("workers must be >= 1");
  if (cfg.scenario == Scenario::kHjbCheck) {
    if (cfg.n_check < 1) fail("n_check must be >= 1");
    if (!(cfg.box.q_max > 0.0) || !(cfg.box.p_max > 0.0)) {
      fail("box.q_max and box.p_max must be positive");
    }
  }
  if (cfg.out_dir.empty()) fail("out_dir must not be empty");

  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ConfigParseError("cannot read config file: " + path);
  return parse_config(buf.str(), path);
}

}  // namespace qfc::cli
