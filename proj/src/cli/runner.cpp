#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "qfc/errors.hpp"
#include "qfc/filter.hpp"
#include "qfc/grid.hpp"
#include "qfc/lqg.hpp"
#include "qfc/noise.hpp"
#include "qfc/report.hpp"
#include "qfc/riccati.hpp"
#include "qfc/sse.hpp"
#include "qfc/version.hpp"

namespace qfc::cli {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::filesystem::path prepare_out_dir(const ScenarioConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

double uniform_unit(std::mt19937_64& rng) {
  // Same bit-stable mapping as the noise module: top 53 bits into (0, 1].
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

json run_riccati(const ScenarioConfig& cfg) {
  const auto eta_inf = eta_fixed_point(cfg.params);
  const TimeGrid grid = TimeGrid::with_step(0.0, cfg.horizon, cfg.dt);
  const RiccatiTrajectory traj = integrate_riccati(cfg.state0.eta(), cfg.params, grid);
  const double rate = fit_relaxation_rate(traj, eta_inf);

  double min_eta_re = traj.eta.front().real();
  for (const auto& e : traj.eta) min_eta_re = std::min(min_eta_re, e.real());

  if (cfg.write_series) {
    auto out = open_output(prepare_out_dir(cfg) / "riccati_series.csv");
    out << "t,eta_re,eta_im\n";
    char line[128];
    for (int k = 0; k <= grid.n_steps; ++k) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", grid.time(k),
                    traj.eta[k].real(), traj.eta[k].imag());
      out << line;
    }
  }

  json results;
  results["dt_actual"] = grid.dt;
  results["n_steps"] = grid.n_steps;
  results["eta_inf_re"] = eta_inf.real();
  results["eta_inf_im"] = eta_inf.imag();
  results["eta_final_re"] = traj.eta.back().real();
  results["eta_final_im"] = traj.eta.back().imag();
  results["final_error"] = std::abs(traj.eta.back() - eta_inf);
  results["min_eta_re"] = min_eta_re;
  if (std::isnan(rate)) {
    results["relaxation_rate"] = nullptr;
  } else {
    results["relaxation_rate"] = rate;
  }
  return results;
}

json run_filter(const ScenarioConfig& cfg) {
  const TimeGrid grid = TimeGrid::with_step(0.0, cfg.horizon, cfg.dt);
  const NoisePath noise = make_noise_path(cfg.seed, grid.dt, grid.n_steps);
  const FilterTrajectory traj =
      propagate_filter(cfg.state0, cfg.params, constant_policy(cfg.controls), noise);

  double max_q = 0.0, max_p = 0.0;
  for (const auto& s : traj.states) {
    max_q = std::max(max_q, std::abs(s.q_bar));
    max_p = std::max(max_p, std::abs(s.p_bar));
  }

  if (cfg.write_series) {
    auto out = open_output(prepare_out_dir(cfg) / "filter_trajectory.csv");
    write_trajectory_csv(out, traj);
  }

  const auto& last = traj.states.back();
  json results;
  results["dt_actual"] = grid.dt;
  results["n_steps"] = grid.n_steps;
  results["q_bar_final"] = last.q_bar;
  results["p_bar_final"] = last.p_bar;
  results["eta_re_final"] = last.eta_re;
  results["eta_im_final"] = last.eta_im;
  results["max_abs_q_bar"] = max_q;
  results["max_abs_p_bar"] = max_p;
  return results;
}

json run_oracle(const ScenarioConfig& cfg) {
  const GridSpec grid(cfg.grid->x_min, cfg.grid->x_max, cfg.grid->n_points);
  const TimeGrid tgrid = TimeGrid::with_step(0.0, cfg.horizon, cfg.dt);
  const NoisePath noise = make_noise_path(cfg.seed, tgrid.dt, tgrid.n_steps);
  OracleOptions opts;
  opts.keep_series = cfg.write_series;
  const ComparisonReport report = run_oracle_comparison(
      cfg.state0, cfg.params, constant_policy(cfg.controls), noise, grid, opts);

  if (cfg.write_series) {
    auto out = open_output(prepare_out_dir(cfg) / "oracle_series.csv");
    write_comparison_csv(out, report);
  }
  return comparison_to_json(report, false);
}

struct LqgSetup {
  QuadraticCost cost;
  LinearDynamics dyn;
  TimeGrid grid;
  ValueFunction vf;
  std::complex<double> eta_inf;
  DiffusionMatrixK K;
};

LqgSetup build_lqg(const ScenarioConfig& cfg) {
  const auto& cc = *cfg.cost;
  LqgSetup s{QuadraticCost::constant(cc.A, cc.E, cc.R, cc.horizon),
             LinearDynamics::from_params(cfg.params),
             TimeGrid::with_step(cfg.t0, cc.horizon, cfg.dt),
             {},
             eta_fixed_point(cfg.params),
             {}};
  s.vf = build_value_function(cfg.params, s.cost, s.dyn, s.grid);
  s.K = diffusion_matrix_K(cfg.params, s.eta_inf);
  return s;
}

void write_value_csv(const ScenarioConfig& cfg, const LqgSetup& s) {
  auto out = open_output(prepare_out_dir(cfg) / "lqg_value.csv");
  out << "t,sigma_qq,sigma_qp,sigma_pp,a\n";
  char line[192];
  for (int k = 0; k <= s.grid.n_steps; ++k) {
    const auto& sig = s.vf.sigma[k];
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.grid.time(k),
                  sig(0, 0), sig(0, 1), sig(1, 1), s.vf.a[k]);
    out << line;
  }
}

json lqg_common_results(const ScenarioConfig& cfg, const LqgSetup& s) {
  json results;
  results["dt_actual"] = s.grid.dt;
  results["n_steps"] = s.grid.n_steps;
  results["eta_inf_re"] = s.eta_inf.real();
  results["eta_inf_im"] = s.eta_inf.imag();
  results["K_qq"] = s.K.matrix(0, 0);
  results["K_qp"] = s.K.matrix(0, 1);
  results["K_pp"] = s.K.matrix(1, 1);
  results["sigma_t0_qq"] = s.vf.sigma[0](0, 0);
  results["sigma_t0_qp"] = s.vf.sigma[0](0, 1);
  results["sigma_t0_pp"] = s.vf.sigma[0](1, 1);
  results["a_t0"] = s.vf.a[0];
  return results;
}

json run_lqg(const ScenarioConfig& cfg) {
  const LqgSetup s = build_lqg(cfg);
  if (cfg.write_series) write_value_csv(cfg, s);
  json results = lqg_common_results(cfg, s);
  results["x0"] = {cfg.x0(0), cfg.x0(1)};
  results["value_S"] = s.vf.value(cfg.t0, cfg.x0);
  const Controls u0 = lqg_policy(s.vf, s.cost, s.dyn)(cfg.t0, ExtendedCoherentState{
      cfg.x0(0), cfg.x0(1), s.eta_inf.real(), s.eta_inf.imag()});
  results["u0_f"] = u0.f;
  results["u0_v"] = u0.v;
  return results;
}

json run_hjb_check(const ScenarioConfig& cfg) {
  const LqgSetup s = build_lqg(cfg);
  std::mt19937_64 rng(cfg.seed);
  // Keep spots two nodes clear of either end so the residual uses the
  // fourth-order interior stencil.
  const double t_lo = s.grid.time(2);
  const double t_hi = s.grid.time(s.grid.n_steps - 2);

  double max_abs = 0.0, max_norm = 0.0;
  for (int i = 0; i < cfg.n_check; ++i) {
    const double t = t_lo + (t_hi - t_lo) * uniform_unit(rng);
    const double q = cfg.box.q_max * (2.0 * uniform_unit(rng) - 1.0);
    const double p = cfg.box.p_max * (2.0 * uniform_unit(rng) - 1.0);
    const Eigen::Vector2d x(q, p);
    const double res = std::abs(hjb_residual(t, x, s.vf, s.cost, s.dyn, s.K));
    const double val = s.vf.value(s.grid.time(s.vf.nearest_node(t)), x);
    max_abs = std::max(max_abs, res);
    max_norm = std::max(max_norm, res / (1.0 + std::abs(val)));
  }

  if (cfg.write_series) write_value_csv(cfg, s);
  json results = lqg_common_results(cfg, s);
  results["n_check"] = cfg.n_check;
  results["box_q_max"] = cfg.box.q_max;
  results["box_p_max"] = cfg.box.p_max;
  results["max_abs_residual"] = max_abs;
  results["max_normalized_residual"] = max_norm;
  return results;
}

json run_mc(const ScenarioConfig& cfg) {
  const LqgSetup s = build_lqg(cfg);
  MonteCarloOptions opts;
  opts.n_traj = cfg.n_traj;
  opts.dt = cfg.dt;
  opts.master_seed = cfg.seed;
  opts.workers = cfg.workers;
  const ExtendedCoherentState state0{cfg.x0(0), cfg.x0(1), s.eta_inf.real(), s.eta_inf.imag()};
  const MonteCarloResult mc = monte_carlo_value(state0, cfg.params, s.cost, s.dyn, s.vf, opts);
  const double value = s.vf.value(cfg.t0, cfg.x0);

  if (cfg.write_series) {
    auto out = open_output(prepare_out_dir(cfg) / "mc_costs.csv");
    out << "path,cost\n";
    char line[64];
    for (std::size_t i = 0; i < mc.cost.size(); ++i) {
      std::snprintf(line, sizeof line, "%zu,%.17g\n", i, mc.cost[i]);
      out << line;
    }
  }

  json results = lqg_common_results(cfg, s);
  results["x0"] = {cfg.x0(0), cfg.x0(1)};
  results["n_traj"] = cfg.n_traj;
  results["value_S"] = value;
  results["mc_mean"] = mc.mean_cost;
  results["mc_std_error"] = mc.std_error;
  results["abs_diff"] = std::abs(mc.mean_cost - value);
  return results;
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.scenario = to_string(cfg.scenario);
  summary.seed = cfg.seed;
  summary.dt = cfg.dt;
  switch (cfg.scenario) {
    case Scenario::kRiccati: summary.results = run_riccati(cfg); break;
    case Scenario::kFilter: summary.results = run_filter(cfg); break;
    case Scenario::kOracle: summary.results = run_oracle(cfg); break;
    case Scenario::kLqg: summary.results = run_lqg(cfg); break;
    case Scenario::kHjbCheck: summary.results = run_hjb_check(cfg); break;
    case Scenario::kMc: summary.results = run_mc(cfg); break;
  }
  summary.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

json summary_to_json(const RunSummary& summary) {
  json j;
  j["scenario"] = summary.scenario;
  j["version"] = kVersion;
  j["seed"] = summary.seed;
  j["dt"] = summary.dt;
  j["results"] = summary.results;
  j["wall_clock_s"] = summary.wall_clock_s;
  return j;
}

std::string write_summary(const ScenarioConfig& cfg, const RunSummary& summary) {
  const auto path = prepare_out_dir(cfg) / (summary.scenario + "_summary.json");
  auto out = open_output(path);
  out << summary_to_json(summary).dump(2) << "\n";
  if (!out) throw IoError("failed while writing " + path.string());
  return path.string();
}

int cli_main(int argc, char** argv) {
  CLI::App app{"continuous position/momentum monitoring: filter, grid oracle, LQG control"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  int workers_override = 0;
  bool have_seed = false;

  auto* run = app.add_subcommand("run", "run a scenario described by a JSON config");
  run->add_option("--config", config_path, "path to the JSON config")->required();
  run->add_option("--seed", seed_override, "override the config's seed")
      ->each([&](const std::string&) { have_seed = true; });
  run->add_option("--out", out_override, "override the config's output directory");
  run->add_option("--workers", workers_override, "override the config's worker count");

  auto* validate = app.add_subcommand("validate", "parse and validate a config, then exit");
  validate->add_option("--config", config_path, "path to the JSON config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  try {
    ScenarioConfig cfg = load_config(config_path);
    if (validate->parsed()) {
      std::cout << "config OK: scenario=" << to_string(cfg.scenario) << "\n";
      return 0;
    }
    if (have_seed) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (workers_override > 0) cfg.workers = workers_override;

    const RunSummary summary = run_scenario(cfg);
    const std::string path = write_summary(cfg, summary);
    std::cout << "wrote " << path << "\n";
    return 0;
  } catch (const ConfigParseError& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigValidationError& e) {
    std::cerr << "config validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qfc::cli
