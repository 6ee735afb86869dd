#include "qfc/report.hpp"

namespace qfc {

namespace {

nlohmann::json moments_to_json(const GridMoments& m) {
  return {{"q_mean", m.q_mean},
          {"p_mean", m.p_mean},
          {"c_qq", m.c_qq},
          {"c_qp", m.c_qp},
          {"c_pp", m.c_pp}};
}

nlohmann::json series_to_json(const MomentSeries& s) {
  return {{"t", s.t},     {"q_mean", s.q_mean}, {"p_mean", s.p_mean},
          {"c_qq", s.c_qq}, {"c_qp", s.c_qp},     {"c_pp", s.c_pp}};
}

}  // namespace

nlohmann::json comparison_to_json(const ComparisonReport& report, bool include_series) {
  nlohmann::json j;
  j["params"] = {{"mass", report.params.mass},
                 {"hbar", report.params.hbar},
                 {"mu", report.params.mu},
                 {"kappa", report.params.kappa},
                 {"kappa_tilde", report.params.kappa_tilde}};
  j["grid"] = {{"x_min", report.grid.x_min},
               {"x_max", report.grid.x_max},
               {"n_points", report.grid.n_points}};
  j["seed"] = report.seed;
  j["dt"] = report.dt;
  j["n_steps"] = report.n_steps;
  j["min_fidelity"] = report.min_fidelity;
  j["final_fidelity"] = report.final_fidelity;
  j["max_abs_deviation"] = moments_to_json(report.max_abs_deviation);
  j["deviation_scale"] = moments_to_json(report.deviation_scale);
  j["rel_deviation"] = moments_to_json(report.rel_deviation);
  j["max_rel_deviation"] = report.max_rel_deviation;
  if (include_series) {
    j["grid_series"] = series_to_json(report.grid_series);
    j["filter_series"] = series_to_json(report.filter_series);
    j["fidelity_t"] = report.fidelity_t;
    j["fidelity"] = report.fidelity_series;
  }
  return j;
}

}  // namespace qfc
