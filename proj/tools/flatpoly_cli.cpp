// flatpoly: delta table, one-shot trajectory solve, PMSM closed-loop traces.
//
// Exit codes: 0 ok, 1 infeasible / no optimum, 2 bad flags or model,
// 3 cost not positive definite.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flatpoly/config.hpp"
#include "flatpoly/csv.hpp"
#include "flatpoly/errors.hpp"
#include "flatpoly/pipeline.hpp"
#include "flatpoly/pmsm.hpp"

namespace fs = std::filesystem;
using namespace flatpoly;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInfeasible = 1, kBadInput = 2, kNotPd = 3 };

constexpr int kTrajectorySamples = 200;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("flatpoly");
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("FLATPOLY_LOG");
  const std::string level = env ? env : "warn";
  if (level == "off") {
    logger->set_level(spdlog::level::off);
  } else if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else if (level == "info") {
    logger->set_level(spdlog::level::info);
  } else {
    logger->set_level(spdlog::level::warn);
  }
  spdlog::set_default_logger(logger);
}

std::vector<SolverKind> solver_list(const std::string& s) {
  if (s == "qp") return {SolverKind::QP};
  if (s == "lp") return {SolverKind::LP};
  return {SolverKind::QP, SolverKind::LP};
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

int cmd_delta(int max_n) {
  for (int n = 1; n <= max_n; ++n) {
    std::cout << n << ", " << format_fixed(compute_delta(n), 4) << '\n';
  }
  return kOk;
}

json result_json(const SolveResult& r, const TrajectoryPlan& plan) {
  json j = {
      {"solver", to_string(r.solver)},
      {"status", to_string(r.status)},
      {"iterations", r.iterations},
      {"quadratic_cost", r.quadratic_cost},
      {"alpha", to_json(r.alpha)},
      {"active_rows", r.active_rows},
  };
  if (plan.constraint_rows.rows() > 0 && r.alpha.size() == plan.constraint_rows.G.cols()) {
    const Vector g = plan.constraint_rows.G * r.alpha - plan.constraint_rows.h;
    j["max_constraint_row"] = g.maxCoeff();
  }
  return j;
}

void write_trajectory_csv(const fs::path& path, const TrajectoryPlan& plan, const Vector& alpha) {
  auto out = open_out(path);
  CsvWriter w(out);
  const auto n = plan.polys.states.size();
  const auto m = plan.polys.inputs.size();
  std::vector<std::string> names{"t"};
  for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
  for (int i = 1; i <= m; ++i) names.push_back("u" + std::to_string(i));
  w.header(names);
  const double T = plan.basis.horizon;
  for (int s = 0; s < kTrajectorySamples; ++s) {
    const double t = T * static_cast<double>(s) / (kTrajectorySamples - 1);
    const Vector x = plan.state(alpha, t);
    const Vector u = plan.input(alpha, t);
    w.field(t);
    for (Eigen::Index i = 0; i < x.size(); ++i) w.field(x(i));
    for (Eigen::Index i = 0; i < u.size(); ++i) w.field(u(i));
    w.end_row();
  }
}

int cmd_solve(const std::string& model_path, const std::string& solver, const std::string& out_path) {
  const ModelConfig model = parse_model(read_json(model_path));
  const TrajectoryPlan plan = condition_problem(model);

  std::vector<SolveResult> results;
  for (const auto kind : solver_list(solver)) results.push_back(solve_plan(plan, kind));

  json doc;
  if (results.size() == 1) {
    doc = result_json(results[0], plan);
  } else {
    doc["solver"] = "both";
    doc["qp"] = result_json(results[0], plan);
    doc["lp"] = result_json(results[1], plan);
    if (results[0].optimal() && results[1].optimal()) {
      const auto rep = suboptimality_report(results[0], results[1], plan.cost);
      doc["suboptimality"] = {
          {"j_lp", rep.j_lp}, {"j0", rep.j0}, {"j_qp", rep.j_c}, {"bound", rep.bound}, {"holds", rep.holds}};
    }
  }
  doc["n_free"] = plan.cost.n_free();
  doc["delta"] = plan.delta;
  doc["model"] = model_to_json(model);

  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    const fs::path out(out_path);
    auto f = open_out(out);
    f << doc.dump(2) << '\n';
    for (const auto& r : results) {
      if (!r.optimal()) continue;
      fs::path csv = out;
      csv.replace_filename(out.stem().string() + "-" + std::string(to_string(r.solver)) + ".csv");
      write_trajectory_csv(csv, plan, r.alpha);
    }
  }

  for (const auto& r : results) {
    if (!r.optimal()) {
      std::cerr << "error: " << to_string(r.solver) << " solve ended with status " << to_string(r.status) << '\n';
      return kInfeasible;
    }
  }
  return kOk;
}

struct TraceSummary {
  int worst_iterations = 0;
  long violations = 0;
  long fallbacks = 0;
  double peak_abs_id = 0.0;
};

TraceSummary summarize(const std::vector<pmsm::TraceRow>& trace, const pmsm::PmsmParams& p) {
  TraceSummary s;
  for (const auto& r : trace) {
    s.worst_iterations = std::max(s.worst_iterations, r.iterations);
    if (pmsm::polytope_violation(p, r.i_d, r.i_q, r.v_d, r.v_q) > 1e-6) ++s.violations;
    if (r.status.rfind("fallback", 0) == 0) ++s.fallbacks;
    s.peak_abs_id = std::max(s.peak_abs_id, std::abs(r.i_d));
  }
  return s;
}

int cmd_simulate(const std::string& scenario_path, const std::string& solver, const std::string& prefix) {
  const pmsm::Scenario scenario = scenario_path.empty() ? pmsm::Scenario{} : parse_scenario(read_json(scenario_path));
  scenario.validate();
  const auto kinds = solver_list(solver);

  std::vector<std::future<std::vector<pmsm::TraceRow>>> runs;
  for (const auto kind : kinds) {
    runs.push_back(std::async(std::launch::async, [&scenario, kind] { return pmsm::run_closed_loop(scenario, kind); }));
  }

  std::cout << "solver, samples, worst_iterations, violations, fallbacks, peak_abs_id\n";
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const auto trace = runs[i].get();
    auto out = open_out(prefix + "-" + std::string(to_string(kinds[i])) + ".csv");
    write_trace_csv(out, trace);
    const auto s = summarize(trace, scenario.machine);
    std::cout << to_string(kinds[i]) << ", " << trace.size() << ", " << s.worst_iterations << ", " << s.violations
              << ", " << s.fallbacks << ", " << format_fixed(s.peak_abs_id, 4) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Flatness-based polynomial trajectory generation"};
  app.require_subcommand(1);

  int max_n = 10;
  auto* delta = app.add_subcommand("delta", "Print the sample-constraint shift table");
  delta->add_option("--max-n", max_n, "Largest degree, 1..15")->check(CLI::Range(1, static_cast<int>(kMaxDegree)));

  std::string model_path, solver = "qp", out_path;
  auto* solve = app.add_subcommand("solve", "Solve one trajectory problem from a JSON model");
  solve->add_option("--model", model_path, "Model JSON file")->required();
  solve->add_option("--solver", solver, "qp, lp or both")->check(CLI::IsMember({"qp", "lp", "both"}));
  solve->add_option("--out", out_path, "Solution JSON path; trajectories go next to it as <stem>-<solver>.csv");

  std::string scenario_path, sim_solver = "both", prefix = "pmsm";
  auto* sim = app.add_subcommand("simulate-pmsm", "Closed-loop PMSM torque control");
  sim->add_option("--scenario", scenario_path, "Scenario JSON file (defaults if omitted)");
  sim->add_option("--solver", sim_solver, "qp, lp or both")->check(CLI::IsMember({"qp", "lp", "both"}));
  sim->add_option("--out", prefix, "Output prefix; writes <prefix>-qp.csv / <prefix>-lp.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  try {
    if (*delta) return cmd_delta(max_n);
    if (*solve) return cmd_solve(model_path, solver, out_path);
    if (*sim) return cmd_simulate(scenario_path, sim_solver, prefix);
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotPd;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
