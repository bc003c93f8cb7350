#include "locpower/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "locpower/harness.hpp"
#include "locpower/robust.hpp"
#include "locpower/solver.hpp"

namespace locpower {

namespace {

using nlohmann::json;

Metric parse_metric(const std::string& m) {
  if (m == "speb") return Metric::speb;
  if (m == "mdpeb") return Metric::mdpeb;
  throw InvalidInput("unknown metric '" + m + "'");
}

json allocation_json(const PowerAllocation& x) {
  json rows = json::array();
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(k, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
}

struct SolveArgs {
  std::string scenario;
  std::string objective = "speb";
  std::string metric = "speb";
  std::vector<double> gamma;
  std::string output;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const Scenario s = read_scenario_file(a.scenario);
  const ObjectiveKind kind = parse_objective_kind(a.objective);
  const Metric metric = parse_metric(a.metric);
  SolveReport rep;
  if (kind == ObjectiveKind::total_power) {
    if (a.gamma.empty()) throw InvalidInput("energy objective needs --gamma");
    QosTargets q;
    if (a.gamma.size() == 1) {
      q.gamma = Eigen::VectorXd::Constant(s.n_agents(), a.gamma[0]);
    } else {
      q.gamma = Eigen::Map<const Eigen::VectorXd>(a.gamma.data(), static_cast<Eigen::Index>(a.gamma.size()));
    }
    rep = solve_energy_min(s, q, metric, {});
  } else {
    rep = solve(s, kind, FeasibleSet::from(s), {}, metric);
  }
  json j;
  j["objective_kind"] = to_string(kind);
  j["status"] = to_string(rep.status);
  j["objective"] = std::isfinite(rep.objective) ? json(rep.objective) : json(nullptr);
  j["allocation"] = allocation_json(rep.allocation);
  j["kkt_residual"] = rep.kkt_residual;
  j["iterations"] = rep.iterations;
  emit(j.dump(2) + "\n", a.output, out);
  return rep.status == SolveStatus::optimal ? 0 : 1;
}

struct ExperimentArgs {
  std::string experiment;
  int trials = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> schemes;
  std::vector<double> eps;
  std::vector<int> anchors;
  std::vector<int> agents;
  int threads = 0;
  std::string output;
};

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  ExperimentConfig c;
  c.experiment = parse_experiment(a.experiment);
  c.trials = a.trials;
  c.seed = a.seed;
  for (const auto& s : a.schemes) c.schemes.push_back(parse_scheme(s));
  c.eps = a.eps;
  c.anchors = a.anchors;
  c.agents = a.agents;
  c.threads = a.threads;
  emit(to_csv(run_experiment(c)), a.output, out);
  return 0;
}

struct OracleArgs {
  std::string scenario;
  std::string objective = "speb";
  std::string metric = "speb";
  double step = 1e-3;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const Scenario s = read_scenario_file(a.scenario);
  const ObjectiveKind kind = parse_objective_kind(a.objective);
  const Metric metric = parse_metric(a.metric);
  const OracleResult o = oracle_grid(s, kind, a.step, metric);
  const SolveReport r = solve(s, kind, FeasibleSet::from(s), {}, metric);
  const bool agree = r.status == SolveStatus::optimal && r.objective <= o.objective * (1 + 1e-9);
  char buf[256];
  std::snprintf(buf, sizeof buf, "solver,%.17g,%s\noracle,%.17g,evaluated=%ld\n", r.objective,
                to_string(r.status).c_str(), o.objective, o.evaluated);
  out << buf << (agree ? "agree\n" : "disagree\n");
  return agree ? 0 : 1;
}

int cmd_roots(const std::vector<double>& ratios, std::ostream& out) {
  out << "ratio,delta_max\n";
  for (double r : ratios) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%g,%.6f\n", r, delta_max(r));
    out << buf;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power allocation for anchor-based localization"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve_cmd = app.add_subcommand("solve", "Optimal allocation for a scenario JSON");
  solve_cmd->add_option("--scenario", sa.scenario, "Scenario JSON file")->required();
  solve_cmd->add_option("--objective", sa.objective, "speb, mdpeb, robust-speb, robust-mdpeb, energy, minmax");
  solve_cmd->add_option("--metric", sa.metric, "speb or mdpeb (energy, minmax)");
  solve_cmd->add_option("--gamma", sa.gamma, "Per-agent QoS targets (energy)")->delimiter(',');
  solve_cmd->add_option("--output", sa.output, "Allocation JSON path (default stdout)");

  ExperimentArgs ea;
  auto* exp_cmd = app.add_subcommand("experiment", "Monte-Carlo experiment to CSV");
  exp_cmd->add_option("--experiment", ea.experiment, "fig3, fig5, fig6, fig7 or full name")->required();
  exp_cmd->add_option("--trials", ea.trials, "Deployments per sweep value");
  exp_cmd->add_option("--seed", ea.seed, "Master seed");
  exp_cmd->add_option("--schemes", ea.schemes, "Comma-separated schemes")->delimiter(',');
  exp_cmd->add_option("--eps", ea.eps, "Normalized uncertainty value(s)")->delimiter(',');
  exp_cmd->add_option("--anchors", ea.anchors, "Anchor count(s)")->delimiter(',');
  exp_cmd->add_option("--agents", ea.agents, "Agent count(s)")->delimiter(',');
  exp_cmd->add_option("--threads", ea.threads, "Worker threads (0: all cores)");
  exp_cmd->add_option("--output", ea.output, "CSV path (default stdout)");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Cross-check the solver against grid search");
  oracle_cmd->add_option("--scenario", oa.scenario, "Scenario JSON file")->required();
  oracle_cmd->add_option("--objective", oa.objective, "Objective kind");
  oracle_cmd->add_option("--metric", oa.metric, "speb or mdpeb (minmax)");
  oracle_cmd->add_option("--step", oa.step, "Grid step");

  std::vector<double> ratios{1.0, 5.0};
  auto* roots_cmd = app.add_subcommand("roots", "delta_max table");
  roots_cmd->add_option("--ratios", ratios, "zeta_max / zeta_min values")->delimiter(',');

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (*solve_cmd) return cmd_solve(sa, out);
    if (*exp_cmd) return cmd_experiment(ea, out);
    if (*oracle_cmd) return cmd_oracle(oa, out);
    if (*roots_cmd) return cmd_roots(ratios, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace locpower
