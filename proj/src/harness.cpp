#include "locpower/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <thread>
#include <tuple>

#include "locpower/fim.hpp"
#include "locpower/random.hpp"
#include "locpower/robust.hpp"
#include "locpower/solver.hpp"
#include "locpower/twostage.hpp"

namespace locpower {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_robust(Experiment e) {
  return e == Experiment::fig6_robust_anchors || e == Experiment::fig7_robust_epsilon;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct Trial {
  Scenario nominal;
  Scenario robust;
  std::optional<Scenario> truth;  // robust experiments only
};

Trial make_trial(const ExperimentConfig& c, std::size_t sweep_index, int trial) {
  const double region = 20.0;
  ScenarioConfig sc;
  sc.region_side = region;
  sc.seed = c.seed;
  sc.stream = static_cast<std::uint64_t>(trial);
  sc.substream = static_cast<std::uint32_t>(sweep_index);
  std::optional<double> eps_d;
  switch (c.experiment) {
    case Experiment::fig3_anchors_sweep:
      sc.with_placement(Placement::center_agent);
      sc.n_agents = 1;
      sc.n_anchors = c.anchors[sweep_index];
      break;
    case Experiment::fig5_agents_sweep:
      sc.with_placement(Placement::fixed_circle);
      sc.n_agents = c.agents[sweep_index];
      sc.n_anchors = c.anchors.front();
      break;
    case Experiment::fig6_robust_anchors:
      sc.with_placement(Placement::center_agent);
      sc.n_agents = 1;
      sc.n_anchors = c.anchors[sweep_index];
      eps_d = disc_radius_from_normalized(c.eps.front(), region);
      break;
    case Experiment::fig7_robust_epsilon:
      sc.with_placement(Placement::fixed_circle);
      sc.n_agents = 1;
      sc.n_anchors = c.anchors.front();
      eps_d = disc_radius_from_normalized(c.eps[sweep_index], region);
      break;
  }
  sc.eps_d = eps_d;

  NetworkDraw net = draw_network(sc);
  Eigen::MatrixXd xi = path_loss_channel(net.agents, net.anchors, net.zeta, sc.channel.beta);
  Scenario nominal(net.agents, net.anchors, std::move(xi), sc.p_total);
  if (!eps_d) return {nominal, nominal, std::nullopt};

  Scenario robust = nominal.with_uncertainty(UncertaintyModel::from_position_disc(nominal.distances(), *eps_d));
  Philox4x32 eng(c.seed, sc.stream, sc.substream | 0x80000000u);
  std::vector<Position> truth_agents;
  for (const auto& p : net.agents) truth_agents.push_back(uniform_in_disc(eng, p, *eps_d));
  Eigen::MatrixXd xi_true = path_loss_channel(truth_agents, net.anchors, net.zeta, sc.channel.beta);
  Scenario truth(std::move(truth_agents), net.anchors, std::move(xi_true), sc.p_total);
  return {std::move(nominal), std::move(robust), std::move(truth)};
}

SolveReport run_scheme(Scheme scheme, const Trial& t) {
  const auto set = FeasibleSet::from(t.nominal);
  switch (scheme) {
    case Scheme::speb:
      return solve_speb(t.nominal, set);
    case Scheme::mdpeb:
      return solve_mdpeb(t.nominal, set);
    case Scheme::robust_speb:
      return solve_robust_speb(t.robust, set);
    case Scheme::robust_mdpeb:
      return solve_robust_mdpeb(t.robust, set);
    case Scheme::two_stage_speb:
      return algorithm1(t.robust, StageMode::speb);
    case Scheme::two_stage_mdpeb:
      return algorithm1(t.robust, StageMode::mdpeb);
    case Scheme::uniform:
      break;
  }
  SolveReport r;
  r.allocation = uniform_allocation(t.nominal);
  r.status = SolveStatus::optimal;
  return r;
}

std::vector<ResultRow> run_trial(const ExperimentConfig& c, std::size_t sweep_index, int trial) {
  const std::string name = to_string(c.experiment);
  double sweep = 0;
  switch (c.experiment) {
    case Experiment::fig3_anchors_sweep:
    case Experiment::fig6_robust_anchors:
      sweep = c.anchors[sweep_index];
      break;
    case Experiment::fig5_agents_sweep:
      sweep = c.agents[sweep_index];
      break;
    case Experiment::fig7_robust_epsilon:
      sweep = c.eps[sweep_index];
      break;
  }

  std::vector<ResultRow> rows;
  std::optional<Trial> t;
  std::string setup_error;
  try {
    t = make_trial(c, sweep_index, trial);
  } catch (const std::exception&) {
    setup_error = "error";
  }
  for (Scheme scheme : c.schemes) {
    ResultRow row{name, sweep, to_string(scheme), trial, kNaN, setup_error};
    if (t) {
      try {
        const SolveReport rep = run_scheme(scheme, *t);
        row.status = scheme == Scheme::uniform ? "ok" : to_string(rep.status);
        if (rep.status == SolveStatus::optimal) {
          const Scenario& eval = t->truth ? *t->truth : t->nominal;
          row.objective = total_speb(eval, rep.allocation);
          if (c.experiment == Experiment::fig5_agents_sweep) row.objective /= eval.n_agents();
        }
      } catch (const std::exception&) {
        row.status = "error";
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t sweep_size(const ExperimentConfig& c) {
  switch (c.experiment) {
    case Experiment::fig3_anchors_sweep:
    case Experiment::fig6_robust_anchors:
      return c.anchors.size();
    case Experiment::fig5_agents_sweep:
      return c.agents.size();
    case Experiment::fig7_robust_epsilon:
      return c.eps.size();
  }
  return 0;
}

bool included(const ResultRow& r) {
  return (r.status == "optimal" || r.status == "ok") && std::isfinite(r.objective);
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::fig3_anchors_sweep:
      return "fig3-anchors-sweep";
    case Experiment::fig5_agents_sweep:
      return "fig5-agents-sweep";
    case Experiment::fig6_robust_anchors:
      return "fig6-robust-anchors";
    case Experiment::fig7_robust_epsilon:
      return "fig7-robust-epsilon";
  }
  return "unknown";
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::speb:
      return "speb";
    case Scheme::mdpeb:
      return "mdpeb";
    case Scheme::robust_speb:
      return "robust-speb";
    case Scheme::robust_mdpeb:
      return "robust-mdpeb";
    case Scheme::uniform:
      return "uniform";
    case Scheme::two_stage_speb:
      return "two-stage-speb";
    case Scheme::two_stage_mdpeb:
      return "two-stage-mdpeb";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::fig3_anchors_sweep, Experiment::fig5_agents_sweep, Experiment::fig6_robust_anchors,
                 Experiment::fig7_robust_epsilon}) {
    const std::string full = to_string(e);
    if (name == full || name == full.substr(0, 4)) return e;
  }
  throw InvalidInput("unknown experiment '" + name + "'");
}

Scheme parse_scheme(const std::string& name) {
  for (auto s : {Scheme::speb, Scheme::mdpeb, Scheme::robust_speb, Scheme::robust_mdpeb, Scheme::uniform,
                 Scheme::two_stage_speb, Scheme::two_stage_mdpeb})
    if (name == to_string(s)) return s;
  throw InvalidInput("unknown scheme '" + name + "'");
}

ExperimentConfig resolved(ExperimentConfig c) {
  if (c.trials < 1) throw InvalidInput("trials must be >= 1");
  const bool robust = is_robust(c.experiment);
  if (c.schemes.empty()) {
    if (c.experiment == Experiment::fig3_anchors_sweep) {
      c.schemes = {Scheme::speb, Scheme::mdpeb, Scheme::uniform};
    } else if (c.experiment == Experiment::fig5_agents_sweep) {
      c.schemes = {Scheme::speb, Scheme::mdpeb, Scheme::uniform, Scheme::two_stage_speb, Scheme::two_stage_mdpeb};
    } else {
      c.schemes = {Scheme::speb, Scheme::mdpeb, Scheme::robust_speb, Scheme::robust_mdpeb, Scheme::uniform};
    }
  }
  if (c.anchors.empty()) {
    if (c.experiment == Experiment::fig3_anchors_sweep || c.experiment == Experiment::fig6_robust_anchors) {
      for (int n = 4; n <= 12; ++n) c.anchors.push_back(n);
    } else {
      c.anchors = {10};
    }
  }
  if (c.agents.empty()) {
    if (c.experiment == Experiment::fig5_agents_sweep) {
      for (int n = 1; n <= 10; ++n) c.agents.push_back(n);
    } else {
      c.agents = {1};
    }
  }
  if (c.eps.empty()) {
    if (c.experiment == Experiment::fig7_robust_epsilon) {
      for (int i = 1; i <= 8; ++i) c.eps.push_back(0.05 * i);
    } else if (robust) {
      c.eps = {0.2};
    }
  }
  for (int n : c.anchors)
    if (n < 1) throw InvalidInput("anchor counts must be positive");
  for (int n : c.agents)
    if (n < 1) throw InvalidInput("agent counts must be positive");
  for (double e : c.eps)
    if (!(e >= 0 && e <= 1)) throw InvalidInput("eps must lie in [0, 1]");
  if (c.threads < 0) throw InvalidInput("threads must be >= 0");
  return c;
}

const AggregateRow& ExperimentResult::mean_of(double sweep, Scheme scheme) const {
  const std::string name = to_string(scheme);
  for (const auto& a : aggregates)
    if (a.scheme == name && std::abs(a.sweep - sweep) <= 1e-12 * std::max(1.0, std::abs(sweep))) return a;
  throw InvalidInput("no aggregate for scheme " + name);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const ExperimentConfig c = resolved(config);
  const std::size_t n_sweep = sweep_size(c);
  const std::size_t n_tasks = n_sweep * static_cast<std::size_t>(c.trials);
  std::vector<std::vector<ResultRow>> out(n_tasks);

  unsigned n_threads = c.threads > 0 ? static_cast<unsigned>(c.threads) : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(1, n_tasks))));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n_tasks; i = next++) {
      out[i] = run_trial(c, i / static_cast<std::size_t>(c.trials), static_cast<int>(i % static_cast<std::size_t>(c.trials)));
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  for (auto& v : out)
    for (auto& r : v) res.rows.push_back(std::move(r));
  std::sort(res.rows.begin(), res.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.sweep, a.scheme, a.trial) < std::tie(b.sweep, b.scheme, b.trial);
  });

  std::map<std::pair<double, std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& r : res.rows) groups[{r.sweep, r.scheme}].push_back(&r);
  for (const auto& [key, rows] : groups) {
    AggregateRow a;
    a.experiment = to_string(c.experiment);
    a.sweep = key.first;
    a.scheme = key.second;
    double sum = 0;
    for (const auto* r : rows) {
      if (included(*r)) {
        sum += r->objective;
        ++a.n;
      } else {
        ++a.excluded;
      }
    }
    a.mean = a.n > 0 ? sum / a.n : kNaN;
    if (a.n > 1) {
      double ss = 0;
      for (const auto* r : rows)
        if (included(*r)) ss += (r->objective - a.mean) * (r->objective - a.mean);
      a.stderr_mean = std::sqrt(ss / (a.n - 1) / a.n);
    }
    res.aggregates.push_back(std::move(a));
  }
  return res;
}

std::string to_csv(const ExperimentResult& r) {
  std::string csv = "experiment,sweep,scheme,trial,objective,status\n";
  for (const auto& row : r.rows) {
    csv += row.experiment + "," + format_double("%.10g", row.sweep) + "," + row.scheme + "," +
           std::to_string(row.trial) + "," + format_double("%.17g", row.objective) + "," + row.status + "\n";
  }
  for (const auto& a : r.aggregates) {
    csv += a.experiment + "," + format_double("%.10g", a.sweep) + "," + a.scheme + ",mean," +
           format_double("%.17g", a.mean) + ",n=" + std::to_string(a.n) + ";excluded=" + std::to_string(a.excluded) +
           ";stderr=" + format_double("%.17g", a.stderr_mean) + "\n";
  }
  return csv;
}

}  // namespace locpower
