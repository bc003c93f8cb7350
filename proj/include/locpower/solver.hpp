#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locpower/fim.hpp"
#include "locpower/netmodel.hpp"

namespace locpower {

/// Sum x <= p_total, x >= max(0, link_min), x <= link_max,
/// column sums <= anchor_caps.
struct FeasibleSet {
  double p_total = 1.0;
  std::optional<Eigen::MatrixXd> link_min;
  std::optional<Eigen::MatrixXd> link_max;
  std::optional<Eigen::VectorXd> anchor_caps;

  static FeasibleSet from(const Scenario& scenario);

  /// Exact nonemptiness test: the set is nonempty iff the lower bounds
  /// themselves are feasible.
  bool nonempty(int n_agents, int n_anchors) const;
};

enum class ObjectiveKind { speb_sum, mdpeb_sum, robust_speb_sum, robust_mdpeb_sum, total_power, minmax };
enum class Metric { speb, mdpeb };

struct QosTargets {
  Eigen::VectorXd gamma;  // per-agent metric bound
};

enum class SolveStatus { optimal, infeasible, unbounded_metric, max_iter };

std::string to_string(SolveStatus status);
std::string to_string(ObjectiveKind kind);
/// Accepts the names printed by to_string and the CLI aliases
/// (speb, mdpeb, robust-speb, robust-mdpeb, energy, minmax).
ObjectiveKind parse_objective_kind(const std::string& name);

struct SolveReport {
  PowerAllocation allocation;
  double objective = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double kkt_residual = 0.0;
  int iterations = 0;
  double wall_time = 0.0;  // seconds
};

struct SolverOptions {
  double tol = 1e-8;        // relative duality gap
  double feas_tol = 1e-10;  // allocation feasibility
  int max_iterations = 5000;
};

SolveReport solve_speb(const Scenario& scenario, const FeasibleSet& set, const SolverOptions& options = {});
SolveReport solve_mdpeb(const Scenario& scenario, const FeasibleSet& set, const SolverOptions& options = {});
SolveReport solve_robust_speb(const Scenario& scenario, const FeasibleSet& set, const SolverOptions& options = {});
SolveReport solve_robust_mdpeb(const Scenario& scenario, const FeasibleSet& set, const SolverOptions& options = {});

/// Minimum total power with metric_k <= gamma_k. The budget in `scenario`
/// is ignored; per-link bounds and anchor caps still apply.
SolveReport solve_energy_min(const Scenario& scenario, const QosTargets& qos, Metric metric,
                             const SolverOptions& options = {});

/// Minimizes max_k metric_k over the feasible set.
SolveReport solve_minmax(const Scenario& scenario, const FeasibleSet& set, Metric metric,
                         const SolverOptions& options = {});

/// Dispatch over the budgeted kinds (everything but total_power).
SolveReport solve(const Scenario& scenario, ObjectiveKind kind, const FeasibleSet& set,
                  const SolverOptions& options = {}, Metric minmax_metric = Metric::speb);

/// Objective of `kind` at an allocation: sums of (robust) SPEB / mDPEB,
/// total power, or the max per-agent metric for minmax.
double evaluate_objective(const Scenario& scenario, ObjectiveKind kind, const PowerAllocation& alloc,
                          Metric minmax_metric = Metric::speb);

struct OracleResult {
  PowerAllocation allocation;
  double objective = 0.0;
  long evaluated = 0;
};

/// Exhaustive search over the grid {x : x = step * integer, sum x = P}
/// (or sum x <= P when per-link maxima or anchor caps may keep the optimum
/// off the budget face). At most four decision variables.
OracleResult oracle_grid(const Scenario& scenario, ObjectiveKind kind, double grid_step,
                         Metric minmax_metric = Metric::speb);

}  // namespace locpower
