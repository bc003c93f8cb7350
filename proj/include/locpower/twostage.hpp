#pragma once

#include <vector>

#include <Eigen/Core>

#include "locpower/netmodel.hpp"
#include "locpower/solver.hpp"

namespace locpower {

enum class StageMode { speb, mdpeb };

/// Agent k's unit-budget split over anchors and its per-unit-power cost:
/// robust SPEB, or 1 / mu2_check for the mDPEB mode.
struct StageOneSolution {
  int agent = 0;
  Eigen::VectorXd rho;
  double T = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Solves agent k's subproblem with P_k = 1 (robust surrogate; equals the
/// nominal metric without an uncertainty model). Throws if the agent is not
/// localizable.
StageOneSolution stage1(const Scenario& scenario, int agent, StageMode mode, const SolverOptions& options = {});

/// P_k = P sqrt(T_k) / sum sqrt(T); throws unless every T_k > 0.
Eigen::VectorXd stage2_closed_form(const Eigen::VectorXd& T, double p_total);

struct StageTwoSolution {
  Eigen::VectorXd power;
  SolveStatus status = SolveStatus::max_iter;
  double objective = 0.0;  // sum T_k / P_k
};

/// Minimizes sum T_k / P_k subject to sum P_k <= P and
/// sum_k rho_kj P_k <= caps_j for fixed stage-one splits.
StageTwoSolution stage2_with_anchor_caps(const Scenario& scenario, const std::vector<StageOneSolution>& stage_one,
                                         const Eigen::VectorXd& caps, const SolverOptions& options = {});

enum class Execution { sequential, parallel };

struct TwoStageOptions {
  SolverOptions solver;
  Execution execution = Execution::sequential;
};

/// Stage I for every agent, Stage II (closed form, or the capped program when
/// the scenario has anchor caps), then x_kj = rho_kj P_k. The reported
/// objective is the robust SPEB / mDPEB sum at x. Per-link bounds are not
/// supported.
SolveReport algorithm1(const Scenario& scenario, StageMode mode, const TwoStageOptions& options = {});

/// Stage-one results for all agents, in agent order.
std::vector<StageOneSolution> stage1_all(const Scenario& scenario, StageMode mode, const TwoStageOptions& options = {});

}  // namespace locpower
