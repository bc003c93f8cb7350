#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locpower/netmodel.hpp"

namespace locpower {

enum class Experiment { fig3_anchors_sweep, fig5_agents_sweep, fig6_robust_anchors, fig7_robust_epsilon };

enum class Scheme { speb, mdpeb, robust_speb, robust_mdpeb, uniform, two_stage_speb, two_stage_mdpeb };

std::string to_string(Experiment e);
std::string to_string(Scheme s);
/// Accepts the full names and the short forms fig3 / fig5 / fig6 / fig7.
Experiment parse_experiment(const std::string& name);
Scheme parse_scheme(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::fig3_anchors_sweep;
  int trials = 1000;
  std::vector<Scheme> schemes;  // empty: the experiment's default set
  // fig3 / fig6: anchor-count sweep. fig5 / fig7: first entry is the
  // number of anchors on the fixed circle.
  std::vector<int> anchors;
  // fig5: agent-count sweep.
  std::vector<int> agents;
  // fig7: normalized uncertainty sweep. fig6: first entry is the fixed value.
  std::vector<double> eps;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

/// Fills empty fields with the experiment's defaults and validates.
ExperimentConfig resolved(ExperimentConfig config);

struct ResultRow {
  std::string experiment;
  double sweep = 0;
  std::string scheme;
  int trial = 0;
  double objective = 0;
  std::string status;  // solver status, "ok" for uniform, "error: ..." on exceptions
};

struct AggregateRow {
  std::string experiment;
  double sweep = 0;
  std::string scheme;
  double mean = 0;
  double stderr_mean = 0;
  int n = 0;
  int excluded = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;         // sorted by (sweep, scheme, trial)
  std::vector<AggregateRow> aggregates;  // sorted by (sweep, scheme)

  /// Aggregate lookup; throws if absent.
  const AggregateRow& mean_of(double sweep, Scheme scheme) const;
};

/// Runs every (sweep value, trial) pair. Trial t at sweep index i draws its
/// network from the substream (seed, t, i). Perfect-knowledge experiments
/// report the SPEB of the allocation; robust ones report the SPEB at a true
/// position drawn uniformly in the uncertainty disc, shared by all schemes.
/// fig5 reports the per-agent mean SPEB.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// experiment,sweep,scheme,trial,objective,status; per-trial rows then
/// aggregates with trial "mean".
std::string to_csv(const ExperimentResult& result);

}  // namespace locpower
