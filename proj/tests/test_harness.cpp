#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "locpower/harness.hpp"

using namespace locpower;

namespace {

ExperimentConfig small(Experiment e, int trials) {
  ExperimentConfig c;
  c.experiment = e;
  c.trials = trials;
  c.seed = 5;
  return c;
}

std::map<std::pair<int, std::string>, double> by_trial(const ExperimentResult& r, double sweep) {
  std::map<std::pair<int, std::string>, double> m;
  for (const auto& row : r.rows)
    if (row.sweep == sweep) m[{row.trial, row.scheme}] = row.objective;
  return m;
}

}  // namespace

TEST(Harness, Names) {
  for (auto e : {Experiment::fig3_anchors_sweep, Experiment::fig5_agents_sweep, Experiment::fig6_robust_anchors,
                 Experiment::fig7_robust_epsilon})
    EXPECT_EQ(parse_experiment(to_string(e)), e);
  EXPECT_EQ(parse_experiment("fig7"), Experiment::fig7_robust_epsilon);
  EXPECT_THROW(parse_experiment("fig4"), InvalidInput);
  EXPECT_EQ(parse_scheme("two-stage-mdpeb"), Scheme::two_stage_mdpeb);
  EXPECT_THROW(parse_scheme("best"), InvalidInput);
}

TEST(Harness, ResolvedDefaults) {
  auto c = resolved(small(Experiment::fig3_anchors_sweep, 1));
  EXPECT_EQ(c.anchors.front(), 4);
  EXPECT_EQ(c.anchors.back(), 12);
  EXPECT_EQ(c.schemes.size(), 3u);
  c = resolved(small(Experiment::fig5_agents_sweep, 1));
  EXPECT_EQ(c.agents.size(), 10u);
  EXPECT_EQ(c.anchors, std::vector<int>{10});
  c = resolved(small(Experiment::fig7_robust_epsilon, 1));
  EXPECT_EQ(c.eps.size(), 8u);
  EXPECT_NEAR(c.eps.back(), 0.4, 1e-12);

  auto bad = small(Experiment::fig3_anchors_sweep, 0);
  EXPECT_THROW(resolved(bad), InvalidInput);
  bad.trials = 1;
  bad.eps = {1.5};
  EXPECT_THROW(resolved(bad), InvalidInput);
  bad.eps.clear();
  bad.anchors = {0};
  EXPECT_THROW(resolved(bad), InvalidInput);
}

TEST(Harness, SingleTrialIsDeterministic) {
  for (auto e : {Experiment::fig3_anchors_sweep, Experiment::fig5_agents_sweep, Experiment::fig6_robust_anchors,
                 Experiment::fig7_robust_epsilon}) {
    auto c = small(e, 1);
    c.anchors = e == Experiment::fig3_anchors_sweep || e == Experiment::fig6_robust_anchors ? std::vector<int>{6}
                                                                                           : std::vector<int>{10};
    if (e == Experiment::fig5_agents_sweep) c.agents = {3};
    if (e == Experiment::fig7_robust_epsilon) c.eps = {0.2};
    const auto a = run_experiment(c);
    const auto n_schemes = resolved(c).schemes.size();
    EXPECT_EQ(a.rows.size(), n_schemes);
    EXPECT_EQ(to_csv(a), to_csv(run_experiment(c)));
    for (const auto& row : a.rows) {
      EXPECT_TRUE(row.status == "optimal" || row.status == "ok") << row.scheme << " " << row.status;
      EXPECT_TRUE(std::isfinite(row.objective));
    }
  }
}

TEST(Harness, CsvIndependentOfThreadCount) {
  auto c = small(Experiment::fig6_robust_anchors, 6);
  c.anchors = {5, 8};
  c.threads = 1;
  const std::string one = to_csv(run_experiment(c));
  c.threads = 4;
  EXPECT_EQ(one, to_csv(run_experiment(c)));
  std::istringstream in(one);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "experiment,sweep,scheme,trial,objective,status");
}

TEST(Harness, SeedChangesDraws) {
  auto c = small(Experiment::fig3_anchors_sweep, 3);
  c.anchors = {6};
  const std::string a = to_csv(run_experiment(c));
  c.seed = 6;
  EXPECT_NE(a, to_csv(run_experiment(c)));
}

TEST(Harness, PerTrialDominanceWithPerfectKnowledge) {
  auto c = small(Experiment::fig3_anchors_sweep, 40);
  c.anchors = {4, 8, 12};
  const auto r = run_experiment(c);
  for (double n : {4.0, 8.0, 12.0}) {
    const auto m = by_trial(r, n);
    for (int t = 0; t < 40; ++t) {
      const double sp = m.at({t, "speb"});
      EXPECT_LE(sp, m.at({t, "uniform"}) * (1 + 1e-7));
      EXPECT_LE(sp, m.at({t, "mdpeb"}) * (1 + 1e-7));
    }
  }
}

TEST(Harness, TwoStageRowsMatchOneStage) {
  auto c = small(Experiment::fig5_agents_sweep, 10);
  c.agents = {2, 5};
  c.schemes = {Scheme::speb, Scheme::two_stage_speb, Scheme::mdpeb, Scheme::two_stage_mdpeb};
  const auto r = run_experiment(c);
  for (double n : {2.0, 5.0}) {
    const auto m = by_trial(r, n);
    for (int t = 0; t < 10; ++t) {
      const double one = m.at({t, "speb"});
      EXPECT_LE(std::abs(m.at({t, "two-stage-speb"}) - one), 1e-4 * one);
    }
  }
}

TEST(Harness, AggregatesMatchRows) {
  auto c = small(Experiment::fig7_robust_epsilon, 8);
  c.eps = {0.1, 0.3};
  const auto r = run_experiment(c);
  EXPECT_EQ(r.aggregates.size(), 2u * 5u);
  for (const auto& a : r.aggregates) {
    double sum = 0;
    int n = 0, excluded = 0;
    for (const auto& row : r.rows) {
      if (row.sweep != a.sweep || row.scheme != a.scheme) continue;
      if ((row.status == "optimal" || row.status == "ok") && std::isfinite(row.objective)) {
        sum += row.objective;
        ++n;
      } else {
        ++excluded;
      }
    }
    EXPECT_EQ(a.n, n);
    EXPECT_EQ(a.excluded, excluded);
    EXPECT_EQ(n + excluded, 8);
    if (n > 0) {
      EXPECT_NEAR(a.mean, sum / n, 1e-12 * std::abs(sum / n));
    }
  }
  EXPECT_NO_THROW(r.mean_of(0.3, Scheme::robust_speb));
  EXPECT_THROW(r.mean_of(0.3, Scheme::two_stage_speb), InvalidInput);
}

TEST(Harness, SchemesShareTheTruthDraw) {
  // With zero uncertainty the truth equals the estimate, so robust and
  // nominal schemes coincide.
  auto c = small(Experiment::fig6_robust_anchors, 5);
  c.anchors = {6};
  c.eps = {0.0};
  const auto m = by_trial(run_experiment(c), 6.0);
  for (int t = 0; t < 5; ++t) {
    const double a = m.at({t, "speb"});
    EXPECT_NEAR(m.at({t, "robust-speb"}), a, 1e-7 * a);
  }
}
