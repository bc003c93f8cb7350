#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "locpower/random.hpp"
#include "locpower/solver.hpp"
#include "support.hpp"

using namespace locpower;
using locpower::testing::random_simplex_point;
using locpower::testing::random_single_agent;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario orthogonal(double xi1 = 1.0, double xi2 = 1.0) { return single_agent_scenario({0.0, kPi / 2}, {xi1, xi2}); }

Scenario with_delta(const Scenario& s, double delta) {
  const int na = s.n_agents(), nb = s.n_anchors();
  return s.with_uncertainty(UncertaintyModel::from_angles(Eigen::MatrixXd::Constant(na, nb, std::asin(delta)),
                                                          Eigen::MatrixXd::Zero(na, nb)));
}

const ObjectiveKind kBudgeted[] = {ObjectiveKind::speb_sum, ObjectiveKind::mdpeb_sum,
                                   ObjectiveKind::robust_speb_sum, ObjectiveKind::robust_mdpeb_sum};

bool is_robust(ObjectiveKind k) {
  return k == ObjectiveKind::robust_speb_sum || k == ObjectiveKind::robust_mdpeb_sum;
}

Scenario multi_agent(int na, int nb, std::uint64_t stream) {
  ScenarioConfig c;
  c.n_agents = na;
  c.n_anchors = nb;
  c.seed = 99;
  c.stream = stream;
  c.eps_d = 0.3;
  return generate_scenario(c);
}

}  // namespace

TEST(SolveSpeb, Examples) {
  auto r = solve_speb(orthogonal(), FeasibleSet::from(orthogonal()));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.allocation(0, 0), 0.5, 1e-6);
  EXPECT_NEAR(r.objective, 4.0, 1e-7);
  EXPECT_LE(r.kkt_residual, 1e-8);

  const Scenario s = orthogonal(4.0, 1.0);
  r = solve_speb(s, FeasibleSet::from(s));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.allocation(0, 0), 1.0 / 3, 1e-6);
  EXPECT_NEAR(r.allocation(0, 1), 2.0 / 3, 1e-6);
  EXPECT_NEAR(r.objective, 2.25, 1e-7);
  const auto o = oracle_grid(s, ObjectiveKind::speb_sum, 1e-3);
  EXPECT_NEAR(o.allocation(0, 0), 1.0 / 3, 1e-3);
  EXPECT_NEAR(o.objective, 2.25, 1e-5);
}

TEST(SolveMdpeb, Examples) {
  auto r = solve_mdpeb(orthogonal(), FeasibleSet::from(orthogonal()));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.allocation(0, 0), 0.5, 1e-5);
  EXPECT_NEAR(r.objective, 2.0, 1e-7);

  const Scenario tri = single_agent_scenario({0.0, 2 * kPi / 3, 4 * kPi / 3}, {1, 1, 1});
  r = solve_mdpeb(tri, FeasibleSet::from(tri));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 2.0, 1e-7);
  EXPECT_NEAR(oracle_grid(tri, ObjectiveKind::mdpeb_sum, 1.0 / 300).objective, 2.0, 1e-12);
}

TEST(SolveRobust, Examples) {
  const Scenario s = with_delta(orthogonal(), 0.1);
  auto r = solve_robust_speb(s, FeasibleSet::from(s));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.allocation(0, 0), 0.5, 1e-5);
  EXPECT_NEAR(r.objective, 5.0, 1e-7);
  r = solve_robust_mdpeb(s, FeasibleSet::from(s));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 2.5, 1e-7);
}

TEST(SolveRobust, CollapsesWithoutUncertainty) {
  Philox4x32 eng(31, 0);
  for (int t = 0; t < 20; ++t) {
    const Scenario s = random_single_agent(eng, 4, false);
    const Scenario z = with_delta(s, 0.0);
    const auto f = FeasibleSet::from(s);
    EXPECT_NEAR(solve_robust_speb(z, f).objective, solve_speb(s, f).objective, 1e-7 * solve_speb(s, f).objective);
    EXPECT_NEAR(solve_robust_mdpeb(z, f).objective, solve_mdpeb(s, f).objective,
                1e-7 * solve_mdpeb(s, f).objective);
  }
}

TEST(SolveRobust, RandomTenAnchorInstanceMatchesCoarseBound) {
  // Ten variables is beyond the grid oracle; compare with many random
  // simplex points and with the PSD-feasible uniform split.
  Philox4x32 eng(32, 0);
  const Scenario s = random_single_agent(eng, 10, true);
  const auto r = solve_robust_speb(s, FeasibleSet::from(s));
  ASSERT_EQ(r.status, SolveStatus::optimal);
  for (int i = 0; i < 2000; ++i) {
    const auto x = random_simplex_point(eng, 1, 10, 1.0);
    EXPECT_LE(r.objective, total_robust_speb(s, x) * (1 + 1e-9));
  }
}

TEST(Solvers, NeverWorseThanUniform) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Scenario s = multi_agent(3, 6, t);
    const auto u = uniform_allocation(s);
    for (auto kind : kBudgeted) {
      const auto r = solve(s, kind, FeasibleSet::from(s));
      ASSERT_EQ(r.status, SolveStatus::optimal) << to_string(kind);
      EXPECT_LE(r.objective, evaluate_objective(s, kind, u) * (1 + 1e-9)) << to_string(kind);
    }
  }
}

TEST(Solvers, BudgetSaturationAndFeasibility) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Scenario s = multi_agent(2, 5, t).with_budget(3.0);
    for (auto kind : kBudgeted) {
      const auto r = solve(s, kind, FeasibleSet::from(s));
      ASSERT_EQ(r.status, SolveStatus::optimal);
      EXPECT_NEAR(r.allocation.sum(), 3.0, 1e-9);
      EXPECT_GE(r.allocation.minCoeff(), -1e-10);
    }
  }
}

TEST(Solvers, ScaleLaw) {
  for (std::uint64_t t = 0; t < 5; ++t) {
    const Scenario s = multi_agent(2, 6, t);
    for (auto kind : kBudgeted) {
      const double base = solve(s, kind, FeasibleSet::from(s)).objective;
      for (double c : {0.1, 7.0}) {
        const Scenario sc = s.with_budget(c);
        EXPECT_NEAR(solve(sc, kind, FeasibleSet::from(sc)).objective * c, base, 1e-9 * base);
      }
    }
  }
}

TEST(Solvers, MidpointConvexity) {
  Philox4x32 eng(33, 0);
  for (auto kind : kBudgeted) {
    const Scenario s = is_robust(kind) ? random_single_agent(eng, 5, true) : multi_agent(2, 5, 3);
    int tested = 0;
    for (int i = 0; i < 2000; ++i) {
      const auto x = random_simplex_point(eng, s.n_agents(), s.n_anchors(), 1.0);
      const auto y = random_simplex_point(eng, s.n_agents(), s.n_anchors(), 1.0);
      const double fx = evaluate_objective(s, kind, x), fy = evaluate_objective(s, kind, y);
      if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
      ++tested;
      const double fm = evaluate_objective(s, kind, (x + y) / 2);
      EXPECT_GE((fx + fy) / 2 - fm, -1e-9) << to_string(kind);
    }
    EXPECT_GT(tested, 200) << to_string(kind);
  }
}

TEST(SolveSpeb, ProjectedGradientVanishes) {
  // With only the budget and x >= 0, stationarity reads g_j = -lambda on the
  // support and g_j >= -lambda elsewhere. Gradient by central differences.
  Philox4x32 eng(34, 0);
  for (int t = 0; t < 20; ++t) {
    const Scenario s = random_single_agent(eng, 5, false);
    const auto r = solve_speb(s, FeasibleSet::from(s));
    ASSERT_EQ(r.status, SolveStatus::optimal);
    const auto& x = r.allocation;
    Eigen::VectorXd g(5);
    for (int j = 0; j < 5; ++j) {
      const double h = 1e-7;
      PowerAllocation xp = x, xm = x;
      xp(0, j) += h;
      xm(0, j) = std::max(0.0, xm(0, j) - h);
      g(j) = (total_speb(s, xp) - total_speb(s, xm)) / (xp(0, j) - xm(0, j));
    }
    double lambda = 0;
    int support = 0;
    for (int j = 0; j < 5; ++j)
      if (x(0, j) > 1e-4) {
        lambda -= g(j);
        ++support;
      }
    lambda /= support;
    const double scale = g.cwiseAbs().maxCoeff();
    for (int j = 0; j < 5; ++j) {
      if (x(0, j) > 1e-4) {
        EXPECT_NEAR(g(j), -lambda, 1e-4 * scale);
      } else {
        EXPECT_GE(g(j), -lambda - 1e-4 * scale);
      }
    }
  }
}

TEST(Oracle, SolverIsNoWorse) {
  Philox4x32 eng(35, 0);
  for (auto kind : kBudgeted) {
    for (int t = 0; t < 5; ++t) {
      const Scenario s = random_single_agent(eng, 3, is_robust(kind));
      const auto r = solve(s, kind, FeasibleSet::from(s));
      ASSERT_EQ(r.status, SolveStatus::optimal);
      const auto o = oracle_grid(s, kind, 4e-3);
      EXPECT_LE(r.objective, o.objective * (1 + 1e-9));
      EXPECT_NEAR(r.objective, o.objective, 1e-2 * o.objective);
    }
  }
}

TEST(Oracle, RefinementIsMonotone) {
  Philox4x32 eng(36, 0);
  const Scenario s = random_single_agent(eng, 3, false);
  double prev = oracle_grid(s, ObjectiveKind::speb_sum, 0.01).objective;
  for (double step : {0.005, 0.0025}) {
    const double cur = oracle_grid(s, ObjectiveKind::speb_sum, step).objective;
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  const auto o = oracle_grid(orthogonal(), ObjectiveKind::speb_sum, 1e-3);
  EXPECT_NEAR(o.allocation(0, 0), 0.5, 1e-3);
}

TEST(Oracle, Errors) {
  const Scenario big = single_agent_scenario({0, 1, 2, 3, 4}, {1, 1, 1, 1, 1});
  EXPECT_THROW(oracle_grid(big, ObjectiveKind::speb_sum, 0.1), InvalidInput);
  EXPECT_THROW(oracle_grid(orthogonal(), ObjectiveKind::speb_sum, 0.0), InvalidInput);
  EXPECT_THROW(oracle_grid(orthogonal(), ObjectiveKind::total_power, 0.1), InvalidInput);
}

TEST(EnergyMin, Examples) {
  const Scenario s = orthogonal();
  QosTargets q{Eigen::VectorXd::Constant(1, 4.0)};
  auto r = solve_energy_min(s, q, Metric::speb);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-7);
  EXPECT_NEAR(r.allocation(0, 0), 0.5, 1e-5);
  EXPECT_LE(total_speb(s, r.allocation), 4.0 * (1 + 1e-9));

  q.gamma(0) = 1e9;
  r = solve_energy_min(s, q, Metric::speb);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_LT(r.objective, 1e-7);

  // mDPEB <= 2 needs min(x1, x2) >= 1/2 on orthogonal anchors.
  q.gamma(0) = 2.0;
  r = solve_energy_min(s, q, Metric::mdpeb);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-7);
}

TEST(EnergyMin, TargetScaling) {
  Philox4x32 eng(37, 0);
  const Scenario s = random_single_agent(eng, 4, false);
  for (auto metric : {Metric::speb, Metric::mdpeb}) {
    QosTargets q{Eigen::VectorXd::Constant(1, 2.0)};
    const double base = solve_energy_min(s, q, metric).objective;
    q.gamma *= 5.0;
    EXPECT_NEAR(solve_energy_min(s, q, metric).objective, base / 5, 1e-7 * base);
  }
}

TEST(EnergyMin, TargetsHoldOnMultiAgent) {
  const Scenario s = multi_agent(3, 6, 4);
  QosTargets q{Eigen::Vector3d(1.0, 0.5, 2.0)};
  const auto r = solve_energy_min(s, q, Metric::speb);
  ASSERT_EQ(r.status, SolveStatus::optimal);
  for (int k = 0; k < 3; ++k) {
    const double m = speb(build_efim(s, r.allocation, k));
    EXPECT_LE(m, q.gamma(k) * (1 + 1e-8));
    EXPECT_NEAR(m, q.gamma(k), 1e-4 * q.gamma(k));
  }
}

TEST(Minmax, SingleAgentMatchesSum) {
  Philox4x32 eng(38, 0);
  const Scenario s = random_single_agent(eng, 4, false);
  const auto f = FeasibleSet::from(s);
  EXPECT_NEAR(solve_minmax(s, f, Metric::speb).objective, solve_speb(s, f).objective, 1e-7);
  EXPECT_NEAR(solve_minmax(s, f, Metric::mdpeb).objective, solve_mdpeb(s, f).objective, 1e-7);
}

TEST(Minmax, SymmetricAgentsShareEqually) {
  const std::vector<Position> agents{{0.5, 0.0}, {-0.5, 0.0}};
  const std::vector<Position> anchors{{2, 0}, {-2, 0}, {0, 2}, {0, -2}};
  const Eigen::MatrixXd xi = path_loss_channel(agents, anchors, Eigen::MatrixXd::Ones(2, 4), 1.0);
  const Scenario s(agents, anchors, xi, 1.0);
  for (auto metric : {Metric::speb, Metric::mdpeb}) {
    const auto r = solve_minmax(s, FeasibleSet::from(s), metric);
    ASSERT_EQ(r.status, SolveStatus::optimal);
    EXPECT_NEAR(r.allocation.row(0).sum(), r.allocation.row(1).sum(), 1e-5);
  }
}

TEST(Minmax, MatchesOracleOnTwoAgents) {
  Philox4x32 eng(39, 0);
  for (int t = 0; t < 5; ++t) {
    const Scenario s = multi_agent(2, 2, static_cast<std::uint64_t>(100 + t)).with_uncertainty(std::nullopt);
    if (!is_localizable(s, 0) || !is_localizable(s, 1)) continue;
    const auto r = solve_minmax(s, FeasibleSet::from(s), Metric::speb);
    ASSERT_EQ(r.status, SolveStatus::optimal);
    const auto o = oracle_grid(s, ObjectiveKind::minmax, 1e-2);
    EXPECT_LE(r.objective, o.objective * (1 + 1e-9));
    EXPECT_NEAR(r.objective, o.objective, 1e-3 * o.objective * 10);
  }
}

TEST(Statuses, UnboundedAndInfeasible) {
  const Scenario collinear = single_agent_scenario({0.0, kPi}, {1, 1});
  EXPECT_EQ(solve_speb(collinear, FeasibleSet::from(collinear)).status, SolveStatus::unbounded_metric);
  EXPECT_EQ(solve_mdpeb(collinear, FeasibleSet::from(collinear)).status, SolveStatus::unbounded_metric);
  EXPECT_EQ(solve_energy_min(collinear, {Eigen::VectorXd::Ones(1)}, Metric::speb).status, SolveStatus::infeasible);

  FeasibleSet f = FeasibleSet::from(orthogonal());
  f.link_min = Eigen::MatrixXd::Constant(1, 2, 0.6);
  EXPECT_FALSE(f.nonempty(1, 2));
  EXPECT_EQ(solve_speb(orthogonal(), f).status, SolveStatus::infeasible);

  // Wide angle widths on two nearby directions leave no PSD allocation.
  const Scenario narrow = single_agent_scenario({0.0, 0.2}, {1, 1});
  const Scenario r = with_delta(narrow, 0.6);
  EXPECT_EQ(solve_robust_speb(r, FeasibleSet::from(r)).status, SolveStatus::infeasible);
}

TEST(Solvers, RespectsLinkBoundsAndCaps) {
  const Scenario s = multi_agent(2, 4, 7);
  FeasibleSet f = FeasibleSet::from(s);
  f.link_min = Eigen::MatrixXd::Constant(2, 4, 0.02);
  f.link_max = Eigen::MatrixXd::Constant(2, 4, 0.2);
  f.anchor_caps = Eigen::VectorXd::Constant(4, 0.3);
  for (auto kind : {ObjectiveKind::speb_sum, ObjectiveKind::mdpeb_sum}) {
    const auto r = solve(s, kind, f);
    ASSERT_EQ(r.status, SolveStatus::optimal);
    EXPECT_GE(r.allocation.minCoeff(), 0.02 - 1e-10);
    EXPECT_LE(r.allocation.maxCoeff(), 0.2 + 1e-10);
    EXPECT_LE(r.allocation.colwise().sum().maxCoeff(), 0.3 + 1e-10);
    EXPECT_LE(r.allocation.sum(), 1.0 + 1e-10);
  }
}

TEST(ObjectiveKinds, NamesRoundTrip) {
  for (auto kind : {ObjectiveKind::speb_sum, ObjectiveKind::mdpeb_sum, ObjectiveKind::robust_speb_sum,
                    ObjectiveKind::robust_mdpeb_sum, ObjectiveKind::total_power, ObjectiveKind::minmax})
    EXPECT_EQ(parse_objective_kind(to_string(kind)), kind);
  EXPECT_EQ(parse_objective_kind("energy"), ObjectiveKind::total_power);
  EXPECT_THROW(parse_objective_kind("bogus"), InvalidInput);
}
