#include <array>
#include <cmath>
#include <limits>

#include "locpower/robust.hpp"
#include "locpower/solver.hpp"

namespace locpower {

namespace {

struct GridSearch {
  int n = 0;
  int n_agents = 0;
  long divisions = 0;
  bool face = true;
  double quantum = 0;  // power per grid unit
  ObjectiveKind kind{};
  Metric metric{};
  std::array<int, 4> agent_of{};
  std::array<Eigen::Vector3d, 4> column{};
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
  std::array<int, 4> anchor_of{};
  std::optional<Eigen::VectorXd> caps;

  std::array<long, 4> counts{};
  std::array<long, 4> best_counts{};
  double best = std::numeric_limits<double>::infinity();
  long evaluated = 0;

  double value(const std::array<Eigen::Vector3d, 4>& y) const {
    const bool use_speb = kind == ObjectiveKind::speb_sum || kind == ObjectiveKind::robust_speb_sum ||
                          (kind == ObjectiveKind::minmax && metric == Metric::speb);
    double acc = 0;
    for (int k = 0; k < n_agents; ++k) {
      const double m = use_speb ? speb_from_moments<double>(y[static_cast<std::size_t>(k)])
                                : mdpeb_from_moments<double>(y[static_cast<std::size_t>(k)]);
      acc = kind == ObjectiveKind::minmax ? std::max(acc, m) : acc + m;
    }
    return acc;
  }

  bool admissible() const {
    for (int i = 0; i < n; ++i) {
      const double x = quantum * static_cast<double>(counts[static_cast<std::size_t>(i)]);
      if (x < lo[static_cast<std::size_t>(i)] - 1e-12 || x > hi[static_cast<std::size_t>(i)] + 1e-12) return false;
    }
    if (caps) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(caps->size());
      for (int i = 0; i < n; ++i)
        col(anchor_of[static_cast<std::size_t>(i)]) += quantum * static_cast<double>(counts[static_cast<std::size_t>(i)]);
      if (((col - *caps).array() > 1e-12).any()) return false;
    }
    return true;
  }

  void visit(const std::array<Eigen::Vector3d, 4>& y) {
    ++evaluated;
    if (!admissible()) return;
    const double v = value(y);
    if (v < best) {
      best = v;
      best_counts = counts;
    }
  }

  void recurse(int i, long remaining, std::array<Eigen::Vector3d, 4> y) {
    const auto si = static_cast<std::size_t>(i);
    const auto ak = static_cast<std::size_t>(agent_of[si]);
    if (i == n - 1 && face) {
      counts[si] = remaining;
      y[ak] += static_cast<double>(remaining) * column[si];
      visit(y);
      return;
    }
    for (long c = 0; c <= remaining; ++c) {
      counts[si] = c;
      std::array<Eigen::Vector3d, 4> next = y;
      next[ak] += static_cast<double>(c) * column[si];
      if (i == n - 1) {
        visit(next);
      } else {
        recurse(i + 1, remaining - c, next);
      }
    }
  }
};

}  // namespace

OracleResult oracle_grid(const Scenario& s, ObjectiveKind kind, double step, Metric metric) {
  if (!(step > 0)) throw InvalidInput("grid step must be positive");
  if (kind == ObjectiveKind::total_power) throw InvalidInput("oracle does not support the total-power objective");
  const int na = s.n_agents();
  const int nb = s.n_anchors();
  if (na * nb > 4) throw InvalidInput("oracle supports at most 4 decision variables");

  const FeasibleSet set = FeasibleSet::from(s);
  GridSearch g;
  g.n = na * nb;
  g.n_agents = na;
  g.kind = kind;
  g.metric = metric;
  g.divisions = std::max(1L, std::lround(set.p_total / step));
  g.quantum = set.p_total / static_cast<double>(g.divisions);
  g.face = !set.link_max && !set.anchor_caps;
  g.caps = set.anchor_caps;
  const bool robust = kind == ObjectiveKind::robust_speb_sum || kind == ObjectiveKind::robust_mdpeb_sum;
  for (int k = 0; k < na; ++k) {
    const MomentMap L = moment_map(s, k, robust);
    for (int j = 0; j < nb; ++j) {
      const auto i = static_cast<std::size_t>(k * nb + j);
      g.agent_of[i] = k;
      g.anchor_of[i] = j;
      g.column[i] = L.col(j) * g.quantum;
      g.lo[i] = set.link_min ? (*set.link_min)(k, j) : 0.0;
      g.hi[i] = set.link_max ? (*set.link_max)(k, j) : std::numeric_limits<double>::infinity();
    }
  }
  std::array<Eigen::Vector3d, 4> y;
  y.fill(Eigen::Vector3d::Zero());
  g.recurse(0, g.divisions, y);

  OracleResult out;
  out.evaluated = g.evaluated;
  out.allocation = PowerAllocation::Zero(na, nb);
  if (!std::isfinite(g.best)) {
    out.objective = g.best;
    return out;
  }
  for (int i = 0; i < g.n; ++i)
    out.allocation(i / nb, i % nb) = g.quantum * static_cast<double>(g.best_counts[static_cast<std::size_t>(i)]);
  out.objective = evaluate_objective(s, kind, out.allocation, metric);
  return out;
}

}  // namespace locpower
