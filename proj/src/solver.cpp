#include "locpower/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "locpower/barrier.hpp"
#include "locpower/robust.hpp"
#include "locpower/terms.hpp"

namespace locpower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Layout {
  int na;
  int nb;
  int links() const { return na * nb; }
  int link(int k, int j) const { return k * nb + j; }
  std::vector<int> agent(int k) const {
    std::vector<int> idx(static_cast<std::size_t>(nb));
    for (int j = 0; j < nb; ++j) idx[static_cast<std::size_t>(j)] = link(k, j);
    return idx;
  }
};

Eigen::VectorXd lower_bounds(const FeasibleSet& set, const Layout& lay, double unit) {
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(lay.links());
  if (set.link_min)
    for (int k = 0; k < lay.na; ++k)
      for (int j = 0; j < lay.nb; ++j) lo(lay.link(k, j)) = std::max(0.0, (*set.link_min)(k, j) / unit);
  return lo;
}

// Box, budget and anchor-cap constraints on the link variables (scaled by 1/unit).
void add_polytope(barrier::Program& p, const FeasibleSet& set, const Layout& lay, double unit, bool budget) {
  p.lower.head(lay.links()) = lower_bounds(set, lay, unit);
  if (set.link_max)
    for (int k = 0; k < lay.na; ++k)
      for (int j = 0; j < lay.nb; ++j) p.upper(lay.link(k, j)) = (*set.link_max)(k, j) / unit;
  if (budget) {
    barrier::SparseRow row;
    for (int i = 0; i < lay.links(); ++i) {
      row.index.push_back(i);
      row.coef.push_back(1.0);
    }
    row.rhs = set.p_total / unit;
    p.rows.push_back(std::move(row));
  }
  if (set.anchor_caps) {
    for (int j = 0; j < lay.nb; ++j) {
      barrier::SparseRow row;
      for (int k = 0; k < lay.na; ++k) {
        row.index.push_back(lay.link(k, j));
        row.coef.push_back(1.0);
      }
      row.rhs = (*set.anchor_caps)(j) / unit;
      p.rows.push_back(std::move(row));
    }
  }
}

// Uniform share of the budget left above the lower bounds, times 0.99,
// clipped into any per-link maxima.
Eigen::VectorXd interior_links(const FeasibleSet& set, const Layout& lay, double unit, double total) {
  const Eigen::VectorXd lo = lower_bounds(set, lay, unit);
  const double spare = std::max(0.0, total - lo.sum());
  Eigen::VectorXd v = lo.array() + 0.99 * spare / lay.links();
  if (set.link_max)
    for (int k = 0; k < lay.na; ++k)
      for (int j = 0; j < lay.nb; ++j) {
        const int i = lay.link(k, j);
        const double up = (*set.link_max)(k, j) / unit;
        if (v(i) >= up) v(i) = (lo(i) + up) / 2;
      }
  return v;
}

barrier::SmoothTerm trace_inverse_term(const MomentMap& L, const Layout& lay, int k) {
  return {lay.agent(k), std::make_shared<TraceInverse>(L)};
}

// ||z_k|| <= r_k with r_k at index r.
barrier::Cone moment_cone(const MomentMap& L, const Layout& lay, int k, int r) {
  barrier::Cone c;
  c.index = lay.agent(k);
  c.index.push_back(r);
  c.A = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, lay.nb + 1);
  c.A.leftCols(lay.nb) = L.bottomRows<2>();
  c.c = Eigen::VectorXd::Zero(lay.nb + 1);
  c.c(lay.nb) = 1.0;
  return c;
}

// r_k - a_k (+ tau) <= rhs.
barrier::SparseRow epigraph_row(const MomentMap& L, const Layout& lay, int k, int r, int tau, double rhs) {
  barrier::SparseRow row;
  row.index = lay.agent(k);
  for (int j = 0; j < lay.nb; ++j) row.coef.push_back(-L(0, j));
  row.index.push_back(r);
  row.coef.push_back(1.0);
  if (tau >= 0) {
    row.index.push_back(tau);
    row.coef.push_back(1.0);
  }
  row.rhs = rhs;
  return row;
}

PowerAllocation to_allocation(const Eigen::VectorXd& v, const Layout& lay, double unit) {
  PowerAllocation x(lay.na, lay.nb);
  for (int k = 0; k < lay.na; ++k)
    for (int j = 0; j < lay.nb; ++j) x(k, j) = unit * v(lay.link(k, j));
  return x;
}

// The budgeted objectives strictly decrease along x -> c x; push the
// allocation onto the budget face as far as the other constraints allow.
void saturate_budget(PowerAllocation& x, const FeasibleSet& set) {
  const double sum = x.sum();
  if (!(sum > 0)) return;
  double factor = set.p_total / sum;
  if (set.link_max)
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x.data()[i] > 0) factor = std::min(factor, set.link_max->data()[i] / x.data()[i]);
  if (set.anchor_caps) {
    const Eigen::VectorXd cols = x.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < cols.size(); ++j)
      if (cols(j) > 0) factor = std::min(factor, (*set.anchor_caps)(j) / cols(j));
  }
  if (factor > 1) x *= factor;
}

SolveStatus map_status(barrier::Status s) {
  switch (s) {
    case barrier::Status::optimal:
      return SolveStatus::optimal;
    case barrier::Status::infeasible:
      return SolveStatus::infeasible;
    default:
      return SolveStatus::max_iter;
  }
}

barrier::Options barrier_options(const SolverOptions& o) {
  barrier::Options b;
  b.gap_tol = o.tol;
  b.max_iterations = o.max_iterations;
  return b;
}

bool all_localizable(const Scenario& s) {
  for (int k = 0; k < s.n_agents(); ++k)
    if (!is_localizable(s, k)) return false;
  return true;
}

SolveReport early_report(const Scenario& s, SolveStatus status) {
  SolveReport r;
  r.allocation = PowerAllocation::Zero(s.n_agents(), s.n_anchors());
  r.objective = kInf;
  r.status = status;
  return r;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolveReport finish(const Scenario& s, const barrier::Result& res, const Layout& lay, double unit,
                   const FeasibleSet* set, ObjectiveKind kind, Metric metric, Clock::time_point t0) {
  SolveReport r;
  r.status = map_status(res.status);
  r.allocation = to_allocation(res.v, lay, unit);
  if (set && r.status == SolveStatus::optimal) saturate_budget(r.allocation, *set);
  r.objective = r.status == SolveStatus::infeasible ? kInf : evaluate_objective(s, kind, r.allocation, metric);
  r.kkt_residual = res.kkt_residual;
  r.iterations = res.iterations;
  r.wall_time = seconds_since(t0);
  return r;
}

SolveReport solve_speb_impl(const Scenario& s, const FeasibleSet& set, const SolverOptions& o, bool robust) {
  const auto t0 = Clock::now();
  if (!all_localizable(s)) return early_report(s, SolveStatus::unbounded_metric);
  if (!set.nonempty(s.n_agents(), s.n_anchors())) return early_report(s, SolveStatus::infeasible);
  const Layout lay{s.n_agents(), s.n_anchors()};
  const double unit = set.p_total;
  barrier::Program p(lay.links());
  add_polytope(p, set, lay, unit, true);
  for (int k = 0; k < lay.na; ++k) {
    const MomentMap L = moment_map(s, k, robust);
    p.objective.push_back(trace_inverse_term(L, lay, k));
    if (robust) {
      barrier::Cone c;
      c.index = lay.agent(k);
      c.A = L.bottomRows<2>();
      c.c = L.row(0).transpose();
      p.cones.push_back(std::move(c));
    }
  }
  const auto res = barrier::solve(p, interior_links(set, lay, unit, 1.0), barrier_options(o));
  return finish(s, res, lay, unit, &set, robust ? ObjectiveKind::robust_speb_sum : ObjectiveKind::speb_sum,
                Metric::speb, t0);
}

SolveReport solve_mdpeb_impl(const Scenario& s, const FeasibleSet& set, const SolverOptions& o, bool robust) {
  const auto t0 = Clock::now();
  if (!all_localizable(s)) return early_report(s, SolveStatus::unbounded_metric);
  if (!set.nonempty(s.n_agents(), s.n_anchors())) return early_report(s, SolveStatus::infeasible);
  const Layout lay{s.n_agents(), s.n_anchors()};
  const double unit = set.p_total;
  const int n = lay.links() + lay.na;
  barrier::Program p(n);
  add_polytope(p, set, lay, unit, true);
  Eigen::VectorXd guess(n);
  guess.head(lay.links()) = interior_links(set, lay, unit, 1.0);
  for (int k = 0; k < lay.na; ++k) {
    const int r = lay.links() + k;
    const MomentMap L = moment_map(s, k, robust);
    p.cones.push_back(moment_cone(L, lay, k, r));
    p.rows.push_back(epigraph_row(L, lay, k, r, -1, 0.0));
    Eigen::VectorXd c(lay.nb + 1);
    c.head(lay.nb) = L.row(0).transpose();
    c(lay.nb) = -1.0;
    auto idx = lay.agent(k);
    idx.push_back(r);
    p.objective.push_back({idx, std::make_shared<Reciprocal>(c, 2.0)});
    const Eigen::Vector3d y = L * guess.segment(k * lay.nb, lay.nb);
    guess(r) = (y(0) + y.tail<2>().norm()) / 2;
  }
  const auto res = barrier::solve(p, guess, barrier_options(o));
  return finish(s, res, lay, unit, &set, robust ? ObjectiveKind::robust_mdpeb_sum : ObjectiveKind::mdpeb_sum,
                Metric::mdpeb, t0);
}

}  // namespace

TraceInverse::TraceInverse(MomentMap L) : L_(std::move(L)) {}

bool TraceInverse::evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                            Eigen::MatrixXd* hess) const {
  const Eigen::Vector3d y = L_ * x;
  const double a = y(0);
  const double s = y(1) * y(1) + y(2) * y(2);
  const double D = a * a - s;
  if (!(a > 0) || !(D > 0)) return false;
  value = 4 * a / D;
  const double D2 = D * D;
  if (grad) {
    const Eigen::Vector3d gy(-4 * (a * a + s) / D2, 8 * a * y(1) / D2, 8 * a * y(2) / D2);
    *grad = L_.transpose() * gy;
  }
  if (hess) {
    const double D3 = D2 * D;
    Eigen::Matrix3d Hy;
    Hy(0, 0) = 8 * a * (a * a + 3 * s) / D3;
    for (int i = 1; i < 3; ++i) {
      Hy(0, i) = Hy(i, 0) = -8 * y(i) * (3 * a * a + s) / D3;
      for (int j = 1; j < 3; ++j) Hy(i, j) = 8 * a * ((i == j ? D : 0.0) + 4 * y(i) * y(j)) / D3;
    }
    *hess = L_.transpose() * Hy * L_;
  }
  return true;
}

Reciprocal::Reciprocal(Eigen::VectorXd c, double scale, double d) : c_(std::move(c)), scale_(scale), d_(d) {}

bool Reciprocal::evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                          Eigen::MatrixXd* hess) const {
  const double u = c_.dot(x) + d_;
  if (!(u > 0)) return false;
  value = scale_ / u;
  if (grad) *grad = (-scale_ / (u * u)) * c_;
  if (hess) *hess = (2 * scale_ / (u * u * u)) * c_ * c_.transpose();
  return true;
}

FeasibleSet FeasibleSet::from(const Scenario& s) {
  FeasibleSet f;
  f.p_total = s.p_total();
  f.link_min = s.options().link_min;
  f.link_max = s.options().link_max;
  f.anchor_caps = s.options().anchor_caps;
  return f;
}

bool FeasibleSet::nonempty(int na, int nb) const {
  Eigen::MatrixXd lo = Eigen::MatrixXd::Zero(na, nb);
  if (link_min) lo = link_min->cwiseMax(0.0);
  if (link_max && ((*link_max).array() < lo.array()).any()) return false;
  if (lo.sum() > p_total) return false;
  if (anchor_caps && ((lo.colwise().sum().transpose() - *anchor_caps).array() > 0).any()) return false;
  return true;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded_metric:
      return "unbounded-metric";
    case SolveStatus::max_iter:
      return "max-iter";
  }
  return "unknown";
}

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::speb_sum:
      return "speb";
    case ObjectiveKind::mdpeb_sum:
      return "mdpeb";
    case ObjectiveKind::robust_speb_sum:
      return "robust-speb";
    case ObjectiveKind::robust_mdpeb_sum:
      return "robust-mdpeb";
    case ObjectiveKind::total_power:
      return "energy";
    case ObjectiveKind::minmax:
      return "minmax";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(const std::string& name) {
  if (name == "speb" || name == "speb-sum") return ObjectiveKind::speb_sum;
  if (name == "mdpeb" || name == "mdpeb-sum") return ObjectiveKind::mdpeb_sum;
  if (name == "robust-speb" || name == "robust-speb-sum") return ObjectiveKind::robust_speb_sum;
  if (name == "robust-mdpeb" || name == "robust-mdpeb-sum") return ObjectiveKind::robust_mdpeb_sum;
  if (name == "energy" || name == "total-power") return ObjectiveKind::total_power;
  if (name == "minmax") return ObjectiveKind::minmax;
  throw InvalidInput("unknown objective '" + name + "'");
}

SolveReport solve_speb(const Scenario& s, const FeasibleSet& set, const SolverOptions& o) {
  return solve_speb_impl(s, set, o, false);
}

SolveReport solve_robust_speb(const Scenario& s, const FeasibleSet& set, const SolverOptions& o) {
  return solve_speb_impl(s, set, o, true);
}

SolveReport solve_mdpeb(const Scenario& s, const FeasibleSet& set, const SolverOptions& o) {
  return solve_mdpeb_impl(s, set, o, false);
}

SolveReport solve_robust_mdpeb(const Scenario& s, const FeasibleSet& set, const SolverOptions& o) {
  return solve_mdpeb_impl(s, set, o, true);
}

SolveReport solve_energy_min(const Scenario& s, const QosTargets& qos, Metric metric, const SolverOptions& o) {
  const auto t0 = Clock::now();
  const Layout lay{s.n_agents(), s.n_anchors()};
  if (qos.gamma.size() != lay.na) throw InvalidInput("one QoS target per agent required");
  if (!(qos.gamma.array() > 0).all()) throw InvalidInput("QoS targets must be positive");
  if (!all_localizable(s)) return early_report(s, SolveStatus::infeasible);
  FeasibleSet set = FeasibleSet::from(s);
  set.p_total = kInf;

  // Start from the uniform pattern scaled until every target holds with margin.
  const Eigen::VectorXd lo = lower_bounds(set, lay, 1.0);
  const PowerAllocation ones = PowerAllocation::Ones(lay.na, lay.nb);
  double scale = 0;
  for (int k = 0; k < lay.na; ++k) {
    const Efim J = build_efim(s, ones, k);
    const double m = metric == Metric::speb ? speb(J) : mdpeb(J);
    scale = std::max(scale, (metric == Metric::speb ? 2.0 : 4.0) * m / qos.gamma(k));
  }
  const int extra = metric == Metric::mdpeb ? lay.na : 0;
  const int n = lay.links() + extra;
  barrier::Program p(n);
  add_polytope(p, set, lay, 1.0, false);
  Eigen::VectorXd guess(n);
  guess.head(lay.links()) = lo.array() + scale;
  if (set.link_max)
    for (int i = 0; i < lay.links(); ++i) {
      const double up = set.link_max->data()[i];
      if (guess(i) >= up) guess(i) = (lo(i) + up) / 2;
    }
  for (int k = 0; k < lay.na; ++k) {
    const MomentMap L = moment_map(s, k, false);
    if (metric == Metric::speb) {
      barrier::SmoothConstraint con;
      con.term = trace_inverse_term(L, lay, k);
      con.linear.rhs = qos.gamma(k);
      p.constraints.push_back(std::move(con));
    } else {
      const int r = lay.links() + k;
      p.cones.push_back(moment_cone(L, lay, k, r));
      p.rows.push_back(epigraph_row(L, lay, k, r, -1, -2.0 / qos.gamma(k)));
      const Eigen::Vector3d y = L * guess.segment(k * lay.nb, lay.nb);
      guess(r) = (y(0) + y.tail<2>().norm()) / 2;
    }
  }
  p.cost.head(lay.links()).setOnes();
  const auto res = barrier::solve(p, guess, barrier_options(o));
  return finish(s, res, lay, 1.0, nullptr, ObjectiveKind::total_power, metric, t0);
}

SolveReport solve_minmax(const Scenario& s, const FeasibleSet& set, Metric metric, const SolverOptions& o) {
  const auto t0 = Clock::now();
  if (!all_localizable(s)) return early_report(s, SolveStatus::unbounded_metric);
  if (!set.nonempty(s.n_agents(), s.n_anchors())) return early_report(s, SolveStatus::infeasible);
  const Layout lay{s.n_agents(), s.n_anchors()};
  const double unit = set.p_total;
  const Eigen::VectorXd links = interior_links(set, lay, unit, 1.0);

  if (metric == Metric::speb) {
    const int g = lay.links();
    barrier::Program p(g + 1);
    add_polytope(p, set, lay, unit, true);
    double worst = 0;
    for (int k = 0; k < lay.na; ++k) {
      const MomentMap L = moment_map(s, k, false);
      barrier::SmoothConstraint con;
      con.term = trace_inverse_term(L, lay, k);
      con.linear.index = {g};
      con.linear.coef = {-1.0};
      p.constraints.push_back(std::move(con));
      worst = std::max(worst, speb_from_moments<double>(L * links.segment(k * lay.nb, lay.nb)));
    }
    p.cost(g) = 1.0;
    Eigen::VectorXd guess(g + 1);
    guess.head(g) = links;
    guess(g) = std::isfinite(worst) ? 2 * worst + 1 : 1.0;
    const auto res = barrier::solve(p, guess, barrier_options(o));
    return finish(s, res, lay, unit, &set, ObjectiveKind::minmax, metric, t0);
  }

  const int tau = lay.links() + lay.na;
  barrier::Program p(tau + 1);
  add_polytope(p, set, lay, unit, true);
  Eigen::VectorXd guess(tau + 1);
  guess.head(lay.links()) = links;
  double margin = kInf;
  for (int k = 0; k < lay.na; ++k) {
    const int r = lay.links() + k;
    const MomentMap L = moment_map(s, k, false);
    p.cones.push_back(moment_cone(L, lay, k, r));
    p.rows.push_back(epigraph_row(L, lay, k, r, tau, 0.0));
    const Eigen::Vector3d y = L * links.segment(k * lay.nb, lay.nb);
    guess(r) = (y(0) + y.tail<2>().norm()) / 2;
    margin = std::min(margin, y(0) - guess(r));
  }
  p.lower(tau) = 0.0;
  p.objective.push_back({{tau}, std::make_shared<Reciprocal>(Eigen::VectorXd::Ones(1), 2.0)});
  guess(tau) = margin > 0 ? margin / 2 : 1e-3;
  const auto res = barrier::solve(p, guess, barrier_options(o));
  return finish(s, res, lay, unit, &set, ObjectiveKind::minmax, metric, t0);
}

SolveReport solve(const Scenario& s, ObjectiveKind kind, const FeasibleSet& set, const SolverOptions& o,
                  Metric minmax_metric) {
  switch (kind) {
    case ObjectiveKind::speb_sum:
      return solve_speb(s, set, o);
    case ObjectiveKind::mdpeb_sum:
      return solve_mdpeb(s, set, o);
    case ObjectiveKind::robust_speb_sum:
      return solve_robust_speb(s, set, o);
    case ObjectiveKind::robust_mdpeb_sum:
      return solve_robust_mdpeb(s, set, o);
    case ObjectiveKind::minmax:
      return solve_minmax(s, set, minmax_metric, o);
    case ObjectiveKind::total_power:
      break;
  }
  throw InvalidInput("total-power objective needs QoS targets; use solve_energy_min");
}

double evaluate_objective(const Scenario& s, ObjectiveKind kind, const PowerAllocation& x, Metric metric) {
  switch (kind) {
    case ObjectiveKind::speb_sum:
      return total_speb(s, x);
    case ObjectiveKind::mdpeb_sum:
      return total_mdpeb(s, x);
    case ObjectiveKind::robust_speb_sum:
      return total_robust_speb(s, x);
    case ObjectiveKind::robust_mdpeb_sum:
      return total_robust_mdpeb(s, x);
    case ObjectiveKind::total_power:
      return x.sum();
    case ObjectiveKind::minmax: {
      double worst = 0;
      for (int k = 0; k < s.n_agents(); ++k) {
        const Efim J = build_efim(s, x, k);
        worst = std::max(worst, metric == Metric::speb ? speb(J) : mdpeb(J));
      }
      return worst;
    }
  }
  return kInf;
}

}  // namespace locpower
