#include "locpower/twostage.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <memory>

#include "locpower/barrier.hpp"
#include "locpower/robust.hpp"

namespace locpower {

namespace {

// T / x for a single scalar variable.
class Inverse : public barrier::SmoothFunction {
 public:
  explicit Inverse(double T) : T_(T) {}
  bool evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const override {
    const double u = x(0);
    if (!(u > 0)) return false;
    value = T_ / u;
    if (grad) *grad = Eigen::VectorXd::Constant(1, -T_ / (u * u));
    if (hess) *hess = Eigen::MatrixXd::Constant(1, 1, 2 * T_ / (u * u * u));
    return true;
  }

 private:
  double T_;
};

}  // namespace

StageOneSolution stage1(const Scenario& s, int k, StageMode mode, const SolverOptions& o) {
  if (k < 0 || k >= s.n_agents()) throw InvalidInput("agent index out of range");
  if (!is_localizable(s, k)) throw InvalidInput("agent " + std::to_string(k) + " is not localizable");
  const Scenario sub = s.agent_subproblem(k, 1.0);
  const FeasibleSet set = FeasibleSet::from(sub);
  const SolveReport rep = mode == StageMode::speb ? solve_robust_speb(sub, set, o) : solve_robust_mdpeb(sub, set, o);
  StageOneSolution out;
  out.agent = k;
  out.rho = rep.allocation.row(0).transpose();
  out.T = rep.objective;
  out.status = rep.status;
  out.kkt_residual = rep.kkt_residual;
  out.iterations = rep.iterations;
  return out;
}

Eigen::VectorXd stage2_closed_form(const Eigen::VectorXd& T, double p_total) {
  if (T.size() == 0) throw InvalidInput("stage two needs at least one agent");
  if (!(T.array() > 0).all() || !T.allFinite()) throw InvalidInput("stage-two costs must be positive and finite");
  const Eigen::VectorXd root = T.cwiseSqrt();
  return p_total * root / root.sum();
}

StageTwoSolution stage2_with_anchor_caps(const Scenario& s, const std::vector<StageOneSolution>& one,
                                         const Eigen::VectorXd& caps, const SolverOptions& o) {
  const int na = static_cast<int>(one.size());
  const int nb = s.n_anchors();
  if (caps.size() != nb) throw InvalidInput("one cap per anchor required");
  const double unit = s.p_total();
  barrier::Program p(na);
  p.lower.setZero();
  barrier::SparseRow budget;
  for (int k = 0; k < na; ++k) {
    budget.index.push_back(k);
    budget.coef.push_back(1.0);
    p.objective.push_back({{k}, std::make_shared<Inverse>(one[static_cast<std::size_t>(k)].T)});
  }
  budget.rhs = 1.0;
  p.rows.push_back(budget);
  for (int j = 0; j < nb; ++j) {
    barrier::SparseRow row;
    for (int k = 0; k < na; ++k) {
      const double r = one[static_cast<std::size_t>(k)].rho(j);
      if (r == 0) continue;
      row.index.push_back(k);
      row.coef.push_back(r);
    }
    row.rhs = caps(j) / unit;
    if (!row.index.empty()) p.rows.push_back(std::move(row));
  }
  barrier::Options bo;
  bo.gap_tol = o.tol;
  bo.max_iterations = o.max_iterations;
  const auto res = barrier::solve(p, Eigen::VectorXd::Constant(na, 0.99 / na), bo);

  StageTwoSolution out;
  out.power = unit * res.v;
  switch (res.status) {
    case barrier::Status::optimal:
      out.status = SolveStatus::optimal;
      break;
    case barrier::Status::infeasible:
      out.status = SolveStatus::infeasible;
      break;
    default:
      out.status = SolveStatus::max_iter;
  }
  out.objective = 0;
  for (int k = 0; k < na; ++k) out.objective += one[static_cast<std::size_t>(k)].T / out.power(k);
  return out;
}

std::vector<StageOneSolution> stage1_all(const Scenario& s, StageMode mode, const TwoStageOptions& o) {
  std::vector<StageOneSolution> out(static_cast<std::size_t>(s.n_agents()));
  if (o.execution == Execution::parallel) {
    std::vector<std::future<StageOneSolution>> jobs;
    for (int k = 0; k < s.n_agents(); ++k)
      jobs.push_back(std::async(std::launch::async, [&s, k, mode, &o] { return stage1(s, k, mode, o.solver); }));
    for (std::size_t k = 0; k < jobs.size(); ++k) out[k] = jobs[k].get();
  } else {
    for (int k = 0; k < s.n_agents(); ++k) out[static_cast<std::size_t>(k)] = stage1(s, k, mode, o.solver);
  }
  return out;
}

SolveReport algorithm1(const Scenario& s, StageMode mode, const TwoStageOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  if (s.options().link_min || s.options().link_max)
    throw InvalidInput("two-stage decomposition does not support per-link bounds");
  const auto one = stage1_all(s, mode, o);

  SolveReport rep;
  rep.allocation = PowerAllocation::Zero(s.n_agents(), s.n_anchors());
  rep.status = SolveStatus::optimal;
  Eigen::VectorXd T(s.n_agents());
  for (const auto& st : one) {
    T(st.agent) = st.T;
    rep.iterations += st.iterations;
    rep.kkt_residual = std::max(rep.kkt_residual, st.kkt_residual);
    if (st.status != SolveStatus::optimal) rep.status = st.status;
  }
  if (rep.status == SolveStatus::optimal) {
    Eigen::VectorXd P;
    if (s.options().anchor_caps) {
      const auto two = stage2_with_anchor_caps(s, one, *s.options().anchor_caps, o.solver);
      rep.status = two.status;
      P = two.power;
    } else {
      P = stage2_closed_form(T, s.p_total());
    }
    for (const auto& st : one) rep.allocation.row(st.agent) = P(st.agent) * st.rho.transpose();
  }
  const auto kind = mode == StageMode::speb ? ObjectiveKind::robust_speb_sum : ObjectiveKind::robust_mdpeb_sum;
  rep.objective = rep.status == SolveStatus::optimal ? evaluate_objective(s, kind, rep.allocation)
                                                     : std::numeric_limits<double>::infinity();
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace locpower
