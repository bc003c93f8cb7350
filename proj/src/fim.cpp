#include "locpower/fim.hpp"

namespace locpower {

Efim build_efim(const Scenario& scenario, const PowerAllocation& alloc, int agent) {
  Efim J = Efim::Zero();
  for (int j = 0; j < scenario.n_anchors(); ++j) {
    J += scenario.xi()(agent, j) * alloc(agent, j) * direction_matrix(scenario.angles()(agent, j));
  }
  return J;
}

std::vector<Efim> build_efims(const Scenario& scenario, const PowerAllocation& alloc) {
  std::vector<Efim> out;
  out.reserve(static_cast<std::size_t>(scenario.n_agents()));
  for (int k = 0; k < scenario.n_agents(); ++k) out.push_back(build_efim(scenario, alloc, k));
  return out;
}

PowerAllocation uniform_allocation(const Scenario& scenario) {
  const double each = scenario.p_total() / (static_cast<double>(scenario.n_agents()) * scenario.n_anchors());
  return PowerAllocation::Constant(scenario.n_agents(), scenario.n_anchors(), each);
}

void check_feasible(const Scenario& s, const PowerAllocation& x, double tol) {
  if (x.rows() != s.n_agents() || x.cols() != s.n_anchors()) throw InvalidInput("allocation must be N_a x N_b");
  if (!x.allFinite() || (x.array() < -tol).any()) throw InvalidInput("allocation must be nonnegative");
  const double scale = std::max(1.0, s.p_total());
  if (x.sum() > s.p_total() + tol * scale) throw InvalidInput("allocation exceeds the total budget");
  const auto& o = s.options();
  if (o.anchor_caps && ((x.colwise().sum().transpose() - *o.anchor_caps).array() > tol * scale).any())
    throw InvalidInput("allocation exceeds a per-anchor cap");
  if (o.link_min && ((*o.link_min - x).array() > tol * scale).any()) throw InvalidInput("allocation below a link minimum");
  if (o.link_max && ((x - *o.link_max).array() > tol * scale).any()) throw InvalidInput("allocation above a link maximum");
}

std::vector<Efim> async_equivalent(const Scenario& scenario, const PowerAllocation& alloc) {
  const auto& agent_budget = scenario.options().agent_budget;
  if (!agent_budget) throw InvalidInput("round-trip mode needs an agent budget");
  const double factor = async_scale(scenario.p_total(), *agent_budget);
  auto efims = build_efims(scenario, alloc);
  for (auto& J : efims) J *= factor;
  return efims;
}

bool is_localizable(const Scenario& scenario, int agent, double tol) {
  const auto& phi = scenario.angles();
  for (int i = 0; i < scenario.n_anchors(); ++i)
    for (int j = i + 1; j < scenario.n_anchors(); ++j)
      if (std::abs(std::sin(phi(agent, i) - phi(agent, j))) > tol) return true;
  return false;
}

double total_speb(const Scenario& scenario, const PowerAllocation& alloc) {
  double sum = 0;
  for (int k = 0; k < scenario.n_agents(); ++k) sum += speb(build_efim(scenario, alloc, k));
  return sum;
}

double total_mdpeb(const Scenario& scenario, const PowerAllocation& alloc) {
  double sum = 0;
  for (int k = 0; k < scenario.n_agents(); ++k) sum += mdpeb(build_efim(scenario, alloc, k));
  return sum;
}

}  // namespace locpower
