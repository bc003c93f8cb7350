#include "locpower/robust.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "locpower/random.hpp"
#include "locpower/solver.hpp"

namespace locpower {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RobustEfim finish(const Vector3<double>& y) {
  RobustEfim e;
  e.m = from_moments(y);
  const double r = y.tail<2>().norm();
  e.mu1 = (y(0) + r) / 2;
  e.mu2 = (y(0) - r) / 2;
  return e;
}

}  // namespace

QMatrix q_matrix(double phi_hat, double eps_phi) {
  if (!(eps_phi >= 0) || !(eps_phi < std::numbers::pi / 2)) throw InvalidInput("eps_phi must lie in [0, pi/2)");
  const double delta = std::sin(eps_phi);
  return {direction_matrix(phi_hat) - delta * Matrix2<double>::Identity(), delta};
}

MomentMap moment_map(const Scenario& s, int agent, const Eigen::MatrixXd& weight, const Eigen::MatrixXd& delta) {
  const int nb = s.n_anchors();
  MomentMap L(3, nb);
  for (int j = 0; j < nb; ++j) {
    const double w = weight(agent, j);
    const double phi2 = 2 * s.angles()(agent, j);
    L(0, j) = w * (1 - 2 * delta(agent, j));
    L(1, j) = w * std::cos(phi2);
    L(2, j) = w * std::sin(phi2);
  }
  return L;
}

MomentMap moment_map(const Scenario& s, int agent, bool robust) {
  if (!robust) return moment_map(s, agent, s.xi(), Eigen::MatrixXd::Zero(s.n_agents(), s.n_anchors()));
  return moment_map(s, agent, s.worst_case_xi(), s.delta());
}

RobustEfim robust_efim(const Scenario& s, const PowerAllocation& x, int agent, const Eigen::MatrixXd& delta) {
  const MomentMap L = moment_map(s, agent, s.worst_case_xi(), delta);
  return finish(L * x.row(agent).transpose());
}

RobustEfim robust_efim(const Scenario& s, const PowerAllocation& x, int agent) {
  return robust_efim(s, x, agent, s.delta());
}

std::vector<RobustEfim> robust_efims(const Scenario& s, const PowerAllocation& x) {
  std::vector<RobustEfim> out;
  const Eigen::MatrixXd delta = s.delta();
  for (int k = 0; k < s.n_agents(); ++k) out.push_back(robust_efim(s, x, k, delta));
  return out;
}

bool psd_condition(const RobustEfim& e) { return e.mu2 >= -1e-12; }

double robust_speb(const RobustEfim& e) {
  if (!(e.mu2 > 0)) return kInf;
  return speb(e.m);
}

double robust_mdpeb(const RobustEfim& e) {
  if (!(e.mu2 > 0) || is_singular(e.m)) return kInf;
  return 1 / e.mu2;
}

double total_robust_speb(const Scenario& s, const PowerAllocation& x) {
  double sum = 0;
  for (const auto& e : robust_efims(s, x)) sum += robust_speb(e);
  return sum;
}

double total_robust_mdpeb(const Scenario& s, const PowerAllocation& x) {
  double sum = 0;
  for (const auto& e : robust_efims(s, x)) sum += robust_mdpeb(e);
  return sum;
}

DominanceReport robust_bound_dominates(const Scenario& s, const PowerAllocation& x, long n_samples,
                                       std::uint64_t seed, const std::optional<Eigen::MatrixXd>& delta_override) {
  const int na = s.n_agents();
  const int nb = s.n_anchors();
  const Eigen::MatrixXd delta = delta_override ? *delta_override : s.delta();
  const Eigen::MatrixXd eps_phi =
      s.uncertainty() ? s.uncertainty()->eps_phi : Eigen::MatrixXd::Zero(na, nb);
  const Eigen::MatrixXd eps_xi = s.uncertainty() ? s.uncertainty()->eps_xi : Eigen::MatrixXd::Zero(na, nb);

  std::vector<double> surrogate(static_cast<std::size_t>(na));
  for (int k = 0; k < na; ++k) {
    const auto e = robust_efim(s, x, k, delta);
    if (!psd_condition(e)) throw InvalidInput("robust surrogate is not PSD");
    surrogate[static_cast<std::size_t>(k)] = robust_speb(e);
  }

  DominanceReport rep;
  rep.min_slack = kInf;
  rep.max_slack = -kInf;
  double worst = 0;
  Philox4x32 eng(seed, 0x5a3d);
  Eigen::MatrixXd phi(na, nb);
  Eigen::MatrixXd xi(na, nb);
  for (long n = 0; n < n_samples; ++n) {
    for (int k = 0; k < na; ++k) {
      for (int j = 0; j < nb; ++j) {
        const double ph = s.angles()(k, j);
        const double ep = eps_phi(k, j);
        const double xh = s.xi()(k, j);
        const double ex = eps_xi(k, j);
        if (n < 4) {
          phi(k, j) = (n & 1) ? ph + ep : ph - ep;
          xi(k, j) = (n & 2) ? xh + ex : xh - ex;
        } else {
          if (uniform01(eng) < 0.5) {
            phi(k, j) = uniform(eng, ph - ep, ph + ep);
          } else {
            phi(k, j) = uniform01(eng) < 0.5 ? ph - ep : ph + ep;
          }
          xi(k, j) = uniform01(eng) < 0.5 ? uniform(eng, xh - ex, xh + ex) : xh - ex;
        }
      }
    }
    for (int k = 0; k < na; ++k) {
      Efim J = Efim::Zero();
      for (int j = 0; j < nb; ++j) J += xi(k, j) * x(k, j) * direction_matrix(phi(k, j));
      const double realized = speb(J);
      const double sur = surrogate[static_cast<std::size_t>(k)];
      const double slack = sur - realized;
      rep.min_slack = std::min(rep.min_slack, slack);
      rep.max_slack = std::max(rep.max_slack, slack);
      ++rep.samples;
      if (realized > sur * (1 + 1e-12)) {
        ++rep.violations;
        const double excess = realized / sur;
        if (excess > worst) {
          worst = excess;
          rep.witness = DominanceWitness{k, phi, xi, realized, sur};
        }
      }
    }
  }
  return rep;
}

double delta_max_residual(double d, double ratio) {
  const double d2 = d * d;
  return 4 * d2 * d2 - 4 * d2 - 2 * ratio * d + 1;
}

double delta_max(double ratio) {
  if (!(ratio >= 1)) throw InvalidInput("zeta ratio must be >= 1");
  const double lo0 = 1e-9;
  const double hi0 = 1 - 1e-9;
  const int n_scan = 4096;
  double lo = lo0;
  double hi = hi0;
  double prev = delta_max_residual(lo0, ratio);
  for (int i = 1; i <= n_scan; ++i) {
    const double d = lo0 + (hi0 - lo0) * i / n_scan;
    const double f = delta_max_residual(d, ratio);
    if ((prev > 0) != (f > 0)) {
      lo = lo0 + (hi0 - lo0) * (i - 1) / n_scan;
      hi = d;
      break;
    }
    prev = f;
  }
  const bool lo_positive = delta_max_residual(lo, ratio) > 0;
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if ((delta_max_residual(mid, ratio) > 0) == lo_positive) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(delta_max_residual(lo, ratio)) <= std::abs(delta_max_residual(hi, ratio)) ? lo : hi;
}

double psd_frequency(const PsdFrequencyConfig& c) {
  if (c.trials < 1) throw InvalidInput("trials must be >= 1");
  int hits = 0;
  for (int t = 0; t < c.trials; ++t) {
    ScenarioConfig sc;
    sc.n_agents = 1;
    sc.n_anchors = c.n_anchors;
    sc.region_side = c.region_side;
    sc.channel = PathLossModel{c.zeta_min, c.zeta_max, c.beta};
    sc.seed = c.seed;
    sc.stream = static_cast<std::uint64_t>(t);
    const Scenario base = generate_scenario(sc);
    const int nb = base.n_anchors();
    const Scenario s = base.with_uncertainty(UncertaintyModel::from_angles(
        Eigen::MatrixXd::Constant(1, nb, c.eps_phi), Eigen::MatrixXd::Zero(1, nb)));
    const auto rep = solve_robust_speb(s, FeasibleSet::from(s));
    if (rep.status != SolveStatus::optimal) continue;
    if (psd_condition(robust_efim(s, rep.allocation, 0))) ++hits;
  }
  return static_cast<double>(hits) / c.trials;
}

}  // namespace locpower
