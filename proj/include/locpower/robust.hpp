#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "locpower/fim.hpp"
#include "locpower/netmodel.hpp"

namespace locpower {

/// Q(phi_hat) = u u^T - delta I with delta = sin(eps_phi).
struct QMatrix {
  Matrix2<double> q;
  double delta;
};

QMatrix q_matrix(double phi_hat, double eps_phi);

/// Rows map one agent's link powers to the moments (a, z1, z2) of its
/// (robust) EFIM: w (1 - 2 delta), w cos 2phi, w sin 2phi. The nominal map
/// uses w = xi, delta = 0; the robust map uses w = xi - eps_xi, delta = sin eps_phi.
using MomentMap = Eigen::Matrix<double, 3, Eigen::Dynamic>;

MomentMap moment_map(const Scenario& scenario, int agent, bool robust);
MomentMap moment_map(const Scenario& scenario, int agent, const Eigen::MatrixXd& weight,
                     const Eigen::MatrixXd& delta);

/// Sum_j xi_check x Q(phi_hat) with its closed-form eigenvalues.
struct RobustEfim {
  Matrix2<double> m;
  double mu1;
  double mu2;
};

RobustEfim robust_efim(const Scenario& scenario, const PowerAllocation& alloc, int agent);
std::vector<RobustEfim> robust_efims(const Scenario& scenario, const PowerAllocation& alloc);

/// Robust EFIM with an explicit delta matrix in place of sin(eps_phi).
RobustEfim robust_efim(const Scenario& scenario, const PowerAllocation& alloc, int agent,
                       const Eigen::MatrixXd& delta);

/// mu2 >= -1e-12.
bool psd_condition(const RobustEfim& e);

/// tr(M^-1), +inf unless M is positive definite.
double robust_speb(const RobustEfim& e);
/// 1/mu2, +inf unless M is positive definite.
double robust_mdpeb(const RobustEfim& e);

double total_robust_speb(const Scenario& scenario, const PowerAllocation& alloc);
double total_robust_mdpeb(const Scenario& scenario, const PowerAllocation& alloc);

struct DominanceWitness {
  int agent = 0;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd xi;
  double realized = 0;
  double surrogate = 0;
};

struct DominanceReport {
  long samples = 0;
  long violations = 0;
  double min_slack = 0;  // min over samples and agents of surrogate - realized
  double max_slack = 0;
  std::optional<DominanceWitness> witness;  // worst violation
  bool holds() const { return violations == 0; }
};

/// Samples parameter realizations inside the uncertainty box and compares
/// each agent's realized SPEB with the robust surrogate. The first four
/// samples are the joint box corners; later ones draw each link's angle
/// uniformly or at an interval end and xi uniformly or at its lower end.
/// `delta` replaces sin(eps_phi) in the surrogate when given. Throws if the
/// surrogate is not PSD for some agent.
DominanceReport robust_bound_dominates(const Scenario& scenario, const PowerAllocation& alloc, long n_samples,
                                       std::uint64_t seed,
                                       const std::optional<Eigen::MatrixXd>& delta = std::nullopt);

/// 4 d^4 - 4 d^2 - 2 ratio d + 1.
double delta_max_residual(double delta, double ratio);

/// Smallest positive root of delta_max_residual on (0, 1); ratio >= 1.
double delta_max(double zeta_ratio);

struct PsdFrequencyConfig {
  int n_anchors = 10;
  double eps_phi = 0.0;  // radians, every link
  double zeta_min = 1e3;
  double zeta_max = 1e3;
  double beta = 1.0;
  double region_side = 20.0;
  int trials = 100;
  std::uint64_t seed = 0;
};

/// Fraction of random single-agent networks whose robust SPEB solution is
/// reported optimal with the PSD condition holding.
double psd_frequency(const PsdFrequencyConfig& config);

}  // namespace locpower
