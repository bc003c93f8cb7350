#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace locpower {

/// Raised for malformed problem instances and violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Position = Eigen::Vector2d;

/// Polar decomposition of the agent-to-anchor baseline.
struct LinkGeometry {
  double angle;     // radians, [0, 2*pi)
  double distance;  // meters, > 0
};

double canonical_angle(double phi);

LinkGeometry link_geometry(const Position& agent, const Position& anchor);

/// Worst case of the channel coefficient over [xi_hat - eps, xi_hat + eps].
double worst_case_xi(double xi_hat, double eps_xi);

/// Per-link uncertainty half-widths. eps_phi is always populated; eps_d is
/// kept when the angle widths were derived from a position disc.
struct UncertaintyModel {
  Eigen::MatrixXd eps_xi;
  Eigen::MatrixXd eps_phi;
  std::optional<double> eps_d;

  /// eps_phi(k,j) = asin(eps_d / d(k,j)); requires eps_d < d(k,j) everywhere.
  static UncertaintyModel from_position_disc(const Eigen::MatrixXd& distances, double eps_d,
                                             double eps_xi = 0.0);
  static UncertaintyModel from_angles(const Eigen::MatrixXd& eps_phi, const Eigen::MatrixXd& eps_xi);

  /// sin(eps_phi), the Q-matrix shift.
  Eigen::MatrixXd delta() const;
};

/// Normalized uncertainty set size 2*eps_d / side and its inverse.
inline double normalized_uncertainty(double eps_d, double region_side) { return 2 * eps_d / region_side; }
inline double disc_radius_from_normalized(double eps, double region_side) { return eps * region_side / 2; }

struct ScenarioOptions {
  std::optional<UncertaintyModel> uncertainty;
  std::optional<Eigen::VectorXd> anchor_caps;  // sum_k x(k,j) <= caps(j)
  std::optional<Eigen::MatrixXd> link_min;     // per-link lower bounds
  std::optional<Eigen::MatrixXd> link_max;     // per-link upper bounds
  std::optional<double> agent_budget;          // round-trip mode: agent-side total
  std::optional<std::uint64_t> seed;
};

/// An immutable problem instance: geometry, nominal channel coefficients,
/// budget and optional uncertainty / extra linear constraints.
class Scenario {
 public:
  Scenario(std::vector<Position> agents, std::vector<Position> anchors, Eigen::MatrixXd xi,
           double p_total, ScenarioOptions options = {});

  int n_agents() const { return static_cast<int>(agents_.size()); }
  int n_anchors() const { return static_cast<int>(anchors_.size()); }
  const std::vector<Position>& agents() const { return agents_; }
  const std::vector<Position>& anchors() const { return anchors_; }

  /// Nominal (estimated) channel coefficients, N_a x N_b.
  const Eigen::MatrixXd& xi() const { return xi_; }
  const Eigen::MatrixXd& angles() const { return angles_; }
  const Eigen::MatrixXd& distances() const { return distances_; }
  double p_total() const { return p_total_; }
  const ScenarioOptions& options() const { return options_; }
  const std::optional<UncertaintyModel>& uncertainty() const { return options_.uncertainty; }

  /// xi_hat - eps_xi (equals xi() without an uncertainty model).
  Eigen::MatrixXd worst_case_xi() const;
  /// sin(eps_phi) per link (zeros without an uncertainty model).
  Eigen::MatrixXd delta() const;

  Scenario with_budget(double p_total) const;
  Scenario with_uncertainty(std::optional<UncertaintyModel> model) const;
  Scenario with_channel(Eigen::MatrixXd xi) const;
  /// Single-agent instance for agent k with the given budget; drops
  /// constraints that couple agents.
  Scenario agent_subproblem(int k, double p_total) const;

 private:
  void validate() const;

  std::vector<Position> agents_;
  std::vector<Position> anchors_;
  Eigen::MatrixXd xi_;
  Eigen::MatrixXd angles_;
  Eigen::MatrixXd distances_;
  double p_total_;
  ScenarioOptions options_;
};

/// One agent at the origin with anchors at the given angles (radius 1 by
/// default) and explicit channel coefficients.
Scenario single_agent_scenario(const std::vector<double>& angles, const std::vector<double>& xi,
                               double p_total = 1.0, double radius = 1.0);

// ---------------------------------------------------------------------------
// Random generation

enum class AgentLayout { uniform, center };
enum class AnchorLayout { uniform, circle };

/// Named layouts: uniform (everything uniform), fixed-circle (anchors evenly
/// on a circle, agents uniform), center-agent (agent at the center, anchors
/// uniform).
enum class Placement { uniform, fixed_circle, center_agent };

/// xi = zeta / d^(2 beta) with zeta ~ U[zeta_min, zeta_max]. The default is
/// the free-space rule xi = 1e3 / d^2.
struct PathLossModel {
  double zeta_min = 1e3;
  double zeta_max = 1e3;
  double beta = 1.0;
};

struct ScenarioConfig {
  int n_agents = 1;
  int n_anchors = 10;
  double region_side = 20.0;  // [-side/2, side/2]^2
  AgentLayout agents = AgentLayout::uniform;
  AnchorLayout anchors = AnchorLayout::uniform;
  double circle_radius = 9.0;
  PathLossModel channel;
  double min_separation = 0.1;  // r0
  double p_total = 1.0;
  std::optional<double> eps_d;  // position-disc radius, enables uncertainty
  double eps_xi = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint32_t substream = 0;

  ScenarioConfig& with_placement(Placement p);
};

/// Node positions and fading draws before they are folded into a Scenario.
struct NetworkDraw {
  std::vector<Position> agents;
  std::vector<Position> anchors;
  Eigen::MatrixXd zeta;
};

NetworkDraw draw_network(const ScenarioConfig& config);
Scenario generate_scenario(const ScenarioConfig& config);

/// Channel matrix for given positions under a path-loss model with known zeta.
Eigen::MatrixXd path_loss_channel(const std::vector<Position>& agents,
                                  const std::vector<Position>& anchors,
                                  const Eigen::MatrixXd& zeta, double beta);

// ---------------------------------------------------------------------------
// JSON

Scenario parse_scenario_json(const std::string& text);
Scenario read_scenario_file(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace locpower
