#include "locpower/netmodel.hpp"

#include <cmath>
#include <numbers>

#include "locpower/random.hpp"

namespace locpower {

double canonical_angle(double phi) {
  constexpr double two_pi = 2 * std::numbers::pi;
  double a = std::fmod(phi, two_pi);
  if (a < 0) a += two_pi;
  if (a >= two_pi) a = 0;
  return a;
}

LinkGeometry link_geometry(const Position& agent, const Position& anchor) {
  const Eigen::Vector2d d = anchor - agent;
  const double dist = d.norm();
  if (!(dist > 0) || !std::isfinite(dist)) throw InvalidInput("degenerate link");
  return {canonical_angle(std::atan2(d.y(), d.x())), dist};
}

double worst_case_xi(double xi_hat, double eps_xi) {
  if (eps_xi < 0) throw InvalidInput("negative channel uncertainty");
  const double v = xi_hat - eps_xi;
  if (!(v > 0)) throw InvalidInput("uncertainty exceeds coefficient");
  return v;
}

UncertaintyModel UncertaintyModel::from_position_disc(const Eigen::MatrixXd& distances, double eps_d,
                                                      double eps_xi) {
  if (!(eps_d >= 0)) throw InvalidInput("eps_d must be nonnegative");
  UncertaintyModel m;
  m.eps_d = eps_d;
  m.eps_xi = Eigen::MatrixXd::Constant(distances.rows(), distances.cols(), eps_xi);
  m.eps_phi.resize(distances.rows(), distances.cols());
  for (Eigen::Index k = 0; k < distances.rows(); ++k) {
    for (Eigen::Index j = 0; j < distances.cols(); ++j) {
      if (!(eps_d < distances(k, j))) throw InvalidInput("eps_d must be smaller than every link distance");
      m.eps_phi(k, j) = std::asin(eps_d / distances(k, j));
    }
  }
  return m;
}

UncertaintyModel UncertaintyModel::from_angles(const Eigen::MatrixXd& eps_phi, const Eigen::MatrixXd& eps_xi) {
  UncertaintyModel m;
  m.eps_phi = eps_phi;
  m.eps_xi = eps_xi;
  return m;
}

Eigen::MatrixXd UncertaintyModel::delta() const { return eps_phi.array().sin().matrix(); }

Scenario::Scenario(std::vector<Position> agents, std::vector<Position> anchors, Eigen::MatrixXd xi,
                   double p_total, ScenarioOptions options)
    : agents_(std::move(agents)),
      anchors_(std::move(anchors)),
      xi_(std::move(xi)),
      p_total_(p_total),
      options_(std::move(options)) {
  if (agents_.empty() || anchors_.empty()) throw InvalidInput("scenario needs at least one agent and one anchor");
  angles_.resize(n_agents(), n_anchors());
  distances_.resize(n_agents(), n_anchors());
  for (int k = 0; k < n_agents(); ++k) {
    for (int j = 0; j < n_anchors(); ++j) {
      const auto g = link_geometry(agents_[k], anchors_[j]);
      angles_(k, j) = g.angle;
      distances_(k, j) = g.distance;
    }
  }
  validate();
}

void Scenario::validate() const {
  const auto na = n_agents();
  const auto nb = n_anchors();
  if (xi_.rows() != na || xi_.cols() != nb) throw InvalidInput("xi must be N_a x N_b");
  if (!(xi_.array() > 0).all() || !xi_.allFinite()) throw InvalidInput("channel coefficients must be positive");
  if (!(p_total_ > 0) || !std::isfinite(p_total_)) throw InvalidInput("budget must be positive");
  for (const auto& p : agents_)
    if (!p.allFinite()) throw InvalidInput("non-finite agent position");
  for (const auto& p : anchors_)
    if (!p.allFinite()) throw InvalidInput("non-finite anchor position");

  if (const auto& u = options_.uncertainty) {
    if (u->eps_phi.rows() != na || u->eps_phi.cols() != nb || u->eps_xi.rows() != na || u->eps_xi.cols() != nb)
      throw InvalidInput("uncertainty model must be N_a x N_b");
    if (!(u->eps_phi.array() >= 0).all() || !(u->eps_phi.array() < std::numbers::pi / 2).all())
      throw InvalidInput("eps_phi must lie in [0, pi/2)");
    if (!(u->eps_xi.array() >= 0).all()) throw InvalidInput("eps_xi must be nonnegative");
    if (!((xi_ - u->eps_xi).array() > 0).all()) throw InvalidInput("uncertainty exceeds coefficient");
  }
  if (const auto& caps = options_.anchor_caps) {
    if (caps->size() != nb || !(caps->array() > 0).all()) throw InvalidInput("anchor caps must be N_b positive values");
  }
  if (const auto& lo = options_.link_min) {
    if (lo->rows() != na || lo->cols() != nb || !(lo->array() >= 0).all())
      throw InvalidInput("link_min must be N_a x N_b and nonnegative");
  }
  if (const auto& hi = options_.link_max) {
    if (hi->rows() != na || hi->cols() != nb || !(hi->array() > 0).all())
      throw InvalidInput("link_max must be N_a x N_b and positive");
  }
  if (options_.agent_budget && !(*options_.agent_budget > 0)) throw InvalidInput("agent budget must be positive");
}

Eigen::MatrixXd Scenario::worst_case_xi() const {
  if (!options_.uncertainty) return xi_;
  return xi_ - options_.uncertainty->eps_xi;
}

Eigen::MatrixXd Scenario::delta() const {
  if (!options_.uncertainty) return Eigen::MatrixXd::Zero(n_agents(), n_anchors());
  return options_.uncertainty->delta();
}

Scenario Scenario::with_budget(double p_total) const {
  return Scenario(agents_, anchors_, xi_, p_total, options_);
}

Scenario Scenario::with_uncertainty(std::optional<UncertaintyModel> model) const {
  auto opts = options_;
  opts.uncertainty = std::move(model);
  return Scenario(agents_, anchors_, xi_, p_total_, opts);
}

Scenario Scenario::with_channel(Eigen::MatrixXd xi) const {
  return Scenario(agents_, anchors_, std::move(xi), p_total_, options_);
}

Scenario Scenario::agent_subproblem(int k, double p_total) const {
  if (k < 0 || k >= n_agents()) throw InvalidInput("agent index out of range");
  ScenarioOptions opts;
  opts.seed = options_.seed;
  if (const auto& u = options_.uncertainty) {
    UncertaintyModel sub;
    sub.eps_phi = u->eps_phi.row(k);
    sub.eps_xi = u->eps_xi.row(k);
    sub.eps_d = u->eps_d;
    opts.uncertainty = std::move(sub);
  }
  return Scenario({agents_[k]}, anchors_, xi_.row(k), p_total, std::move(opts));
}

Scenario single_agent_scenario(const std::vector<double>& angles, const std::vector<double>& xi, double p_total,
                               double radius) {
  if (angles.size() != xi.size()) throw InvalidInput("angles and xi differ in length");
  std::vector<Position> anchors;
  anchors.reserve(angles.size());
  for (double a : angles) anchors.emplace_back(radius * std::cos(a), radius * std::sin(a));
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(xi.size()));
  for (std::size_t j = 0; j < xi.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = xi[j];
  return Scenario({Position::Zero()}, std::move(anchors), std::move(x), p_total);
}

ScenarioConfig& ScenarioConfig::with_placement(Placement p) {
  switch (p) {
    case Placement::uniform:
      agents = AgentLayout::uniform;
      anchors = AnchorLayout::uniform;
      break;
    case Placement::fixed_circle:
      agents = AgentLayout::uniform;
      anchors = AnchorLayout::circle;
      break;
    case Placement::center_agent:
      agents = AgentLayout::center;
      anchors = AnchorLayout::uniform;
      break;
  }
  return *this;
}

namespace {

constexpr int kMaxRejections = 100000;

bool far_from(const Position& p, const std::vector<Position>& others, double r) {
  for (const auto& q : others)
    if ((p - q).norm() < r) return false;
  return true;
}

}  // namespace

NetworkDraw draw_network(const ScenarioConfig& c) {
  if (c.n_agents < 1 || c.n_anchors < 1) throw InvalidInput("scenario needs at least one agent and one anchor");
  if (!(c.region_side > 0)) throw InvalidInput("region side must be positive");
  if (c.channel.zeta_min <= 0 || c.channel.zeta_max < c.channel.zeta_min || c.channel.beta <= 0)
    throw InvalidInput("invalid path-loss model");

  Philox4x32 eng(c.seed, c.stream, c.substream);
  const Position center = Position::Zero();
  // Anchors keep eps_d + r0 from every nominal agent so the true position,
  // anywhere in the disc, stays at least r0 away.
  const double agent_anchor_gap = c.min_separation + c.eps_d.value_or(0.0);

  NetworkDraw net;
  if (c.anchors == AnchorLayout::circle) {
    for (int j = 0; j < c.n_anchors; ++j) {
      const double a = 2 * std::numbers::pi * j / c.n_anchors;
      net.anchors.emplace_back(c.circle_radius * std::cos(a), c.circle_radius * std::sin(a));
    }
  }

  for (int k = 0; k < c.n_agents; ++k) {
    if (c.agents == AgentLayout::center && k == 0) {
      net.agents.push_back(center);
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRejections) throw InvalidInput("cannot place agents with the requested separation");
      Position p = uniform_in_square(eng, center, c.region_side);
      if (far_from(p, net.agents, c.min_separation) && far_from(p, net.anchors, agent_anchor_gap)) {
        net.agents.push_back(p);
        break;
      }
    }
  }

  if (c.anchors == AnchorLayout::uniform) {
    for (int j = 0; j < c.n_anchors; ++j) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxRejections) throw InvalidInput("cannot place anchors with the requested separation");
        Position p = uniform_in_square(eng, center, c.region_side);
        if (far_from(p, net.anchors, c.min_separation) && far_from(p, net.agents, agent_anchor_gap)) {
          net.anchors.push_back(p);
          break;
        }
      }
    }
  }

  net.zeta.resize(c.n_agents, c.n_anchors);
  for (int k = 0; k < c.n_agents; ++k)
    for (int j = 0; j < c.n_anchors; ++j) net.zeta(k, j) = uniform(eng, c.channel.zeta_min, c.channel.zeta_max);
  return net;
}

Eigen::MatrixXd path_loss_channel(const std::vector<Position>& agents, const std::vector<Position>& anchors,
                                  const Eigen::MatrixXd& zeta, double beta) {
  Eigen::MatrixXd xi(static_cast<Eigen::Index>(agents.size()), static_cast<Eigen::Index>(anchors.size()));
  for (Eigen::Index k = 0; k < xi.rows(); ++k)
    for (Eigen::Index j = 0; j < xi.cols(); ++j) {
      const double d = link_geometry(agents[k], anchors[j]).distance;
      xi(k, j) = zeta(k, j) / std::pow(d, 2 * beta);
    }
  return xi;
}

Scenario generate_scenario(const ScenarioConfig& c) {
  NetworkDraw net = draw_network(c);
  Eigen::MatrixXd xi = path_loss_channel(net.agents, net.anchors, net.zeta, c.channel.beta);
  ScenarioOptions opts;
  opts.seed = c.seed;
  Scenario s(std::move(net.agents), std::move(net.anchors), std::move(xi), c.p_total, opts);
  if (c.eps_d) {
    return s.with_uncertainty(UncertaintyModel::from_position_disc(s.distances(), *c.eps_d, c.eps_xi));
  }
  if (c.eps_xi > 0) {
    return s.with_uncertainty(UncertaintyModel::from_angles(Eigen::MatrixXd::Zero(c.n_agents, c.n_anchors),
                                                            Eigen::MatrixXd::Constant(c.n_agents, c.n_anchors, c.eps_xi)));
  }
  return s;
}

}  // namespace locpower
