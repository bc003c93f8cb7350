#include <fstream>
#include <sstream>

#include <json.hpp>

#include "locpower/netmodel.hpp"

namespace locpower {

using nlohmann::json;

namespace {

std::vector<Position> parse_points(const json& j, const char* name) {
  if (!j.contains(name) || !j[name].is_array()) throw InvalidInput(std::string("missing array '") + name + "'");
  std::vector<Position> pts;
  for (const auto& p : j[name]) {
    if (!p.is_array() || p.size() != 2) throw InvalidInput(std::string("'") + name + "' entries must be [x, y]");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return pts;
}

Eigen::MatrixXd parse_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(rows, cols, j.get<double>());
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw InvalidInput(std::string("'") + name + "' must have one row per agent");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidInput(std::string("'") + name + "' must have one column per anchor");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json points_json(const std::vector<Position>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed scenario JSON: ") + e.what());
  }
  try {
    auto agents = parse_points(j, "agents");
    auto anchors = parse_points(j, "anchors");
    const auto na = static_cast<Eigen::Index>(agents.size());
    const auto nb = static_cast<Eigen::Index>(anchors.size());
    if (na == 0 || nb == 0) throw InvalidInput("scenario needs at least one agent and one anchor");
    if (!j.contains("xi")) throw InvalidInput("missing 'xi'");
    Eigen::MatrixXd xi = parse_matrix(j["xi"], na, nb, "xi");
    const double p_total = j.value("p_total", 1.0);

    ScenarioOptions opts;
    if (j.contains("seed")) opts.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("per_anchor_caps")) {
      const auto& c = j["per_anchor_caps"];
      if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != nb)
        throw InvalidInput("'per_anchor_caps' must have one entry per anchor");
      Eigen::VectorXd caps(nb);
      for (Eigen::Index i = 0; i < nb; ++i) caps(i) = c[static_cast<std::size_t>(i)].get<double>();
      opts.anchor_caps = caps;
    }
    if (j.contains("link_min")) opts.link_min = parse_matrix(j["link_min"], na, nb, "link_min");
    if (j.contains("link_max")) opts.link_max = parse_matrix(j["link_max"], na, nb, "link_max");
    if (j.contains("agent_budget")) opts.agent_budget = j["agent_budget"].get<double>();

    Eigen::MatrixXd eps_xi = j.contains("eps_xi") ? parse_matrix(j["eps_xi"], na, nb, "eps_xi")
                                                  : Eigen::MatrixXd::Zero(na, nb);
    Scenario s(std::move(agents), std::move(anchors), std::move(xi), p_total, opts);
    if (j.contains("eps_d")) {
      auto u = UncertaintyModel::from_position_disc(s.distances(), j["eps_d"].get<double>());
      u.eps_xi = eps_xi;
      return s.with_uncertainty(std::move(u));
    }
    if (j.contains("eps_phi")) {
      return s.with_uncertainty(UncertaintyModel::from_angles(parse_matrix(j["eps_phi"], na, nb, "eps_phi"), eps_xi));
    }
    if (j.contains("eps_xi")) {
      return s.with_uncertainty(UncertaintyModel::from_angles(Eigen::MatrixXd::Zero(na, nb), eps_xi));
    }
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed scenario JSON: ") + e.what());
  }
}

Scenario read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["agents"] = points_json(s.agents());
  j["anchors"] = points_json(s.anchors());
  j["xi"] = matrix_json(s.xi());
  j["p_total"] = s.p_total();
  const auto& o = s.options();
  if (o.uncertainty) {
    if (o.uncertainty->eps_d) {
      j["eps_d"] = *o.uncertainty->eps_d;
    } else {
      j["eps_phi"] = matrix_json(o.uncertainty->eps_phi);
    }
    j["eps_xi"] = matrix_json(o.uncertainty->eps_xi);
  }
  if (o.anchor_caps) {
    j["per_anchor_caps"] = std::vector<double>(o.anchor_caps->data(), o.anchor_caps->data() + o.anchor_caps->size());
  }
  if (o.link_min) j["link_min"] = matrix_json(*o.link_min);
  if (o.link_max) j["link_max"] = matrix_json(*o.link_max);
  if (o.agent_budget) j["agent_budget"] = *o.agent_budget;
  if (o.seed) j["seed"] = *o.seed;
  return j.dump(2);
}

}  // namespace locpower
