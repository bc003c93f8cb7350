#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "locpower/random.hpp"
#include "locpower/robust.hpp"
#include "locpower/solver.hpp"

namespace locpower::testing {

/// Single agent at the origin, random anchor angles, xi log-uniform in
/// [0.5, 2]. With `robust`, each link gets a small angle width and a channel
/// width; redrawn until the robust optimum exists.
inline Scenario random_single_agent(Philox4x32& eng, int n_anchors, bool robust) {
  for (;;) {
    std::vector<double> ang, xi;
    for (int j = 0; j < n_anchors; ++j) {
      ang.push_back(uniform(eng, 0, 2 * std::numbers::pi));
      xi.push_back(std::exp(uniform(eng, std::log(0.5), std::log(2.0))));
    }
    const Scenario s = single_agent_scenario(ang, xi);
    if (!is_localizable(s, 0)) continue;
    if (!robust) return s;
    Eigen::MatrixXd eps_phi(1, n_anchors), eps_xi(1, n_anchors);
    for (int j = 0; j < n_anchors; ++j) {
      eps_phi(0, j) = uniform(eng, 0.0, 0.15);
      eps_xi(0, j) = uniform(eng, 0.0, 0.2) * xi[static_cast<std::size_t>(j)];
    }
    const Scenario r = s.with_uncertainty(UncertaintyModel::from_angles(eps_phi, eps_xi));
    // The PSD region must contain a point with margin; test the uniform split
    // and the nominal optimum.
    const PowerAllocation u = uniform_allocation(r);
    const auto nominal = solve_speb(s, FeasibleSet::from(s));
    if (robust_efim(r, u, 0).mu2 > 1e-3 || robust_efim(r, nominal.allocation, 0).mu2 > 1e-3) return r;
  }
}

/// Random point of {x >= 0, sum x = p}.
inline PowerAllocation random_simplex_point(Philox4x32& eng, int rows, int cols, double p) {
  PowerAllocation x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = -std::log(1 - uniform01(eng));
  return x * (p / x.sum());
}

}  // namespace locpower::testing
