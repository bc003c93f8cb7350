#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "locpower/netmodel.hpp"

namespace locpower {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Equivalent Fisher information matrix of one agent's 2-D position.
using Efim = Matrix2<double>;

/// Link powers x(k, j) from anchor j toward agent k, N_a x N_b.
using PowerAllocation = Eigen::MatrixXd;

template <typename Scalar>
Vector2<Scalar> unit_vector(Scalar phi) {
  using std::cos;
  using std::sin;
  return Vector2<Scalar>(cos(phi), sin(phi));
}

/// Ranging direction matrix u(phi) u(phi)^T.
template <typename Scalar>
Matrix2<Scalar> direction_matrix(Scalar phi) {
  const Vector2<Scalar> u = unit_vector(phi);
  return u * u.transpose();
}

/// a d - b c with one rounding error (Kahan's fma scheme).
template <typename Scalar>
Scalar det2(Scalar a, Scalar b, Scalar c, Scalar d) {
  using std::fma;
  const Scalar w = b * c;
  const Scalar err = fma(-b, c, w);
  return fma(a, d, -w) + err;
}

template <typename Derived>
typename Derived::Scalar det2(const Eigen::MatrixBase<Derived>& J) {
  return det2(J(0, 0), J(0, 1), J(1, 0), J(1, 1));
}

/// Scale-aware singularity test: det(J) <= 1e-14 max(1, tr(J)^2).
template <typename Derived>
bool is_singular(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  const Scalar tr = J.trace();
  const Scalar cutoff = Scalar(1e-14) * std::max(Scalar(1), tr * tr);
  return det2(J) <= cutoff;
}

/// Squared position error bound tr(J^-1); +inf for a singular EFIM.
template <typename Derived>
typename Derived::Scalar speb(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  if (is_singular(J)) return std::numeric_limits<Scalar>::infinity();
  return J.trace() / det2(J);
}

template <typename Scalar>
struct EigenDecomposition {
  Scalar mu1;    // larger eigenvalue
  Scalar mu2;    // smaller eigenvalue
  Scalar theta;  // orientation of the mu1 eigenvector, [0, pi)

  Matrix2<Scalar> rotation() const {
    using std::cos;
    using std::sin;
    Matrix2<Scalar> U;
    U << cos(theta), -sin(theta), sin(theta), cos(theta);
    return U;
  }

  Matrix2<Scalar> reconstruct() const {
    const Matrix2<Scalar> U = rotation();
    return U * Vector2<Scalar>(mu1, mu2).asDiagonal() * U.transpose();
  }
};

/// Closed-form eigen-decomposition of a symmetric 2x2 matrix written as
/// 1/2 [[T + z1, z2], [z2, T - z1]]: mu = (T +- |z|) / 2.
/// The repeated-eigenvalue case reports theta = 0.
template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eigen(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  using std::hypot;
  const Scalar tr = J(0, 0) + J(1, 1);
  const Scalar z1 = J(0, 0) - J(1, 1);
  const Scalar z2 = J(0, 1) + J(1, 0);
  const Scalar r = hypot(z1, z2);
  EigenDecomposition<Scalar> e;
  e.mu1 = (tr + r) / 2;
  // det / mu1 avoids cancellation in (tr - r) when mu2 << mu1.
  e.mu2 = (tr > 0 && e.mu1 > 0) ? det2(J) / e.mu1 : (tr - r) / 2;
  if (r == Scalar(0)) {
    e.theta = Scalar(0);
  } else {
    Scalar th = atan2(z2, z1) / 2;
    if (th < 0) th += Scalar(std::numbers::pi);
    e.theta = th;
  }
  return e;
}

/// Directional position error bound u(phi)^T J^-1 u(phi). For a singular J
/// the bound is +inf unless u(phi) lies in the range of J, where the
/// pseudo-inverse value 1/mu1 is returned.
template <typename Derived>
typename Derived::Scalar dpeb(const Eigen::MatrixBase<Derived>& J, typename Derived::Scalar phi) {
  using Scalar = typename Derived::Scalar;
  const Vector2<Scalar> u = unit_vector(phi);
  if (is_singular(J)) {
    const auto e = eigen(J);
    if (!(e.mu1 > 0)) return std::numeric_limits<Scalar>::infinity();
    const Vector2<Scalar> null_dir = unit_vector(e.theta + Scalar(std::numbers::pi / 2));
    using std::abs;
    if (abs(null_dir.dot(u)) > Scalar(1e-12)) return std::numeric_limits<Scalar>::infinity();
    return Scalar(1) / e.mu1;
  }
  Matrix2<Scalar> adj;
  adj << J(1, 1), -J(0, 1), -J(1, 0), J(0, 0);
  return u.dot(adj * u) / det2(J);
}

/// Maximum DPEB over all directions, 1/mu2; +inf for a singular EFIM.
template <typename Derived>
typename Derived::Scalar mdpeb(const Eigen::MatrixBase<Derived>& J) {
  using Scalar = typename Derived::Scalar;
  if (is_singular(J)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(1) / eigen(J).mu2;
}

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Moment coordinates y = (a, z1, z2) of J = 1/2 [[a + z1, z2], [z2, a - z1]],
/// so tr J = a and det J = (a^2 - |z|^2) / 4.
template <typename Scalar>
Matrix2<Scalar> from_moments(const Vector3<Scalar>& y) {
  Matrix2<Scalar> J;
  J << y(0) + y(1), y(2), y(2), y(0) - y(1);
  return J / Scalar(2);
}

/// tr(J^-1) = 4a / (a^2 - |z|^2), with the same singularity cutoff as speb().
template <typename Scalar>
Scalar speb_from_moments(const Vector3<Scalar>& y) {
  const Scalar a = y(0);
  const Scalar det4 = a * a - y.template tail<2>().squaredNorm();
  if (!(a > 0) || det4 <= Scalar(4e-14) * std::max(Scalar(1), a * a)) return std::numeric_limits<Scalar>::infinity();
  return Scalar(4) * a / det4;
}

/// 1/mu2 = 2 / (a - |z|).
template <typename Scalar>
Scalar mdpeb_from_moments(const Vector3<Scalar>& y) {
  const Scalar a = y(0);
  const Scalar r = y.template tail<2>().norm();
  const Scalar det4 = a * a - r * r;
  if (!(a > 0) || det4 <= Scalar(4e-14) * std::max(Scalar(1), a * a)) return std::numeric_limits<Scalar>::infinity();
  // (a - r) = det4 / (a + r) keeps precision when r is close to a.
  return Scalar(2) * (a + r) / det4;
}

/// Equivalent power of a round-trip link, 4 (1/x + 1/x')^-1.
template <typename Scalar>
Scalar equivalent_power(Scalar x, Scalar x_agent) {
  if (x <= Scalar(0) || x_agent <= Scalar(0)) return Scalar(0);
  return Scalar(4) * x * x_agent / (x + x_agent);
}

/// EFIM scale factor of round-trip ranging when agent-side powers are
/// proportional to anchor-side ones: 4 P' / (P' + P).
template <typename Scalar>
Scalar async_scale(Scalar p_total, Scalar p_total_agent) {
  return Scalar(4) * p_total_agent / (p_total_agent + p_total);
}

Efim build_efim(const Scenario& scenario, const PowerAllocation& alloc, int agent);
std::vector<Efim> build_efims(const Scenario& scenario, const PowerAllocation& alloc);

PowerAllocation uniform_allocation(const Scenario& scenario);

/// Throws unless alloc is N_a x N_b, nonnegative and within every budget.
void check_feasible(const Scenario& scenario, const PowerAllocation& alloc, double tol = 1e-10);

/// EFIMs of the round-trip network with agent powers (P'/P) x; requires an
/// agent budget in the scenario.
std::vector<Efim> async_equivalent(const Scenario& scenario, const PowerAllocation& alloc);

/// True when the agent sees at least two anchors whose baselines are not
/// parallel, so a finite error bound is achievable.
bool is_localizable(const Scenario& scenario, int agent, double tol = 1e-9);

/// Sum over agents of SPEB, and of mDPEB.
double total_speb(const Scenario& scenario, const PowerAllocation& alloc);
double total_mdpeb(const Scenario& scenario, const PowerAllocation& alloc);

}  // namespace locpower
