#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

// Primal log-barrier interior-point method for small dense convex programs
//
//   minimize    cost^T v + sum_i f_i(v[I_i])
//   subject to  lower <= v <= upper
//               a_r^T v <= b_r                         (rows)
//               ||A_c v + b_c|| <= c_c^T v + d_c       (second-order cones)
//               g_s(v[I_s]) + a_s^T v <= b_s           (smooth convex constraints)
//
// Each Newton step works on the full dense Hessian; problem sizes here are
// at most a few hundred variables.

namespace locpower::barrier {

/// Sparse linear form coef . v[index] compared against rhs.
struct SparseRow {
  std::vector<int> index;
  std::vector<double> coef;
  double rhs = 0.0;
};

/// ||A v[index] + b|| <= c . v[index] + d
struct Cone {
  std::vector<int> index;
  Eigen::Matrix<double, 2, Eigen::Dynamic> A;
  Eigen::VectorXd c;
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  double d = 0.0;
};

/// A smooth convex function of a few variables. evaluate() returns false
/// outside the function's open domain.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual bool evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                        Eigen::MatrixXd* hess) const = 0;
};

struct SmoothTerm {
  std::vector<int> index;
  std::shared_ptr<const SmoothFunction> fn;
};

/// term(v) + linear.coef . v[linear.index] <= linear.rhs
struct SmoothConstraint {
  SmoothTerm term;
  SparseRow linear;
};

struct Program {
  explicit Program(int n);

  int n;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<SparseRow> rows;
  std::vector<Cone> cones;
  std::vector<SmoothConstraint> constraints;
  Eigen::VectorXd cost;
  std::vector<SmoothTerm> objective;
  /// Absolute objective scale used by the relative gap test when the
  /// optimum may approach zero.
  double objective_floor = 1e-300;

  /// Sum of the barrier parameters (1 per bound, row and smooth constraint;
  /// 2 per cone). Bounds the duality gap by degree / t at central points.
  double barrier_degree() const;

  /// Objective value, or +inf outside the objective's domain.
  double objective_value(const Eigen::VectorXd& v) const;

  /// Largest constraint violation (<= 0 means feasible); +inf if a smooth
  /// constraint cannot be evaluated.
  double max_violation(const Eigen::VectorXd& v) const;
};

struct Options {
  double gap_tol = 1e-8;     // relative duality-gap target
  double mu = 20.0;          // barrier parameter growth
  double newton_tol = 1e-10; // centering stop on lambda^2 / 2
  int max_iterations = 5000; // total Newton steps
};

enum class Status { optimal, infeasible, max_iterations, numerical_error };

struct Result {
  Status status = Status::numerical_error;
  Eigen::VectorXd v;
  double objective = 0.0;
  /// Relative duality-gap certificate (degree + lambda^2) / (t max(|f|, floor)).
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Minimizes from a strictly feasible start.
Result minimize(const Program& program, const Eigen::VectorXd& start, const Options& options = {});

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd point;
  int iterations = 0;
};

/// Phase I: minimizes a common slack s over all constraints shifted by s,
/// stopping as soon as s < 0. Infeasibility is reported once the slack's
/// lower bound s - degree/t is positive or the gap closes with s >= 0.
FeasibilityResult find_strictly_feasible(const Program& program, const Eigen::VectorXd& guess,
                                         const Options& options = {});

/// Phase I when the guess is not strictly feasible, then minimize().
Result solve(const Program& program, const Eigen::VectorXd& guess, const Options& options = {});

}  // namespace locpower::barrier
