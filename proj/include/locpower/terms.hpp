#pragma once

#include <Eigen/Core>

#include "locpower/barrier.hpp"
#include "locpower/robust.hpp"

namespace locpower {

/// tr(J^-1) of the 2x2 matrix whose moments are y = L x; the domain is
/// J positive definite.
class TraceInverse : public barrier::SmoothFunction {
 public:
  explicit TraceInverse(MomentMap L);
  bool evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const override;

 private:
  MomentMap L_;
};

/// scale / (c . x + d) on c . x + d > 0.
class Reciprocal : public barrier::SmoothFunction {
 public:
  Reciprocal(Eigen::VectorXd c, double scale, double d = 0.0);
  bool evaluate(const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const override;

 private:
  Eigen::VectorXd c_;
  double scale_;
  double d_;
};

}  // namespace locpower
