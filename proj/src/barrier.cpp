#include "locpower/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>

namespace locpower::barrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& index) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(index[i]);
  return out;
}

double dot(const SparseRow& row, const Eigen::VectorXd& v) {
  double s = 0;
  for (std::size_t i = 0; i < row.index.size(); ++i) s += row.coef[i] * v(row.index[i]);
  return s;
}

// Adds w * (local outer product) into H over the given index set.
void scatter_outer(Eigen::MatrixXd& H, const std::vector<int>& index, const Eigen::VectorXd& a, double w) {
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::size_t j = 0; j < index.size(); ++j)
      H(index[i], index[j]) += w * a(static_cast<Eigen::Index>(i)) * a(static_cast<Eigen::Index>(j));
}

void scatter_matrix(Eigen::MatrixXd& H, const std::vector<int>& index, const Eigen::MatrixXd& M, double w) {
  for (std::size_t i = 0; i < index.size(); ++i)
    for (std::size_t j = 0; j < index.size(); ++j)
      H(index[i], index[j]) += w * M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

void scatter_vector(Eigen::VectorXd& g, const std::vector<int>& index, const Eigen::VectorXd& a, double w) {
  for (std::size_t i = 0; i < index.size(); ++i) g(index[i]) += w * a(static_cast<Eigen::Index>(i));
}

Eigen::VectorXd row_dense_local(const SparseRow& row, const std::vector<int>& index) {
  // Coefficients of `row` expressed over `index` (entries absent from index are dropped).
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(index.size()));
  for (std::size_t r = 0; r < row.index.size(); ++r)
    for (std::size_t i = 0; i < index.size(); ++i)
      if (index[i] == row.index[r]) a(static_cast<Eigen::Index>(i)) += row.coef[r];
  return a;
}

struct Local {
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
};

// Phi_t(v) = t f0(v) - sum log(slacks). Returns false outside the domain.
bool evaluate(const Program& p, double t, const Eigen::VectorXd& v, double& value, double* f0_out,
              Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
  const bool second = hess != nullptr;
  if (grad) *grad = t * p.cost;
  if (hess) hess->setZero(p.n, p.n);
  double f0 = p.cost.dot(v);
  double phi = 0;
  Local loc;

  for (const auto& term : p.objective) {
    loc.x = gather(v, term.index);
    double fv;
    if (!term.fn->evaluate(loc.x, fv, grad ? &loc.g : nullptr, second ? &loc.H : nullptr)) return false;
    if (!std::isfinite(fv)) return false;
    f0 += fv;
    if (grad) scatter_vector(*grad, term.index, loc.g, t);
    if (hess) scatter_matrix(*hess, term.index, loc.H, t);
  }

  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lower(i))) {
      const double s = v(i) - p.lower(i);
      if (!(s > 0)) return false;
      phi -= std::log(s);
      if (grad) (*grad)(i) -= 1 / s;
      if (hess) (*hess)(i, i) += 1 / (s * s);
    }
    if (std::isfinite(p.upper(i))) {
      const double s = p.upper(i) - v(i);
      if (!(s > 0)) return false;
      phi -= std::log(s);
      if (grad) (*grad)(i) += 1 / s;
      if (hess) (*hess)(i, i) += 1 / (s * s);
    }
  }

  for (const auto& row : p.rows) {
    const double s = row.rhs - dot(row, v);
    if (!(s > 0)) return false;
    phi -= std::log(s);
    if (grad)
      for (std::size_t i = 0; i < row.index.size(); ++i) (*grad)(row.index[i]) += row.coef[i] / s;
    if (hess)
      for (std::size_t i = 0; i < row.index.size(); ++i)
        for (std::size_t j = 0; j < row.index.size(); ++j)
          (*hess)(row.index[i], row.index[j]) += row.coef[i] * row.coef[j] / (s * s);
  }

  for (const auto& cone : p.cones) {
    loc.x = gather(v, cone.index);
    const double u = cone.c.dot(loc.x) + cone.d;
    const Eigen::Vector2d w = cone.A * loc.x + cone.b;
    const double q = u * u - w.squaredNorm();
    if (!(u > 0) || !(q > 0)) return false;
    phi -= std::log(q);
    if (grad || hess) {
      const Eigen::VectorXd dq = 2 * u * cone.c - 2 * cone.A.transpose() * w;
      if (grad) scatter_vector(*grad, cone.index, dq, -1 / q);
      if (hess) {
        scatter_outer(*hess, cone.index, dq, 1 / (q * q));
        const Eigen::MatrixXd d2q = 2 * cone.c * cone.c.transpose() - 2 * cone.A.transpose() * cone.A;
        scatter_matrix(*hess, cone.index, d2q, -1 / q);
      }
    }
  }

  for (const auto& con : p.constraints) {
    loc.x = gather(v, con.term.index);
    double fv;
    if (!con.term.fn->evaluate(loc.x, fv, grad ? &loc.g : nullptr, second ? &loc.H : nullptr)) return false;
    const double s = con.linear.rhs - fv - dot(con.linear, v);
    if (!(s > 0) || !std::isfinite(s)) return false;
    phi -= std::log(s);
    if (grad || hess) {
      // Gradient of h = fn + a.v over the union of both index sets; the
      // linear part is scattered separately.
      if (grad) {
        scatter_vector(*grad, con.term.index, loc.g, 1 / s);
        for (std::size_t i = 0; i < con.linear.index.size(); ++i)
          (*grad)(con.linear.index[i]) += con.linear.coef[i] / s;
      }
      if (hess) {
        std::vector<int> idx = con.term.index;
        for (int i : con.linear.index)
          if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
        Eigen::VectorXd dh = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(idx.size()));
        dh.head(loc.g.size()) = loc.g;
        dh += row_dense_local(con.linear, idx);
        scatter_outer(*hess, idx, dh, 1 / (s * s));
        scatter_matrix(*hess, con.term.index, loc.H, 1 / s);
      }
    }
  }

  if (!std::isfinite(f0) || !std::isfinite(phi)) return false;
  value = t * f0 + phi;
  if (f0_out) *f0_out = f0;
  return true;
}

enum class CenterOutcome { centered, early_stop, iteration_cap, numerical_error };

CenterOutcome center(const Program& p, double t, Eigen::VectorXd& v, const Options& o, int& iterations,
                     double& lambda2, const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  Eigen::VectorXd step;
  for (;;) {
    double val;
    if (!evaluate(p, t, v, val, nullptr, &g, &H)) return CenterOutcome::numerical_error;

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
      step = -llt.solve(g);
    } else {
      const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H + reg * Eigen::MatrixXd::Identity(p.n, p.n));
      if (ldlt.info() != Eigen::Success) return CenterOutcome::numerical_error;
      step = -ldlt.solve(g);
    }
    if (!step.allFinite()) return CenterOutcome::numerical_error;
    lambda2 = -g.dot(step);
    if (!(lambda2 >= 0)) lambda2 = 0;
    if (lambda2 / 2 <= o.newton_tol) return CenterOutcome::centered;
    if (iterations >= o.max_iterations) return CenterOutcome::iteration_cap;

    double alpha = 1;
    double trial = 0;
    int halvings = 0;
    while (!evaluate(p, t, v + alpha * step, trial, nullptr, nullptr, nullptr)) {
      alpha /= 2;
      if (++halvings > 200) return CenterOutcome::numerical_error;
    }
    const double slack = 1e-14 * std::abs(val);
    while (trial > val - 0.01 * alpha * lambda2 + slack) {
      alpha /= 2;
      if (++halvings > 200 || !evaluate(p, t, v + alpha * step, trial, nullptr, nullptr, nullptr)) {
        // No further decrease resolvable in floating point.
        return CenterOutcome::centered;
      }
    }
    v += alpha * step;
    ++iterations;
    if (early_stop && early_stop(v)) return CenterOutcome::early_stop;
  }
}

}  // namespace

Program::Program(int n_)
    : n(n_),
      lower(Eigen::VectorXd::Constant(n_, -kInf)),
      upper(Eigen::VectorXd::Constant(n_, kInf)),
      cost(Eigen::VectorXd::Zero(n_)) {}

double Program::barrier_degree() const {
  double m = 0;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lower(i))) m += 1;
    if (std::isfinite(upper(i))) m += 1;
  }
  m += static_cast<double>(rows.size() + constraints.size());
  m += 2.0 * static_cast<double>(cones.size());
  return m;
}

double Program::objective_value(const Eigen::VectorXd& v) const {
  double f = cost.dot(v);
  for (const auto& term : objective) {
    double fv;
    if (!term.fn->evaluate(gather(v, term.index), fv, nullptr, nullptr)) return kInf;
    f += fv;
  }
  return f;
}

double Program::max_violation(const Eigen::VectorXd& v) const {
  double worst = -kInf;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lower(i))) worst = std::max(worst, lower(i) - v(i));
    if (std::isfinite(upper(i))) worst = std::max(worst, v(i) - upper(i));
  }
  for (const auto& row : rows) worst = std::max(worst, dot(row, v) - row.rhs);
  for (const auto& cone : cones) {
    const Eigen::VectorXd x = gather(v, cone.index);
    worst = std::max(worst, (cone.A * x + cone.b).norm() - (cone.c.dot(x) + cone.d));
  }
  for (const auto& con : constraints) {
    double fv;
    if (!con.term.fn->evaluate(gather(v, con.term.index), fv, nullptr, nullptr)) return kInf;
    worst = std::max(worst, fv + dot(con.linear, v) - con.linear.rhs);
  }
  return worst;
}

Result minimize(const Program& p, const Eigen::VectorXd& start, const Options& o) {
  Result res;
  res.v = start;
  const double m = std::max(1.0, p.barrier_degree());
  double f0 = p.objective_value(start);
  if (!std::isfinite(f0)) return res;
  double t = m / std::max(std::abs(f0), p.objective_floor);
  t = std::clamp(t, 1e-6, 1e12);

  for (;;) {
    double lambda2 = 0;
    const auto outcome = center(p, t, res.v, o, res.iterations, lambda2, nullptr);
    res.objective = p.objective_value(res.v);
    const double scale = std::max(std::abs(res.objective), p.objective_floor);
    res.kkt_residual = (m + lambda2) / (t * scale);
    if (outcome == CenterOutcome::numerical_error) {
      // The last good point may still satisfy the target.
      res.status = res.kkt_residual <= o.gap_tol ? Status::optimal : Status::numerical_error;
      return res;
    }
    if (res.kkt_residual <= o.gap_tol) {
      res.status = Status::optimal;
      return res;
    }
    if (outcome == CenterOutcome::iteration_cap) {
      res.status = Status::max_iterations;
      return res;
    }
    t *= o.mu;
  }
}

FeasibilityResult find_strictly_feasible(const Program& p, const Eigen::VectorXd& guess, const Options& o) {
  FeasibilityResult out;
  const double viol = p.max_violation(guess);
  if (!std::isfinite(viol)) return out;
  if (viol < 0) {
    out.feasible = true;
    out.point = guess;
    return out;
  }

  const int n = p.n;
  Program q(n + 1);
  q.cost(n) = 1;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.lower(i))) q.rows.push_back({{i, n}, {-1.0, -1.0}, -p.lower(i)});
    if (std::isfinite(p.upper(i))) q.rows.push_back({{i, n}, {1.0, -1.0}, p.upper(i)});
  }
  for (auto row : p.rows) {
    row.index.push_back(n);
    row.coef.push_back(-1.0);
    q.rows.push_back(std::move(row));
  }
  for (auto cone : p.cones) {
    const auto k = static_cast<Eigen::Index>(cone.index.size());
    cone.index.push_back(n);
    cone.A.conservativeResize(Eigen::NoChange, k + 1);
    cone.A.col(k).setZero();
    cone.c.conservativeResize(k + 1);
    cone.c(k) = 1.0;
    q.cones.push_back(std::move(cone));
  }
  for (auto con : p.constraints) {
    con.linear.index.push_back(n);
    con.linear.coef.push_back(-1.0);
    q.constraints.push_back(std::move(con));
  }
  q.objective_floor = 1.0;

  Eigen::VectorXd v(n + 1);
  v.head(n) = guess;
  v(n) = viol + std::max(1.0, viol);

  const double m = q.barrier_degree();
  double t = m / std::max(1.0, std::abs(v(n)));
  const auto below_zero = [n](const Eigen::VectorXd& x) { return x(n) < 0; };
  for (;;) {
    double lambda2 = 0;
    const auto outcome = center(q, t, v, o, out.iterations, lambda2, below_zero);
    if (outcome == CenterOutcome::early_stop || v(n) < 0) {
      out.feasible = true;
      out.point = v.head(n);
      return out;
    }
    if (outcome != CenterOutcome::centered) return out;
    const double gap = (m + lambda2) / t;
    if (v(n) - gap > 0) return out;                       // certified infeasible
    if (gap < 1e-13 * std::max(1.0, std::abs(v(n)))) return out;  // no strictly feasible point
    t *= o.mu;
  }
}

Result solve(const Program& p, const Eigen::VectorXd& guess, const Options& o) {
  const auto phase1 = find_strictly_feasible(p, guess, o);
  if (!phase1.feasible) {
    Result r;
    r.status = Status::infeasible;
    r.v = guess;
    r.iterations = phase1.iterations;
    r.objective = kInf;
    return r;
  }
  Result r = minimize(p, phase1.point, o);
  r.iterations += phase1.iterations;
  return r;
}

}  // namespace locpower::barrier
