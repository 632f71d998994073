#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace oussm {

/// Objective for minimization. Returns f(x) and, when `grad` is non-null,
/// writes the gradient. A non-finite return marks x as infeasible; the line
/// search backs away from such points.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_evals = 5000;       // objective evaluations at trial points
  double f_rel_tol = 1e-8;    // |f_k - f_{k+1}| <= tol * max(1, |f|)
  int f_rel_patience = 3;     // consecutive iterations meeting f_rel_tol
  double grad_tol = 1e-7;    // ||g||_inf <= tol * max(1, |f|)
  double c1 = 1e-4;           // sufficient decrease
  double c2 = 0.9;            // curvature
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int n_evals = 0;
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing plus
/// cubic-interpolation zoom). Deterministic for a deterministic objective.
LbfgsResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace oussm
