#pragma once

// Box-constrained quasi-Newton minimizer (projected BFGS) with central
// finite-difference gradients. The objective may throw shockgp::Error; such
// points are treated as +inf by the line search.

#include <functional>

#include <Eigen/Core>

namespace shockgp {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  int max_iter = 200;
  double grad_tol = 1e-5;   // on the projected gradient, inf-norm
  double f_rel_tol = 1e-10;  // relative change in f between iterations
  double fd_step = 1e-5;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double projected_grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Central differences; one-sided at an active bound.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, double h, int* evals = nullptr);

/// Throws OptimFailed if f is not finite at the (projected) start.
OptimResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const OptimOptions& opt = {});

}  // namespace shockgp
