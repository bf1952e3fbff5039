#include "shockgp/optimize.hpp"

#include <cmath>
#include <limits>

#include "shockgp/errors.hpp"

namespace shockgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const Eigen::VectorXd& x, int* evals) {
  if (evals) ++*evals;
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double projected_grad_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return (project(x - g, lo, hi) - x).lpNorm<Eigen::Infinity>();
}

}  // namespace

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, double h, int* evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double up = std::min(x(i) + h, hi(i));
    const double dn = std::max(x(i) - h, lo(i));
    xp(i) = up;
    xm(i) = dn;
    const double fp = safe_eval(f, xp, evals);
    const double fm = safe_eval(f, xm, evals);
    g(i) = (up > dn && std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (up - dn) : 0.0;
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

OptimResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const OptimOptions& opt) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  res.x = project(x0, lo, hi);
  res.f = safe_eval(f, res.x, &res.evaluations);
  if (!std::isfinite(res.f)) throw Error(ErrorKind::OptimFailed, "objective not finite at start");

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = fd_gradient(f, res.x, lo, hi, opt.fd_step, &res.evaluations);

  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    res.projected_grad_norm = projected_grad_norm(res.x, g, lo, hi);
    if (res.projected_grad_norm < opt.grad_tol) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd d = -H * g;
    // Freeze coordinates pinned at a bound that the step would push outward.
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = res.x(i) <= lo(i) && d(i) < 0.0;
      const bool at_hi = res.x(i) >= hi(i) && d(i) > 0.0;
      if (at_lo || at_hi) d(i) = 0.0;
    }
    if (!(g.dot(d) < 0.0)) {
      H.setIdentity();
      d = project(res.x - g, lo, hi) - res.x;
    }

    double step = 1.0;
    Eigen::VectorXd xn;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = project(res.x + step * d, lo, hi);
      fn = safe_eval(f, xn, &res.evaluations);
      if (std::isfinite(fn) && fn <= res.f + 1e-4 * g.dot(xn - res.x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) break;  // no progress even along steepest descent
      H.setIdentity();
      continue;
    }

    const Eigen::VectorXd gn = fd_gradient(f, xn, lo, hi, opt.fd_step, &res.evaluations);
    const Eigen::VectorXd s = xn - res.x;
    const Eigen::VectorXd y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double r = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - r * s * y.transpose()) * H * (I - r * y * s.transpose()) + r * s * s.transpose();
    }

    const double df = res.f - fn;
    res.x = xn;
    res.f = fn;
    g = gn;
    if (df <= opt.f_rel_tol * std::max(1.0, std::abs(fn))) {
      res.projected_grad_norm = projected_grad_norm(res.x, g, lo, hi);
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace shockgp
