#include "hbrd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hbrd {

VectorXd numeric_gradient(const ScalarFn& f, const VectorXd& x, double h,
                          double fx) {
  VectorXd g(x.size());
  VectorXd probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + step;
    const double fp = f(probe);
    probe(i) = x(i) - step;
    const double fm = f(probe);
    probe(i) = x(i);
    const bool ok_p = std::isfinite(fp);
    const bool ok_m = std::isfinite(fm);
    if (ok_p && ok_m) {
      g(i) = (fp - fm) / (2.0 * step);
    } else if (ok_p) {
      g(i) = (fp - fx) / step;
    } else if (ok_m) {
      g(i) = (fx - fm) / step;
    } else {
      g(i) = 0.0;
    }
  }
  return g;
}

MinimizeResult bfgs_minimize(const ScalarFn& f, VectorXd x0,
                             const MinimizeOptions& opt) {
  const Index n = x0.size();
  MinimizeResult res;
  res.x = std::move(x0);
  res.f = f(res.x);
  if (!std::isfinite(res.f)) {
    throw Error(ErrorCode::NumericalFailure,
                "minimizer started outside the objective's domain");
  }
  VectorXd g = numeric_gradient(f, res.x, opt.fd_step, res.f);
  MatrixXd h_inv = MatrixXd::Identity(n, n);
  int stalls = 0;

  for (res.iterations = 0; res.iterations < opt.max_iterations;
       ++res.iterations) {
    if (g.norm() <= opt.grad_tol * std::max(1.0, std::abs(res.f))) {
      res.converged = true;
      break;
    }
    VectorXd p = -h_inv * g;
    double slope = p.dot(g);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * p;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Either at a (numerical) stationary point or the quasi-Newton model
      // went bad; one retry along the plain gradient before giving up.
      if (!h_inv.isIdentity()) {
        h_inv.setIdentity();
        continue;
      }
      res.converged = true;
      break;
    }

    const VectorXd g_new = numeric_gradient(f, x_new, opt.fd_step, f_new);
    const VectorXd s = x_new - res.x;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (res.iterations == 0) h_inv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const MatrixXd v = MatrixXd::Identity(n, n) - rho * s * y.transpose();
      h_inv = v * h_inv * v.transpose() + rho * s * s.transpose();
    }

    const double improvement = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    stalls = improvement < opt.f_tol ? stalls + 1 : 0;
    if (stalls >= 3) {
      res.converged = true;
      break;
    }
  }
  return res;
}

AugLagResult augmented_lagrangian(const ScalarFn& f, const VectorFn& g,
                                  VectorXd x0, const AugLagOptions& opt) {
  AugLagResult res;
  res.x = std::move(x0);
  const Index m = g(res.x).size();
  VectorXd lambda = VectorXd::Zero(m);
  double rho = opt.rho0;
  double prev_violation = std::numeric_limits<double>::infinity();
  double prev_f = std::numeric_limits<double>::infinity();

  for (res.outer_iterations = 0; res.outer_iterations < opt.outer_iterations;
       ++res.outer_iterations) {
    const ScalarFn lagrangian = [&](const VectorXd& x) {
      const double fx = f(x);
      if (!std::isfinite(fx)) return fx;
      const VectorXd gx = g(x);
      if (!gx.allFinite()) return std::numeric_limits<double>::infinity();
      const VectorXd shifted = (lambda + rho * gx).cwiseMax(0.0);
      return fx + (shifted.squaredNorm() - lambda.squaredNorm()) / (2.0 * rho);
    };
    const MinimizeResult inner = bfgs_minimize(lagrangian, res.x, opt.inner);
    res.inner_iterations += inner.iterations;
    res.x = inner.x;
    res.f = f(res.x);
    const VectorXd gx = g(res.x);
    res.max_violation = std::max(0.0, gx.maxCoeff());
    lambda = (lambda + rho * gx).cwiseMax(0.0);

    if (res.max_violation <= opt.feas_tol &&
        std::abs(res.f - prev_f) <= opt.f_change_tol * std::max(1.0, std::abs(res.f))) {
      res.converged = true;
      ++res.outer_iterations;
      break;
    }
    if (res.max_violation > 0.25 * prev_violation) {
      rho = std::min(rho * 10.0, opt.rho_max);
    }
    prev_violation = res.max_violation;
    prev_f = res.f;
  }
  return res;
}

}  // namespace hbrd
