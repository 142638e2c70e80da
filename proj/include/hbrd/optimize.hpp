#pragma once

// Small unconstrained / inequality-constrained minimizers used by the trace
// program and the auxiliary-increment searches. Dimensions are tiny, so
// gradients are central finite differences.

#include <functional>

#include "hbrd/linalg.hpp"

namespace hbrd {

/// Returning +infinity marks a point outside the objective's domain; line
/// searches back off from such points.
using ScalarFn = std::function<double(const VectorXd&)>;
/// Stacked inequality constraints g(x) <= 0.
using VectorFn = std::function<VectorXd(const VectorXd&)>;

struct MinimizeOptions {
  int max_iterations = 400;
  double grad_tol = 1e-9;
  /// Stop once an iteration improves f by less than this (absolute).
  double f_tol = 1e-15;
  double fd_step = 1e-6;
};

struct MinimizeResult {
  VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

VectorXd numeric_gradient(const ScalarFn& f, const VectorXd& x, double h,
                          double fx);

/// BFGS with Armijo backtracking. `x0` must have a finite objective.
MinimizeResult bfgs_minimize(const ScalarFn& f, VectorXd x0,
                             const MinimizeOptions& opt = {});

struct AugLagOptions {
  int outer_iterations = 40;
  double feas_tol = 1e-10;
  /// Converged once feasible and f moves less than this between outer steps.
  double f_change_tol = 1e-10;
  double rho0 = 10.0;
  double rho_max = 1e9;
  MinimizeOptions inner;
};

struct AugLagResult {
  VectorXd x;
  double f = 0.0;
  double max_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
};

/// Powell-Hestenes-Rockafellar augmented Lagrangian for
/// min f(x) s.t. g(x) <= 0.
AugLagResult augmented_lagrangian(const ScalarFn& f, const VectorFn& g,
                                  VectorXd x0, const AugLagOptions& opt = {});

}  // namespace hbrd
