#pragma once

#include <cstdint>

#include "hbrd/lower_bounds.hpp"

namespace hbrd {

/// Diagonal parameterization of the trace program (canonical coordinates):
/// w = diag K_X|W,Y1 (k entries), u = diag of the lower-right block of
/// K_X|W,U,Y1 (l2 entries), v = diag of the upper-left block of K_X|W,V,Y2
/// (l1 entries).
struct TraceVars {
  VectorXd w;
  VectorXd u;
  VectorXd v;
};

struct SolverConfig {
  std::uint64_t seed = 1;
  int restarts = 64;
  int max_iterations = 400;
  double tol = 1e-7;
  int grid_resolution = 60;
};

struct TraceObjectives {
  double r1 = 0.0;
  double r2 = 0.0;
};

/// diag K_X|W,Y2 implied by w: 1 / (1/w_i + K_ii).
VectorXd derived_w2(const CanonicalForm& canon, const VectorXd& w);

/// Throws NumericalFailure on a nonpositive log argument.
TraceObjectives trace_objectives(const CanonicalForm& canon,
                                 const TraceVars& vars);

FeasibilityReport check_trace_feasible(const CanonicalForm& canon,
                                       const TraceVars& vars,
                                       const Trace& spec);

struct TraceSolution {
  RateReport report;
  TraceVars vars;
  /// max - min of the final objective over converged restarts.
  double spread = 0.0;
  int restarts = 0;
  int converged_restarts = 0;
  /// Warm restarts from the best point that still improved it.
  int polish_passes = 0;
};

/// min over the feasible set of max{R1, R2}.
TraceSolution solve_minimax(const CanonicalForm& canon, const Trace& spec,
                            const SolverConfig& cfg = {});

/// min over the feasible set of R1 (branch 1) or R2 (branch 2).
TraceSolution solve_branch(const CanonicalForm& canon, const Trace& spec,
                           int branch, const SolverConfig& cfg = {});

struct SwappedSolution {
  /// r1 = min R1, r2 = min R2, r = max of the two.
  RateReport report;
  TraceVars argmin1;
  TraceVars argmin2;
};

SwappedSolution solve_maximin_swapped(const CanonicalForm& canon,
                                      const Trace& spec,
                                      const SolverConfig& cfg = {});

struct OracleResult {
  double value = 0.0;
  TraceVars vars;
  TraceObjectives objectives;
};

/// Brute-force referee. u and v are solved exactly by capped water-filling
/// for each w; w is searched coordinate by coordinate, each coordinate on a
/// log-spaced grid of `resolution` points followed by re-gridding of the
/// bracket around the best point. `branch` 0 is the minimax objective, 1 or
/// 2 a single branch. Needs k + l1 + l2 <= 5 (DimensionTooLarge otherwise).
OracleResult grid_oracle(const CanonicalForm& canon, const Trace& spec,
                         int resolution, int branch = 0);

/// Maximize sum(log x) subject to sum(x) <= budget and 0 < x_i <= cap_i.
/// Returns an empty optional when no positive allocation exists.
std::optional<VectorXd> capped_water_fill(const VectorXd& caps, double budget);

}  // namespace hbrd
