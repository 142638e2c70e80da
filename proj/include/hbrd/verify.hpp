#pragma once

// Randomized property checks for the matrix lemmas and structural claims the
// rate formulas rest on. Every check is deterministic for a fixed seed.

#include <cstdint>
#include <string>
#include <vector>

#include "hbrd/trace_solver.hpp"

namespace hbrd {

struct PropertyResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  /// Largest observed violation (positive = wrong direction / mismatch).
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  /// First library error raised inside a trial, if any.
  std::string first_error;
  bool passed() const { return failures == 0 && trials > 0; }
};

/// [(M_diag)^{-1} + A]^{-1} >= ([M^{-1} + A]^{-1})_diag for M > 0 and
/// diagonal A >= 0 (some entries of A are zero on purpose).
PropertyResult check_diag_inverse_lemma(int trials, std::uint64_t seed);

/// Linear-estimate identity for X given (X_hat, Z_hat) with
/// X_hat = E[X | W, Z], and possibly singular K_X_hat.
PropertyResult check_variance_drop_identity(int trials, std::uint64_t seed);

/// Conclusion of the variance-drop lemma: a two-component Gaussian mixture W
/// never leaves more error after refinement than the Gaussian W_G with the
/// same K_X|W,Z. Mixture conditionals are computed exactly.
PropertyResult check_variance_drop(int trials, std::uint64_t seed);

/// Same conclusion against sample covariances of the mixture's estimation
/// error (`samples` draws, 3 standard errors per entry).
PropertyResult check_variance_drop_monte_carlo(int trials, int samples,
                                               std::uint64_t seed);

/// K_X|W,Z~ <= (D^{-1} + K_X|Z~^{-1} - K_X|Z^{-1})^{-1} when K_X|W,Z = D, with
/// equality for Gaussian W and a strict gain for a strictly better Z~.
PropertyResult check_corollary_enhanced_distortion(int trials,
                                                   std::uint64_t seed);

/// Both routes to K_X|Y agree, Y dominates both decoders, and the explicit
/// observation matrix reproduces K_X|Y when K_X is known.
PropertyResult check_enhanced_identity(int trials, std::uint64_t seed);

/// MLB-feasible => E2LB-feasible => ELB-feasible at random Gaussian triples
/// placed near the constraint boundary, on both branches.
PropertyResult check_feasible_inclusions(int instances, int triples,
                                         std::uint64_t seed);

/// ELB <= E2LB <= MLB estimates (search tolerance 1e-3), E2LB = MLB, and the
/// closed form sandwiched where it exists. The scheme point must lie in all
/// three sets.
PropertyResult check_bound_ordering(int instances, std::uint64_t seed,
                                    const SearchConfig& search = {4, 6, 300, {}});

/// K_X|W,Y1 diagonal iff K_X|W,Y2 diagonal (canonical coordinates).
PropertyResult check_diagonal_iff(int trials, std::uint64_t seed);

/// Closed forms on degraded instances against the single-decoder
/// conditional rate-distortion value.
PropertyResult check_degraded_reduction(int trials, std::uint64_t seed);

/// Trace program with equal decoders against reverse water-filling.
PropertyResult check_degraded_trace(int trials, std::uint64_t seed,
                                    const SolverConfig& cfg = {});

/// Closed form == achievable rate of the explicit scheme == converse.
PropertyResult check_tightness_mse(int trials, std::uint64_t seed);
PropertyResult check_tightness_sc(int trials, std::uint64_t seed);

/// Random feasible Gaussian schemes never beat the optimum. `family` picks
/// the constraint family; the trace optimum comes from the solver.
PropertyResult check_minimality(Family family, int instances, int schemes,
                                std::uint64_t seed,
                                const SolverConfig& cfg = {});

/// solve_minimax against grid_oracle on random k = 2 instances plus the
/// reference two-dimensional trace instance.
PropertyResult check_trace_oracle(int instances, std::uint64_t seed,
                                  const SolverConfig& cfg = {});

/// Midpoint convexity of the rate in (d1, d2). Trace uses the solver with
/// tolerance 2 * cfg.tol; the closed forms use 1e-10.
PropertyResult check_convexity(Family family, int pairs, std::uint64_t seed,
                               const SolverConfig& cfg = {});

/// Nonincreasing rate along d1, d2 and joint sweeps.
PropertyResult check_sweep_monotone(Family family, int instances,
                                    std::uint64_t seed,
                                    const SolverConfig& cfg = {});

/// The two-dimensional trace instance used as the reference example.
ProblemInstance reference_trace_instance();
Trace reference_trace_spec();

/// Names accepted by run_suite (plus "all").
std::vector<std::string> suite_names();

/// Runs one named suite. `trials` <= 0 selects the suite's default size.
/// Throws std::invalid_argument for an unknown name.
std::vector<PropertyResult> run_suite(const std::string& name,
                                      std::uint64_t seed, int trials = 0);

}  // namespace hbrd
