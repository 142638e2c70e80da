#pragma once

// Seeded generators for random matrices, instances and distortion specs.
// Everything downstream that is "random" takes one of these so runs are
// reproducible from a single seed.

#include <cstdint>
#include <random>

#include "hbrd/model.hpp"

namespace hbrd {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  double uniform(double lo, double hi);
  /// exp(uniform(ln lo, ln hi)).
  double log_uniform(double lo, double hi);
  double normal();
  int uniform_int(int lo, int hi);
  /// Child generator for an independent stream (restart i, trial i, ...).
  /// Depends only on the construction seed and `stream`.
  Rng split(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

MatrixXd random_gaussian(Rng& rng, Index rows, Index cols);
MatrixXd random_orthogonal(Rng& rng, Index n);
/// Eigenvalues log-uniform in [lo, hi], random eigenbasis.
SymMatrix random_spd(Rng& rng, Index n, double lo, double hi);
/// G G^T with G n-by-rank Gaussian, scaled by `scale`.
SymMatrix random_psd(Rng& rng, Index n, double scale, Index rank);
DiagMatrix random_diag(Rng& rng, Index n, double lo, double hi);

/// Diagonal conditionals with independently drawn entries, so the sign
/// pattern of the precision difference is mixed in general.
ProblemInstance random_diagonal_instance(Rng& rng, Index k);
/// Independent full conditionals, so the canonical rotation is nontrivial.
ProblemInstance random_general_instance(Rng& rng, Index k);
/// K_X|Y2 = K_X|Y1 + P with P PSD (diagonal P when `diagonal`), i.e.
/// decoder 1 is stronger in every direction.
ProblemInstance random_degraded_instance(Rng& rng, Index k, bool diagonal);

/// Targets strictly inside the feasible region: D_i = f * (K_X|Yi)_diag
/// entrywise with f in [lo, hi].
MseDiag random_mse_spec(Rng& rng, const ProblemInstance& inst,
                        double lo = 0.1, double hi = 0.95);
/// d_i = f * lambda_min(K_X|Yi).
ScaledIdentity random_sc_spec(Rng& rng, const ProblemInstance& inst,
                              double lo = 0.1, double hi = 0.95);
Trace random_trace_spec(Rng& rng, const ProblemInstance& inst,
                        double lo = 0.1, double hi = 0.95);

}  // namespace hbrd
