#pragma once

// One-call entry points shared by the CLI and the sweep / convexity checks.

#include <optional>
#include <string>
#include <vector>

#include "hbrd/trace_solver.hpp"

namespace hbrd {

inline constexpr const char* kToolVersion = "0.1.0";

struct RateOutcome {
  CanonicalForm canon;
  RateReport report;
  /// Trace family only: argmin of the minimax program (or of min R1 and
  /// min R2 when swapped).
  std::optional<TraceVars> argmin;
  std::optional<TraceVars> argmin2;
};

/// Closed forms for MSE / scaled identity, the minimax program (or the
/// swapped maximin) for trace constraints. `swapped` is only meaningful for
/// the trace family.
RateOutcome compute_rate(const ProblemInstance& inst, const DistortionSpec& spec,
                         const SolverConfig& cfg = {}, bool swapped = false);

enum class SweepAxis { D1, D2, Both };

struct SweepRow {
  double value = 0.0;
  bool feasible = false;
  RateReport report;
  /// Error code name for infeasible rows.
  std::string note;
};

/// Replaces the swept distortion by `value` (scalar families) or scales the
/// original diagonal target by `value` (MSE), for `steps` values evenly
/// spaced on [lo, hi]. Rows whose spec fails validation are kept and marked.
std::vector<SweepRow> sweep(const ProblemInstance& inst,
                            const DistortionSpec& spec, SweepAxis axis,
                            double lo, double hi, int steps,
                            const SolverConfig& cfg = {}, bool swapped = false);

/// Largest increase of R between consecutive feasible rows ordered by
/// increasing distortion (0 when nonincreasing).
double sweep_monotonicity_violation(const std::vector<SweepRow>& rows);

/// Spec with the swept distortion set to `value` (see sweep()).
DistortionSpec with_distortion(const DistortionSpec& spec, SweepAxis axis,
                               double value);

}  // namespace hbrd
