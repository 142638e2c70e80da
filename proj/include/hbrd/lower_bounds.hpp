#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbrd/achievability.hpp"
#include "hbrd/enhancement.hpp"

namespace hbrd {

/// Jointly Gaussian (W, U, V), each an extra Gaussian observation of X
/// given by its precision increment. Conditioning on several of them adds
/// their increments to the base conditional precision.
struct AuxTriple {
  PrecisionIncrement s_w;
  PrecisionIncrement s_u;
  PrecisionIncrement s_v;

  static AuxTriple zero(Index n);
};

/// Increments realizing an achievable scheme: S_W from K_X|W,Y1, S_U and
/// S_V as the further refinements at each decoder.
AuxTriple aux_from_scheme(const CanonicalForm& canon,
                          const AchievableScheme& scheme);

enum class BoundTag { Elb, E2lb, Mlb, MlbTrace };
std::string_view to_string(BoundTag tag);

/// ELB/E2LB/MLB carry a branch (1 or 2). MlbTrace is the minimax set with
/// trace constraints; its branch is ignored.
struct BoundKind {
  BoundTag tag = BoundTag::Mlb;
  int branch = 1;
};

/// Every conditional covariance the bounds touch. `y` is the enhanced side
/// information the caller supplied.
struct AuxConditionals {
  SymMatrix w_y1, w_y2;
  SymMatrix wu_y1, wv_y2;
  SymMatrix wu_y, wv_y;
  SymMatrix wuv_y, wuv_y1, wuv_y2;
};

AuxConditionals aux_conditionals(const CanonicalForm& canon,
                                 const SymMatrix& k_x_given_y,
                                 const AuxTriple& aux);

struct RloPair {
  double r_lo1 = 0.0;
  double r_lo2 = 0.0;

  double max() const { return r_lo1 > r_lo2 ? r_lo1 : r_lo2; }
};

/// R_lo1 = I(X;W,U|Y1) + I(X;V|W,U,Y), R_lo2 = I(X;W,V|Y2) + I(X;U|W,V,Y).
RloPair r_lo_pair(const CanonicalForm& canon, const SymMatrix& k_x_given_y,
                  const AuxTriple& aux);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;

  explicit operator bool() const { return feasible; }
};

/// Distortion constraints of the named set. E2LB's corrected covariances
/// raise SingularCorrection when the corrected precision is not positive
/// definite. MSE targets are mapped to canonical coordinates.
FeasibilityReport check_feasible(const BoundKind& kind,
                                 const CanonicalForm& canon,
                                 const SymMatrix& k_x_given_y,
                                 const AuxTriple& aux,
                                 const DistortionSpec& spec);

/// Converse value for MSE / scaled-identity constraints, evaluated from the
/// terminal expressions of the enhancement argument (K_hat, K_tilde and the
/// modified targets). Trace specs raise FamilyMismatch.
RateReport analytic_converse(const CanonicalForm& canon,
                             const DistortionSpec& spec);

struct SearchConfig {
  std::uint64_t seed = 1;
  int restarts = 32;
  int max_iterations = 300;
  /// Extra starting points tried before the random restarts, e.g. a known
  /// scheme. Each is nudged into the interior first.
  std::vector<AuxTriple> warm_starts;
};

struct SearchResult {
  /// Best objective found: an upper estimate of the infimum over the set.
  double value = 0.0;
  AuxTriple best;
  RloPair rates;
  /// Index into warm starts followed by random restarts.
  int restart_index = -1;
  int feasible_restarts = 0;
};

/// Multi-start barrier search over increments (S = L L^T) for
/// inf R_lo{branch} over the set named by `kind` (inf max{R_lo1, R_lo2} for
/// MlbTrace). Heuristic: the value is never certified as a lower bound.
/// Throws NoFeasiblePointFound if no restart reaches the set's interior.
SearchResult mlb_inner_search(const CanonicalForm& canon,
                              const SymMatrix& k_x_given_y,
                              const DistortionSpec& spec, const BoundKind& kind,
                              const SearchConfig& cfg = {});

/// max over both branches of mlb_inner_search for ELB / E2LB / MLB, or the
/// single MlbTrace search.
double bound_estimate(const CanonicalForm& canon, const SymMatrix& k_x_given_y,
                      const DistortionSpec& spec, BoundTag tag,
                      const SearchConfig& cfg = {});

}  // namespace hbrd
