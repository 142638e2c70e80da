#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hbrd/linalg.hpp"

namespace hbrd {

/// Gaussian source X with side information Y1 (decoder 1) and Y2
/// (decoder 2), described through conditional covariances. K_X is only
/// needed to build an explicit observation matrix for the enhanced side
/// information; no rate formula uses it.
struct ProblemInstance {
  Index k = 0;
  std::optional<SymMatrix> k_x;
  SymMatrix k_x_given_y1;
  SymMatrix k_x_given_y2;
};

/// Componentwise MSE: (K_err)_diag <= D_i with diagonal D_i.
struct MseDiag {
  DiagMatrix d1;
  DiagMatrix d2;
};

/// Error covariance bounded by d_i * I.
struct ScaledIdentity {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Trace of the error covariance bounded by d_i.
struct Trace {
  double d1 = 0.0;
  double d2 = 0.0;
};

using DistortionSpec = std::variant<MseDiag, ScaledIdentity, Trace>;

enum class Family { Mse, ScaledIdentity, Trace };

Family family_of(const DistortionSpec& spec);
std::string_view to_string(Family family);

struct ValidationIssue {
  ErrorCode code;
  /// 1 or 2 when the issue belongs to one decoder, 0 otherwise.
  int decoder = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

ValidationReport validate(const ProblemInstance& inst,
                          const DistortionSpec& spec);

/// Throws Error carrying the first issue's code and every message.
void require_valid(const ProblemInstance& inst, const DistortionSpec& spec);

/// Orthogonal change of basis under which
/// K_{X|Y2}^{-1} - K_{X|Y1}^{-1} = blockdiag(A, B), A >= 0, B < 0.
struct CanonicalForm {
  MatrixXd q;
  BlockSplit split;
  DiagMatrix a;
  DiagMatrix b;
  /// blockdiag(A, B).
  DiagMatrix k;
  SymMatrix k_x_given_y1;
  SymMatrix k_x_given_y2;
  std::optional<SymMatrix> k_x;

  Index dim() const { return split.dim(); }
};

/// Validates, then diagonalizes the precision difference. Zero eigenvalues
/// go to the A block. For MSE specs Q is restricted to a permutation and the
/// conditionals must already be diagonal (MseRequiresDiagonal otherwise).
/// Inside a repeated eigenvalue cluster the basis is rotated so that the
/// decoder-1 conditional is diagonal on that cluster.
CanonicalForm canonicalize(const ProblemInstance& inst,
                           const DistortionSpec& spec);

/// Diagonal distortion targets (D1, D2) expressed in canonical coordinates.
/// Trace specs have no matrix target and raise FamilyMismatch.
std::pair<DiagMatrix, DiagMatrix> canonical_targets(const CanonicalForm& canon,
                                                    const DistortionSpec& spec);

/// sigma with X <-> Y_sigma(1) <-> Y_sigma(2), i.e. sigma(1) is the decoder
/// whose side information is stronger in every direction. Equal
/// conditionals report {1, 2}.
std::optional<std::array<int, 2>> detect_degraded(const ProblemInstance& inst);

}  // namespace hbrd
