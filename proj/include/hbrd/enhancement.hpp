#pragma once

#include <optional>

#include "hbrd/model.hpp"

namespace hbrd {

/// Enhanced side information Y with X <-> Y <-> (Y1, Y2). Y is never
/// sampled; downstream formulas only need K_X|Y and the two increments
/// that lift each decoder's precision up to it.
struct EnhancedSideInfo {
  SymMatrix k_x_given_y;
  /// blockdiag(A, 0): K_X|Y^{-1} = K_X|Y1^{-1} + k_hat.
  DiagMatrix k_hat;
  /// blockdiag(0, -B): K_X|Y^{-1} = K_X|Y2^{-1} + k_tilde.
  DiagMatrix k_tilde;
  /// Y = M X + N with N ~ N(0, I); only present when K_X is known.
  std::optional<SymMatrix> m;
};

/// `k_x`, when given, is in the instance's original coordinates.
EnhancedSideInfo build_enhanced(const CanonicalForm& canon,
                                const std::optional<SymMatrix>& k_x = std::nullopt);

/// Symmetric PSD square root of K_X|Y1^{-1} - K_X^{-1} + K_hat (canonical
/// coordinates). Throws MRequiresKx without a source covariance.
SymMatrix observation_matrix(const CanonicalForm& canon,
                             const std::optional<SymMatrix>& k_x);

/// Precision increment taking decoder `which`'s side information to Y:
/// K_hat for decoder 1, K_tilde for decoder 2.
PrecisionIncrement build_hat_observation(const CanonicalForm& canon, int which);

}  // namespace hbrd
