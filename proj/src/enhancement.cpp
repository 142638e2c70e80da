#include "hbrd/enhancement.hpp"

namespace hbrd {

namespace {

DiagMatrix hat_increment(const CanonicalForm& canon) {
  return block_diag(canon.a, DiagMatrix::constant(canon.split.l2, 0.0));
}

DiagMatrix tilde_increment(const CanonicalForm& canon) {
  return block_diag(DiagMatrix::constant(canon.split.l1, 0.0),
                    DiagMatrix(-canon.b.entries()));
}

}  // namespace

EnhancedSideInfo build_enhanced(const CanonicalForm& canon,
                                const std::optional<SymMatrix>& k_x) {
  EnhancedSideInfo out;
  out.k_hat = hat_increment(canon);
  out.k_tilde = tilde_increment(canon);

  const SymMatrix via_y1 = canon.k_x_given_y1.inverse() + out.k_hat.to_sym();
  const SymMatrix via_y2 = canon.k_x_given_y2.inverse() + out.k_tilde.to_sym();
  if (relative_difference(via_y1.matrix(), via_y2.matrix()) > 1e-9) {
    throw Error(ErrorCode::InvariantViolation,
                "enhanced precision differs between the two decoder routes");
  }
  out.k_x_given_y = via_y1.inverse();
  if (k_x) out.m = observation_matrix(canon, k_x);
  return out;
}

SymMatrix observation_matrix(const CanonicalForm& canon,
                             const std::optional<SymMatrix>& k_x) {
  if (!k_x) {
    throw Error(ErrorCode::MRequiresKx,
                "the observation matrix of Y needs the source covariance K_X");
  }
  if (k_x->dim() != canon.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "K_X has the wrong dimension");
  }
  const SymMatrix kx_c = congruence(canon.q, *k_x);
  const SymMatrix gram = canon.k_x_given_y1.inverse() - kx_c.inverse() +
                         hat_increment(canon).to_sym();
  return gram.sqrt_psd();
}

PrecisionIncrement build_hat_observation(const CanonicalForm& canon, int which) {
  if (which != 1 && which != 2) {
    throw Error(ErrorCode::DimensionMismatch, "decoder index must be 1 or 2");
  }
  return PrecisionIncrement(which == 1 ? hat_increment(canon).to_sym()
                                       : tilde_increment(canon).to_sym());
}

}  // namespace hbrd
