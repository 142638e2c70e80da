#include "hbrd/achievability.hpp"

#include <algorithm>
#include <cmath>

namespace hbrd {

namespace {

void require_relation(bool holds, const char* relation) {
  if (!holds) {
    throw Error(ErrorCode::SchemeInfeasible,
                std::string("scheme violates ") + relation);
  }
}

void require_mse_canonical(const CanonicalForm& canon) {
  const MatrixXd& q = canon.q;
  const bool permutation =
      ((q.array().abs() < 1e-15) || ((q.array().abs() - 1.0).abs() < 1e-15))
          .all();
  if (!permutation || !canon.k_x_given_y1.is_diagonal() ||
      !canon.k_x_given_y2.is_diagonal()) {
    throw Error(ErrorCode::MseRequiresDiagonal,
                "MSE rates need a permutation-only canonical form with "
                "diagonal conditionals");
  }
}

// Rates of the common/private construction, straight from the diagonal
// targets. Empty blocks contribute log-det 0.
RateReport closed_form(const CanonicalForm& canon, const ModifiedTargets& t) {
  const Index l1 = canon.split.l1;
  const Index l2 = canon.split.l2;
  const DiagMatrix d1_head = t.d1.head(l1);
  const DiagMatrix d2_tail = t.d2.tail(l2);
  const DiagMatrix dhat_head = t.d_hat1.head(l1);
  const DiagMatrix dtilde_tail = t.d_tilde2.tail(l2);
  const DiagMatrix min_head = diag_min(dhat_head, t.d2.head(l1));
  const DiagMatrix min_tail = diag_min(t.d1.tail(l2), dtilde_tail);

  const double ld1 = canon.k_x_given_y1.log_det();
  const double ld2 = canon.k_x_given_y2.log_det();

  const double r1_first = 0.5 * (ld1 - d1_head.log_det() - min_tail.log_det());
  const double r1_second = 0.5 * (dhat_head.log_det() - min_head.log_det());
  const double r2_first = 0.5 * (ld2 - d2_tail.log_det() - min_head.log_det());
  const double r2_second = 0.5 * (dtilde_tail.log_det() - min_tail.log_det());

  RateReport report =
      RateReport::from_branches(r1_first + r1_second, r2_first + r2_second);
  report.components = {{"R1.common_and_private", r1_first},
                       {"R1.refinement", r1_second},
                       {"R2.common_and_private", r2_first},
                       {"R2.refinement", r2_second}};
  return report;
}

AchievableScheme build_scheme(const CanonicalForm& canon,
                              const ModifiedTargets& t) {
  const Index l1 = canon.split.l1;
  const Index l2 = canon.split.l2;
  const SymMatrix g =
      block_diag(t.d_hat1.head(l1), t.d2.tail(l2)).to_sym();
  if (!loewner_leq(g, canon.k_x_given_y2)) {
    throw Error(ErrorCode::InfeasibleConstruction,
                "common-message covariance G is not dominated by K_X|Y2");
  }

  AchievableScheme s;
  s.k_w_y2 = g;
  s.k_w_y1 = (g.inverse() - canon.k.to_sym()).inverse();
  const SymMatrix expected_w_y1 =
      block_diag(t.d1.head(l1), t.d_tilde2.tail(l2)).to_sym();
  if (relative_difference(s.k_w_y1.matrix(), expected_w_y1.matrix()) > 1e-9) {
    throw Error(ErrorCode::InfeasibleConstruction,
                "K_X|W,Y1 does not reduce to blockdiag(D1, D_tilde2)");
  }
  s.k_w_y1 = expected_w_y1;
  s.k_wv_y2 = block_diag(diag_min(t.d_hat1.head(l1), t.d2.head(l1)),
                         t.d2.tail(l2))
                  .to_sym();
  s.k_wu_y1 = block_diag(t.d1.head(l1),
                         diag_min(t.d1.tail(l2), t.d_tilde2.tail(l2)))
                  .to_sym();

  try {
    check_scheme(canon, s);
  } catch (const Error& e) {
    throw Error(ErrorCode::InfeasibleConstruction, e.what());
  }
  // Distortion targets: both private conditionals are diagonal here, so the
  // diagonal comparison covers MSE and scaled-identity alike.
  const double slack = 1e-12;
  if ((s.k_wu_y1.diag().entries() - t.d1.entries()).maxCoeff() > slack ||
      (s.k_wv_y2.diag().entries() - t.d2.entries()).maxCoeff() > slack) {
    throw Error(ErrorCode::InfeasibleConstruction,
                "constructed scheme misses a distortion target");
  }
  return s;
}

}  // namespace

RateReport RateReport::from_branches(double r1, double r2) {
  RateReport r;
  r.r1 = r1;
  r.r2 = r2;
  r.r = std::max(r1, r2);
  return r;
}

ModifiedTargets modified_targets(const CanonicalForm& canon,
                                 const DiagMatrix& d1, const DiagMatrix& d2) {
  const VectorXd& k = canon.k.entries();
  const VectorXd hat_prec = d1.entries().cwiseInverse() + k;
  const VectorXd tilde_prec = d2.entries().cwiseInverse() - k;
  if (!(tilde_prec.minCoeff() > 0.0) || !(hat_prec.minCoeff() > 0.0)) {
    throw Error(ErrorCode::InfeasibleConstruction,
                "D_tilde2 = (D2^{-1} - K)^{-1} is not positive definite");
  }
  return ModifiedTargets{d1, d2, DiagMatrix(hat_prec.cwiseInverse()),
                         DiagMatrix(tilde_prec.cwiseInverse())};
}

void check_scheme(const CanonicalForm& canon, const AchievableScheme& s) {
  require_relation(s.k_wu_y1.is_positive_definite(), "K_X|W,U,Y1 > 0");
  require_relation(s.k_wv_y2.is_positive_definite(), "K_X|W,V,Y2 > 0");
  require_relation(loewner_leq(s.k_wu_y1, s.k_w_y1), "K_X|W,U,Y1 <= K_X|W,Y1");
  require_relation(loewner_leq(s.k_wv_y2, s.k_w_y2), "K_X|W,V,Y2 <= K_X|W,Y2");
  require_relation(loewner_leq(s.k_w_y1, canon.k_x_given_y1),
                   "K_X|W,Y1 <= K_X|Y1");
  require_relation(loewner_leq(s.k_w_y2, canon.k_x_given_y2),
                   "K_X|W,Y2 <= K_X|Y2");
  const MatrixXd diff = (s.k_w_y2.inverse() - s.k_w_y1.inverse()).matrix();
  require_relation(relative_difference(diff, canon.k.to_sym().matrix()) <= 1e-9,
                   "K_X|W,Y2^{-1} - K_X|W,Y1^{-1} = K");
}

RateReport rate_ach_general(const CanonicalForm& canon,
                            const AchievableScheme& s) {
  check_scheme(canon, s);
  const double i_wu_y1 = mutual_info_nats(canon.k_x_given_y1, s.k_wu_y1);
  const double i_v_wy2 = mutual_info_nats(s.k_w_y2, s.k_wv_y2);
  const double i_wv_y2 = mutual_info_nats(canon.k_x_given_y2, s.k_wv_y2);
  const double i_u_wy1 = mutual_info_nats(s.k_w_y1, s.k_wu_y1);
  RateReport report =
      RateReport::from_branches(i_wu_y1 + i_v_wy2, i_wv_y2 + i_u_wy1);
  report.components = {{"I(X;W,U|Y1)", i_wu_y1},
                       {"I(X;V|W,Y2)", i_v_wy2},
                       {"I(X;W,V|Y2)", i_wv_y2},
                       {"I(X;U|W,Y1)", i_u_wy1}};
  return report;
}

AchievableScheme construct_scheme_mse(const CanonicalForm& canon,
                                      const MseDiag& spec) {
  require_mse_canonical(canon);
  const auto [d1, d2] = canonical_targets(canon, spec);
  return build_scheme(canon, modified_targets(canon, d1, d2));
}

AchievableScheme construct_scheme_sc(const CanonicalForm& canon,
                                     const ScaledIdentity& spec) {
  const Index k = canon.dim();
  const ModifiedTargets t = modified_targets(
      canon, DiagMatrix::constant(k, spec.d1), DiagMatrix::constant(k, spec.d2));

  // G^{-1} dominates D2^{-1} (d1 <= d2) or D_hat1^{-1} (d1 >= d2); either
  // way it dominates K_X|Y2^{-1}.
  const VectorXd g_prec =
      block_diag(t.d_hat1.head(canon.split.l1), t.d2.tail(canon.split.l2))
          .entries()
          .cwiseInverse();
  const VectorXd reference = spec.d1 <= spec.d2
                                 ? t.d2.entries().cwiseInverse()
                                 : t.d_hat1.entries().cwiseInverse();
  const double scale = std::max(1.0, g_prec.cwiseAbs().maxCoeff());
  if ((reference - g_prec).maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InfeasibleConstruction,
                "scaled-identity case analysis failed for G^{-1}");
  }
  return build_scheme(canon, t);
}

RateReport rate_mse_closed(const CanonicalForm& canon, const MseDiag& spec) {
  require_mse_canonical(canon);
  const auto [d1, d2] = canonical_targets(canon, spec);
  return closed_form(canon, modified_targets(canon, d1, d2));
}

RateReport rate_sc_closed(const CanonicalForm& canon, const ScaledIdentity& spec) {
  const Index k = canon.dim();
  return closed_form(canon,
                     modified_targets(canon, DiagMatrix::constant(k, spec.d1),
                                      DiagMatrix::constant(k, spec.d2)));
}

}  // namespace hbrd
