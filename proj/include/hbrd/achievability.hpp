#pragma once

#include <map>
#include <string>
#include <vector>

#include "hbrd/model.hpp"

namespace hbrd {

/// Jointly Gaussian (W, U, V) described by the four conditional covariances
/// the rate expressions need, all in canonical coordinates. W is the common
/// message, U is private to decoder 1, V is private to decoder 2.
struct AchievableScheme {
  SymMatrix k_w_y1;   // K_X|W,Y1
  SymMatrix k_w_y2;   // K_X|W,Y2
  SymMatrix k_wu_y1;  // K_X|W,U,Y1
  SymMatrix k_wv_y2;  // K_X|W,V,Y2
};

struct RateComponent {
  std::string label;
  double nats = 0.0;
};

/// Rates in nats. `r` is always max(r1, r2).
struct RateReport {
  double r1 = 0.0;
  double r2 = 0.0;
  double r = 0.0;
  std::vector<RateComponent> components;
  std::map<std::string, std::string> diagnostics;

  static RateReport from_branches(double r1, double r2);
};

/// Throws SchemeInfeasible naming the first violated relation.
void check_scheme(const CanonicalForm& canon, const AchievableScheme& scheme);

/// R1 = I(X;W,U|Y1) + I(X;V|W,Y2), R2 = I(X;W,V|Y2) + I(X;U|W,Y1).
RateReport rate_ach_general(const CanonicalForm& canon,
                            const AchievableScheme& scheme);

/// Common message W hits each decoder's constraint exactly where that
/// decoder is weaker; U and V top up the stronger regions.
AchievableScheme construct_scheme_mse(const CanonicalForm& canon,
                                      const MseDiag& spec);
AchievableScheme construct_scheme_sc(const CanonicalForm& canon,
                                     const ScaledIdentity& spec);

/// Closed-form optimal rates for componentwise MSE (diagonal conditionals
/// only) and scaled-identity covariance constraints.
RateReport rate_mse_closed(const CanonicalForm& canon, const MseDiag& spec);
RateReport rate_sc_closed(const CanonicalForm& canon, const ScaledIdentity& spec);

/// D_hat1 = (D1^{-1} + K)^{-1} and D_tilde2 = (D2^{-1} - K)^{-1} for
/// canonical diagonal targets; InfeasibleConstruction if D_tilde2 is not
/// positive definite.
struct ModifiedTargets {
  DiagMatrix d1;
  DiagMatrix d2;
  DiagMatrix d_hat1;
  DiagMatrix d_tilde2;
};
ModifiedTargets modified_targets(const CanonicalForm& canon,
                                 const DiagMatrix& d1, const DiagMatrix& d2);

}  // namespace hbrd
