#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hbrd/achievability.hpp"
#include "hbrd/random.hpp"

using namespace hbrd;

namespace {

SymMatrix diag2(double a, double b) { return DiagMatrix(VectorXd{{a, b}}).to_sym(); }

// Rate pair straight from log-determinants of the four conditionals.
std::pair<double, double> rates_by_hand(const CanonicalForm& c, const AchievableScheme& s) {
  const double r1 = 0.5 * (c.k_x_given_y1.log_det() - s.k_wu_y1.log_det()) +
                    0.5 * (s.k_w_y2.log_det() - s.k_wv_y2.log_det());
  const double r2 = 0.5 * (c.k_x_given_y2.log_det() - s.k_wv_y2.log_det()) +
                    0.5 * (s.k_w_y1.log_det() - s.k_wu_y1.log_det());
  return {r1, r2};
}

const MseDiag kCrossedSpec{DiagMatrix::constant(2, 0.2), DiagMatrix::constant(2, 0.2)};

CanonicalForm crossed() {
  return canonicalize({2, std::nullopt, diag2(1.0, 0.25), diag2(0.25, 1.0)}, kCrossedSpec);
}

}  // namespace

TEST_CASE("nothing transmitted costs nothing") {
  const auto c = crossed();
  const AchievableScheme idle{c.k_x_given_y1, c.k_x_given_y2, c.k_x_given_y1, c.k_x_given_y2};
  const auto r = rate_ach_general(c, idle);
  CHECK(std::abs(r.r) < 1e-14);
}

TEST_CASE("crossed MSE instance") {
  const auto c = crossed();
  const auto s = construct_scheme_mse(c, kCrossedSpec);
  CHECK(relative_difference(s.k_wu_y1.matrix(), diag2(0.2, 0.125).matrix()) < 1e-12);
  CHECK(relative_difference(s.k_wv_y2.matrix(), diag2(0.125, 0.2).matrix()) < 1e-12);
  const double expected = 0.5 * std::log(0.25 / (0.2 * 0.125));
  const auto ach = rate_ach_general(c, s);
  CHECK(ach.r1 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ach.r2 == doctest::Approx(expected).epsilon(1e-12));
  const auto closed = rate_mse_closed(c, kCrossedSpec);
  CHECK(closed.r == doctest::Approx(expected).epsilon(1e-12));
  const auto [h1, h2] = rates_by_hand(c, s);
  CHECK(h1 == doctest::Approx(ach.r1).epsilon(1e-12));
  CHECK(h2 == doctest::Approx(ach.r2).epsilon(1e-12));

  const auto t = modified_targets(c, kCrossedSpec.d1, kCrossedSpec.d2);
  CHECK(relative_difference(t.d_hat1.entries(), VectorXd{{0.125, 0.5}}) < 1e-12);
  CHECK(relative_difference(t.d_tilde2.entries(), VectorXd{{0.5, 0.125}}) < 1e-12);
}

TEST_CASE("targets at the conditionals with equal decoders") {
  const SymMatrix k = diag2(1.0, 2.0);
  const MseDiag spec{DiagMatrix(VectorXd{{1.0, 2.0}}), DiagMatrix(VectorXd{{1.0, 2.0}})};
  const auto c = canonicalize({2, std::nullopt, k, k}, spec);
  const auto s = construct_scheme_mse(c, spec);
  for (const auto* m : {&s.k_w_y1, &s.k_w_y2, &s.k_wu_y1, &s.k_wv_y2}) {
    CHECK(relative_difference(m->matrix(), c.k_x_given_y1.matrix()) < 1e-12);
  }
  CHECK(std::abs(rate_mse_closed(c, spec).r) < 1e-14);
}

TEST_CASE("degraded MSE collapses to the conditional rate-distortion value") {
  Rng rng(29);
  for (int t = 0; t < 20; ++t) {
    const Index k = rng.uniform_int(1, 4);
    const DiagMatrix kd = random_diag(rng, k, 0.3, 3.0);
    const MseDiag spec{DiagMatrix(kd.entries() * 0.4), DiagMatrix(kd.entries() * 0.4)};
    const auto c = canonicalize({k, std::nullopt, kd.to_sym(), kd.to_sym()}, spec);
    CHECK(c.split.l2 == 0);
    const double expected = 0.5 * k * std::log(1.0 / 0.4);
    CHECK(rate_mse_closed(c, spec).r == doctest::Approx(expected).epsilon(1e-12));
    const auto s = construct_scheme_mse(c, spec);
    CHECK(rate_ach_general(c, s).r == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("scaled identity on the two-dimensional example") {
  const ProblemInstance inst{2, std::nullopt, diag2(4.0 / 9, 4.0 / 9), diag2(4.0 / 17, 4.0 / 5)};
  const ScaledIdentity spec{0.15, 0.15};
  const auto c = canonicalize(inst, spec);
  const auto t = modified_targets(c, DiagMatrix::constant(2, 0.15), DiagMatrix::constant(2, 0.15));
  CHECK(t.d_hat1[0] == doctest::Approx(1.0 / (1.0 / 0.15 + 2.0)).epsilon(1e-12));
  CHECK(t.d_hat1[1] == doctest::Approx(1.0 / (1.0 / 0.15 - 1.0)).epsilon(1e-12));
  const auto s = construct_scheme_sc(c, spec);
  check_scheme(c, s);
  CHECK(rate_sc_closed(c, spec).r == doctest::Approx(rate_ach_general(c, s).r).epsilon(1e-10));
}

TEST_CASE("parallel conditional rate-distortion for scaled identity") {
  const double sigma2 = 2.0, d = 0.3;
  for (Index k = 1; k <= 4; ++k) {
    const SymMatrix kc = SymMatrix::identity(k) * sigma2;
    const ScaledIdentity spec{d, d};
    const auto c = canonicalize({k, std::nullopt, kc, kc}, spec);
    CHECK(rate_sc_closed(c, spec).r == doctest::Approx(0.5 * k * std::log(sigma2 / d)).epsilon(1e-12));
  }
}

TEST_CASE("W carries nothing when d1 is the whole conditional") {
  const SymMatrix kc = SymMatrix::identity(2) * 0.7;
  const ScaledIdentity spec{0.7, 0.7};
  const auto c = canonicalize({2, std::nullopt, kc, kc}, spec);
  const auto s = construct_scheme_sc(c, spec);
  CHECK(relative_difference(s.k_w_y1.matrix(), kc.matrix()) < 1e-12);
  CHECK(std::abs(rate_sc_closed(c, spec).r) < 1e-12);
}

TEST_CASE("swapping the decoders swaps the rates") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const Index k = rng.uniform_int(1, 4);
    const auto inst = random_general_instance(rng, k);
    const auto spec = random_sc_spec(rng, inst);
    const ProblemInstance mirror{k, std::nullopt, inst.k_x_given_y2, inst.k_x_given_y1};
    const ScaledIdentity mspec{spec.d2, spec.d1};
    const auto a = rate_sc_closed(canonicalize(inst, spec), spec);
    const auto b = rate_sc_closed(canonicalize(mirror, mspec), mspec);
    CHECK(a.r1 == doctest::Approx(b.r2).epsilon(1e-9));
    CHECK(a.r2 == doctest::Approx(b.r1).epsilon(1e-9));
  }
}

TEST_CASE("closed forms match the explicit schemes on random instances") {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const Index k = rng.uniform_int(1, 4);
    const auto di = random_diagonal_instance(rng, k);
    const auto ms = random_mse_spec(rng, di);
    const auto cm = canonicalize(di, ms);
    const auto sm = construct_scheme_mse(cm, ms);
    check_scheme(cm, sm);
    const auto [h1, h2] = rates_by_hand(cm, sm);
    const auto closed = rate_mse_closed(cm, ms);
    CHECK(std::max(h1, h2) == doctest::Approx(closed.r).epsilon(1e-10));

    const auto gi = random_general_instance(rng, k);
    const auto ss = random_sc_spec(rng, gi);
    const auto cs = canonicalize(gi, ss);
    const auto sc = construct_scheme_sc(cs, ss);
    check_scheme(cs, sc);
    const auto [g1, g2] = rates_by_hand(cs, sc);
    CHECK(std::max(g1, g2) == doctest::Approx(rate_sc_closed(cs, ss).r).epsilon(1e-10));
    // K_W_Y2^{-1} - K_W_Y1^{-1} = K.
    const MatrixXd gap = sc.k_w_y2.inverse().matrix() - sc.k_w_y1.inverse().matrix();
    CHECK(relative_difference(gap, MatrixXd(cs.k.entries().asDiagonal())) < 1e-9);
  }
}

TEST_CASE("check_scheme rejects a broken ordering") {
  const auto c = crossed();
  auto s = construct_scheme_mse(c, kCrossedSpec);
  s.k_wu_y1 = c.k_x_given_y1 * 2.0;
  try {
    check_scheme(c, s);
    FAIL("expected SchemeInfeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemeInfeasible);
  }
}
