#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hbrd/enhancement.hpp"
#include "hbrd/lower_bounds.hpp"
#include "hbrd/random.hpp"
#include "hbrd/trace_solver.hpp"

using namespace hbrd;

namespace {

SymMatrix diag2(double a, double b) { return DiagMatrix(VectorXd{{a, b}}).to_sym(); }

const MseDiag kCrossedSpec{DiagMatrix::constant(2, 0.2), DiagMatrix::constant(2, 0.2)};
const double kCrossedRate = 0.5 * std::log(10.0);

CanonicalForm crossed() {
  return canonicalize({2, std::nullopt, diag2(1.0, 0.25), diag2(0.25, 1.0)}, kCrossedSpec);
}

ProblemInstance two_dim() {
  return {2, std::nullopt, diag2(4.0 / 9, 4.0 / 9), diag2(4.0 / 17, 4.0 / 5)};
}

}  // namespace

TEST_CASE("zero increments give zero rates") {
  const auto c = crossed();
  const auto y = build_enhanced(c).k_x_given_y;
  const auto r = r_lo_pair(c, y, AuxTriple::zero(2));
  CHECK(std::abs(r.r_lo1) < 1e-14);
  CHECK(std::abs(r.r_lo2) < 1e-14);
}

TEST_CASE("scheme increments attain the closed form") {
  const auto c = crossed();
  const auto y = build_enhanced(c).k_x_given_y;
  const auto aux = aux_from_scheme(c, construct_scheme_mse(c, kCrossedSpec));
  const auto r = r_lo_pair(c, y, aux);
  CHECK(r.r_lo1 == doctest::Approx(kCrossedRate).epsilon(1e-9));
  CHECK(r.max() == doctest::Approx(kCrossedRate).epsilon(1e-9));
  for (auto tag : {BoundTag::Elb, BoundTag::E2lb, BoundTag::Mlb}) {
    for (int branch : {1, 2}) {
      CAPTURE(to_string(tag));
      CHECK(check_feasible({tag, branch}, c, y, aux, kCrossedSpec).feasible);
    }
  }
}

TEST_CASE("without V the second term of R_lo1 vanishes") {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const Index k = rng.uniform_int(1, 4);
    const auto inst = random_general_instance(rng, k);
    const auto c = canonicalize(inst, random_sc_spec(rng, inst));
    const auto y = build_enhanced(c).k_x_given_y;
    AuxTriple aux = AuxTriple::zero(k);
    aux.s_w = PrecisionIncrement(random_psd(rng, k, 1.0, k));
    aux.s_u = PrecisionIncrement(random_psd(rng, k, 1.0, 1));
    const MatrixXd p = c.k_x_given_y1.inverse().matrix() + aux.s_w.matrix().matrix() +
                       aux.s_u.matrix().matrix();
    const double expected = 0.5 * (c.k_x_given_y1.log_det() + std::log(p.determinant()));
    CHECK(r_lo_pair(c, y, aux).r_lo1 == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("zero increments are infeasible for targets below the conditionals") {
  const auto c = crossed();
  const auto y = build_enhanced(c).k_x_given_y;
  const auto rep = check_feasible({BoundTag::Mlb, 1}, c, y, AuxTriple::zero(2), kCrossedSpec);
  CHECK_FALSE(rep.feasible);
  CHECK_FALSE(rep.violations.empty());
}

TEST_CASE("analytic converse") {
  const auto c = crossed();
  CHECK(analytic_converse(c, kCrossedSpec).r == doctest::Approx(kCrossedRate).epsilon(1e-10));

  const SymMatrix k = diag2(1.0, 2.0);
  const MseDiag at{DiagMatrix(VectorXd{{1.0, 2.0}}), DiagMatrix(VectorXd{{1.0, 2.0}})};
  CHECK(std::abs(analytic_converse(canonicalize({2, std::nullopt, k, k}, at), at).r) < 1e-12);

  const ScaledIdentity sc{0.15, 0.15};
  const auto c7 = canonicalize(two_dim(), sc);
  CHECK(analytic_converse(c7, sc).r == doctest::Approx(rate_sc_closed(c7, sc).r).epsilon(1e-10));

  CHECK_THROWS_AS(analytic_converse(canonicalize(two_dim(), Trace{0.1, 0.1}), Trace{0.1, 0.1}),
                  Error);
}

TEST_CASE("search reaches the closed form on the crossed instance") {
  const auto c = crossed();
  const auto y = build_enhanced(c).k_x_given_y;
  SearchConfig cfg{3, 6, 300, {}};
  cfg.warm_starts.push_back(aux_from_scheme(c, construct_scheme_mse(c, kCrossedSpec)));
  const double mlb = bound_estimate(c, y, kCrossedSpec, BoundTag::Mlb, cfg);
  CHECK(std::abs(mlb - kCrossedRate) < 1e-3);
  const double e2 = bound_estimate(c, y, kCrossedSpec, BoundTag::E2lb, cfg);
  CHECK(std::abs(e2 - mlb) < 1e-3);
}

TEST_CASE("targets at the conditionals need no increments") {
  const SymMatrix k = diag2(1.0, 2.0);
  const MseDiag at{DiagMatrix(VectorXd{{1.0, 2.0}}), DiagMatrix(VectorXd{{1.0, 2.0}})};
  const auto c = canonicalize({2, std::nullopt, k, k}, at);
  const auto y = build_enhanced(c).k_x_given_y;
  const auto res = mlb_inner_search(c, y, at, {BoundTag::Mlb, 1}, {5, 4, 200, {}});
  CHECK(res.value < 1e-4);
}

TEST_CASE("trace search does not undercut the structured program") {
  const auto c = canonicalize(two_dim(), Trace{0.15, 0.15});
  const auto y = build_enhanced(c).k_x_given_y;
  const double est = bound_estimate(c, y, Trace{0.15, 0.15}, BoundTag::MlbTrace, {7, 6, 300, {}});
  SolverConfig cfg;
  cfg.restarts = 16;
  const double opt = solve_minimax(c, Trace{0.15, 0.15}, cfg).report.r;
  CHECK(est >= opt - 1e-3);
}

TEST_CASE("warm start of the wrong size is rejected") {
  const auto c = crossed();
  const auto y = build_enhanced(c).k_x_given_y;
  SearchConfig cfg{1, 1, 50, {AuxTriple::zero(3)}};
  CHECK_THROWS_AS(mlb_inner_search(c, y, kCrossedSpec, {BoundTag::Mlb, 1}, cfg), Error);
}
