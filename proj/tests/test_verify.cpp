#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "hbrd/verify.hpp"

using namespace hbrd;

namespace {

void check_passed(const PropertyResult& r) {
  CAPTURE(r.name);
  CAPTURE(r.worst_violation);
  CAPTURE(r.first_error);
  CHECK(r.trials > 0);
  CHECK(r.passed());
  CHECK(r.worst_violation <= r.tolerance);
}

}  // namespace

TEST_CASE("lemma checks, reduced sizes") {
  check_passed(check_diag_inverse_lemma(100, 2));
  check_passed(check_variance_drop_identity(100, 2));
  check_passed(check_variance_drop(100, 2));
  check_passed(check_variance_drop_monte_carlo(2, 20000, 2));
  check_passed(check_corollary_enhanced_distortion(100, 2));
  check_passed(check_enhanced_identity(50, 2));
  check_passed(check_diagonal_iff(50, 2));
}

TEST_CASE("structural checks, reduced sizes") {
  check_passed(check_feasible_inclusions(3, 50, 2));
  check_passed(check_degraded_reduction(20, 2));
  check_passed(check_tightness_mse(20, 2));
  check_passed(check_tightness_sc(20, 2));
  check_passed(check_minimality(Family::Mse, 2, 100, 2));
  check_passed(check_minimality(Family::ScaledIdentity, 2, 100, 2));
}

TEST_CASE("same seed gives the same record") {
  const auto a = check_diag_inverse_lemma(30, 5);
  const auto b = check_diag_inverse_lemma(30, 5);
  CHECK(a.worst_violation == b.worst_violation);
  CHECK(a.failures == b.failures);
  CHECK(a.seed == 5);
}

TEST_CASE("suite selection") {
  const auto names = suite_names();
  CHECK(std::find(names.begin(), names.end(), "diag-inverse") != names.end());
  const auto r = run_suite("diag-inverse", 1, 10);
  REQUIRE(r.size() == 1);
  CHECK(r[0].trials == 10);
  CHECK_THROWS_AS(run_suite("no-such-suite", 1), std::invalid_argument);
}

TEST_CASE("reference instance") {
  const auto inst = reference_trace_instance();
  CHECK(inst.k == 2);
  CHECK(inst.k_x_given_y2(0, 0) == doctest::Approx(4.0 / 17));
  CHECK(reference_trace_spec().d1 == 0.15);
}
