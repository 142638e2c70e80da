#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hbrd/random.hpp"
#include "hbrd/trace_solver.hpp"

using namespace hbrd;

namespace {

SymMatrix diag2(double a, double b) { return DiagMatrix(VectorXd{{a, b}}).to_sym(); }

CanonicalForm two_dim(const Trace& spec = {0.15, 0.15}) {
  return canonicalize({2, std::nullopt, diag2(4.0 / 9, 4.0 / 9), diag2(4.0 / 17, 4.0 / 5)}, spec);
}

TraceVars vars(VectorXd w, VectorXd u, VectorXd v) { return {std::move(w), std::move(u), std::move(v)}; }

// Reverse water-filling by bisection on the water level.
double water_filling_rate(const VectorXd& lambda, double d) {
  double lo = 0.0, hi = lambda.maxCoeff();
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lambda.cwiseMin(mid).sum() > d ? hi : lo) = mid;
  }
  const double level = 0.5 * (lo + hi);
  double r = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) r += 0.5 * std::log(lambda(i) / std::min(lambda(i), level));
  return r;
}

SolverConfig quick(std::uint64_t seed = 1) {
  SolverConfig cfg;
  cfg.seed = seed;
  cfg.restarts = 16;
  return cfg;
}

}  // namespace

TEST_CASE("objectives at a hand-evaluated point") {
  const auto c = two_dim();
  const auto o = trace_objectives(c, vars(VectorXd{{0.1, 0.1}}, VectorXd{{0.1}}, VectorXd{{0.05}}));
  // w2 = (1/(10 + 2), 1/(10 - 1)).
  const double r1 = 0.5 * (std::log(16.0 / 81) - std::log(0.1) - std::log(0.1) +
                           std::log(1.0 / 12) - std::log(0.05));
  const double r2 = 0.5 * (std::log(16.0 / 85) - std::log(0.05) - std::log(1.0 / 9) +
                           std::log(0.1) - std::log(0.1));
  CHECK(o.r1 == doctest::Approx(r1).epsilon(1e-12));
  CHECK(o.r2 == doctest::Approx(r2).epsilon(1e-12));
  CHECK(o.r1 == doctest::Approx(1.747).epsilon(1e-3));

  const auto w2 = derived_w2(c, VectorXd{{0.1, 0.1}});
  CHECK(w2(0) == doctest::Approx(1.0 / 12));
  CHECK(w2(1) == doctest::Approx(1.0 / 9));
}

TEST_CASE("R1 - R2 does not depend on u and v") {
  Rng rng(43);
  const auto c = two_dim();
  const VectorXd w{{0.12, 0.2}};
  double first = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto o = trace_objectives(
        c, vars(w, VectorXd{{rng.uniform(0.01, 0.2)}}, VectorXd{{rng.uniform(0.01, 0.05)}}));
    if (t == 0) first = o.r1 - o.r2;
    CHECK(o.r1 - o.r2 == doctest::Approx(first).epsilon(1e-12));
  }
}

TEST_CASE("feasibility checks") {
  const auto c = two_dim();
  const auto bad = check_trace_feasible(
      c, vars(VectorXd{{0.05, 0.1}}, VectorXd{{0.1}}, VectorXd{{0.04}}), {0.15, 0.15});
  CHECK_FALSE(bad.feasible);
  CHECK_FALSE(bad.violations.empty());
  // 0.04 + 1/9 <= 0.17 once decoder 2 gets the larger budget.
  CHECK(check_trace_feasible(c, vars(VectorXd{{0.05, 0.1}}, VectorXd{{0.1}}, VectorXd{{0.04}}),
                             {0.15, 0.17})
            .feasible);
  // v above w2 = 1/22.
  CHECK_FALSE(check_trace_feasible(
                  c, vars(VectorXd{{0.05, 0.1}}, VectorXd{{0.1}}, VectorXd{{0.05}}), {1.0, 1.0})
                  .feasible);
  const auto over = check_trace_feasible(
      c, vars(VectorXd{{0.05, 0.1}}, VectorXd{{0.2}}, VectorXd{{0.05}}), {1.0, 1.0});
  CHECK_FALSE(over.feasible);

  // Everything at the conditionals, budgets equal to their traces.
  const VectorXd w{{4.0 / 9, 4.0 / 9}};
  const VectorXd w2 = derived_w2(c, w);
  CHECK(check_trace_feasible(c, vars(w, w.tail(1), w2.head(1)), {8.0 / 9, w2.sum()}).feasible);
}

TEST_CASE("capped water-filling") {
  const auto x = capped_water_fill(VectorXd{{1.0, 0.1, 2.0}}, 1.5);
  REQUIRE(x);
  CHECK(x->sum() == doctest::Approx(1.5));
  CHECK((*x)(1) == doctest::Approx(0.1));
  CHECK((*x)(0) == doctest::Approx(0.7));
  CHECK((*x)(2) == doctest::Approx(0.7));
  const auto all = capped_water_fill(VectorXd{{0.2, 0.3}}, 5.0);
  REQUIRE(all);
  CHECK((*all)(1) == doctest::Approx(0.3));
  CHECK_FALSE(capped_water_fill(VectorXd{{0.2}}, 0.0));
}

TEST_CASE("minimax and swapped values on the two-dimensional example") {
  const auto c = two_dim();
  const auto mm = solve_minimax(c, {0.15, 0.15});
  CHECK(std::abs(mm.report.r - 1.7808784) < 1e-3);
  CHECK(check_trace_feasible(c, mm.vars, {0.15, 0.15}).feasible);
  const auto sw = solve_maximin_swapped(c, {0.15, 0.15});
  CHECK(std::abs(sw.report.r - 1.7802127) < 1e-3);
  CHECK(sw.report.r < mm.report.r);
}

TEST_CASE("equal decoders reduce to reverse water-filling") {
  Rng rng(47);
  for (int t = 0; t < 8; ++t) {
    const Index k = rng.uniform_int(1, 3);
    const SymMatrix kc = random_spd(rng, k, 0.3, 2.0);
    const double d = rng.uniform(0.2, 0.9) * kc.min_eigenvalue() * static_cast<double>(k);
    // Validation requires d I <= K, so keep d below the smallest eigenvalue.
    const double dd = std::min(d, 0.95 * kc.min_eigenvalue());
    const Trace spec{dd, dd};
    const auto c = canonicalize({k, std::nullopt, kc, kc}, spec);
    const double expected = water_filling_rate(kc.eigenvalues(), dd);
    CHECK(std::abs(solve_minimax(c, spec, quick(t)).report.r - expected) < 1e-4);
  }
}

TEST_CASE("scalar oracle") {
  const double kc = 0.8, d = 0.3;
  const SymMatrix k1 = SymMatrix::identity(1) * kc;
  const auto same = canonicalize({1, std::nullopt, k1, k1}, Trace{d, d});
  CHECK(grid_oracle(same, {d, d}, 60).value ==
        doctest::Approx(0.5 * std::log(kc / d)).epsilon(1e-8));
  // Weaker decoder asks for nothing beyond its side information.
  const auto weak = canonicalize({1, std::nullopt, k1, k1 * 2.0}, Trace{d, 2.0 * kc});
  CHECK(grid_oracle(weak, {d, 2.0 * kc}, 60).value ==
        doctest::Approx(0.5 * std::log(kc / d)).epsilon(1e-8));
}

TEST_CASE("oracle agrees with the solver on the two-dimensional example") {
  const auto c = two_dim();
  const auto o = grid_oracle(c, {0.15, 0.15}, 60);
  CHECK(std::abs(o.value - solve_minimax(c, {0.15, 0.15}, quick()).report.r) < 2e-3);
  CHECK(check_trace_feasible(c, o.vars, {0.15, 0.15}).feasible);
}

TEST_CASE("oracle size limit") {
  const SymMatrix k = SymMatrix::identity(3);
  const auto c = canonicalize({3, std::nullopt, k, k * 0.5}, Trace{0.1, 0.1});
  try {
    grid_oracle(c, {0.1, 0.1}, 10);
    FAIL("expected DimensionTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooLarge);
  }
}

TEST_CASE("max-min never exceeds min-max") {
  Rng rng(53);
  for (int t = 0; t < 5; ++t) {
    const auto inst = random_general_instance(rng, 2);
    const auto spec = random_trace_spec(rng, inst);
    const auto c = canonicalize(inst, spec);
    const auto cfg = quick(t);
    CHECK(solve_maximin_swapped(c, spec, cfg).report.r <=
          solve_minimax(c, spec, cfg).report.r + 1e-6);
  }
}

TEST_CASE("degraded instance has no gap") {
  Rng rng(59);
  const auto inst = random_degraded_instance(rng, 2, false);
  const auto spec = random_trace_spec(rng, inst);
  const auto c = canonicalize(inst, spec);
  const auto cfg = quick();
  CHECK(std::abs(solve_maximin_swapped(c, spec, cfg).report.r -
                 solve_minimax(c, spec, cfg).report.r) < 1e-5);
}

TEST_CASE("fixed seed is reproducible") {
  const auto c = two_dim();
  const auto a = solve_minimax(c, {0.15, 0.15}, quick(9));
  const auto b = solve_minimax(c, {0.15, 0.15}, quick(9));
  CHECK(a.report.r == b.report.r);
  CHECK(a.vars.w == b.vars.w);
}
