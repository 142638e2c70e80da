#include "hbrd/trace_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "hbrd/optimize.hpp"
#include "hbrd/random.hpp"

namespace hbrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSettledViolation = 1e-6;
constexpr double kRoundoff = 1e-12;

// diag(1/w) >= K_X|Y1^{-1}. Diagonal conditionals reduce this to w <= diag.
class LoewnerGuard {
 public:
  explicit LoewnerGuard(const SymMatrix& k1)
      : diagonal_(k1.is_diagonal()),
        caps_(k1.matrix().diagonal()),
        root_(k1.sqrt_psd().matrix()) {}

  bool diagonal() const { return diagonal_; }
  const VectorXd& caps() const { return caps_; }

  /// lambda_min(K1^{1/2} diag(1/w) K1^{1/2}) - 1; >= 0 iff the relation holds.
  double margin(const VectorXd& w) const {
    if (diagonal_) return (caps_.array() / w.array()).minCoeff() - 1.0;
    const MatrixXd m = root_ * w.cwiseInverse().asDiagonal() * root_;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) - 1.0;
  }

 private:
  bool diagonal_;
  VectorXd caps_;
  MatrixXd root_;
};

// Everything the inner loops need, precomputed once.
struct Program {
  Index k, l1, l2;
  VectorXd kdiag;  // blockdiag(A, B)
  double ld1, ld2;
  double d1, d2;
  LoewnerGuard guard;
  VectorXd w_upper;  // 1 / (K1^{-1})_ii, necessary bound on w

  Program(const CanonicalForm& canon, const Trace& spec)
      : k(canon.dim()),
        l1(canon.split.l1),
        l2(canon.split.l2),
        kdiag(canon.k.entries()),
        ld1(canon.k_x_given_y1.log_det()),
        ld2(canon.k_x_given_y2.log_det()),
        d1(spec.d1),
        d2(spec.d2),
        guard(canon.k_x_given_y1) {
    w_upper = canon.k_x_given_y1.inverse().matrix().diagonal().cwiseInverse();
  }

  Index size() const { return k + l1 + l2; }

  // w2 with +inf marking 1/w + K <= 0.
  VectorXd w2(const VectorXd& w) const {
    VectorXd out(k);
    for (Index i = 0; i < k; ++i) {
      const double prec = 1.0 / w(i) + kdiag(i);
      out(i) = prec > 0.0 ? 1.0 / prec : kInf;
    }
    return out;
  }

  // R1, R2 from w and the log-sums of u and v.
  TraceObjectives objectives(const VectorXd& w, const VectorXd& w2v,
                             double log_u_sum, double log_v_sum) const {
    double a_term = 0.0;
    for (Index i = 0; i < l1; ++i) a_term += std::log1p(kdiag(i) * w(i));
    double b_term = 0.0;
    for (Index i = l1; i < k; ++i) b_term += std::log1p(-kdiag(i) * w2v(i));
    const double shared = log_u_sum + log_v_sum;
    return {0.5 * (ld1 - a_term - shared), 0.5 * (ld2 - b_term - shared)};
  }

  TraceVars unpack(const VectorXd& z) const {
    return TraceVars{z.head(k).array().exp(), z.segment(k, l2).array().exp(),
                     z.segment(k + l2, l1).array().exp()};
  }

  VectorXd pack(const TraceVars& v) const {
    VectorXd z(size());
    z << v.w.array().log(), v.u.array().log(), v.v.array().log();
    return z;
  }
};

double pick_objective(const TraceObjectives& o, int branch) {
  if (branch == 1) return o.r1;
  if (branch == 2) return o.r2;
  return std::max(o.r1, o.r2);
}

// Refinement relations u <= w (lower block) and v <= w2 (upper block).
TraceVars clamped(const Program& prog, TraceVars v) {
  if (v.u.size() > 0) v.u = v.u.cwiseMin(v.w.tail(prog.l2));
  if (v.v.size() > 0) {
    const VectorXd w2 = prog.w2(v.w);
    // A non-finite w2 is a B-block domain issue left to the scaling.
    const VectorXd cap = w2.allFinite() ? w2 : v.w;
    v.v = v.v.cwiseMin(cap.head(prog.l1));
  }
  return v;
}

// Shrink every variable uniformly (re-clamping each time) until the point is
// feasible. Re-clamping keeps feasibility monotone in the scale even when
// round-off in K makes w2 scale slightly slower than w.
std::optional<TraceVars> repair(const CanonicalForm& canon, const Program& prog,
                                const TraceVars& v, const Trace& spec) {
  auto at = [&](double alpha) {
    return clamped(prog, TraceVars{v.w * alpha, v.u * alpha, v.v * alpha});
  };
  if (const TraceVars full = at(1.0); check_trace_feasible(canon, full, spec)) {
    return full;
  }
  double lo = 1.0;
  for (int i = 0; i < 200; ++i) {
    lo *= 0.5;
    if (check_trace_feasible(canon, at(lo), spec)) break;
  }
  if (!check_trace_feasible(canon, at(lo), spec)) return std::nullopt;
  double hi = std::min(1.0, 2.0 * lo);
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (check_trace_feasible(canon, at(mid), spec)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(lo);
}

bool lexicographically_less(const TraceVars& a, const TraceVars& b) {
  VectorXd x(a.w.size() + a.u.size() + a.v.size());
  VectorXd y(x.size());
  x << a.w, a.u, a.v;
  y << b.w, b.u, b.v;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != y(i)) return x(i) < y(i);
  }
  return false;
}

TraceSolution solve(const CanonicalForm& canon, const Trace& spec, int branch,
                    const SolverConfig& cfg) {
  if (!(spec.d1 > 0.0) || !(spec.d2 > 0.0)) {
    throw Error(ErrorCode::DistortionInfeasible, "trace bounds must be positive");
  }
  const Program prog(canon, spec);
  const Index n = prog.size();
  const bool epigraph = branch == 0;
  const Index nz = epigraph ? n + 1 : n;
  const Index k = prog.k, l1 = prog.l1, l2 = prog.l2;

  // Objective pieces directly in log coordinates.
  auto eval = [&](const VectorXd& z, TraceObjectives& out) {
    const VectorXd w = z.head(k).array().exp();
    const VectorXd w2 = prog.w2(w);
    if (!w2.allFinite()) return false;
    out = prog.objectives(w, w2, z.segment(k, l2).sum(),
                          z.segment(k + l2, l1).sum());
    return std::isfinite(out.r1) && std::isfinite(out.r2);
  };

  const ScalarFn f = [&](const VectorXd& z) {
    if (epigraph) return z(n);
    TraceObjectives o;
    if (!eval(z, o)) return kInf;
    return pick_objective(o, branch);
  };

  const Index n_cons = 2 + l2 + l1 + (prog.guard.diagonal() ? k : 1) +
                       (epigraph ? 2 : 0);
  const VectorFn g = [&](const VectorXd& z) {
    VectorXd out(n_cons);
    const VectorXd w = z.head(k).array().exp();
    const VectorXd w2 = prog.w2(w);
    if (!w2.allFinite()) return VectorXd::Constant(n_cons, kInf).eval();
    const VectorXd lw2 = w2.array().log();
    Index c = 0;
    out(c++) = (w.head(l1).sum() + z.segment(k, l2).array().exp().sum()) / prog.d1 - 1.0;
    out(c++) = (z.segment(k + l2, l1).array().exp().sum() + w2.tail(l2).sum()) / prog.d2 - 1.0;
    for (Index i = 0; i < l2; ++i) out(c++) = z(k + i) - z(l1 + i);
    for (Index i = 0; i < l1; ++i) out(c++) = z(k + l2 + i) - lw2(i);
    if (prog.guard.diagonal()) {
      for (Index i = 0; i < k; ++i) out(c++) = z(i) - std::log(prog.guard.caps()(i));
    } else {
      out(c++) = -prog.guard.margin(w);
    }
    if (epigraph) {
      TraceObjectives o;
      if (!eval(z, o)) return VectorXd::Constant(n_cons, kInf).eval();
      out(c++) = o.r1 - z(n);
      out(c++) = o.r2 - z(n);
    }
    return out;
  };

  AugLagOptions al;
  // Finite-difference gradients cap how far the multipliers can be pushed;
  // the repair step absorbs the remaining violation.
  al.feas_tol = std::min(1e-8, cfg.tol * 0.1);
  al.f_change_tol = cfg.tol * 0.01;
  al.inner.max_iterations = cfg.max_iterations;
  al.inner.f_tol = cfg.tol * 1e-6;
  al.inner.grad_tol = 1e-10;

  TraceSolution best;
  best.restarts = cfg.restarts;
  double best_value = kInf;
  double worst_converged = -kInf;
  double best_converged = kInf;
  const Rng root(cfg.seed);

  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng = root.split(static_cast<std::uint64_t>(r));
    TraceVars start;
    start.w = VectorXd(k);
    for (Index i = 0; i < k; ++i) start.w(i) = prog.w_upper(i) * rng.uniform(0.05, 0.95);
    const VectorXd w2 = prog.w2(start.w);
    start.u = VectorXd(l2);
    for (Index i = 0; i < l2; ++i) start.u(i) = start.w(l1 + i) * rng.uniform(0.1, 0.9);
    start.v = VectorXd(l1);
    for (Index i = 0; i < l1; ++i) start.v(i) = w2(i) * rng.uniform(0.1, 0.9);
    const auto feasible_start = repair(canon, prog, start, spec);
    if (!feasible_start) continue;

    VectorXd z0(nz);
    z0.head(n) = prog.pack(*feasible_start);
    if (epigraph) {
      TraceObjectives o;
      if (!eval(z0.head(n), o)) continue;
      z0(n) = std::max(o.r1, o.r2) + 0.1;
    }

    AugLagResult res;
    try {
      res = augmented_lagrangian(f, g, z0, al);
    } catch (const Error&) {
      continue;
    }
    const auto fixed = repair(canon, prog, prog.unpack(res.x.head(n)), spec);
    if (!fixed) continue;
    const TraceObjectives o = trace_objectives(canon, *fixed);
    const double value = pick_objective(o, branch);
    // A restart whose violation plateaus just above feas_tol (finite
    // difference noise) has still settled; repair removed the remainder.
    if (res.converged || res.max_violation <= kSettledViolation) {
      ++best.converged_restarts;
      worst_converged = std::max(worst_converged, value);
      best_converged = std::min(best_converged, value);
    }
    const bool better = value < best_value - 1e-12;
    const bool tie = std::abs(value - best_value) <= 1e-12 &&
                     lexicographically_less(*fixed, best.vars);
    if (better || tie) {
      best_value = std::min(value, best_value);
      best.vars = *fixed;
      best.report = RateReport::from_branches(o.r1, o.r2);
      if (!epigraph) best.report.r = value;
    }
  }

  if (!std::isfinite(best_value)) {
    throw Error(ErrorCode::Infeasible,
                "no restart produced a feasible point of the trace program");
  }

  // The program is convex in these coordinates, so a restart that stops
  // short only stalled; warm restarts from the incumbent finish the job.
  for (int pass = 0; pass < 20; ++pass) {
    VectorXd z0(nz);
    z0.head(n) = prog.pack(best.vars);
    if (epigraph) z0(n) = best_value + 1e-3;
    AugLagResult res;
    try {
      res = augmented_lagrangian(f, g, z0, al);
    } catch (const Error&) {
      break;
    }
    const auto fixed = repair(canon, prog, prog.unpack(res.x.head(n)), spec);
    if (!fixed) break;
    const TraceObjectives o = trace_objectives(canon, *fixed);
    const double value = pick_objective(o, branch);
    if (!(value < best_value - 0.1 * cfg.tol)) break;
    best_value = value;
    best.vars = *fixed;
    best.report = RateReport::from_branches(o.r1, o.r2);
    if (!epigraph) best.report.r = value;
    ++best.polish_passes;
  }
  if (best.converged_restarts == 0) {
    std::ostringstream os;
    os.precision(10);
    os << "no restart converged; best feasible value " << best_value;
    throw Error(ErrorCode::NonConvergence, os.str());
  }
  best.spread = worst_converged - best_converged;
  auto& diag = best.report.diagnostics;
  diag["solver"] = "augmented-lagrangian-bfgs";
  diag["restarts"] = std::to_string(best.restarts);
  diag["converged_restarts"] = std::to_string(best.converged_restarts);
  diag["polish_passes"] = std::to_string(best.polish_passes);
  std::ostringstream spread;
  spread.precision(3);
  spread << std::scientific << best.spread;
  diag["spread"] = spread.str();
  return best;
}

}  // namespace

VectorXd derived_w2(const CanonicalForm& canon, const VectorXd& w) {
  if (w.size() != canon.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "w must have k entries");
  }
  return (w.cwiseInverse() + canon.k.entries()).cwiseInverse();
}

TraceObjectives trace_objectives(const CanonicalForm& canon,
                                 const TraceVars& vars) {
  const Index k = canon.dim();
  const Index l1 = canon.split.l1;
  const Index l2 = canon.split.l2;
  if (vars.w.size() != k || vars.u.size() != l2 || vars.v.size() != l1) {
    throw Error(ErrorCode::DimensionMismatch,
                "trace variables need |w| = k, |u| = l2, |v| = l1");
  }
  const VectorXd& kd = canon.k.entries();
  double r1 = canon.k_x_given_y1.log_det();
  double r2 = canon.k_x_given_y2.log_det();
  auto take_log = [](double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::NumericalFailure,
                  "trace objective: nonpositive log argument");
    }
    return std::log(x);
  };
  for (Index i = 0; i < l1; ++i) r1 -= take_log(1.0 + kd(i) * vars.w(i));
  for (Index i = l1; i < k; ++i) {
    const double prec = 1.0 / vars.w(i) + kd(i);
    if (!(prec > 0.0)) {
      throw Error(ErrorCode::NumericalFailure,
                  "trace objective: 1/w + K is not positive");
    }
    r2 -= take_log(1.0 - kd(i) / prec);
  }
  double shared = 0.0;
  for (Index i = 0; i < l1; ++i) shared += take_log(vars.v(i));
  for (Index i = 0; i < l2; ++i) shared += take_log(vars.u(i));
  return {0.5 * (r1 - shared), 0.5 * (r2 - shared)};
}

FeasibilityReport check_trace_feasible(const CanonicalForm& canon,
                                       const TraceVars& vars,
                                       const Trace& spec) {
  const Index k = canon.dim();
  const Index l1 = canon.split.l1;
  const Index l2 = canon.split.l2;
  FeasibilityReport report;
  auto fail = [&](const std::string& msg) {
    report.feasible = false;
    report.violations.push_back(msg);
  };
  if (vars.w.size() != k || vars.u.size() != l2 || vars.v.size() != l1) {
    fail("variable sizes do not match (k, l2, l1)");
    return report;
  }
  if (!(vars.w.array() > 0.0).all() || !(vars.u.array() > 0.0).all() ||
      !(vars.v.array() > 0.0).all()) {
    fail("all variables must be positive");
    return report;
  }
  const VectorXd prec2 = vars.w.cwiseInverse() + canon.k.entries();
  if (!(prec2.array() > 0.0).all()) {
    fail("w2 = 1/(1/w + K) is not positive");
    return report;
  }
  const VectorXd w2 = prec2.cwiseInverse();

  const double sum1 = vars.w.head(l1).sum() + vars.u.sum();
  const double sum2 = vars.v.sum() + w2.tail(l2).sum();
  // Round-off slack, so points built exactly on a boundary still pass.
  const auto above = [](double x, double cap) { return x > cap + kRoundoff * std::abs(cap); };
  if (above(sum1, spec.d1)) {
    std::ostringstream os;
    os << "decoder 1 trace " << sum1 << " exceeds " << spec.d1;
    fail(os.str());
  }
  if (above(sum2, spec.d2)) {
    std::ostringstream os;
    os << "decoder 2 trace " << sum2 << " exceeds " << spec.d2;
    fail(os.str());
  }
  for (Index i = 0; i < l2; ++i) {
    if (above(vars.u(i), vars.w(l1 + i))) {
      fail("u[" + std::to_string(i) + "] exceeds w[" + std::to_string(l1 + i) + "]");
    }
  }
  for (Index i = 0; i < l1; ++i) {
    if (above(vars.v(i), w2(i))) {
      fail("v[" + std::to_string(i) + "] exceeds w2[" + std::to_string(i) + "]");
    }
  }
  const SymMatrix w_prec = DiagMatrix(vars.w.cwiseInverse()).to_sym();
  if (!loewner_leq(canon.k_x_given_y1.inverse(), w_prec)) {
    fail("diag(1/w) does not dominate K_X|Y1^{-1}");
  }
  return report;
}

TraceSolution solve_minimax(const CanonicalForm& canon, const Trace& spec,
                            const SolverConfig& cfg) {
  return solve(canon, spec, 0, cfg);
}

TraceSolution solve_branch(const CanonicalForm& canon, const Trace& spec,
                           int branch, const SolverConfig& cfg) {
  if (branch != 1 && branch != 2) {
    throw Error(ErrorCode::DimensionMismatch, "branch must be 1 or 2");
  }
  return solve(canon, spec, branch, cfg);
}

SwappedSolution solve_maximin_swapped(const CanonicalForm& canon,
                                      const Trace& spec,
                                      const SolverConfig& cfg) {
  const TraceSolution s1 = solve(canon, spec, 1, cfg);
  const TraceSolution s2 = solve(canon, spec, 2, cfg);
  SwappedSolution out;
  out.report = RateReport::from_branches(s1.report.r, s2.report.r);
  out.report.components = {{"min R1", s1.report.r}, {"min R2", s2.report.r}};
  out.report.diagnostics = s1.report.diagnostics;
  out.report.diagnostics["converged_restarts"] =
      std::to_string(s1.converged_restarts) + "+" +
      std::to_string(s2.converged_restarts);
  out.argmin1 = s1.vars;
  out.argmin2 = s2.vars;
  return out;
}

std::optional<VectorXd> capped_water_fill(const VectorXd& caps, double budget) {
  const Index n = caps.size();
  if (n == 0) {
    if (budget >= 0.0) return VectorXd();
    return std::nullopt;
  }
  if (!(budget > 0.0)) return std::nullopt;
  if (caps.sum() <= budget) return caps;
  std::vector<double> sorted(caps.data(), caps.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double remaining = budget;
  double level = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double share = remaining / double(n - j);
    if (sorted[j] >= share) {
      level = share;
      break;
    }
    remaining -= sorted[j];
  }
  return caps.cwiseMin(level);
}

OracleResult grid_oracle(const CanonicalForm& canon, const Trace& spec,
                         int resolution, int branch) {
  const Program prog(canon, spec);
  if (prog.size() > 5) {
    throw Error(ErrorCode::DimensionTooLarge,
                "grid oracle needs k + l1 + l2 <= 5");
  }
  if (resolution < 2) {
    throw Error(ErrorCode::DimensionMismatch, "grid resolution must be >= 2");
  }
  const Index k = prog.k, l1 = prog.l1, l2 = prog.l2;

  // Upper end of each w axis: the Loewner diagonal bound and the trace
  // budget that coordinate alone would consume.
  VectorXd hi(k);
  for (Index i = 0; i < k; ++i) {
    double h = prog.w_upper(i);
    if (i < l1) {
      h = std::min(h, spec.d1);
    } else {
      h = std::min(h, 1.0 / (1.0 / spec.d2 - prog.kdiag(i)));
    }
    hi(i) = std::log(h);
  }

  OracleResult best;
  best.value = kInf;
  // Objective at log_w with u and v water-filled; +inf when infeasible.
  auto solve_at = [&](const VectorXd& log_w, TraceVars& vars,
                      TraceObjectives& o) -> double {
    const VectorXd w = log_w.array().exp();
    if (prog.guard.margin(w) < 0.0) return kInf;
    const VectorXd w2 = prog.w2(w);
    if (!w2.allFinite()) return kInf;
    const auto u = capped_water_fill(w.tail(l2), spec.d1 - w.head(l1).sum());
    if (!u) return kInf;
    const auto v = capped_water_fill(w2.head(l1), spec.d2 - w2.tail(l2).sum());
    if (!v) return kInf;
    o = prog.objectives(w, w2, u->array().log().sum(), v->array().log().sum());
    vars = TraceVars{w, *u, *v};
    return pick_objective(o, branch);
  };
  auto evaluate = [&](const VectorXd& log_w) {
    TraceVars vars;
    TraceObjectives o;
    const double value = solve_at(log_w, vars, o);
    if (value < best.value) {
      best.value = value;
      best.vars = std::move(vars);
      best.objectives = o;
    }
    return value;
  };

  // Nested one-dimensional searches: coordinate j is gridded over its whole
  // range, then the bracket around the best grid point is re-gridded until
  // it collapses. Bracketing in one dimension copes with the kink where the
  // two branches cross, which a joint pattern search does not.
  VectorXd x = hi;
  std::function<double(Index)> minimize_from = [&](Index j) -> double {
    if (j == k) return evaluate(x);
    auto value_at = [&](double t) {
      x(j) = std::min(t, hi(j));
      return minimize_from(j + 1);
    };
    double lo_t = hi(j) - std::log(1e4);
    double hi_t = hi(j);
    int points = resolution;
    double best_t = hi_t;
    double best_v = kInf;
    while (hi_t - lo_t > 1e-11) {
      const double step = (hi_t - lo_t) / (points - 1);
      int best_i = -1;
      for (int i = 0; i < points; ++i) {
        const double t = lo_t + step * i;
        const double v = value_at(t);
        if (v < best_v) {
          best_v = v;
          best_t = t;
          best_i = i;
        }
      }
      if (best_i < 0) {
        // Nothing in this bracket beats the incumbent: narrow around it.
        lo_t = std::max(lo_t, best_t - step);
        hi_t = std::min(hi_t, best_t + step);
      } else {
        lo_t = best_t - step;
        hi_t = std::min(hi(j), best_t + step);
      }
      if (!std::isfinite(best_v)) break;
      points = 11;
    }
    x(j) = best_t;
    return best_v;
  };
  minimize_from(0);
  if (!std::isfinite(best.value)) {
    throw Error(ErrorCode::Infeasible, "grid oracle found no feasible point");
  }
  return best;
}

}  // namespace hbrd
