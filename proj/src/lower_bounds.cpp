#include "hbrd/lower_bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hbrd/optimize.hpp"
#include "hbrd/random.hpp"

namespace hbrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGammaTol = 1e-9;

// Distortion targets in canonical coordinates.
struct Target {
  Family family = Family::Mse;
  DiagMatrix d1, d2;
  double s1 = 0.0, s2 = 0.0;
};

Target make_target(const CanonicalForm& canon, const DistortionSpec& spec) {
  Target t;
  t.family = family_of(spec);
  if (t.family == Family::Mse) {
    std::tie(t.d1, t.d2) = canonical_targets(canon, spec);
  } else if (t.family == Family::ScaledIdentity) {
    const auto& s = std::get<ScaledIdentity>(spec);
    t.s1 = s.d1;
    t.s2 = s.d2;
  } else {
    const auto& s = std::get<Trace>(spec);
    t.s1 = s.d1;
    t.s2 = s.d2;
  }
  return t;
}

// Largest relative excess of Gamma_i(k) over D_i; <= 0 means satisfied.
double gamma_excess(const Target& t, int decoder, const SymMatrix& k) {
  switch (t.family) {
    case Family::Mse: {
      const VectorXd& d = (decoder == 1 ? t.d1 : t.d2).entries();
      return ((k.matrix().diagonal() - d).array() / d.array()).maxCoeff();
    }
    case Family::ScaledIdentity: {
      const double d = decoder == 1 ? t.s1 : t.s2;
      return (k.max_eigenvalue() - d) / d;
    }
    case Family::Trace: {
      const double d = decoder == 1 ? t.s1 : t.s2;
      return (k.trace() - d) / d;
    }
  }
  return kInf;
}

// Sum of log-slacks of Gamma_i(k) <= D_i; -inf outside the interior.
double gamma_log_slack(const Target& t, int decoder, const MatrixXd& k) {
  double acc = 0.0;
  switch (t.family) {
    case Family::Mse: {
      const VectorXd& d = (decoder == 1 ? t.d1 : t.d2).entries();
      for (Index i = 0; i < d.size(); ++i) {
        const double slack = 1.0 - k(i, i) / d(i);
        if (!(slack > 0.0)) return -kInf;
        acc += std::log(slack);
      }
      return acc;
    }
    case Family::ScaledIdentity: {
      const double d = decoder == 1 ? t.s1 : t.s2;
      const Eigen::SelfAdjointEigenSolver<MatrixXd> es(k, Eigen::EigenvaluesOnly);
      for (Index i = 0; i < k.rows(); ++i) {
        const double slack = 1.0 - es.eigenvalues()(i) / d;
        if (!(slack > 0.0)) return -kInf;
        acc += std::log(slack);
      }
      return acc;
    }
    case Family::Trace: {
      const double d = decoder == 1 ? t.s1 : t.s2;
      const double slack = 1.0 - k.trace() / d;
      return slack > 0.0 ? std::log(slack) : -kInf;
    }
  }
  return -kInf;
}

struct ConstraintPair {
  // Which covariance each decoder's constraint applies to.
  enum class Which { WuY1, WvY2, WuvY, CorrectedTilde, CorrectedHat };
  Which first;   // decoder 1
  Which second;  // decoder 2
};

ConstraintPair constraints_for(const BoundKind& kind) {
  using W = ConstraintPair::Which;
  const bool b1 = kind.branch == 1;
  switch (kind.tag) {
    case BoundTag::Elb:
      return b1 ? ConstraintPair{W::WuY1, W::WuvY} : ConstraintPair{W::WuvY, W::WvY2};
    case BoundTag::E2lb:
      return b1 ? ConstraintPair{W::WuY1, W::CorrectedTilde}
                : ConstraintPair{W::CorrectedHat, W::WvY2};
    case BoundTag::Mlb:
    case BoundTag::MlbTrace:
      return ConstraintPair{W::WuY1, W::WvY2};
  }
  return ConstraintPair{W::WuY1, W::WvY2};
}

void require_branch(const BoundKind& kind) {
  if (kind.tag != BoundTag::MlbTrace && kind.branch != 1 && kind.branch != 2) {
    throw Error(ErrorCode::DimensionMismatch, "bound branch must be 1 or 2");
  }
}

// Precision-domain state shared by the evaluators and the search.
struct Precisions {
  MatrixXd p1, p2, py;
  MatrixXd k_hat, k_tilde;  // relative to the supplied Y

  Precisions(const CanonicalForm& canon, const SymMatrix& k_x_given_y)
      : p1(canon.k_x_given_y1.inverse().matrix()),
        p2(canon.k_x_given_y2.inverse().matrix()),
        py(k_x_given_y.inverse().matrix()) {
    k_hat = py - p1;
    k_tilde = py - p2;
  }
};

SymMatrix corrected(const SymMatrix& k_wuv_y, const MatrixXd& correction) {
  const SymMatrix prec(k_wuv_y.inverse().matrix() - correction);
  if (!prec.is_positive_definite()) {
    throw Error(ErrorCode::SingularCorrection,
                "corrected precision K_X|W,U,V,Y^{-1} - correction is not "
                "positive definite");
  }
  return prec.inverse();
}

SymMatrix pick(ConstraintPair::Which which, const AuxConditionals& c,
               const Precisions& p) {
  using W = ConstraintPair::Which;
  switch (which) {
    case W::WuY1: return c.wu_y1;
    case W::WvY2: return c.wv_y2;
    case W::WuvY: return c.wuv_y;
    case W::CorrectedTilde: return corrected(c.wuv_y, p.k_tilde);
    case W::CorrectedHat: return corrected(c.wuv_y, p.k_hat);
  }
  return c.wuv_y;
}

// ------------------------------------------------------------ search core

double log_det_llt(const MatrixXd& m) {
  const Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nan("");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Index tri_size(Index n) { return n * (n + 1) / 2; }

MatrixXd lower_from(const VectorXd& theta, Index offset, Index n) {
  MatrixXd l = MatrixXd::Zero(n, n);
  Index pos = offset;
  for (Index c = 0; c < n; ++c)
    for (Index r = c; r < n; ++r) l(r, c) = theta(pos++);
  return l;
}

struct Increments {
  MatrixXd w, u, v;
};

Increments increments_from(const VectorXd& theta, Index n) {
  const Index t = tri_size(n);
  const MatrixXd lw = lower_from(theta, 0, n);
  const MatrixXd lu = lower_from(theta, t, n);
  const MatrixXd lv = lower_from(theta, 2 * t, n);
  return {lw * lw.transpose(), lu * lu.transpose(), lv * lv.transpose()};
}

// Inverse of increments_from for a warm start, pushed slightly into the
// interior (more precision only shrinks every constrained covariance).
VectorXd theta_from(const AuxTriple& aux, Index n) {
  const Index t = tri_size(n);
  VectorXd theta(3 * t);
  const SymMatrix* parts[] = {&aux.s_w.matrix(), &aux.s_u.matrix(), &aux.s_v.matrix()};
  for (int p = 0; p < 3; ++p) {
    const MatrixXd s = parts[p]->matrix() * (1.0 + 1e-6) +
                       1e-9 * MatrixXd::Identity(n, n);
    const MatrixXd l = Eigen::LLT<MatrixXd>(s).matrixL();
    Index pos = p * t;
    for (Index c = 0; c < n; ++c)
      for (Index r = c; r < n; ++r) theta(pos++) = l(r, c);
  }
  return theta;
}

class SearchProblem {
 public:
  SearchProblem(const CanonicalForm& canon, const SymMatrix& k_x_given_y,
                const DistortionSpec& spec, const BoundKind& kind)
      : n_(canon.dim()),
        prec_(canon, k_x_given_y),
        target_(make_target(canon, spec)),
        kind_(kind),
        pair_(constraints_for(kind)),
        ld_p1_(log_det_llt(prec_.p1)),
        ld_p2_(log_det_llt(prec_.p2)) {}

  Index param_count() const { return 3 * tri_size(n_); }
  bool epigraph() const { return kind_.tag == BoundTag::MlbTrace; }

  // Objective value and log-barrier sum at theta; barrier = -inf outside.
  void evaluate(const VectorXd& theta, double& r1, double& r2,
                double& barrier) const {
    const Increments s = increments_from(theta, n_);
    const MatrixXd wu = s.w + s.u;
    const MatrixXd wv = s.w + s.v;
    const MatrixXd all = wu + s.v;
    const double ld_wu_y1 = log_det_llt(prec_.p1 + wu);
    const double ld_wv_y2 = log_det_llt(prec_.p2 + wv);
    const double ld_wu_y = log_det_llt(prec_.py + wu);
    const double ld_wv_y = log_det_llt(prec_.py + wv);
    const double ld_all_y = log_det_llt(prec_.py + all);
    r1 = 0.5 * (ld_wu_y1 - ld_p1_) + 0.5 * (ld_all_y - ld_wu_y);
    r2 = 0.5 * (ld_wv_y2 - ld_p2_) + 0.5 * (ld_all_y - ld_wv_y);
    if (!std::isfinite(r1) || !std::isfinite(r2)) {
      barrier = -kInf;
      return;
    }
    barrier = gamma_log_slack(target_, 1, covariance(pair_.first, s)) +
              gamma_log_slack(target_, 2, covariance(pair_.second, s));
    if (std::isnan(barrier)) barrier = -kInf;
  }

  double objective(double r1, double r2) const {
    if (kind_.tag == BoundTag::MlbTrace) return std::max(r1, r2);
    return kind_.branch == 1 ? r1 : r2;
  }

  AuxTriple to_aux(const VectorXd& theta) const {
    const Increments s = increments_from(theta, n_);
    return AuxTriple{PrecisionIncrement(SymMatrix(s.w)),
                     PrecisionIncrement(SymMatrix(s.u)),
                     PrecisionIncrement(SymMatrix(s.v))};
  }

 private:
  MatrixXd covariance(ConstraintPair::Which which, const Increments& s) const {
    using W = ConstraintPair::Which;
    MatrixXd prec;
    switch (which) {
      case W::WuY1: prec = prec_.p1 + s.w + s.u; break;
      case W::WvY2: prec = prec_.p2 + s.w + s.v; break;
      case W::WuvY: prec = prec_.py + s.w + s.u + s.v; break;
      case W::CorrectedTilde:
        prec = prec_.py + s.w + s.u + s.v - prec_.k_tilde;
        break;
      case W::CorrectedHat:
        prec = prec_.py + s.w + s.u + s.v - prec_.k_hat;
        break;
    }
    const Eigen::LLT<MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
      return MatrixXd::Constant(n_, n_, std::nan(""));
    }
    return llt.solve(MatrixXd::Identity(n_, n_));
  }

  Index n_;
  Precisions prec_;
  Target target_;
  BoundKind kind_;
  ConstraintPair pair_;
  double ld_p1_, ld_p2_;
};

}  // namespace

AuxTriple AuxTriple::zero(Index n) {
  return AuxTriple{PrecisionIncrement::zero(n), PrecisionIncrement::zero(n),
                   PrecisionIncrement::zero(n)};
}

AuxTriple aux_from_scheme(const CanonicalForm& canon,
                          const AchievableScheme& s) {
  const SymMatrix p_w_y1 = s.k_w_y1.inverse();
  const SymMatrix p_w_y2 = s.k_w_y2.inverse();
  return AuxTriple{PrecisionIncrement(p_w_y1 - canon.k_x_given_y1.inverse()),
                   PrecisionIncrement(s.k_wu_y1.inverse() - p_w_y1),
                   PrecisionIncrement(s.k_wv_y2.inverse() - p_w_y2)};
}

std::string_view to_string(BoundTag tag) {
  switch (tag) {
    case BoundTag::Elb: return "ELB";
    case BoundTag::E2lb: return "E2LB";
    case BoundTag::Mlb: return "MLB";
    case BoundTag::MlbTrace: return "mLB-trace";
  }
  return "unknown";
}

AuxConditionals aux_conditionals(const CanonicalForm& canon,
                                 const SymMatrix& k_x_given_y,
                                 const AuxTriple& aux) {
  const Index n = canon.dim();
  if (k_x_given_y.dim() != n || aux.s_w.dim() != n || aux.s_u.dim() != n ||
      aux.s_v.dim() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "auxiliary increments do not match the instance dimension");
  }
  const SymMatrix& sw = aux.s_w.matrix();
  const SymMatrix wu = sw + aux.s_u.matrix();
  const SymMatrix wv = sw + aux.s_v.matrix();
  const SymMatrix all = wu + aux.s_v.matrix();
  const SymMatrix p1 = canon.k_x_given_y1.inverse();
  const SymMatrix p2 = canon.k_x_given_y2.inverse();
  const SymMatrix py = k_x_given_y.inverse();

  AuxConditionals c;
  c.w_y1 = (p1 + sw).inverse();
  c.w_y2 = (p2 + sw).inverse();
  c.wu_y1 = (p1 + wu).inverse();
  c.wv_y2 = (p2 + wv).inverse();
  c.wu_y = (py + wu).inverse();
  c.wv_y = (py + wv).inverse();
  c.wuv_y = (py + all).inverse();
  c.wuv_y1 = (p1 + all).inverse();
  c.wuv_y2 = (p2 + all).inverse();
  return c;
}

RloPair r_lo_pair(const CanonicalForm& canon, const SymMatrix& k_x_given_y,
                  const AuxTriple& aux) {
  const AuxConditionals c = aux_conditionals(canon, k_x_given_y, aux);
  RloPair out;
  out.r_lo1 = mutual_info_nats(canon.k_x_given_y1, c.wu_y1) +
              mutual_info_nats(c.wu_y, c.wuv_y);
  out.r_lo2 = mutual_info_nats(canon.k_x_given_y2, c.wv_y2) +
              mutual_info_nats(c.wv_y, c.wuv_y);
  return out;
}

FeasibilityReport check_feasible(const BoundKind& kind,
                                 const CanonicalForm& canon,
                                 const SymMatrix& k_x_given_y,
                                 const AuxTriple& aux,
                                 const DistortionSpec& spec) {
  require_branch(kind);
  if (kind.tag == BoundTag::MlbTrace && family_of(spec) != Family::Trace) {
    throw Error(ErrorCode::FamilyMismatch,
                "the mLB-trace set needs trace constraints");
  }
  const Target target = make_target(canon, spec);
  const Precisions prec(canon, k_x_given_y);
  const AuxConditionals c = aux_conditionals(canon, k_x_given_y, aux);
  const ConstraintPair pair = constraints_for(kind);

  FeasibilityReport report;
  const std::pair<int, ConstraintPair::Which> checks[] = {{1, pair.first},
                                                          {2, pair.second}};
  for (const auto& [decoder, which] : checks) {
    const double excess = gamma_excess(target, decoder, pick(which, c, prec));
    if (excess > kGammaTol) {
      std::ostringstream os;
      os << to_string(kind.tag) << " branch " << kind.branch << ": decoder "
         << decoder << " distortion exceeded by relative " << excess;
      report.violations.push_back(os.str());
      report.feasible = false;
    }
  }
  return report;
}

RateReport analytic_converse(const CanonicalForm& canon,
                             const DistortionSpec& spec) {
  const Family family = family_of(spec);
  if (family == Family::Trace) {
    throw Error(ErrorCode::FamilyMismatch,
                "the analytic converse covers MSE and scaled-identity only");
  }
  const Index l1 = canon.split.l1;
  const Index l2 = canon.split.l2;
  const EnhancedSideInfo enh = build_enhanced(canon);
  const auto [d1, d2] = canonical_targets(canon, spec);

  // The enhanced decoder-1 problem sees precision D1^{-1} + K_hat on the
  // upper block; decoder 2 sees D2^{-1} + K_tilde on the lower one.
  const VectorXd d1_head = d1.entries().head(l1);
  const VectorXd d2_tail = d2.entries().tail(l2);
  const VectorXd a = enh.k_hat.entries().head(l1);
  const VectorXd neg_b = enh.k_tilde.entries().tail(l2);
  const VectorXd d_hat1 =
      (d1_head.cwiseInverse() + a).cwiseInverse();
  const VectorXd d_tilde2 =
      (d2_tail.cwiseInverse() + neg_b).cwiseInverse();
  const VectorXd shared_head = d_hat1.cwiseMin(d2.entries().head(l1));
  const VectorXd shared_tail = d1.entries().tail(l2).cwiseMin(d_tilde2);

  const double shared = shared_head.array().log().sum() +
                        shared_tail.array().log().sum();
  const double lo1 =
      0.5 * (canon.k_x_given_y1.log_det() -
             (VectorXd::Ones(l1) + a.cwiseProduct(d1_head)).array().log().sum() -
             shared);
  const double lo2 =
      0.5 * (canon.k_x_given_y2.log_det() -
             (VectorXd::Ones(l2) + neg_b.cwiseProduct(d2_tail)).array().log().sum() -
             shared);
  RateReport report = RateReport::from_branches(lo1, lo2);
  report.components = {{"R_lo1", lo1}, {"R_lo2", lo2}};
  report.diagnostics["certified"] = "true";
  return report;
}

SearchResult mlb_inner_search(const CanonicalForm& canon,
                              const SymMatrix& k_x_given_y,
                              const DistortionSpec& spec, const BoundKind& kind,
                              const SearchConfig& cfg) {
  require_branch(kind);
  const Index n = canon.dim();
  const AuxTriple zero = AuxTriple::zero(n);

  SearchResult best;
  best.value = kInf;
  // Nothing transmitted is optimal whenever it is feasible.
  if (check_feasible(kind, canon, k_x_given_y, zero, spec)) {
    best.value = 0.0;
    best.best = zero;
    best.rates = RloPair{};
    best.restart_index = 0;
    best.feasible_restarts = 1;
    return best;
  }

  const SearchProblem problem(canon, k_x_given_y, spec, kind);
  const Index p = problem.param_count();
  const Rng root(cfg.seed);
  const double mus[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9};
  MinimizeOptions inner;
  inner.max_iterations = cfg.max_iterations;
  inner.grad_tol = 1e-10;

  const int warm = static_cast<int>(cfg.warm_starts.size());
  for (int r = 0; r < warm + cfg.restarts; ++r) {
    VectorXd theta(p);
    if (r < warm) {
      if (cfg.warm_starts[r].s_w.dim() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "warm start does not match the instance dimension");
      }
      theta = theta_from(cfg.warm_starts[r], n);
    } else {
      Rng rng = root.split(static_cast<std::uint64_t>(r - warm));
      for (Index i = 0; i < p; ++i) theta(i) = rng.normal();
      theta *= rng.log_uniform(0.3, 3.0);
    }

    double r1 = 0, r2 = 0, barrier = -kInf;
    int doublings = 0;
    for (; doublings < 80; ++doublings) {
      problem.evaluate(theta, r1, r2, barrier);
      if (std::isfinite(barrier)) break;
      theta *= 1.5;
    }
    if (!std::isfinite(barrier)) continue;

    if (problem.epigraph()) theta.conservativeResize(p + 1);
    if (problem.epigraph()) theta(p) = std::max(r1, r2) + 1.0;

    for (const double mu : mus) {
      const ScalarFn phi = [&](const VectorXd& x) {
        double a = 0, b = 0, bar = 0;
        problem.evaluate(x.head(p), a, b, bar);
        if (!std::isfinite(bar)) return kInf;
        if (!problem.epigraph()) return problem.objective(a, b) - mu * bar;
        const double t = x(p);
        if (!(t > a) || !(t > b)) return kInf;
        return t - mu * (bar + std::log(t - a) + std::log(t - b));
      };
      theta = bfgs_minimize(phi, theta, inner).x;
    }

    problem.evaluate(theta.head(p), r1, r2, barrier);
    if (!std::isfinite(barrier)) continue;
    ++best.feasible_restarts;
    const double value = problem.objective(r1, r2);
    if (value < best.value) {
      best.value = value;
      best.best = problem.to_aux(theta.head(p));
      best.rates = RloPair{r1, r2};
      best.restart_index = r;
    }
  }

  if (best.feasible_restarts == 0) {
    throw Error(ErrorCode::NoFeasiblePointFound,
                "no restart reached the interior of the constraint set");
  }
  return best;
}

double bound_estimate(const CanonicalForm& canon, const SymMatrix& k_x_given_y,
                      const DistortionSpec& spec, BoundTag tag,
                      const SearchConfig& cfg) {
  if (tag == BoundTag::MlbTrace) {
    return mlb_inner_search(canon, k_x_given_y, spec, {tag, 1}, cfg).value;
  }
  const double b1 = mlb_inner_search(canon, k_x_given_y, spec, {tag, 1}, cfg).value;
  const double b2 = mlb_inner_search(canon, k_x_given_y, spec, {tag, 2}, cfg).value;
  return std::max(b1, b2);
}

}  // namespace hbrd
