#include "hbrd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include "hbrd/api.hpp"
#include "hbrd/random.hpp"

namespace hbrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Tally {
 public:
  Tally(std::string name, double tolerance, std::uint64_t seed) {
    r_.name = std::move(name);
    r_.tolerance = tolerance;
    r_.seed = seed;
  }

  void record(double violation) {
    ++r_.trials;
    if (std::isnan(violation)) violation = kInf;
    r_.worst_violation = std::max(r_.worst_violation, violation);
    if (!(violation <= r_.tolerance)) ++r_.failures;
  }

  /// Runs one trial; library errors count as failures.
  void trial(const std::function<double()>& body) {
    double v = kInf;
    try {
      v = body();
    } catch (const Error& e) {
      if (r_.first_error.empty()) {
        r_.first_error = "trial " + std::to_string(r_.trials) + ": " +
                         std::string(to_string(e.code())) + ": " + e.what();
      }
    }
    record(v);
  }

  PropertyResult result() const { return r_; }

 private:
  PropertyResult r_;
};

double min_eig(const MatrixXd& m) {
  return SymMatrix(m).min_eigenvalue();
}

// How far b - a is from PSD, relative to the size of b.
double loewner_gap(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max(1.0, SymMatrix(b).spectral_norm());
  return std::max(0.0, -min_eig(b - a)) / scale;
}

double off_diag_ratio(const MatrixXd& m) {
  const double diag = m.diagonal().cwiseAbs().maxCoeff();
  MatrixXd off = m;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() / std::max(diag, 1e-300);
}

// Pseudo-inverse of a symmetric PSD matrix; eigenvalues below a relative
// cutoff are treated as zero.
MatrixXd pinv_psd(const MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  const double cutoff = 1e-11 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  VectorXd inv = es.eigenvalues();
  for (Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double rel_abs(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Gamma_i(k) - D_i as a relative excess (<= 0 when satisfied).
double distortion_excess(const CanonicalForm& canon, const DistortionSpec& spec,
                         int decoder, const SymMatrix& k) {
  switch (family_of(spec)) {
    case Family::Mse: {
      const auto [d1, d2] = canonical_targets(canon, spec);
      const VectorXd& d = (decoder == 1 ? d1 : d2).entries();
      return ((k.matrix().diagonal() - d).array() / d.array()).maxCoeff();
    }
    case Family::ScaledIdentity: {
      const auto& s = std::get<ScaledIdentity>(spec);
      const double d = decoder == 1 ? s.d1 : s.d2;
      return (k.max_eigenvalue() - d) / d;
    }
    case Family::Trace: {
      const auto& s = std::get<Trace>(spec);
      const double d = decoder == 1 ? s.d1 : s.d2;
      return (k.trace() - d) / d;
    }
  }
  return kInf;
}

// Smallest c >= 0 with feasible(c), assuming monotonicity in c.
double smallest_feasible_scale(const std::function<bool(double)>& feasible) {
  if (feasible(0.0)) return 0.0;
  double hi = 1e-8;
  for (int i = 0; i < 400 && !feasible(hi); ++i) hi *= 2.0;
  if (!feasible(hi)) return kInf;
  double lo = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

AchievableScheme scheme_from_increments(const CanonicalForm& canon,
                                        const SymMatrix& s_w,
                                        const SymMatrix& s_u,
                                        const SymMatrix& s_v) {
  const SymMatrix p1 = canon.k_x_given_y1.inverse();
  const SymMatrix p2 = canon.k_x_given_y2.inverse();
  return AchievableScheme{(p1 + s_w).inverse(), (p2 + s_w).inverse(),
                          (p1 + s_w + s_u).inverse(), (p2 + s_w + s_v).inverse()};
}

Index pick_dim(Rng& rng, int lo, int hi) { return rng.uniform_int(lo, hi); }

ProblemInstance instance_for(Family family, Rng& rng, Index k) {
  return family == Family::Mse ? random_diagonal_instance(rng, k)
                               : random_general_instance(rng, k);
}

DistortionSpec spec_for(Family family, Rng& rng, const ProblemInstance& inst,
                        double lo = 0.1, double hi = 0.95) {
  switch (family) {
    case Family::Mse: return random_mse_spec(rng, inst, lo, hi);
    case Family::ScaledIdentity: return random_sc_spec(rng, inst, lo, hi);
    case Family::Trace: return random_trace_spec(rng, inst, lo, hi);
  }
  return random_trace_spec(rng, inst, lo, hi);
}

double optimum(const ProblemInstance& inst, const DistortionSpec& spec,
               const SolverConfig& cfg) {
  return compute_rate(inst, spec, cfg).report.r;
}

}  // namespace

ProblemInstance reference_trace_instance() {
  ProblemInstance inst;
  inst.k = 2;
  inst.k_x_given_y1 = DiagMatrix(VectorXd::Constant(2, 4.0 / 9.0)).to_sym();
  inst.k_x_given_y2 = DiagMatrix((VectorXd(2) << 4.0 / 17.0, 4.0 / 5.0).finished()).to_sym();
  return inst;
}

Trace reference_trace_spec() { return Trace{0.15, 0.15}; }

PropertyResult check_diag_inverse_lemma(int trials, std::uint64_t seed) {
  Tally tally("diag-inverse", 1e-9, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index m = pick_dim(rng, 1, 5);
      SymMatrix mat = random_spd(rng, m, 0.05, 20.0);
      if (t % 10 == 1) mat = mat.diag().to_sym();
      VectorXd a(m);
      for (Index i = 0; i < m; ++i) {
        a(i) = (t % 10 == 0 || rng.uniform(0, 1) < 0.3) ? 0.0
                                                         : rng.log_uniform(1e-2, 1e2);
      }
      const VectorXd lhs =
          (mat.diag().entries().cwiseInverse() + a).cwiseInverse();
      const VectorXd rhs =
          (mat.inverse() + DiagMatrix(a).to_sym()).inverse().matrix().diagonal();
      return ((rhs - lhs).array() / lhs.array().max(1.0)).maxCoeff();
    });
  }
  return tally.result();
}

PropertyResult check_variance_drop_identity(int trials, std::uint64_t seed) {
  Tally tally("variance-drop-identity", 1e-8, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const bool scalar = t % 10 == 0;
      const Index k = scalar ? 1 : pick_dim(rng, 1, 4);
      const Index m = scalar ? 1 : pick_dim(rng, 1, 3);
      const SymMatrix k_x = random_spd(rng, k, 0.5, 3.0);
      // K_Xhat = K_X^{1/2} R K_X^{1/2} with 0 <= R < I, often singular.
      const MatrixXd v = random_orthogonal(rng, k);
      VectorXd rho(k);
      for (Index i = 0; i < k; ++i) {
        rho(i) = rng.uniform(0, 1) < 0.3 ? 0.0 : rng.uniform(0.05, 0.95);
      }
      const MatrixXd root_x = k_x.sqrt_psd().matrix();
      const MatrixXd k_hat =
          root_x * v.transpose() * rho.asDiagonal() * v * root_x;
      const MatrixXd d = k_x.matrix() - k_hat;  // K_X|W,Z

      const MatrixXd a = scalar ? MatrixXd::Ones(1, 1) : random_gaussian(rng, m, k);
      const SymMatrix k_n = random_spd(rng, m, 0.2, 2.0);

      // Covariance of (X_hat, Z_hat) and its cross-covariance with X.
      MatrixXd c22(k + m, k + m);
      c22.topLeftCorner(k, k) = k_hat;
      c22.topRightCorner(k, m) = k_hat * a.transpose();
      c22.bottomLeftCorner(m, k) = a * k_hat;
      c22.bottomRightCorner(m, m) = a * k_x.matrix() * a.transpose() + k_n.matrix();
      MatrixXd c12(k, k + m);
      c12.leftCols(k) = k_hat;
      c12.rightCols(m) = k_x.matrix() * a.transpose();
      const MatrixXd linear = k_x.matrix() - c12 * pinv_psd(c22) * c12.transpose();

      // K_X|W,Z^{-1} + K_X|Zhat^{-1} - K_X^{-1}.
      const MatrixXd precision =
          d.inverse() + a.transpose() * k_n.inverse().matrix() * a;
      return relative_difference(linear, precision.inverse());
    });
  }
  return tally.result();
}

PropertyResult check_variance_drop(int trials, std::uint64_t seed) {
  Tally tally("variance-drop", 1e-8, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      const MatrixXd p0 = random_spd(rng, k, 0.2, 3.0).inverse().matrix();
      auto increment = [&] {
        return random_psd(rng, k, rng.log_uniform(0.05, 5.0), pick_dim(rng, 1, int(k)))
            .matrix();
      };
      const MatrixXd s1 = increment();
      const MatrixXd s2 = increment();
      const MatrixXd t_inc = increment();

      // W = (J, Gaussian observation of branch J), J a fair coin.
      const MatrixXd mix = 0.5 * ((p0 + s1).inverse() + (p0 + s2).inverse());
      const MatrixXd s_g = mix.inverse() - p0;
      const MatrixXd mix_refined =
          0.5 * ((p0 + s1 + t_inc).inverse() + (p0 + s2 + t_inc).inverse());
      const MatrixXd gauss_refined = (p0 + s_g + t_inc).inverse();

      double v = loewner_gap(mix_refined, gauss_refined);
      v = std::max(v, std::max(0.0, -min_eig(s_g)));
      // W = W_G: identical increments give identical refinements.
      const SymMatrix via_steps = apply_increment(
          apply_increment(SymMatrix(p0.inverse()), PrecisionIncrement(SymMatrix(s_g))),
          PrecisionIncrement(SymMatrix(t_inc)));
      v = std::max(v, relative_difference(via_steps.matrix(), gauss_refined));
      return v;
    });
  }
  return tally.result();
}

PropertyResult check_variance_drop_monte_carlo(int trials, int samples,
                                               std::uint64_t seed) {
  // Violation is measured in standard errors.
  Tally tally("variance-drop-monte-carlo", 3.0, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 3);
      const SymMatrix k_x = random_spd(rng, k, 0.5, 2.0);
      struct Channel {
        MatrixXd a, noise_root, info;  // info = A^T K_N^{-1}
      };
      auto channel = [&] {
        Channel c;
        c.a = random_gaussian(rng, k, k);
        const SymMatrix k_n = random_spd(rng, k, 0.2, 2.0);
        c.noise_root = k_n.matrix().llt().matrixL();
        c.info = c.a.transpose() * k_n.inverse().matrix();
        return c;
      };
      const Channel branch[2] = {channel(), channel()};
      const Channel refine = channel();
      const MatrixXd p0 = k_x.inverse().matrix();
      const MatrixXd t_inc = refine.info * refine.a;

      MatrixXd post[2], gain_w[2], gain_z[2];
      MatrixXd mix = MatrixXd::Zero(k, k);
      for (int j = 0; j < 2; ++j) {
        const MatrixXd s = branch[j].info * branch[j].a;
        post[j] = (p0 + s + t_inc).inverse();
        gain_w[j] = post[j] * branch[j].info;
        gain_z[j] = post[j] * refine.info;
        mix += 0.5 * (p0 + s).inverse();
      }
      const MatrixXd gauss_refined = (mix.inverse() + t_inc).inverse();

      const MatrixXd x_root = k_x.matrix().llt().matrixL();
      std::vector<VectorXd> errors;
      errors.reserve(samples);
      VectorXd xi(k);
      auto draw = [&] {
        for (Index i = 0; i < k; ++i) xi(i) = rng.normal();
        return VectorXd(xi);
      };
      for (int s = 0; s < samples; ++s) {
        const int j = rng.uniform_int(0, 1);
        const VectorXd x = x_root * draw();
        const VectorXd w = branch[j].a * x + branch[j].noise_root * draw();
        const VectorXd z = refine.a * x + refine.noise_root * draw();
        errors.push_back(x - gain_w[j] * w - gain_z[j] * z);
      }
      MatrixXd sample_cov = MatrixXd::Zero(k, k);
      for (const auto& e : errors) sample_cov += e * e.transpose();
      sample_cov /= samples;

      // Worst direction of K_G - K_sample, judged against the sampling
      // error of the quadratic form along it.
      const Eigen::SelfAdjointEigenSolver<MatrixXd> es(gauss_refined - sample_cov);
      const VectorXd dir = es.eigenvectors().col(0);
      const double gap = es.eigenvalues()(0);
      if (gap >= 0.0) return 0.0;
      double sum = 0.0, sum_sq = 0.0;
      for (const auto& e : errors) {
        const double q = std::pow(dir.dot(e), 2);
        sum += q;
        sum_sq += q * q;
      }
      const double mean = sum / samples;
      const double se = std::sqrt(std::max(0.0, sum_sq / samples - mean * mean) / samples);
      return -gap / se;
    });
  }
  return tally.result();
}

PropertyResult check_corollary_enhanced_distortion(int trials, std::uint64_t seed) {
  Tally tally("corollary", 1e-9, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      const MatrixXd p0 = random_spd(rng, k, 0.2, 3.0).inverse().matrix();
      auto increment = [&](Index rank) {
        return random_psd(rng, k, rng.log_uniform(0.05, 5.0), rank).matrix();
      };
      // t % 3: Z~ = Z, rank-deficient refinement, strictly better Z~.
      const int mode = t % 3;
      const MatrixXd t_inc = mode == 0   ? MatrixXd::Zero(k, k)
                             : mode == 1 ? increment(std::max<Index>(1, k - 1))
                                         : increment(k);
      auto d_tilde = [&](const MatrixXd& d) { return (d.inverse() + t_inc).inverse(); };

      // Gaussian W achieving D exactly.
      const MatrixXd s = increment(pick_dim(rng, 1, int(k)));
      const MatrixXd d = (p0 + s).inverse();
      double v = relative_difference((p0 + s + t_inc).inverse(), d_tilde(d));

      // Mixture W with the same kind of D.
      const MatrixXd s1 = increment(pick_dim(rng, 1, int(k)));
      const MatrixXd s2 = increment(pick_dim(rng, 1, int(k)));
      const MatrixXd d_mix = 0.5 * ((p0 + s1).inverse() + (p0 + s2).inverse());
      const MatrixXd refined =
          0.5 * ((p0 + s1 + t_inc).inverse() + (p0 + s2 + t_inc).inverse());
      v = std::max(v, loewner_gap(refined, d_tilde(d_mix)));

      if (mode == 2 && !(min_eig(d - d_tilde(d)) > 0.0)) v = kInf;
      return v;
    });
  }
  return tally.result();
}

PropertyResult check_enhanced_identity(int trials, std::uint64_t seed) {
  Tally tally("enhanced-identity", 1e-9, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      const ProblemInstance inst = t % 4 == 0 ? random_diagonal_instance(rng, k)
                                              : random_general_instance(rng, k);
      const CanonicalForm canon = canonicalize(inst, random_sc_spec(rng, inst));
      const EnhancedSideInfo enh = build_enhanced(canon, inst.k_x);
      const MatrixXd via1 =
          canon.k_x_given_y1.inverse().matrix() + enh.k_hat.to_sym().matrix();
      const MatrixXd via2 =
          canon.k_x_given_y2.inverse().matrix() + enh.k_tilde.to_sym().matrix();
      double v = relative_difference(via1, via2);
      v = std::max(v, loewner_gap(enh.k_x_given_y.matrix(), canon.k_x_given_y1.matrix()));
      v = std::max(v, loewner_gap(enh.k_x_given_y.matrix(), canon.k_x_given_y2.matrix()));
      // Y = M X + N reproduces K_X|Y.
      const MatrixXd kx_c = congruence(canon.q, *inst.k_x).matrix();
      const MatrixXd m = enh.m->matrix();
      v = std::max(v, relative_difference(kx_c.inverse() + m.transpose() * m,
                                          enh.k_x_given_y.inverse().matrix()));
      return v;
    });
  }
  return tally.result();
}

PropertyResult check_feasible_inclusions(int instances, int triples,
                                         std::uint64_t seed) {
  Tally tally("feasible-inclusions", 0.0, seed);
  const Rng root(seed);
  const Family families[] = {Family::Mse, Family::ScaledIdentity, Family::Trace};
  for (int i = 0; i < instances; ++i) {
    Rng rng = root.split(i);
    const Family family = families[i % 3];
    const Index n = pick_dim(rng, 1, 4);
    const ProblemInstance inst = instance_for(family, rng, n);
    const DistortionSpec spec = spec_for(family, rng, inst);
    const CanonicalForm canon = canonicalize(inst, spec);
    const SymMatrix k_y = build_enhanced(canon).k_x_given_y;

    for (int s = 0; s < triples; ++s) {
      tally.trial([&] {
        auto inc = [&](Index rank) {
          return random_psd(rng, n, rng.log_uniform(0.01, 10.0), rank);
        };
        const SymMatrix s_w = inc(pick_dim(rng, 0, int(n)));
        const SymMatrix s_u = inc(n);
        const SymMatrix s_v = inc(n);
        auto triple = [&](double c) {
          return AuxTriple{PrecisionIncrement(s_w * c), PrecisionIncrement(s_u * c),
                           PrecisionIncrement(s_v * c)};
        };
        const int branch = 1 + s % 2;
        // Scale to the MLB boundary, then jitter to either side of it.
        const double c = smallest_feasible_scale([&](double c) {
          return bool(check_feasible({BoundTag::Mlb, branch}, canon, k_y, triple(c), spec));
        });
        const AuxTriple aux = triple(c * rng.uniform(0.8, 1.25));
        const bool mlb = bool(check_feasible({BoundTag::Mlb, branch}, canon, k_y, aux, spec));
        const bool e2 = bool(check_feasible({BoundTag::E2lb, branch}, canon, k_y, aux, spec));
        const bool elb = bool(check_feasible({BoundTag::Elb, branch}, canon, k_y, aux, spec));
        return ((mlb && !e2) || (e2 && !elb)) ? 1.0 : 0.0;
      });
    }
  }
  return tally.result();
}

PropertyResult check_bound_ordering(int instances, std::uint64_t seed,
                                    const SearchConfig& search) {
  Tally tally("bound-ordering", 1e-3, seed);
  const Rng root(seed);
  const Family families[] = {Family::Mse, Family::ScaledIdentity, Family::Trace};
  for (int i = 0; i < instances; ++i) {
    Rng rng = root.split(i);
    tally.trial([&] {
      const Family family = families[i % 3];
      const Index n = pick_dim(rng, 1, 2);
      const ProblemInstance inst = instance_for(family, rng, n);
      const DistortionSpec spec = spec_for(family, rng, inst, 0.2, 0.9);
      const CanonicalForm canon = canonicalize(inst, spec);
      const SymMatrix k_y = build_enhanced(canon).k_x_given_y;
      SearchConfig cfg = search;
      cfg.seed = rng.split(99).seed();
      std::optional<AchievableScheme> scheme;
      if (family == Family::Mse) {
        scheme = construct_scheme_mse(canon, std::get<MseDiag>(spec));
      } else if (family == Family::ScaledIdentity) {
        scheme = construct_scheme_sc(canon, std::get<ScaledIdentity>(spec));
      }
      if (scheme) cfg.warm_starts.push_back(aux_from_scheme(canon, *scheme));

      const double elb = bound_estimate(canon, k_y, spec, BoundTag::Elb, cfg);
      const double e2 = bound_estimate(canon, k_y, spec, BoundTag::E2lb, cfg);
      const double mlb = bound_estimate(canon, k_y, spec, BoundTag::Mlb, cfg);
      double v = std::max({elb - e2, e2 - mlb, std::abs(e2 - mlb)});

      if (family == Family::Trace) {
        // The minimax set is smaller still and reaches the rate.
        const double minimax =
            bound_estimate(canon, k_y, spec, BoundTag::MlbTrace, cfg);
        const double rate = optimum(inst, spec, SolverConfig{});
        v = std::max({v, mlb - minimax, std::abs(minimax - rate)});
        return v;
      }
      const double closed = optimum(inst, spec, SolverConfig{});
      v = std::max({v, std::abs(mlb - closed), std::abs(e2 - closed), elb - closed});
      const AuxTriple point = aux_from_scheme(canon, *scheme);
      for (const BoundTag tag : {BoundTag::Elb, BoundTag::E2lb, BoundTag::Mlb}) {
        for (const int b : {1, 2}) {
          if (!check_feasible({tag, b}, canon, k_y, point, spec)) v = kInf;
        }
      }
      return v;
    });
  }
  return tally.result();
}

PropertyResult check_diagonal_iff(int trials, std::uint64_t seed) {
  Tally tally("diagonal-iff", 1e-9, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 2, 4);
      const ProblemInstance inst = random_general_instance(rng, k);
      const CanonicalForm canon = canonicalize(inst, random_sc_spec(rng, inst));
      const MatrixXd p1 = canon.k_x_given_y1.inverse().matrix();
      const MatrixXd p2 = canon.k_x_given_y2.inverse().matrix();
      auto diag_below = [&](const SymMatrix& c) {
        VectorXd d(k);
        for (Index i = 0; i < k; ++i) d(i) = rng.uniform(0.2, 1.0);
        return MatrixXd((0.9 * c.min_eigenvalue() * d).asDiagonal());
      };
      switch (t % 3) {
        case 0: {  // diagonal at decoder 1
          const MatrixXd delta = diag_below(canon.k_x_given_y1);
          const MatrixXd s = delta.inverse() - p1;
          return off_diag_ratio((p2 + s).inverse());
        }
        case 1: {  // diagonal at decoder 2
          const MatrixXd delta = diag_below(canon.k_x_given_y2);
          const MatrixXd s = delta.inverse() - p2;
          return off_diag_ratio((p1 + s).inverse());
        }
        default: {  // generic W: neither side diagonal
          const MatrixXd s = random_psd(rng, k, rng.log_uniform(0.1, 10.0), k).matrix();
          const bool d1 = off_diag_ratio((p1 + s).inverse()) <= 1e-9;
          const bool d2 = off_diag_ratio((p2 + s).inverse()) <= 1e-9;
          return d1 == d2 ? 0.0 : kInf;
        }
      }
    });
  }
  return tally.result();
}

PropertyResult check_degraded_reduction(int trials, std::uint64_t seed) {
  Tally tally("degraded-reduction", 1e-10, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      switch (t % 5) {
        case 0:
        case 1: {
          // Componentwise degraded: decoder `strong` sees less noise in
          // every component. Per component, the weak decoder's target is
          // met first and the strong one refines what is left.
          ProblemInstance inst = random_degraded_instance(rng, k, true);
          const int strong = t % 5 == 0 ? 1 : 2;
          if (strong == 2) std::swap(inst.k_x_given_y1, inst.k_x_given_y2);
          const MseDiag spec = random_mse_spec(rng, inst);
          const VectorXd& ds = (strong == 1 ? spec.d1 : spec.d2).entries();
          const VectorXd& dw = (strong == 1 ? spec.d2 : spec.d1).entries();
          const VectorXd ss = (strong == 1 ? inst.k_x_given_y1 : inst.k_x_given_y2)
                                  .matrix().diagonal();
          const VectorXd sw = (strong == 1 ? inst.k_x_given_y2 : inst.k_x_given_y1)
                                  .matrix().diagonal();
          double oracle = 0.0;
          for (Index i = 0; i < k; ++i) {
            const double left = 1.0 / (1.0 / dw(i) + 1.0 / ss(i) - 1.0 / sw(i));
            oracle += 0.5 * std::max(0.0, std::log(sw(i) / dw(i))) +
                      0.5 * std::max(0.0, std::log(left / ds(i)));
          }
          const CanonicalForm canon = canonicalize(inst, spec);
          return rel_abs(rate_mse_closed(canon, spec).r, oracle);
        }
        case 2: {  // equal diagonal conditionals
          ProblemInstance inst = random_diagonal_instance(rng, k);
          inst.k_x_given_y2 = inst.k_x_given_y1;
          const MseDiag spec = random_mse_spec(rng, inst);
          const VectorXd kd = inst.k_x_given_y1.matrix().diagonal();
          const VectorXd dmin = spec.d1.entries().cwiseMin(spec.d2.entries());
          const double oracle = 0.5 * (kd.array() / dmin.array()).log().sum();
          const CanonicalForm canon = canonicalize(inst, spec);
          return rel_abs(rate_mse_closed(canon, spec).r, oracle);
        }
        case 3: {  // equal general conditionals, scaled identity
          ProblemInstance inst = random_general_instance(rng, k);
          inst.k_x_given_y2 = inst.k_x_given_y1;
          inst.k_x = inst.k_x_given_y1 + SymMatrix::identity(k);
          const ScaledIdentity spec = random_sc_spec(rng, inst);
          const double oracle =
              0.5 * (inst.k_x_given_y1.log_det() -
                     double(k) * std::log(std::min(spec.d1, spec.d2)));
          const CanonicalForm canon = canonicalize(inst, spec);
          return rel_abs(rate_sc_closed(canon, spec).r, oracle);
        }
        default: {  // targets on the feasibility boundary
          const ProblemInstance inst = random_degraded_instance(rng, k, true);
          const MseDiag spec{inst.k_x_given_y1.diag(), inst.k_x_given_y2.diag()};
          const CanonicalForm canon = canonicalize(inst, spec);
          return std::abs(rate_mse_closed(canon, spec).r);
        }
      }
    });
  }
  return tally.result();
}

PropertyResult check_degraded_trace(int trials, std::uint64_t seed,
                                    const SolverConfig& cfg) {
  Tally tally("degraded-trace", 1e-4, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      ProblemInstance inst = random_general_instance(rng, k);
      inst.k_x_given_y2 = inst.k_x_given_y1;
      inst.k_x = inst.k_x_given_y1 + SymMatrix::identity(k);
      const Trace spec = random_trace_spec(rng, inst);

      // Reverse water-filling on the eigenvalues with the tighter budget.
      const VectorXd lambda = inst.k_x_given_y1.eigenvalues();
      const double budget = std::min(spec.d1, spec.d2);
      double lo = 0.0, hi = lambda.maxCoeff();
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lambda.cwiseMin(mid).sum() > budget ? hi : lo) = mid;
      }
      const double level = 0.5 * (lo + hi);
      double oracle = 0.0;
      for (Index i = 0; i < k; ++i) oracle += 0.5 * std::log(lambda(i) / std::min(level, lambda(i)));

      SolverConfig c = cfg;
      c.seed = rng.split(7).seed();
      const CanonicalForm canon = canonicalize(inst, spec);
      return std::abs(solve_minimax(canon, spec, c).report.r - oracle);
    });
  }
  return tally.result();
}

namespace {

template <class Spec, class Build, class Closed>
PropertyResult tightness(const char* name, int trials, std::uint64_t seed,
                         Build build, Closed closed, bool general) {
  Tally tally(name, 1e-10, seed);
  const Rng root(seed);
  for (int t = 0; t < trials; ++t) {
    Rng rng = root.split(t);
    tally.trial([&] {
      const Index k = pick_dim(rng, 1, 4);
      const ProblemInstance inst =
          general ? random_general_instance(rng, k) : random_diagonal_instance(rng, k);
      Spec spec;
      if constexpr (std::is_same_v<Spec, MseDiag>) {
        spec = random_mse_spec(rng, inst);
      } else {
        spec = random_sc_spec(rng, inst);
      }
      const CanonicalForm canon = canonicalize(inst, spec);
      const RateReport ref = closed(canon, spec);
      const RateReport ach = rate_ach_general(canon, build(canon, spec));
      const RateReport conv = analytic_converse(canon, spec);
      return std::max({rel_abs(ach.r, ref.r), rel_abs(conv.r, ref.r),
                       rel_abs(ach.r1, ref.r1), rel_abs(ach.r2, ref.r2)});
    });
  }
  return tally.result();
}

}  // namespace

PropertyResult check_tightness_mse(int trials, std::uint64_t seed) {
  return tightness<MseDiag>("tightness-mse", trials, seed, construct_scheme_mse,
                            rate_mse_closed, false);
}

PropertyResult check_tightness_sc(int trials, std::uint64_t seed) {
  return tightness<ScaledIdentity>("tightness-sc", trials, seed,
                                   construct_scheme_sc, rate_sc_closed, true);
}

PropertyResult check_minimality(Family family, int instances, int schemes,
                                std::uint64_t seed, const SolverConfig& cfg) {
  const double tol = family == Family::Trace ? std::max(1e-9, 10.0 * cfg.tol) : 1e-9;
  Tally tally("minimality-" + std::string(to_string(family)), tol, seed);
  const Rng root(seed);
  for (int i = 0; i < instances; ++i) {
    Rng rng = root.split(i);
    const Index n = pick_dim(rng, 1, family == Family::Trace ? 3 : 4);
    const ProblemInstance inst = instance_for(family, rng, n);
    const DistortionSpec spec = spec_for(family, rng, inst);
    const CanonicalForm canon = canonicalize(inst, spec);
    SolverConfig c = cfg;
    c.seed = rng.split(5).seed();
    const double best = optimum(inst, spec, c);

    std::optional<AuxTriple> optimal;
    if (family == Family::Mse) {
      optimal = aux_from_scheme(canon, construct_scheme_mse(canon, std::get<MseDiag>(spec)));
    } else if (family == Family::ScaledIdentity) {
      optimal = aux_from_scheme(
          canon, construct_scheme_sc(canon, std::get<ScaledIdentity>(spec)));
    }
    const SymMatrix p1 = canon.k_x_given_y1.inverse();
    const SymMatrix p2 = canon.k_x_given_y2.inverse();

    for (int s = 0; s < schemes; ++s) {
      tally.trial([&] {
        AchievableScheme scheme;
        if (optimal && s % 2 == 1) {
          // Small PSD push away from the optimal scheme.
          auto bump = [&](const PrecisionIncrement& p) {
            return p.matrix() + random_psd(rng, n, rng.log_uniform(1e-6, 1e-1),
                                           pick_dim(rng, 1, int(n)));
          };
          scheme = scheme_from_increments(canon, bump(optimal->s_w),
                                          bump(optimal->s_u), bump(optimal->s_v));
        } else {
          const SymMatrix s_w =
              random_psd(rng, n, rng.log_uniform(1e-3, 10.0), pick_dim(rng, 0, int(n)));
          const SymMatrix s_u = random_psd(rng, n, rng.log_uniform(1e-2, 10.0), n);
          const SymMatrix s_v = random_psd(rng, n, rng.log_uniform(1e-2, 10.0), n);
          const double cu = smallest_feasible_scale([&](double c) {
            return distortion_excess(canon, spec, 1, (p1 + s_w + s_u * c).inverse()) <= 0.0;
          });
          const double cv = smallest_feasible_scale([&](double c) {
            return distortion_excess(canon, spec, 2, (p2 + s_w + s_v * c).inverse()) <= 0.0;
          });
          scheme = scheme_from_increments(canon, s_w, s_u * cu, s_v * cv);
        }
        return best - rate_ach_general(canon, scheme).r;
      });
    }
  }
  return tally.result();
}

PropertyResult check_trace_oracle(int instances, std::uint64_t seed,
                                  const SolverConfig& cfg) {
  Tally tally("trace-oracle", 2e-3, seed);
  const Rng root(seed);
  for (int i = 0; i <= instances; ++i) {
    Rng rng = root.split(i);
    tally.trial([&] {
      ProblemInstance inst = reference_trace_instance();
      Trace spec = reference_trace_spec();
      if (i > 0) {
        inst = i % 2 ? random_general_instance(rng, 2) : random_diagonal_instance(rng, 2);
        spec = random_trace_spec(rng, inst, 0.2, 0.95);
      }
      SolverConfig c = cfg;
      c.seed = rng.split(3).seed();
      const CanonicalForm canon = canonicalize(inst, spec);
      const double solved = solve_minimax(canon, spec, c).report.r;
      const double oracle = grid_oracle(canon, spec, std::max(60, cfg.grid_resolution)).value;
      return std::abs(solved - oracle);
    });
  }
  return tally.result();
}

PropertyResult check_convexity(Family family, int pairs, std::uint64_t seed,
                               const SolverConfig& cfg) {
  const double tol = family == Family::Trace ? 2.0 * cfg.tol : 1e-10;
  Tally tally("convexity-" + std::string(to_string(family)), tol, seed);
  const Rng root(seed);
  for (int p = 0; p < pairs; ++p) {
    Rng rng = root.split(p);
    tally.trial([&] {
      ProblemInstance inst;
      if (family == Family::Trace && p % 4 == 0) {
        inst = reference_trace_instance();
      } else {
        inst = instance_for(family, rng, pick_dim(rng, 1, family == Family::Trace ? 2 : 4));
      }
      const DistortionSpec a = spec_for(family, rng, inst, 0.3, 0.95);
      const DistortionSpec b = spec_for(family, rng, inst, 0.3, 0.95);
      DistortionSpec mid;
      if (family == Family::Mse) {
        const auto& sa = std::get<MseDiag>(a);
        const auto& sb = std::get<MseDiag>(b);
        mid = MseDiag{DiagMatrix(0.5 * (sa.d1.entries() + sb.d1.entries())),
                      DiagMatrix(0.5 * (sa.d2.entries() + sb.d2.entries()))};
      } else {
        mid = std::visit(
            [&](auto sa) -> DistortionSpec {
              using S = decltype(sa);
              if constexpr (!std::is_same_v<S, MseDiag>) {
                const S& sb = std::get<S>(b);
                sa.d1 = 0.5 * (sa.d1 + sb.d1);
                sa.d2 = 0.5 * (sa.d2 + sb.d2);
              }
              return sa;
            },
            a);
      }
      SolverConfig c = cfg;
      c.seed = rng.split(11).seed();
      return optimum(inst, mid, c) -
             0.5 * (optimum(inst, a, c) + optimum(inst, b, c));
    });
  }
  return tally.result();
}

PropertyResult check_sweep_monotone(Family family, int instances,
                                    std::uint64_t seed, const SolverConfig& cfg) {
  const double tol = family == Family::Trace ? 2.0 * cfg.tol : 1e-12;
  Tally tally("sweep-monotone-" + std::string(to_string(family)), tol, seed);
  const Rng root(seed);
  for (int i = 0; i < instances; ++i) {
    Rng rng = root.split(i);
    const ProblemInstance inst =
        family == Family::Trace && i == 0
            ? reference_trace_instance()
            : instance_for(family, rng, pick_dim(rng, 1, family == Family::Trace ? 2 : 4));
    const DistortionSpec spec = spec_for(family, rng, inst, 0.1, 0.5);
    const double l1 = inst.k_x_given_y1.min_eigenvalue();
    const double l2 = inst.k_x_given_y2.min_eigenvalue();
    SolverConfig c = cfg;
    c.seed = rng.split(13).seed();
    for (const SweepAxis axis : {SweepAxis::D1, SweepAxis::D2, SweepAxis::Both}) {
      tally.trial([&] {
        double lo = 0.4, hi = 1.9;  // MSE: multiplier on the targets
        if (family != Family::Mse) {
          const double cap = axis == SweepAxis::D1   ? l1
                             : axis == SweepAxis::D2 ? l2
                                                     : std::min(l1, l2);
          lo = 0.1 * cap;
          hi = 0.95 * cap;
        }
        const auto rows = sweep(inst, spec, axis, lo, hi, 6, c);
        const bool any = std::any_of(rows.begin(), rows.end(),
                                     [](const SweepRow& r) { return r.feasible; });
        return any ? sweep_monotonicity_violation(rows) : kInf;
      });
    }
  }
  return tally.result();
}

std::vector<std::string> suite_names() {
  return {"diag-inverse", "variance-drop", "corollary",   "enhanced-identity",
          "inclusions",   "bound-ordering", "diagonal-iff", "degraded",
          "tightness",    "minimality",     "trace-oracle", "convexity",
          "monotone"};
}

std::vector<PropertyResult> run_suite(const std::string& name, std::uint64_t seed,
                                      int trials) {
  auto n = [&](int fallback) { return trials > 0 ? trials : fallback; };
  SolverConfig fast;
  fast.seed = seed;
  fast.restarts = 16;

  const std::map<std::string, std::function<std::vector<PropertyResult>()>> suites = {
      {"diag-inverse", [&] { return std::vector{check_diag_inverse_lemma(n(1000), seed)}; }},
      {"variance-drop",
       [&] {
         return std::vector{check_variance_drop_identity(n(500), seed),
                            check_variance_drop(n(500), seed),
                            check_variance_drop_monte_carlo(3, 100000, seed)};
       }},
      {"corollary",
       [&] { return std::vector{check_corollary_enhanced_distortion(n(500), seed)}; }},
      {"enhanced-identity", [&] { return std::vector{check_enhanced_identity(n(200), seed)}; }},
      {"inclusions", [&] { return std::vector{check_feasible_inclusions(10, n(500), seed)}; }},
      {"bound-ordering", [&] { return std::vector{check_bound_ordering(n(6), seed)}; }},
      {"diagonal-iff", [&] { return std::vector{check_diagonal_iff(n(200), seed)}; }},
      {"degraded",
       [&] {
         return std::vector{check_degraded_reduction(n(50), seed),
                            check_degraded_trace(n(50), seed, fast)};
       }},
      {"tightness",
       [&] {
         return std::vector{check_tightness_mse(n(100), seed),
                            check_tightness_sc(n(100), seed)};
       }},
      {"minimality",
       [&] {
         return std::vector{check_minimality(Family::Mse, 10, n(1000), seed),
                            check_minimality(Family::ScaledIdentity, 10, n(1000), seed),
                            check_minimality(Family::Trace, 10, n(1000), seed, fast)};
       }},
      {"trace-oracle", [&] { return std::vector{check_trace_oracle(n(10), seed)}; }},
      {"convexity",
       [&] {
         return std::vector{check_convexity(Family::Trace, n(20), seed, fast),
                            check_convexity(Family::Mse, n(20), seed),
                            check_convexity(Family::ScaledIdentity, n(20), seed)};
       }},
      {"monotone",
       [&] {
         return std::vector{check_sweep_monotone(Family::Mse, n(5), seed),
                            check_sweep_monotone(Family::ScaledIdentity, n(5), seed),
                            check_sweep_monotone(Family::Trace, n(3), seed, fast)};
       }},
  };

  if (name == "all") {
    std::vector<PropertyResult> out;
    for (const auto& s : suite_names()) {
      auto part = suites.at(s)();
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  const auto it = suites.find(name);
  if (it == suites.end()) throw std::invalid_argument("unknown suite: " + name);
  return it->second();
}

}  // namespace hbrd
