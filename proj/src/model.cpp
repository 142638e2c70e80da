#include "hbrd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hbrd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_distortion_bound(const SymMatrix& target, const SymMatrix& cond,
                            int decoder, const char* what,
                            std::vector<ValidationIssue>& issues) {
  if (!loewner_leq(target, cond)) {
    std::ostringstream os;
    os << "decoder " << decoder << ": " << what
       << " is not dominated by K_X|Y" << decoder;
    issues.push_back({ErrorCode::DistortionInfeasible, decoder, os.str()});
  }
}

SymMatrix precision_difference(const ProblemInstance& inst) {
  return inst.k_x_given_y2.inverse() - inst.k_x_given_y1.inverse();
}

double sign_threshold(const SymMatrix& diff) {
  return kPsdTol * std::max(1.0, diff.spectral_norm());
}

void normalize_row_signs(MatrixXd& q) {
  for (Index r = 0; r < q.rows(); ++r) {
    for (Index c = 0; c < q.cols(); ++c) {
      if (std::abs(q(r, c)) > 1e-12) {
        if (q(r, c) < 0) q.row(r) *= -1.0;
        break;
      }
    }
  }
}

// Within each run of (numerically) equal eigenvalues the eigenbasis is not
// unique; pick the one that diagonalizes K_X|Y1 on that run.
void refine_clusters(MatrixXd& q, const VectorXd& eig, const SymMatrix& k1,
                     double tol) {
  const Index n = eig.size();
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && std::abs(eig(end) - eig(start)) <= tol) ++end;
    const Index len = end - start;
    if (len > 1) {
      const MatrixXd rows = q.middleRows(start, len);
      const SymMatrix sub(rows * k1.matrix() * rows.transpose());
      const Diagonalization inner = orthogonal_diagonalizer(sub);
      q.middleRows(start, len) = inner.q * rows;
    }
    start = end;
  }
}

}  // namespace

Family family_of(const DistortionSpec& spec) {
  return std::visit(Overloaded{[](const MseDiag&) { return Family::Mse; },
                               [](const ScaledIdentity&) {
                                 return Family::ScaledIdentity;
                               },
                               [](const Trace&) { return Family::Trace; }},
                    spec);
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Mse: return "mse";
    case Family::ScaledIdentity: return "scaled_identity";
    case Family::Trace: return "trace";
  }
  return "unknown";
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << to_string(issues[i].code) << ": " << issues[i].message;
  }
  return os.str();
}

ValidationReport validate(const ProblemInstance& inst,
                          const DistortionSpec& spec) {
  ValidationReport report;
  auto& issues = report.issues;
  const Index k = inst.k;

  auto dim_issue = [&](const std::string& what, Index got) {
    std::ostringstream os;
    os << what << " has dimension " << got << ", expected " << k;
    issues.push_back({ErrorCode::DimensionMismatch, 0, os.str()});
  };
  if (k <= 0) {
    issues.push_back({ErrorCode::DimensionMismatch, 0, "k must be positive"});
    return report;
  }
  if (inst.k_x_given_y1.dim() != k) dim_issue("K_X_given_Y1", inst.k_x_given_y1.dim());
  if (inst.k_x_given_y2.dim() != k) dim_issue("K_X_given_Y2", inst.k_x_given_y2.dim());
  if (inst.k_x && inst.k_x->dim() != k) dim_issue("K_X", inst.k_x->dim());
  if (!report.ok()) return report;

  bool conditionals_pd = true;
  for (int i = 1; i <= 2; ++i) {
    const SymMatrix& c = i == 1 ? inst.k_x_given_y1 : inst.k_x_given_y2;
    if (!c.is_positive_definite()) {
      conditionals_pd = false;
      issues.push_back({ErrorCode::NotPositiveDefinite, i,
                        "K_X_given_Y" + std::to_string(i) +
                            " is not positive definite"});
    }
  }
  if (inst.k_x) {
    if (!inst.k_x->is_positive_definite()) {
      issues.push_back(
          {ErrorCode::NotPositiveDefinite, 0, "K_X is not positive definite"});
    } else {
      for (int i = 1; i <= 2; ++i) {
        const SymMatrix& c = i == 1 ? inst.k_x_given_y1 : inst.k_x_given_y2;
        if (!loewner_leq(c, *inst.k_x)) {
          issues.push_back({ErrorCode::OrderingViolated, i,
                            "K_X_given_Y" + std::to_string(i) +
                                " is not dominated by K_X"});
        }
      }
    }
  }
  if (!conditionals_pd) return report;

  std::visit(
      Overloaded{
          [&](const MseDiag& s) {
            if (s.d1.dim() != k) dim_issue("D1", s.d1.dim());
            if (s.d2.dim() != k) dim_issue("D2", s.d2.dim());
            if (s.d1.dim() != k || s.d2.dim() != k) return;
            for (int i = 1; i <= 2; ++i) {
              const DiagMatrix& d = i == 1 ? s.d1 : s.d2;
              if (!(d.entries().minCoeff() > 0.0)) {
                issues.push_back({ErrorCode::DistortionInfeasible, i,
                                  "D" + std::to_string(i) +
                                      " must be positive definite"});
                continue;
              }
              check_distortion_bound(
                  d.to_sym(), i == 1 ? inst.k_x_given_y1 : inst.k_x_given_y2,
                  i, i == 1 ? "D1" : "D2", issues);
            }
          },
          [&](const auto& s) {
            const char* label = family_of(spec) == Family::Trace
                                    ? "d*I (trace bound)"
                                    : "d*I";
            for (int i = 1; i <= 2; ++i) {
              const double d = i == 1 ? s.d1 : s.d2;
              if (!(d > 0.0) || !std::isfinite(d)) {
                issues.push_back({ErrorCode::DistortionInfeasible, i,
                                  "d" + std::to_string(i) +
                                      " must be positive and finite"});
                continue;
              }
              check_distortion_bound(
                  SymMatrix::identity(k) * d,
                  i == 1 ? inst.k_x_given_y1 : inst.k_x_given_y2, i, label,
                  issues);
            }
          }},
      spec);
  return report;
}

void require_valid(const ProblemInstance& inst, const DistortionSpec& spec) {
  const ValidationReport report = validate(inst, spec);
  if (!report.ok()) {
    throw Error(report.issues.front().code, report.summary());
  }
}

CanonicalForm canonicalize(const ProblemInstance& inst,
                           const DistortionSpec& spec) {
  require_valid(inst, spec);
  const Index k = inst.k;
  const SymMatrix diff = precision_difference(inst);
  const double tol = sign_threshold(diff);

  MatrixXd q;
  VectorXd eig;
  if (family_of(spec) == Family::Mse) {
    if (!inst.k_x_given_y1.is_diagonal() || !inst.k_x_given_y2.is_diagonal()) {
      throw Error(ErrorCode::MseRequiresDiagonal,
                  "componentwise MSE constraints require diagonal conditional "
                  "covariances");
    }
    const VectorXd d = diff.matrix().diagonal();
    std::vector<Index> order(k);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return d(a) > d(b); });
    q = MatrixXd::Zero(k, k);
    eig.resize(k);
    for (Index r = 0; r < k; ++r) {
      q(r, order[r]) = 1.0;
      eig(r) = d(order[r]);
    }
  } else {
    Diagonalization dz = orthogonal_diagonalizer(diff);
    q = std::move(dz.q);
    eig = std::move(dz.eigenvalues);
    refine_clusters(q, eig, inst.k_x_given_y1, tol);
    normalize_row_signs(q);
  }

  Index l1 = 0;
  while (l1 < k && eig(l1) >= -tol) ++l1;

  CanonicalForm out;
  out.q = q;
  out.split = BlockSplit{l1, k - l1};
  out.k = DiagMatrix(eig);
  out.a = out.k.head(l1);
  out.b = out.k.tail(k - l1);
  out.k_x_given_y1 = congruence(q, inst.k_x_given_y1);
  out.k_x_given_y2 = congruence(q, inst.k_x_given_y2);
  if (inst.k_x) out.k_x = congruence(q, *inst.k_x);

  const MatrixXd residual = (out.k_x_given_y2.inverse() -
                             out.k_x_given_y1.inverse()).matrix();
  if (relative_difference(residual, out.k.to_sym().matrix()) > 1e-9) {
    throw Error(ErrorCode::NumericalFailure,
                "canonical decomposition does not reproduce blockdiag(A, B)");
  }
  return out;
}

std::pair<DiagMatrix, DiagMatrix> canonical_targets(const CanonicalForm& canon,
                                                    const DistortionSpec& spec) {
  const Index k = canon.dim();
  return std::visit(
      Overloaded{
          [&](const MseDiag& s) {
            // Q is a permutation for MSE specs, so Q D Q^T stays diagonal.
            return std::pair{congruence(canon.q, s.d1.to_sym()).diag(),
                             congruence(canon.q, s.d2.to_sym()).diag()};
          },
          [&](const ScaledIdentity& s) {
            return std::pair{DiagMatrix::constant(k, s.d1),
                             DiagMatrix::constant(k, s.d2)};
          },
          [&](const Trace&) -> std::pair<DiagMatrix, DiagMatrix> {
            throw Error(ErrorCode::FamilyMismatch,
                        "trace constraints have no matrix-valued target");
          }},
      spec);
}

std::optional<std::array<int, 2>> detect_degraded(const ProblemInstance& inst) {
  const SymMatrix diff = precision_difference(inst);
  const double tol = sign_threshold(diff);
  const VectorXd ev = diff.eigenvalues();
  if (ev(ev.size() - 1) <= tol) return std::array<int, 2>{1, 2};
  if (ev(0) >= -tol) return std::array<int, 2>{2, 1};
  return std::nullopt;
}

}  // namespace hbrd
