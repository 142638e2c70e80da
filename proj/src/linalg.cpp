#include "hbrd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace hbrd {

namespace {

Eigen::SelfAdjointEigenSolver<MatrixXd> eigen_solve(const MatrixXd& m,
                                                    bool vectors) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(
      m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure,
                "symmetric eigendecomposition failed");
  }
  return es;
}

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

// Smallest eigenvalue that still counts as "positive" for a PD test.
double pd_floor(const VectorXd& ascending) {
  const double scale = std::max(1.0, std::abs(ascending(ascending.size() - 1)));
  return kPsdTol * scale * 1e-3;
}

}  // namespace

// ---------------------------------------------------------------- SymMatrix

SymMatrix::SymMatrix(const MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix is not square");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NumericalFailure, "matrix has non-finite entries");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Index n) {
  return SymMatrix(MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::zero(Index n) { return SymMatrix(MatrixXd::Zero(n, n)); }

VectorXd SymMatrix::eigenvalues() const {
  if (dim() == 0) return VectorXd();
  return eigen_solve(m_, false).eigenvalues();
}

double SymMatrix::min_eigenvalue() const {
  if (dim() == 0) return 0.0;
  return eigenvalues()(0);
}

double SymMatrix::max_eigenvalue() const {
  if (dim() == 0) return 0.0;
  return eigenvalues()(dim() - 1);
}

double SymMatrix::spectral_norm() const {
  if (dim() == 0) return 0.0;
  const VectorXd ev = eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

bool SymMatrix::is_positive_definite() const {
  if (dim() == 0) return true;
  const VectorXd ev = eigenvalues();
  return ev(0) > pd_floor(ev);
}

bool SymMatrix::is_diagonal(double rel_tol) const {
  const double scale = std::max(1e-300, m_.cwiseAbs().maxCoeff());
  for (Index i = 0; i < dim(); ++i) {
    for (Index j = 0; j < dim(); ++j) {
      if (i != j && std::abs(m_(i, j)) > rel_tol * scale) return false;
    }
  }
  return true;
}

SymMatrix SymMatrix::inverse() const {
  if (dim() == 0) return *this;
  const auto es = eigen_solve(m_, true);
  const VectorXd& ev = es.eigenvalues();
  if (!(ev(0) > pd_floor(ev))) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "cannot invert a matrix that is not positive definite");
  }
  const MatrixXd& v = es.eigenvectors();
  return SymMatrix(v * ev.cwiseInverse().asDiagonal() * v.transpose());
}

double SymMatrix::log_det() const {
  if (dim() == 0) return 0.0;
  const VectorXd ev = eigenvalues();
  if (!(ev(0) > pd_floor(ev))) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "log-determinant of a matrix that is not positive definite");
  }
  return ev.array().log().sum();
}

SymMatrix SymMatrix::sqrt_psd() const {
  if (dim() == 0) return *this;
  const auto es = eigen_solve(m_, true);
  VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  if (ev(0) < -kPsdTol * scale) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "square root of a matrix that is not PSD");
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  const MatrixXd& v = es.eigenvectors();
  return SymMatrix(v * ev.asDiagonal() * v.transpose());
}

DiagMatrix SymMatrix::diag() const { return DiagMatrix(m_.diagonal()); }

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  require_same_dim(dim(), o.dim(), "SymMatrix +");
  return SymMatrix(m_ + o.m_);
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  require_same_dim(dim(), o.dim(), "SymMatrix -");
  return SymMatrix(m_ - o.m_);
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(m_ * s); }

// --------------------------------------------------------------- DiagMatrix

DiagMatrix::DiagMatrix(VectorXd entries) : d_(std::move(entries)) {
  if (!d_.allFinite()) {
    throw Error(ErrorCode::NumericalFailure,
                "diagonal matrix has non-finite entries");
  }
}

DiagMatrix DiagMatrix::constant(Index n, double value) {
  return DiagMatrix(VectorXd::Constant(n, value));
}

SymMatrix DiagMatrix::to_sym() const {
  return SymMatrix(MatrixXd(d_.asDiagonal()));
}

DiagMatrix DiagMatrix::inverse() const {
  if (dim() > 0 && !(d_.minCoeff() > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "cannot invert a diagonal matrix with a non-positive entry");
  }
  return DiagMatrix(d_.cwiseInverse());
}

double DiagMatrix::log_det() const {
  if (dim() == 0) return 0.0;
  if (!(d_.minCoeff() > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "log-determinant of a diagonal matrix with a non-positive entry");
  }
  return d_.array().log().sum();
}

DiagMatrix DiagMatrix::operator+(const DiagMatrix& o) const {
  require_same_dim(dim(), o.dim(), "DiagMatrix +");
  return DiagMatrix(d_ + o.d_);
}

DiagMatrix DiagMatrix::operator-(const DiagMatrix& o) const {
  require_same_dim(dim(), o.dim(), "DiagMatrix -");
  return DiagMatrix(d_ - o.d_);
}

// ------------------------------------------------------- PrecisionIncrement

PrecisionIncrement::PrecisionIncrement(SymMatrix s) : s_(std::move(s)) {
  if (!is_psd(s_)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "precision increment is not positive semidefinite");
  }
}

PrecisionIncrement PrecisionIncrement::zero(Index n) {
  return PrecisionIncrement(SymMatrix::zero(n));
}

// ----------------------------------------------------------------- free ops

bool is_psd(const SymMatrix& m, double tol) {
  if (m.dim() == 0) return true;
  const VectorXd ev = m.eigenvalues();
  const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol * std::max(1.0, norm);
}

bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a.dim(), b.dim(), "loewner_leq");
  return is_psd(b - a, tol);
}

BlockParts block_parts(const SymMatrix& m, const BlockSplit& split) {
  require_same_dim(m.dim(), split.dim(), "block_parts");
  const MatrixXd& a = m.matrix();
  return BlockParts{
      SymMatrix(MatrixXd(a.topLeftCorner(split.l1, split.l1))),
      SymMatrix(MatrixXd(a.bottomRightCorner(split.l2, split.l2))),
      a.topRightCorner(split.l1, split.l2)};
}

SymMatrix block_diag(const SymMatrix& a, const SymMatrix& b) {
  MatrixXd out = MatrixXd::Zero(a.dim() + b.dim(), a.dim() + b.dim());
  out.topLeftCorner(a.dim(), a.dim()) = a.matrix();
  out.bottomRightCorner(b.dim(), b.dim()) = b.matrix();
  return SymMatrix(out);
}

DiagMatrix block_diag(const DiagMatrix& a, const DiagMatrix& b) {
  VectorXd out(a.dim() + b.dim());
  out << a.entries(), b.entries();
  return DiagMatrix(out);
}

DiagMatrix diag_min(const DiagMatrix& e, const DiagMatrix& f) {
  require_same_dim(e.dim(), f.dim(), "diag_min");
  return DiagMatrix(e.entries().cwiseMin(f.entries()));
}

SymMatrix apply_increment(const SymMatrix& k_cond,
                          const PrecisionIncrement& inc) {
  require_same_dim(k_cond.dim(), inc.dim(), "apply_increment");
  if (!k_cond.is_positive_definite()) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "apply_increment: conditional covariance is singular");
  }
  return (k_cond.inverse() + inc.matrix()).inverse();
}

double mutual_info_nats(const SymMatrix& k_prior, const SymMatrix& k_post,
                        double tol) {
  require_same_dim(k_prior.dim(), k_post.dim(), "mutual_info_nats");
  if (!k_prior.is_positive_definite() || !k_post.is_positive_definite()) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "mutual_info_nats: covariance is not positive definite");
  }
  if (!loewner_leq(k_post, k_prior, tol)) {
    throw Error(ErrorCode::OrderingViolated,
                "mutual_info_nats: posterior covariance exceeds prior");
  }
  return std::max(0.0, 0.5 * (k_prior.log_det() - k_post.log_det()));
}

Diagonalization orthogonal_diagonalizer(const SymMatrix& m) {
  const Index n = m.dim();
  if (n == 0) return {MatrixXd(0, 0), VectorXd()};
  const auto es = eigen_solve(m.matrix(), true);
  const VectorXd& ev = es.eigenvalues();
  const MatrixXd& v = es.eigenvectors();

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  // Eigen returns ascending eigenvalues; reverse into descending order while
  // keeping the solver's relative order inside exact ties.
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return ev(a) > ev(b); });

  Diagonalization out{MatrixXd(n, n), VectorXd(n)};
  for (Index r = 0; r < n; ++r) {
    VectorXd col = v.col(order[r]);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        if (col(i) < 0) col = -col;
        break;
      }
    }
    out.q.row(r) = col.transpose();
    out.eigenvalues(r) = ev(order[r]);
  }
  return out;
}

SymMatrix congruence(const MatrixXd& q, const SymMatrix& m) {
  return SymMatrix(q * m.matrix() * q.transpose());
}

double relative_difference(const MatrixXd& a, const MatrixXd& b) {
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::DistortionInfeasible: return "DistortionInfeasible";
    case ErrorCode::MseRequiresDiagonal: return "MseRequiresDiagonal";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::MRequiresKx: return "MRequiresKx";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::SchemeInfeasible: return "SchemeInfeasible";
    case ErrorCode::InfeasibleConstruction: return "InfeasibleConstruction";
    case ErrorCode::SingularCorrection: return "SingularCorrection";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::NoFeasiblePointFound: return "NoFeasiblePointFound";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace hbrd
