#pragma once

// Small dense symmetric / PSD matrix algebra. Dimensions are desk scale
// (k <= ~10), so every routine goes through a full symmetric
// eigendecomposition instead of anything clever.

#include <Eigen/Dense>

#include <utility>

#include "hbrd/error.hpp"

namespace hbrd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative eigenvalue threshold used for every Loewner / PSD decision.
inline constexpr double kPsdTol = 1e-9;

class DiagMatrix;

/// Dense symmetric real matrix. The constructor symmetrizes its input, so
/// round-off from file I/O or products like Q K Q^T never leaks an
/// asymmetric matrix into the eigen solvers.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const MatrixXd& m);

  static SymMatrix identity(Index n);
  static SymMatrix zero(Index n);

  Index dim() const { return m_.rows(); }
  const MatrixXd& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  /// Eigenvalues in ascending order.
  VectorXd eigenvalues() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  double spectral_norm() const;

  bool is_positive_definite() const;
  bool is_diagonal(double rel_tol = 1e-12) const;

  /// Inverse of a positive definite matrix; throws NotPositiveDefinite.
  SymMatrix inverse() const;
  /// Sum of log-eigenvalues; throws NotPositiveDefinite. Empty matrix -> 0.
  double log_det() const;
  double trace() const { return m_.trace(); }

  /// Symmetric PSD square root; eigenvalues within tolerance of zero are
  /// clamped, clearly negative ones throw NotPositiveDefinite.
  SymMatrix sqrt_psd() const;

  /// (M)_diag as a DiagMatrix.
  DiagMatrix diag() const;

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;

 private:
  MatrixXd m_;
};

/// Diagonal matrix stored as its diagonal.
class DiagMatrix {
 public:
  DiagMatrix() = default;
  explicit DiagMatrix(VectorXd entries);

  static DiagMatrix constant(Index n, double value);

  Index dim() const { return d_.size(); }
  const VectorXd& entries() const { return d_; }
  double operator[](Index i) const { return d_(i); }

  SymMatrix to_sym() const;
  /// Entrywise reciprocal; throws NotPositiveDefinite on a non-positive entry.
  DiagMatrix inverse() const;
  double log_det() const;
  /// Leading `n` entries / trailing `n` entries.
  DiagMatrix head(Index n) const { return DiagMatrix(d_.head(n)); }
  DiagMatrix tail(Index n) const { return DiagMatrix(d_.tail(n)); }

  DiagMatrix operator+(const DiagMatrix& o) const;
  DiagMatrix operator-(const DiagMatrix& o) const;

 private:
  VectorXd d_;
};

/// Partition of a dimension into a leading l1 block and trailing l2 block.
struct BlockSplit {
  Index l1 = 0;
  Index l2 = 0;

  Index dim() const { return l1 + l2; }
};

/// PSD matrix S describing an additional Gaussian observation of X:
/// conditioning on it maps the conditional precision P to P + S.
class PrecisionIncrement {
 public:
  PrecisionIncrement() = default;
  /// Throws NotPositiveDefinite when S has an eigenvalue below
  /// -kPsdTol * max(1, largest eigenvalue).
  explicit PrecisionIncrement(SymMatrix s);

  static PrecisionIncrement zero(Index n);

  Index dim() const { return s_.dim(); }
  const SymMatrix& matrix() const { return s_; }

 private:
  SymMatrix s_;
};

struct BlockParts {
  SymMatrix upper_left;
  SymMatrix lower_right;
  MatrixXd off_diag;
};

struct Diagonalization {
  /// Rows are orthonormal eigenvectors: Q * m * Q^T = diag(eigenvalues).
  MatrixXd q;
  /// Sorted descending.
  VectorXd eigenvalues;
};

/// true iff min eig(b - a) >= -tol * max(1, ||b - a||_2).
bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol = kPsdTol);

/// PSD test with the same relative convention as loewner_leq.
bool is_psd(const SymMatrix& m, double tol = kPsdTol);

BlockParts block_parts(const SymMatrix& m, const BlockSplit& split);

/// blockdiag(a, b); either side may be empty.
SymMatrix block_diag(const SymMatrix& a, const SymMatrix& b);
DiagMatrix block_diag(const DiagMatrix& a, const DiagMatrix& b);

DiagMatrix diag_min(const DiagMatrix& e, const DiagMatrix& f);

/// (k_cond^{-1} + S)^{-1}.
SymMatrix apply_increment(const SymMatrix& k_cond, const PrecisionIncrement& inc);

/// 1/2 ln(|k_prior| / |k_post|), requiring k_post <= k_prior.
double mutual_info_nats(const SymMatrix& k_prior, const SymMatrix& k_post,
                        double tol = kPsdTol);

/// Symmetric eigendecomposition with rows of Q as eigenvectors, eigenvalues
/// descending, and each eigenvector's first non-negligible entry positive.
Diagonalization orthogonal_diagonalizer(const SymMatrix& m);

/// q * m * q^T.
SymMatrix congruence(const MatrixXd& q, const SymMatrix& m);

/// Largest absolute entry of (a - b) divided by max(1, largest |entry| of b).
double relative_difference(const MatrixXd& a, const MatrixXd& b);

}  // namespace hbrd
