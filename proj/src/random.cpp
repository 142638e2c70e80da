#include "hbrd/random.hpp"

#include <cmath>

namespace hbrd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

double Rng::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

int Rng::uniform_int(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream + 1)));
}

MatrixXd random_gaussian(Rng& rng, Index rows, Index cols) {
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

MatrixXd random_orthogonal(Rng& rng, Index n) {
  const Eigen::HouseholderQR<MatrixXd> qr(random_gaussian(rng, n, n));
  MatrixXd q = qr.householderQ();
  const VectorXd r_diag = qr.matrixQR().diagonal();
  for (Index i = 0; i < n; ++i) {
    if (r_diag(i) < 0) q.col(i) *= -1.0;
  }
  return q;
}

SymMatrix random_spd(Rng& rng, Index n, double lo, double hi) {
  const MatrixXd q = random_orthogonal(rng, n);
  VectorXd eig(n);
  for (Index i = 0; i < n; ++i) eig(i) = rng.log_uniform(lo, hi);
  return SymMatrix(q * eig.asDiagonal() * q.transpose());
}

SymMatrix random_psd(Rng& rng, Index n, double scale, Index rank) {
  const MatrixXd g = random_gaussian(rng, n, rank);
  return SymMatrix(scale * g * g.transpose());
}

DiagMatrix random_diag(Rng& rng, Index n, double lo, double hi) {
  VectorXd d(n);
  for (Index i = 0; i < n; ++i) d(i) = rng.log_uniform(lo, hi);
  return DiagMatrix(d);
}

ProblemInstance random_diagonal_instance(Rng& rng, Index k) {
  ProblemInstance inst;
  inst.k = k;
  inst.k_x_given_y1 = random_diag(rng, k, 0.1, 2.0).to_sym();
  inst.k_x_given_y2 = random_diag(rng, k, 0.1, 2.0).to_sym();
  inst.k_x = inst.k_x_given_y1 + inst.k_x_given_y2 + SymMatrix::identity(k);
  return inst;
}

ProblemInstance random_general_instance(Rng& rng, Index k) {
  ProblemInstance inst;
  inst.k = k;
  inst.k_x_given_y1 = random_spd(rng, k, 0.1, 2.0);
  inst.k_x_given_y2 = random_spd(rng, k, 0.1, 2.0);
  inst.k_x = inst.k_x_given_y1 + inst.k_x_given_y2 + SymMatrix::identity(k);
  return inst;
}

ProblemInstance random_degraded_instance(Rng& rng, Index k, bool diagonal) {
  ProblemInstance inst;
  inst.k = k;
  if (diagonal) {
    inst.k_x_given_y1 = random_diag(rng, k, 0.1, 1.5).to_sym();
    inst.k_x_given_y2 = inst.k_x_given_y1 + random_diag(rng, k, 0.01, 1.0).to_sym();
  } else {
    inst.k_x_given_y1 = random_spd(rng, k, 0.1, 1.5);
    inst.k_x_given_y2 =
        inst.k_x_given_y1 + random_psd(rng, k, 0.3, rng.uniform_int(1, int(k)));
  }
  inst.k_x = inst.k_x_given_y2 + SymMatrix::identity(k);
  return inst;
}

MseDiag random_mse_spec(Rng& rng, const ProblemInstance& inst, double lo,
                        double hi) {
  auto draw = [&](const SymMatrix& k) {
    VectorXd d = k.matrix().diagonal();
    for (Index i = 0; i < d.size(); ++i) d(i) *= rng.uniform(lo, hi);
    return DiagMatrix(d);
  };
  MseDiag spec;
  spec.d1 = draw(inst.k_x_given_y1);
  spec.d2 = draw(inst.k_x_given_y2);
  return spec;
}

ScaledIdentity random_sc_spec(Rng& rng, const ProblemInstance& inst, double lo,
                              double hi) {
  ScaledIdentity spec;
  spec.d1 = rng.uniform(lo, hi) * inst.k_x_given_y1.min_eigenvalue();
  spec.d2 = rng.uniform(lo, hi) * inst.k_x_given_y2.min_eigenvalue();
  return spec;
}

Trace random_trace_spec(Rng& rng, const ProblemInstance& inst, double lo,
                        double hi) {
  Trace spec;
  spec.d1 = rng.uniform(lo, hi) * inst.k_x_given_y1.min_eigenvalue();
  spec.d2 = rng.uniform(lo, hi) * inst.k_x_given_y2.min_eigenvalue();
  return spec;
}

}  // namespace hbrd
