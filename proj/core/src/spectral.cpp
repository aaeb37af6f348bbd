#include "lsa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lsa {

namespace {

void require_square(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::Dimension,
                std::string(name) + " must be a non-empty square matrix");
  }
}

Matrix lyapunov_residual(const Matrix& Abar, const Matrix& Q) {
  const long d = Abar.rows();
  return Abar.transpose() * Q + Q * Abar - Matrix::Identity(d, d);
}

}  // namespace

double StabilityConstants::alpha_q_inf(double q) const {
  if (c_A_infinite) return alpha_inf;
  return std::min(alpha_inf, c_A / q);
}

double MarkovStabilityConstants::alpha_q_inf_M(double q) const {
  return std::min(alpha_inf_M, c_A_M / q);
}

long snapped_ceil(double x) {
  return static_cast<long>(std::ceil(x * (1.0 - 1e-12)));
}

bool hurwitz_check(const Matrix& Abar) {
  require_square(Abar, "Abar");
  if (!Abar.allFinite()) {
    throw Error(ErrorKind::Domain, "Abar has non-finite entries");
  }
  Eigen::EigenSolver<Matrix> es(Abar, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, "eigenvalue computation failed");
  }
  for (long i = 0; i < es.eigenvalues().size(); ++i) {
    if (!(es.eigenvalues()(i).real() > 0.0)) return false;
  }
  return true;
}

LyapunovSolution solve_lyapunov(const Matrix& Abar) {
  if (!hurwitz_check(Abar)) {
    throw Error(ErrorKind::NotHurwitz,
                "-Abar is not Hurwitz: some eigenvalue has Re <= 0");
  }
  const long d = Abar.rows();
  const Matrix I = Matrix::Identity(d, d);
  const Matrix At = Abar.transpose();

  // Column-major vec: vec(At Q) = (I ⊗ At) vec(Q), vec(Q Abar) = (At ⊗ I) vec(Q).
  Matrix K = Matrix::Zero(d * d, d * d);
  for (long i = 0; i < d; ++i) {
    for (long j = 0; j < d; ++j) {
      K.block(i * d, j * d, d, d) += (i == j ? 1.0 : 0.0) * At;
      K.block(i * d, j * d, d, d) += At(i, j) * I;
    }
  }
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector rhs = Eigen::Map<const Vector>(I.data(), d * d);
  Vector x = lu.solve(rhs);
  Matrix Q = Eigen::Map<Matrix>(x.data(), d, d);
  Q = 0.5 * (Q + Q.transpose()).eval();

  // One step of iterative refinement.
  Matrix R = -lyapunov_residual(Abar, Q);
  Vector r = Eigen::Map<Vector>(R.data(), d * d);
  Vector dx = lu.solve(r);
  Q += Eigen::Map<Matrix>(dx.data(), d, d);
  Q = 0.5 * (Q + Q.transpose()).eval();

  LyapunovSolution sol;
  sol.residual_norm = spectral_norm(lyapunov_residual(Abar, Q));
  if (!(sol.residual_norm <= 1e-10 * static_cast<double>(d))) {
    throw Error(ErrorKind::Numerical, "Lyapunov residual above tolerance",
                sol.residual_norm);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0)) {
    throw Error(ErrorKind::Numerical, "Lyapunov solution is not positive definite",
                sol.residual_norm);
  }
  sol.Q = Q;
  sol.Q_sqrt = es.eigenvectors() *
               es.eigenvalues().cwiseSqrt().asDiagonal() *
               es.eigenvectors().transpose();
  return sol;
}

double weighted_operator_norm(const Matrix& M, const Matrix& Q) {
  require_square(Q, "Q");
  if (M.rows() != Q.rows() || M.cols() != Q.cols()) {
    throw Error(ErrorKind::Dimension, "M and Q sizes differ");
  }
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorKind::Domain, "Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0)) {
    throw Error(ErrorKind::Domain, "Q is not positive definite");
  }
  const Matrix& V = es.eigenvectors();
  const Vector s = es.eigenvalues().cwiseSqrt();
  Matrix root = V * s.asDiagonal() * V.transpose();
  Matrix inv_root = V * s.cwiseInverse().asDiagonal() * V.transpose();
  return spectral_norm(root * M * inv_root);
}

StabilityConstants iid_stability_constants(const Matrix& Abar, double b_A) {
  if (!(b_A >= 0.0) || !std::isfinite(b_A)) {
    throw Error(ErrorKind::Domain, "b_A must be finite and nonnegative");
  }
  StabilityConstants c;
  c.lyap = solve_lyapunov(Abar);
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.lyap.Q);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
  c.q_norm = lmax;
  c.abar_q_norm = weighted_operator_norm(Abar, c.lyap.Q);
  c.a = 0.5 / c.q_norm;
  c.alpha_inf =
      std::min(0.5 / (c.abar_q_norm * c.abar_q_norm * c.q_norm), c.q_norm);
  c.kappa_Q = lmax / lmin;
  c.b_A = b_A;
  c.b_Q = 2.0 * std::sqrt(c.kappa_Q) * b_A;
  if (b_A == 0.0) {
    c.c_A = kInf;
    c.c_A_infinite = true;
  } else {
    c.c_A = c.a / (2.0 * c.b_Q * c.b_Q);
  }
  return c;
}

MarkovStabilityConstants markov_stability_constants(
    const StabilityConstants& c, long t_mix) {
  if (t_mix < 1) throw Error(ErrorKind::Domain, "t_mix must be >= 1");
  const double e = std::numbers::e;
  const double sk = std::sqrt(c.kappa_Q);
  MarkovStabilityConstants m;
  m.t_mix = t_mix;
  m.ceil_factor = std::max(1L, snapped_ceil(8.0 * sk * c.b_A / c.a));
  double base = c.alpha_inf;
  if (c.b_A > 0.0) {
    base = std::min({base, 1.0 / (sk * c.b_A), c.a / (6.0 * e * c.kappa_Q * c.b_A)});
  }
  m.alpha_inf_M = base / static_cast<double>(m.ceil_factor);
  const double s = sk * c.b_A + c.a / 6.0;
  m.C_Gamma = 4.0 * s * s * static_cast<double>(m.ceil_factor);
  m.c_A_M = c.a / (12.0 * m.C_Gamma);
  m.block_h = std::max(
      1L, snapped_ceil(8.0 * sk * c.b_A * static_cast<double>(t_mix) / c.a));
  return m;
}

}  // namespace lsa
