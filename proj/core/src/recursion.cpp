#include "lsa/recursion.hpp"

#include <algorithm>
#include <cmath>

namespace lsa {

namespace {

void check_args(const Instance& inst, double alpha, long n,
                const Vector& theta0, const PathSample& path) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::Domain, "alpha must be positive and finite");
  }
  if (n < 2 || n % 2 != 0) {
    throw Error(ErrorKind::Domain, "n must be even and >= 2");
  }
  if (path.size() < n) throw Error(ErrorKind::Domain, "path shorter than n");
  if (theta0.size() != inst.d()) {
    throw Error(ErrorKind::Dimension, "theta0 has wrong dimension");
  }
}

// Observation at step k (1-based): A(Z_k) and b(Z_k) plus any additive draw.
struct Observation {
  const Matrix* A;
  Vector b;
  Vector eps;
};

Observation observe(const Instance& inst, const PathSample& path, long k) {
  const auto z = static_cast<std::size_t>(path.states[static_cast<std::size_t>(k - 1)]);
  Observation o{&inst.model.A[z], inst.model.b[z], inst.derived.eps[z]};
  if (path.additive.size() > 0) {
    o.b += path.additive.col(k - 1);
    o.eps -= path.additive.col(k - 1);
  }
  return o;
}

Vector initial_law(const Instance& inst, const Vector* xi) {
  if (xi != nullptr) return *xi;
  if (const auto* m = std::get_if<MarkovNoise>(&inst.model.noise)) return m->xi;
  return inst.derived.pi;
}

Matrix transition(const Instance& inst) {
  if (const auto* m = std::get_if<MarkovNoise>(&inst.model.noise)) return m->P;
  const int S = inst.S();
  return Vector::Ones(S) * inst.derived.pi.transpose();
}

}  // namespace

LsaRun run_lsa(const Instance& inst, double alpha, long n, const Vector& theta0,
               const PathSample& path, bool keep_theta) {
  check_args(inst, alpha, n, theta0, path);
  LsaRun out;
  Vector theta = theta0;
  Vector sum = Vector::Zero(theta0.size());
  if (keep_theta) out.theta.push_back(theta);
  const long n0 = n / 2;
  for (long k = 1; k <= n; ++k) {
    if (k - 1 >= n0) sum += theta;
    Observation o = observe(inst, path, k);
    theta -= alpha * ((*o.A) * theta - o.b);
    if (keep_theta) out.theta.push_back(theta);
  }
  out.theta_n = theta;
  out.theta_bar = sum / static_cast<double>(n - n0);
  return out;
}

DecompositionTrace run_decomposition(const Instance& inst, double alpha,
                                     long n, const Vector& theta0,
                                     const PathSample& path, bool per_step) {
  check_args(inst, alpha, n, theta0, path);
  const long d = inst.d();
  const Matrix& Abar = inst.derived.Abar;
  const Vector& ts = inst.derived.theta_star;
  const Matrix Ibar = Matrix::Identity(d, d) - alpha * Abar;

  DecompositionTrace t;
  Vector theta = theta0;
  Vector sum = Vector::Zero(d);
  Vector tr = theta0 - ts;
  Vector J0 = Vector::Zero(d), H0 = Vector::Zero(d);
  Vector J1 = Vector::Zero(d), H1 = Vector::Zero(d);
  const long n0 = n / 2;
  auto record = [&] {
    t.per_step.tr.push_back(tr);
    t.per_step.J0.push_back(J0);
    t.per_step.J1.push_back(J1);
    t.per_step.H0.push_back(H0);
    t.per_step.H1.push_back(H1);
  };
  if (per_step) record();
  for (long k = 1; k <= n; ++k) {
    if (k - 1 >= n0) sum += theta;
    Observation o = observe(inst, path, k);
    const Matrix& A = *o.A;
    const Vector AtJ0 = (A - Abar) * J0;
    const Vector AtJ1 = (A - Abar) * J1;
    theta -= alpha * (A * theta - o.b);
    tr -= alpha * (A * tr);
    H1 = H1 - alpha * (A * H1) - alpha * AtJ1;
    J1 = Ibar * J1 - alpha * AtJ0;
    H0 = H0 - alpha * (A * H0) - alpha * AtJ0;
    J0 = Ibar * J0 - alpha * o.eps;
    if (per_step) record();
  }
  t.theta_n = theta;
  t.theta_bar = sum / static_cast<double>(n - n0);
  t.tr_term = tr;
  t.J0 = J0;
  t.J1 = J1;
  t.H0 = H0;
  t.H1 = H1;
  t.residual_lsa = (theta - ts - (tr + J0 + H0)).norm();
  t.residual_h0 = (H0 - J1 - H1).norm();
  return t;
}

double check_pr_identity(const Instance& inst, double alpha, long n,
                         const Vector& theta0, const PathSample& path) {
  check_args(inst, alpha, n, theta0, path);
  const long d = inst.d();
  const Matrix& Abar = inst.derived.Abar;
  const Vector& bbar = inst.derived.bbar;
  const long n0 = n / 2;
  Vector theta = theta0;
  Vector sum = Vector::Zero(d);
  Vector esum = Vector::Zero(d);
  Vector theta_n0;
  for (long k = 1; k <= n; ++k) {
    if (k - 1 == n0) theta_n0 = theta;
    Observation o = observe(inst, path, k);
    if (k - 1 >= n0) {
      sum += theta;
      esum += ((*o.A) - Abar) * theta - (o.b - bbar);
    }
    theta -= alpha * ((*o.A) * theta - o.b);
  }
  const double m = static_cast<double>(n - n0);
  const Vector theta_bar = sum / m;
  const Vector lhs = Abar * (theta_bar - inst.derived.theta_star);
  const Vector rhs = (theta_n0 - theta) / (alpha * m) - esum / m;
  return (lhs - rhs).norm();
}

double product_norm(const Instance& inst, double alpha, const PathSample& path,
                    long m, long n) {
  if (m < 1) throw Error(ErrorKind::Domain, "m must be >= 1");
  if (m > n) return 1.0;
  if (path.size() < n) throw Error(ErrorKind::Domain, "path shorter than n");
  const long d = inst.d();
  Matrix Phi = Matrix::Identity(d, d);
  for (long k = m; k <= n; ++k) {
    const auto z = static_cast<std::size_t>(path.states[static_cast<std::size_t>(k - 1)]);
    Phi -= alpha * (inst.model.A[z] * Phi);
  }
  return spectral_norm(Phi);
}

std::vector<double> product_norms(const Instance& inst, double alpha,
                                  const PathSample& path,
                                  const std::vector<long>& n_grid) {
  const long d = inst.d();
  std::vector<double> out;
  out.reserve(n_grid.size());
  Matrix Phi = Matrix::Identity(d, d);
  long k = 0;
  for (long n : n_grid) {
    if (n < k) throw Error(ErrorKind::Domain, "n_grid must be ascending");
    if (path.size() < n) throw Error(ErrorKind::Domain, "path shorter than n");
    for (; k < n; ++k) {
      const auto z = static_cast<std::size_t>(path.states[static_cast<std::size_t>(k)]);
      Phi -= alpha * (inst.model.A[z] * Phi);
    }
    out.push_back(spectral_norm(Phi));
  }
  return out;
}

MeanDynamics exact_mean_dynamics(const Instance& inst, double alpha, long n,
                                 const Vector& theta0, const Vector* xi) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::Domain, "alpha must be positive");
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::Domain, "n must be even and >= 2");
  const long d = inst.d();
  const int S = inst.S();
  const Matrix P = transition(inst);
  const Vector mu0 = initial_law(inst, xi);
  std::vector<Matrix> step(static_cast<std::size_t>(S));
  for (int z = 0; z < S; ++z) {
    step[static_cast<std::size_t>(z)] =
        Matrix::Identity(d, d) - alpha * inst.model.A[static_cast<std::size_t>(z)];
  }

  MeanDynamics out;
  out.mean_theta.reserve(static_cast<std::size_t>(n + 1));
  out.mean_theta.push_back(theta0);
  // Column z of M holds m_k(z).
  Matrix M(d, S);
  Vector mu = mu0;
  for (int z = 0; z < S; ++z) {
    M.col(z) = mu(z) * (step[static_cast<std::size_t>(z)] * theta0 +
                        alpha * inst.model.b[static_cast<std::size_t>(z)]);
  }
  const long n0 = n / 2;
  Vector sum = Vector::Zero(d);
  if (n0 == 0) sum += theta0;
  for (long k = 1; k <= n; ++k) {
    if (k > 1) {
      const Matrix pushed = M * P;
      mu = (mu.transpose() * P).transpose();
      for (int z = 0; z < S; ++z) {
        M.col(z) = step[static_cast<std::size_t>(z)] * pushed.col(z) +
                   alpha * mu(z) * inst.model.b[static_cast<std::size_t>(z)];
      }
    }
    const Vector mean = M.rowwise().sum();
    if (k >= n0 && k <= n - 1) sum += mean;
    out.mean_theta.push_back(mean);
  }
  out.mean_theta_bar = sum / static_cast<double>(n - n0);
  out.bias = (out.mean_theta_bar - inst.derived.theta_star).norm();
  return out;
}

std::vector<double> mean_noise_coupling(const Instance& inst, double alpha,
                                        long n, const Vector* xi) {
  const long d = inst.d();
  const int S = inst.S();
  const Matrix P = transition(inst);
  const Matrix Ibar = Matrix::Identity(d, d) - alpha * inst.derived.Abar;
  Vector mu = initial_law(inst, xi);
  // Column z of J holds E[J0_t 1{Z_t = z}].
  Matrix J(d, S);
  for (int z = 0; z < S; ++z) {
    J.col(z) = -alpha * mu(z) * inst.derived.eps[static_cast<std::size_t>(z)];
  }
  std::vector<double> out;
  for (long t = 1; t < n; ++t) {
    const Matrix pushed = J * P;
    Vector coupling = Vector::Zero(d);
    for (int z = 0; z < S; ++z) {
      coupling += (inst.model.A[static_cast<std::size_t>(z)] - inst.derived.Abar) *
                  pushed.col(z);
    }
    out.push_back(coupling.norm());
    mu = (mu.transpose() * P).transpose();
    for (int z = 0; z < S; ++z) {
      J.col(z) = Ibar * pushed.col(z) -
                 alpha * mu(z) * inst.derived.eps[static_cast<std::size_t>(z)];
    }
  }
  return out;
}

}  // namespace lsa
