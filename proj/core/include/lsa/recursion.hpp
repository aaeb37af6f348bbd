#pragma once

#include <vector>

#include "lsa/chains.hpp"
#include "lsa/problem.hpp"

namespace lsa {

struct LsaRun {
  Vector theta_n;
  Vector theta_bar;
  std::vector<Vector> theta;  // θ_0..θ_n when requested
};

struct StepTerms {
  std::vector<Vector> tr, J0, J1, H0, H1;
};

struct DecompositionTrace {
  Vector theta_n;
  Vector theta_bar;
  Vector tr_term;
  Vector J0, J1, H0, H1;
  std::vector<Vector> theta;
  StepTerms per_step;  // filled only when requested

  // ‖θ_n − θ* − (tr + J0 + H0)‖ and ‖H0 − J1 − H1‖.
  double residual_lsa = 0.0;
  double residual_h0 = 0.0;
};

struct MeanDynamics {
  std::vector<Vector> mean_theta;  // E[θ_k], k = 0..n
  Vector mean_theta_bar;
  double bias = 0.0;
};

LsaRun run_lsa(const Instance& inst, double alpha, long n, const Vector& theta0,
               const PathSample& path, bool keep_theta = false);

DecompositionTrace run_decomposition(const Instance& inst, double alpha,
                                     long n, const Vector& theta0,
                                     const PathSample& path,
                                     bool per_step = false);

double check_pr_identity(const Instance& inst, double alpha, long n,
                         const Vector& theta0, const PathSample& path);

// ‖Φ_{m:n}‖ with Φ_{m:n} = (I − αA(Z_n)) ... (I − αA(Z_m)), I when m > n.
double product_norm(const Instance& inst, double alpha, const PathSample& path,
                    long m, long n);

// ‖Φ_{1:n}‖ for each n of an ascending grid, from one pass over the path.
std::vector<double> product_norms(const Instance& inst, double alpha,
                                  const PathSample& path,
                                  const std::vector<long>& n_grid);

// Exact E[θ_k] by propagating m_k(z) = E[θ_k 1{Z_k = z}]. For Markov noise
// the chain starts from `xi` if given, else from the declared initial law.
MeanDynamics exact_mean_dynamics(const Instance& inst, double alpha, long n,
                                 const Vector& theta0,
                                 const Vector* xi = nullptr);

// ‖E[Ã(Z_{t+1}) J0_t]‖ for t = 1..n-1, exact.
std::vector<double> mean_noise_coupling(const Instance& inst, double alpha,
                                        long n, const Vector* xi = nullptr);

}  // namespace lsa
