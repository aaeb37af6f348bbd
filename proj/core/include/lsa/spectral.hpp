#pragma once

#include "lsa/common.hpp"

namespace lsa {

struct LyapunovSolution {
  Matrix Q;
  Matrix Q_sqrt;
  double residual_norm = 0.0;
};

// The eigenvalues of Q, ascending, are kept alongside the constants since
// several formulas need both extremes.
struct StabilityConstants {
  LyapunovSolution lyap;
  double q_norm = 0.0;        // ‖Q‖
  double abar_q_norm = 0.0;   // ‖Ā‖_Q
  double a = 0.0;
  double alpha_inf = 0.0;
  double kappa_Q = 1.0;
  double b_Q = 0.0;
  double c_A = 0.0;           // +inf when b_A == 0
  double b_A = 0.0;
  bool c_A_infinite = false;

  double alpha_q_inf(double q) const;
};

struct MarkovStabilityConstants {
  double alpha_inf_M = 0.0;
  double C_Gamma = 0.0;
  double c_A_M = 0.0;
  long block_h = 1;
  long t_mix = 1;
  // ⌈8 κ_Q^{1/2} b_A / a⌉, clamped to at least 1.
  long ceil_factor = 1;

  double alpha_q_inf_M(double q) const;
};

// True iff every eigenvalue of Abar has positive real part.
bool hurwitz_check(const Matrix& Abar);

LyapunovSolution solve_lyapunov(const Matrix& Abar);

// Spectral norm of Q^{1/2} M Q^{-1/2}.
double weighted_operator_norm(const Matrix& M, const Matrix& Q);

StabilityConstants iid_stability_constants(const Matrix& Abar, double b_A);

MarkovStabilityConstants markov_stability_constants(
    const StabilityConstants& consts, long t_mix);

// ceil(x) that ignores relative rounding noise below 1e-12, so that
// 8.000000000000002 maps to 8.
long snapped_ceil(double x);

}  // namespace lsa
