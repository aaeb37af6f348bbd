#pragma once

#include <cstdint>
#include <vector>

#include "lsa/problem.hpp"

namespace lsa {

struct ChainAnalysis {
  Vector pi;
  long t_mix_min = 1;
  Matrix fundamental;
  Matrix P;

  double dobrushin(long k) const;
};

struct PathSample {
  std::vector<int> states;  // 0-based, states[k-1] is Z_k
  Matrix additive;          // d x n Gaussian draws, empty unless sub-Gaussian
  std::uint64_t seed = 0;
  Vector initial;

  long size() const { return static_cast<long>(states.size()); }
};

void check_stochastic(const Matrix& P);

Vector stationary_distribution(const Matrix& P);

double dobrushin_coefficient(const Matrix& P, long k);

long minimal_mixing_time(const Matrix& P, long horizon = 10000);

Matrix fundamental_matrix(const Matrix& P, const Vector& pi);

ChainAnalysis analyze_chain(const Matrix& P, long horizon = 10000);

PathSample sample_path(const NoiseProcess& noise, long n, std::uint64_t seed);

// CLT covariance of the noise sequence. With `literal` the lag sum starts at
// 0, which adds 2 Σ_ε on top of the standard value.
Matrix asymptotic_noise_covariance(const DerivedInstance& inst,
                                   const NoiseProcess& noise,
                                   bool literal = false);

}  // namespace lsa
