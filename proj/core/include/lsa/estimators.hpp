#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lsa/problem.hpp"

namespace lsa {

enum class Quantity {
  ThetaErr,     // θ_n − θ*
  ThetaBarErr,  // θ̄_n − θ*
  PrErr,        // Ā(θ̄_n − θ*)
  J0,
  J1,
  H0,
  H1,
  Transient,    // Φ_{1:n}(θ_0 − θ*)
};

const char* quantity_id(Quantity q);
Quantity parse_quantity(const std::string& id);

struct MomentRow {
  std::string quantity;
  long n = 0;
  double p = 2.0;
  double alpha = 0.0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long R = 0;
  std::uint64_t master_seed = 0;
};

struct MomentTable {
  std::vector<MomentRow> rows;
  int bootstrap_replicates = 400;
};

struct EnsembleOptions {
  int threads = 1;                // 0 = hardware concurrency
  double budget = 5e10;           // cap on R * Σn * d^2
  bool budget_override = false;
  int bootstrap_replicates = 400;
};

double pairwise_sum(const double* x, std::size_t n);

double pth_moment(const std::vector<Vector>& samples, double p);
double pth_moment_of_norms(const std::vector<double>& norms, double p);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile 95% bootstrap interval of the p-th moment, widened to contain
// the point estimate.
Interval bootstrap_ci(const std::vector<double>& norms, double p,
                      int replicates, std::uint64_t seed);

// Runs body(i) for i in [0, count) on `threads` workers. Results must be
// written to per-index slots by the caller.
void parallel_for(long count, int threads, const std::function<void(long)>& body);

int resolve_threads(int threads);

MomentTable run_ensemble(const Instance& inst, double alpha,
                         const std::vector<long>& n_grid,
                         const std::vector<double>& p_grid, long R,
                         std::uint64_t master_seed,
                         const std::vector<Quantity>& quantities,
                         const Vector& theta0,
                         const EnsembleOptions& opts = {});

MomentTable empirical_stability(const Instance& inst, double alpha, double p,
                                double q, const std::vector<long>& n_grid,
                                long R, std::uint64_t master_seed,
                                const EnsembleOptions& opts = {});

Matrix batch_means_covariance(const Instance& inst, const NoiseProcess& noise,
                              long path_length, long batch_count,
                              std::uint64_t seed);

}  // namespace lsa
