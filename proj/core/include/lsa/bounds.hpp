#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsa/problem.hpp"
#include "lsa/spectral.hpp"

namespace lsa {

inline constexpr double kRm1 = 60.0 * 2.718281828459045235360287471352662;
inline constexpr double kRm2 = 60.0;

struct ConstantSet {
  // i.i.d., bounded noise
  double D1 = 0, D2 = 0, D3 = 0, D4 = 0, c1 = 0;
  double C_Rm1 = kRm1, C_Rm2 = kRm2;
  // i.i.d., sub-Gaussian noise
  double D1_sg = 0, D_sg = 0, D3_sg = 0, D4_sg = 0;
  // optimized-step form; m = α_∞ ∧ c_A
  double m = 0, c3 = 0, c4 = 0, c5 = 0;
  // Markov
  bool has_markov = false;
  double DM1 = 0, DM2 = 0, DMJ1 = 0, DMJ2 = 0, DMH1 = 0, DMH2 = 0;
  double DM4 = 0, DM5 = 0, DM6 = 0, DM7 = 0, DM_S = 0, C_sigma = 0;
  double C_Ros1 = 0, C_Ros2 = 0;

  double c2(int d) const;
};

ConstantSet constants(const StabilityConstants& s,
                      const MarkovStabilityConstants* m = nullptr);

struct EligibilityCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = true;
};

struct BoundReport {
  std::string bound_id;
  double leading = 0.0;
  double fluctuation = 0.0;
  double transient = 0.0;
  double bias = 0.0;
  double total = 0.0;
  std::vector<std::pair<std::string, double>> inputs;
  std::vector<EligibilityCheck> eligibility;
  std::vector<std::string> flags;

  bool eligible() const;
  void finalize();
};

// Everything the evaluators need from an instance.
struct BoundContext {
  int d = 1;
  StabilityConstants s;
  std::optional<MarkovStabilityConstants> m;
  ConstantSet c;
  long t_mix = 1;
};

BoundContext make_context(const Instance& inst);
BoundContext make_context(const Matrix& Abar, double b_A, int d,
                          std::optional<long> t_mix = std::nullopt);

struct BoundInputs {
  long n = 2;
  double p = 2.0;
  double q = 0.0;            // 0 selects each statement's default
  double alpha = 0.0;
  double tr_sigma = 0.0;     // Tr Σ_ε, or Tr Σ^(M) for Markov bounds
  double u_sigma_u = 0.0;    // uᵀΣ_ε u for sub-Gaussian bounds
  double eps_sup = 0.0;
  double sigma_eps = 0.0;
  double init_dist = 0.0;    // ‖θ_0 − θ*‖
};

enum class AlphaMode { Explicit, Optimized };
enum class NoiseMode { Bounded, SubGaussian };
enum class Regime { Iid, SubGaussian, Markov };

double step_size_iid(long n, int d, double p, const StabilityConstants& s);
double step_size_markov(long n, int d, double p, long t_mix,
                        const StabilityConstants& s,
                        const MarkovStabilityConstants& m);

// Bound on (n/2) E‖Ā(θ̄_n − θ*)‖².
BoundReport mse_bound_iid(const BoundContext& ctx, const BoundInputs& in,
                          NoiseMode noise = NoiseMode::Bounded);

// Bounds on (n/2)^{1/2} E^{1/p}‖Ā(θ̄_n − θ*)‖^p.
BoundReport pr_moment_bound_iid(const BoundContext& ctx, const BoundInputs& in,
                                AlphaMode mode = AlphaMode::Explicit,
                                NoiseMode noise = NoiseMode::Bounded);
BoundReport pr_moment_bound_markov(const BoundContext& ctx,
                                   const BoundInputs& in,
                                   AlphaMode mode = AlphaMode::Explicit);

// Radius for √n ‖Ā(θ̄_n − θ*)‖ at confidence 1 − δ, from the moment bound at
// p = log(3e/δ) and Markov's inequality.
BoundReport hp_bound(Regime regime, const BoundContext& ctx,
                     const BoundInputs& in, double delta);
// The exact-constant i.i.d. corollary, 3e√2 √(TrΣ p) + c_2 Δ^(HP).
BoundReport hp_iid_exact(const BoundContext& ctx, const BoundInputs& in,
                         double delta);
// The Markov corollary with its undefined constant c_1^(M) as an input.
BoundReport hp_markov_corollary(const BoundContext& ctx, const BoundInputs& in,
                                double delta, double c1_markov = 1.0);

double hp_order(double delta);

// Bounds on E^{1/p} of ‖J0‖, ‖θ_n − θ*‖, ‖J1‖, ‖H1‖ (in that order).
std::vector<BoundReport> iterate_and_term_bounds(Regime regime,
                                                 const BoundContext& ctx,
                                                 const BoundInputs& in);

// Throws ErrorKind::Precondition when α exceeds the q-indexed threshold.
double stability_bound(Regime regime, long n, double p, double q,
                       double alpha, int d, const StabilityConstants& s,
                       const MarkovStabilityConstants* m = nullptr);

BoundReport bias_bound_markov(const BoundContext& ctx, const BoundInputs& in);

}  // namespace lsa
