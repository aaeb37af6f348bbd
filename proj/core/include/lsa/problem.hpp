#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lsa/common.hpp"

namespace lsa {

struct IidNoise {
  Vector weights;
};

struct MarkovNoise {
  Matrix P;
  Vector xi;
  long t_mix = 1;
};

// i.i.d. states plus an additive N(0, sigma) perturbation on b.
struct SubGaussianNoise {
  Vector weights;
  Matrix sigma;
  double sigma_eps = 0.0;
};

using NoiseProcess = std::variant<IidNoise, MarkovNoise, SubGaussianNoise>;

inline bool is_markov(const NoiseProcess& n) {
  return std::holds_alternative<MarkovNoise>(n);
}
std::string noise_name(const NoiseProcess& n);

struct ObservationModel {
  int d = 0;
  int S = 0;
  std::vector<Matrix> A;
  std::vector<Vector> b;
  NoiseProcess noise;
  // Optional declared means, checked against the stationary averages.
  std::optional<Matrix> Abar;
  std::optional<Vector> bbar;
};

struct DerivedInstance {
  Matrix Abar;
  Vector bbar;
  Vector theta_star;
  Vector pi;
  std::vector<Vector> eps;  // ε(z) = Ã(z)θ* − b̃(z)
  double eps_sup = 0.0;     // max_z ‖ε(z)‖
  Matrix Sigma_eps;
  double b_A = 0.0;
  // Declared t_mix for Markov noise, 1 otherwise.
  long t_mix = 1;
};

struct Instance {
  ObservationModel model;
  DerivedInstance derived;

  int d() const { return model.d; }
  int S() const { return model.S; }
};

// Throws lsa::Error with a kind naming the failed assumption.
DerivedInstance validate_and_derive(const ObservationModel& model);

Instance make_instance(ObservationModel model);

// Multiplies every A(z), b(z) (and declared means) by m.
ObservationModel scale_model(const ObservationModel& model, double m);

enum class GeneratorKind { RandomHurwitz, TdZero };

struct GeneratorParams {
  double shift = 0.1;
  double spread = 0.5;
  double gamma = 0.9;
  int max_retries = 20;
  bool markov = false;
};

// For TdZero, S is the number of MDP states; observations are transitions
// (s, s'), so the returned model has S*S observation states.
ObservationModel generate_instance(GeneratorKind kind, int d, int S,
                                   std::uint64_t seed,
                                   const GeneratorParams& params = {});

}  // namespace lsa
