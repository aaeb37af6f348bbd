#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorKind {
  Dimension,
  Domain,
  NotHurwitz,
  Numerical,
  Ergodicity,
  StationarityMismatch,
  MixingCertificate,
  InvalidNoise,
  HorizonExceeded,
  Generation,
  Precondition,
  Configuration,
  Budget,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  ErrorKind kind() const { return kind_; }
  // Residual attached to numerical failures, NaN otherwise.
  double residual() const { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest singular value.
double spectral_norm(const Matrix& m);

}  // namespace lsa
