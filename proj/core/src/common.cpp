#include "lsa/common.hpp"

#include <cmath>
#include <numbers>

#include "lsa/rng.hpp"

namespace lsa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::NotHurwitz: return "hurwitz";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Ergodicity: return "ergodicity";
    case ErrorKind::StationarityMismatch: return "stationarity";
    case ErrorKind::MixingCertificate: return "mixing-certificate";
    case ErrorKind::InvalidNoise: return "noise";
    case ErrorKind::HorizonExceeded: return "horizon";
    case ErrorKind::Generation: return "generation";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double CounterRng::normal() {
  // 1 - u keeps the argument of log in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lsa
