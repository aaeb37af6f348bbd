#include "lsa/chains.hpp"

#include <algorithm>
#include <cmath>

#include "lsa/rng.hpp"

namespace lsa {

namespace {

double row_pair_tv(const Matrix& M) {
  double worst = 0.0;
  for (long i = 0; i < M.rows(); ++i) {
    for (long j = i + 1; j < M.rows(); ++j) {
      worst = std::max(worst, 0.5 * (M.row(i) - M.row(j)).cwiseAbs().sum());
    }
  }
  return std::min(worst, 1.0);
}

int draw_index(const Vector& cdf, double u) {
  auto begin = cdf.data();
  auto end = cdf.data() + cdf.size();
  auto it = std::upper_bound(begin, end, u);
  long idx = it - begin;
  return static_cast<int>(std::min<long>(idx, cdf.size() - 1));
}

Vector cumulative(const Vector& w) {
  Vector c(w.size());
  double acc = 0.0;
  for (long i = 0; i < w.size(); ++i) {
    acc += w(i);
    c(i) = acc;
  }
  c /= acc;
  return c;
}

}  // namespace

void check_stochastic(const Matrix& P) {
  if (P.rows() != P.cols() || P.rows() == 0) {
    throw Error(ErrorKind::Dimension, "transition matrix must be square");
  }
  if (!P.allFinite() || P.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidNoise,
                "transition matrix has negative or non-finite entries");
  }
  for (long i = 0; i < P.rows(); ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12) {
      throw Error(ErrorKind::InvalidNoise,
                  "transition matrix row " + std::to_string(i) +
                      " does not sum to 1");
    }
  }
}

Vector stationary_distribution(const Matrix& P) {
  check_stochastic(P);
  const long S = P.rows();
  const Matrix L = Matrix::Identity(S, S) - P;
  Eigen::JacobiSVD<Matrix> svd(L);
  const Vector& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv(0));
  if (S > 1 && sv(S - 2) <= tol) {
    throw Error(ErrorKind::Ergodicity,
                "chain has more than one stationary distribution");
  }
  // Replace one balance equation by the normalization constraint.
  Matrix M = L.transpose();
  M.row(S - 1).setOnes();
  Vector rhs = Vector::Zero(S);
  rhs(S - 1) = 1.0;
  Vector pi = M.fullPivLu().solve(rhs);
  if (pi.minCoeff() < -1e-10) {
    throw Error(ErrorKind::Ergodicity, "stationary vector has negative mass");
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

double dobrushin_coefficient(const Matrix& P, long k) {
  if (k <= 0) throw Error(ErrorKind::Domain, "k must be positive");
  check_stochastic(P);
  Matrix Pk = P;
  for (long i = 1; i < k; ++i) Pk = (Pk * P).eval();
  return row_pair_tv(Pk);
}

long minimal_mixing_time(const Matrix& P, long horizon) {
  check_stochastic(P);
  Matrix Pk = P;
  for (long k = 1; k <= horizon; ++k) {
    if (k > 1) Pk = (Pk * P).eval();
    if (row_pair_tv(Pk) <= 0.25) return k;
  }
  throw Error(ErrorKind::HorizonExceeded,
              "no k <= " + std::to_string(horizon) +
                  " with Dobrushin coefficient <= 1/4");
}

Matrix fundamental_matrix(const Matrix& P, const Vector& pi) {
  const long S = P.rows();
  Matrix M = Matrix::Identity(S, S) - P + Vector::Ones(S) * pi.transpose();
  Eigen::FullPivLU<Matrix> lu(M);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::Ergodicity, "I - P + 1 pi^T is singular");
  }
  return lu.inverse();
}

double ChainAnalysis::dobrushin(long k) const {
  return dobrushin_coefficient(P, k);
}

ChainAnalysis analyze_chain(const Matrix& P, long horizon) {
  ChainAnalysis c;
  c.P = P;
  c.pi = stationary_distribution(P);
  c.t_mix_min = minimal_mixing_time(P, horizon);
  c.fundamental = fundamental_matrix(P, c.pi);
  return c;
}

PathSample sample_path(const NoiseProcess& noise, long n,
                       std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::Domain, "path length must be >= 1");
  PathSample path;
  path.seed = seed;
  path.states.resize(static_cast<std::size_t>(n));
  CounterRng rng(seed);

  if (const auto* m = std::get_if<MarkovNoise>(&noise)) {
    path.initial = m->xi;
    std::vector<Vector> rows;
    rows.reserve(static_cast<std::size_t>(m->P.rows()));
    for (long i = 0; i < m->P.rows(); ++i) {
      rows.push_back(cumulative(m->P.row(i).transpose()));
    }
    int z = draw_index(cumulative(m->xi), rng.uniform());
    path.states[0] = z;
    for (long k = 1; k < n; ++k) {
      z = draw_index(rows[static_cast<std::size_t>(z)], rng.uniform());
      path.states[static_cast<std::size_t>(k)] = z;
    }
    return path;
  }

  const Vector& w = std::holds_alternative<IidNoise>(noise)
                        ? std::get<IidNoise>(noise).weights
                        : std::get<SubGaussianNoise>(noise).weights;
  path.initial = w;
  const Vector cdf = cumulative(w);
  const auto* sg = std::get_if<SubGaussianNoise>(&noise);
  Matrix chol;
  bool additive = sg != nullptr && sg->sigma.size() > 0 &&
                  sg->sigma.cwiseAbs().maxCoeff() > 0.0;
  if (additive) {
    // Symmetric square root handles singular PSD covariances.
    Eigen::SelfAdjointEigenSolver<Matrix> es(sg->sigma);
    chol = es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
    path.additive.resize(sg->sigma.rows(), n);
  }
  Vector g(additive ? sg->sigma.rows() : 0);
  for (long k = 0; k < n; ++k) {
    path.states[static_cast<std::size_t>(k)] = draw_index(cdf, rng.uniform());
    if (additive) {
      for (long i = 0; i < g.size(); ++i) g(i) = rng.normal();
      path.additive.col(k) = chol * g;
    }
  }
  return path;
}

Matrix asymptotic_noise_covariance(const DerivedInstance& inst,
                                   const NoiseProcess& noise, bool literal) {
  const auto* m = std::get_if<MarkovNoise>(&noise);
  if (m == nullptr) return inst.Sigma_eps;

  const long S = m->P.rows();
  const long d = inst.Abar.rows();
  Matrix E(S, d);
  for (long z = 0; z < S; ++z) E.row(z) = inst.eps[static_cast<std::size_t>(z)].transpose();

  const Vector pi = stationary_distribution(m->P);
  const Matrix Z = fundamental_matrix(m->P, pi);
  const Matrix W = E.transpose() * pi.asDiagonal();
  const Matrix sigma0 = W * E;
  const Matrix cross = W * (Z - Matrix::Identity(S, S)) * E;
  Matrix out = sigma0 + cross + cross.transpose();
  if (literal) out += 2.0 * sigma0;
  return 0.5 * (out + out.transpose());
}

}  // namespace lsa
