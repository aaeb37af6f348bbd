#include "lsa/problem.hpp"

#include <algorithm>
#include <cmath>

#include "lsa/chains.hpp"
#include "lsa/rng.hpp"
#include "lsa/spectral.hpp"

namespace lsa {

namespace {

void check_weights(const Vector& w, int S, const char* name) {
  if (w.size() != S) {
    throw Error(ErrorKind::Dimension,
                std::string(name) + " must have one entry per state");
  }
  if (!w.allFinite() || w.minCoeff() < 0.0) {
    throw Error(ErrorKind::InvalidNoise,
                std::string(name) + " has negative or non-finite entries");
  }
  if (std::abs(w.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidNoise,
                std::string(name) + " does not sum to 1");
  }
}

const Vector& iid_weights(const NoiseProcess& noise) {
  if (const auto* s = std::get_if<SubGaussianNoise>(&noise)) return s->weights;
  return std::get<IidNoise>(noise).weights;
}

}  // namespace

std::string noise_name(const NoiseProcess& n) {
  switch (n.index()) {
    case 0: return "iid";
    case 1: return "markov";
    default: return "subgaussian";
  }
}

DerivedInstance validate_and_derive(const ObservationModel& model) {
  const int d = model.d;
  const int S = model.S;
  if (d < 1 || S < 1) throw Error(ErrorKind::Dimension, "d and S must be >= 1");
  if (static_cast<int>(model.A.size()) != S ||
      static_cast<int>(model.b.size()) != S) {
    throw Error(ErrorKind::Dimension, "A and b must have S entries");
  }
  for (int z = 0; z < S; ++z) {
    const auto& Az = model.A[static_cast<std::size_t>(z)];
    const auto& bz = model.b[static_cast<std::size_t>(z)];
    if (Az.rows() != d || Az.cols() != d || bz.size() != d) {
      throw Error(ErrorKind::Dimension,
                  "state " + std::to_string(z) + " has wrong table shape");
    }
    if (!Az.allFinite() || !bz.allFinite()) {
      throw Error(ErrorKind::Domain,
                  "state " + std::to_string(z) + " has non-finite entries");
    }
  }

  DerivedInstance out;
  if (const auto* m = std::get_if<MarkovNoise>(&model.noise)) {
    if (m->P.rows() != S) {
      throw Error(ErrorKind::Dimension, "P must be S x S");
    }
    check_stochastic(m->P);
    check_weights(m->xi, S, "xi");
    out.pi = stationary_distribution(m->P);
    if (m->t_mix < 1) {
      throw Error(ErrorKind::MixingCertificate, "t_mix must be >= 1");
    }
    // δ(P^k) <= (1/4)^{floor(k/t_mix)} for k up to 4 t_mix.
    Matrix Pk = Matrix::Identity(S, S);
    for (long k = 1; k <= 4 * m->t_mix; ++k) {
      Pk = (Pk * m->P).eval();
      double worst = 0.0;
      for (int i = 0; i < S; ++i) {
        for (int j = i + 1; j < S; ++j) {
          worst = std::max(worst, 0.5 * (Pk.row(i) - Pk.row(j)).cwiseAbs().sum());
        }
      }
      const double limit = std::pow(0.25, static_cast<double>(k / m->t_mix));
      if (worst > limit) {
        throw Error(ErrorKind::MixingCertificate,
                    "declared t_mix=" + std::to_string(m->t_mix) +
                        " fails the Dobrushin certificate at k=" +
                        std::to_string(k));
      }
    }
    out.t_mix = m->t_mix;
  } else {
    const Vector& w = iid_weights(model.noise);
    check_weights(w, S, "weights");
    out.pi = w;
  }

  out.Abar = Matrix::Zero(d, d);
  out.bbar = Vector::Zero(d);
  for (int z = 0; z < S; ++z) {
    out.Abar += out.pi(z) * model.A[static_cast<std::size_t>(z)];
    out.bbar += out.pi(z) * model.b[static_cast<std::size_t>(z)];
  }
  if (model.Abar) {
    if (model.Abar->rows() != d || model.Abar->cols() != d ||
        (*model.Abar - out.Abar).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorKind::StationarityMismatch,
                  "declared Abar differs from the stationary mean of A(z)");
    }
  }
  if (model.bbar) {
    if (model.bbar->size() != d ||
        (*model.bbar - out.bbar).cwiseAbs().maxCoeff() > 1e-10) {
      throw Error(ErrorKind::StationarityMismatch,
                  "declared bbar differs from the stationary mean of b(z)");
    }
  }

  if (!hurwitz_check(out.Abar)) {
    throw Error(ErrorKind::NotHurwitz, "Hurwitz check failed: -Abar is not Hurwitz");
  }
  out.theta_star = out.Abar.fullPivLu().solve(out.bbar);
  const double rel = (out.Abar * out.theta_star - out.bbar).norm() /
                     std::max(1.0, out.bbar.norm());
  if (!(rel <= 1e-10)) {
    throw Error(ErrorKind::Numerical, "Abar theta* = bbar not solved accurately", rel);
  }

  out.eps.resize(static_cast<std::size_t>(S));
  out.Sigma_eps = Matrix::Zero(d, d);
  Vector mean = Vector::Zero(d);
  for (int z = 0; z < S; ++z) {
    const auto& Az = model.A[static_cast<std::size_t>(z)];
    Vector e = (Az - out.Abar) * out.theta_star - (model.b[static_cast<std::size_t>(z)] - out.bbar);
    out.eps_sup = std::max(out.eps_sup, e.norm());
    out.Sigma_eps += out.pi(z) * e * e.transpose();
    mean += out.pi(z) * e;
    out.b_A = std::max({out.b_A, spectral_norm(Az), spectral_norm(Az - out.Abar)});
    out.eps[static_cast<std::size_t>(z)] = std::move(e);
  }
  if (mean.norm() > 1e-10 * std::max(1.0, out.eps_sup)) {
    throw Error(ErrorKind::StationarityMismatch, "noise does not average to zero");
  }

  if (const auto* s = std::get_if<SubGaussianNoise>(&model.noise)) {
    if (s->sigma.rows() != d || s->sigma.cols() != d) {
      throw Error(ErrorKind::Dimension, "additive covariance must be d x d");
    }
    if ((s->sigma - s->sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorKind::InvalidNoise, "additive covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(s->sigma);
    const double lmin = es.eigenvalues()(0);
    const double lmax = es.eigenvalues()(d - 1);
    if (lmin < -1e-12) {
      throw Error(ErrorKind::InvalidNoise, "additive covariance is not PSD");
    }
    if (s->sigma_eps * s->sigma_eps < lmax + out.eps_sup * out.eps_sup - 1e-12) {
      throw Error(ErrorKind::InvalidNoise,
                  "sigma_eps^2 is below lambda_max(sigma) + sup|eps|^2");
    }
    out.Sigma_eps += s->sigma;
  }
  out.Sigma_eps = 0.5 * (out.Sigma_eps + out.Sigma_eps.transpose()).eval();
  return out;
}

Instance make_instance(ObservationModel model) {
  Instance inst;
  inst.derived = validate_and_derive(model);
  inst.model = std::move(model);
  return inst;
}

ObservationModel scale_model(const ObservationModel& model, double m) {
  ObservationModel out = model;
  for (auto& A : out.A) A *= m;
  for (auto& b : out.b) b *= m;
  if (out.Abar) *out.Abar *= m;
  if (out.bbar) *out.bbar *= m;
  return out;
}

namespace {

Vector random_distribution(CounterRng& rng, int S) {
  Vector w(S);
  for (int i = 0; i < S; ++i) w(i) = 0.2 + rng.uniform();
  return w / w.sum();
}

Matrix random_stochastic(CounterRng& rng, int S) {
  Matrix P(S, S);
  for (int i = 0; i < S; ++i) P.row(i) = random_distribution(rng, S).transpose();
  return P;
}

Matrix gaussian(CounterRng& rng, long r, long c) {
  Matrix m(r, c);
  for (long j = 0; j < c; ++j) {
    for (long i = 0; i < r; ++i) m(i, j) = rng.normal();
  }
  return m;
}

ObservationModel random_hurwitz_once(int d, int S, CounterRng& rng,
                                     const GeneratorParams& p) {
  ObservationModel model;
  model.d = d;
  model.S = S;
  Vector pi;
  if (p.markov) {
    MarkovNoise m;
    m.P = random_stochastic(rng, S);
    m.xi = Vector::Constant(S, 1.0 / S);
    m.t_mix = minimal_mixing_time(m.P);
    pi = stationary_distribution(m.P);
    model.noise = m;
  } else {
    pi = random_distribution(rng, S);
    model.noise = IidNoise{pi};
  }
  Matrix G = gaussian(rng, d, d) / std::sqrt(static_cast<double>(d));
  Matrix Abar = G * G.transpose() + p.shift * Matrix::Identity(d, d);
  std::vector<Matrix> E(static_cast<std::size_t>(S));
  Matrix Emean = Matrix::Zero(d, d);
  for (int z = 0; z < S; ++z) {
    E[static_cast<std::size_t>(z)] = gaussian(rng, d, d) / std::sqrt(static_cast<double>(d));
    Emean += pi(z) * E[static_cast<std::size_t>(z)];
  }
  Vector bbar = gaussian(rng, d, 1);
  std::vector<Vector> b(static_cast<std::size_t>(S));
  Vector bmean = Vector::Zero(d);
  for (int z = 0; z < S; ++z) {
    b[static_cast<std::size_t>(z)] = gaussian(rng, d, 1);
    bmean += pi(z) * b[static_cast<std::size_t>(z)];
  }
  for (int z = 0; z < S; ++z) {
    model.A.push_back(Abar + p.spread * (E[static_cast<std::size_t>(z)] - Emean));
    model.b.push_back(b[static_cast<std::size_t>(z)] - bmean + bbar);
  }
  return model;
}

ObservationModel tdzero_once(int d, int S, CounterRng& rng,
                             const GeneratorParams& p) {
  if (S < d) {
    throw Error(ErrorKind::Generation, "tdzero needs at least d MDP states");
  }
  const Matrix P = random_stochastic(rng, S);
  const Vector mu = stationary_distribution(P);
  Matrix phi = gaussian(rng, S, d);
  Eigen::JacobiSVD<Matrix> svd(phi);
  if (svd.singularValues()(d - 1) < 1e-6) {
    throw Error(ErrorKind::Generation, "feature matrix is rank deficient");
  }
  const Vector reward = gaussian(rng, S, 1);

  ObservationModel model;
  model.d = d;
  model.S = S * S;
  Vector w(S * S);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < S; ++t) {
      const Vector fs = phi.row(s).transpose();
      const Vector ft = phi.row(t).transpose();
      model.A.push_back(fs * (fs - p.gamma * ft).transpose());
      model.b.push_back(fs * reward(s));
      w(s * S + t) = mu(s) * P(s, t);
    }
  }
  w /= w.sum();
  if (p.markov) {
    // Transition chain (s, t) -> (t, u) with probability P(t, u).
    MarkovNoise m;
    m.P = Matrix::Zero(S * S, S * S);
    for (int s = 0; s < S; ++s) {
      for (int t = 0; t < S; ++t) {
        for (int u = 0; u < S; ++u) m.P(s * S + t, t * S + u) = P(t, u);
      }
    }
    m.xi = w;
    m.t_mix = minimal_mixing_time(m.P);
    model.noise = m;
  } else {
    model.noise = IidNoise{w};
  }
  return model;
}

}  // namespace

ObservationModel generate_instance(GeneratorKind kind, int d, int S,
                                   std::uint64_t seed,
                                   const GeneratorParams& params) {
  if (d < 1 || S < 2) throw Error(ErrorKind::Domain, "need d >= 1 and S >= 2");
  if (kind == GeneratorKind::TdZero && S < d) {
    throw Error(ErrorKind::Generation, "tdzero needs at least d MDP states");
  }
  for (int attempt = 0; attempt < std::max(1, params.max_retries); ++attempt) {
    CounterRng rng(CounterRng::split(seed, static_cast<std::uint64_t>(attempt)));
    try {
      ObservationModel model = kind == GeneratorKind::RandomHurwitz
                                   ? random_hurwitz_once(d, S, rng, params)
                                   : tdzero_once(d, S, rng, params);
      validate_and_derive(model);
      return model;
    } catch (const Error&) {
      // Retry with the next attempt stream.
    }
  }
  throw Error(ErrorKind::Generation,
              "no valid instance after " + std::to_string(params.max_retries) +
                  " attempts");
}

}  // namespace lsa
