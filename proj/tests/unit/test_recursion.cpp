#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lsa/recursion.hpp"
#include "lsa/spectral.hpp"
#include "oracles.hpp"

using lsa::Matrix;
using lsa::Vector;

namespace {

lsa::Instance noiseless_scalar() {
  lsa::ObservationModel m;
  m.d = 1;
  m.S = 2;
  m.A = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
  m.b = {Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)};
  m.noise = lsa::IidNoise{Vector::Constant(2, 0.5)};
  return lsa::make_instance(m);
}

}  // namespace

TEST(RunLsa, NoiselessClosedForm) {
  const auto inst = noiseless_scalar();
  const auto path = lsa::sample_path(inst.model.noise, 4, 0);
  const auto r = lsa::run_lsa(inst, 0.5, 4, Vector::Zero(1), path, true);
  EXPECT_DOUBLE_EQ(r.theta[1](0), 0.5);
  EXPECT_DOUBLE_EQ(r.theta[2](0), 0.75);
  EXPECT_DOUBLE_EQ(r.theta[3](0), 0.875);
  EXPECT_DOUBLE_EQ(r.theta_bar(0), 0.8125);
}

TEST(RunLsa, DomainErrors) {
  const auto inst = oracle::t1();
  const auto path = lsa::sample_path(inst.model.noise, 10, 0);
  EXPECT_THROW(lsa::run_lsa(inst, 0.0, 4, Vector::Zero(1), path), lsa::Error);
  EXPECT_THROW(lsa::run_lsa(inst, 0.1, 5, Vector::Zero(1), path), lsa::Error);
  EXPECT_THROW(lsa::run_lsa(inst, 0.1, 20, Vector::Zero(1), path), lsa::Error);
}

TEST(RunLsa, MatchesNaiveLoop) {
  const auto inst = oracle::t1();
  const auto path = lsa::sample_path(inst.model.noise, 100, 42);
  const auto r = lsa::run_lsa(inst, 0.05, 100, Vector::Zero(1), path);
  const auto o = oracle::naive_lsa(inst, 0.05, 100, Vector::Zero(1), path);
  EXPECT_NEAR(r.theta_n(0), o.theta_n[0], 1e-12);
  EXPECT_NEAR(r.theta_bar(0), o.theta_bar[0], 1e-12);
}

TEST(RunLsa, ScalingInvariance) {
  const auto m = lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, 3, 4, 2);
  const auto inst = lsa::make_instance(m);
  const auto path = lsa::sample_path(inst.model.noise, 200, 1);
  const double M = 7.0;
  const auto sc = lsa::make_instance(lsa::scale_model(m, M));
  const auto r1 = lsa::run_lsa(inst, 0.02, 200, Vector::Ones(3), path, true);
  const auto r2 = lsa::run_lsa(sc, 0.02 / M, 200, Vector::Ones(3), path, true);
  for (int k = 0; k <= 200; ++k) EXPECT_LE((r1.theta[k] - r2.theta[k]).norm(), 1e-12);
}

TEST(Decomposition, NoiselessAndLinearity) {
  const auto inst = noiseless_scalar();
  const auto path = lsa::sample_path(inst.model.noise, 100, 0);
  const auto tr = lsa::run_decomposition(inst, 0.1, 100, Vector::Zero(1), path);
  EXPECT_EQ(tr.J0.norm() + tr.J1.norm() + tr.H0.norm() + tr.H1.norm(), 0.0);
  EXPECT_NEAR((tr.theta_n - inst.derived.theta_star - tr.tr_term).norm(), 0.0, 1e-15);

  auto m = lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, 2, 3, 4);
  const auto a = lsa::make_instance(m);
  // Doubling every ε(z) while keeping θ* and A fixed: b(z) = A(z)θ* − 2ε(z).
  auto m2 = m;
  for (int z = 0; z < m.S; ++z) {
    m2.b[z] = m.A[z] * a.derived.theta_star - 2.0 * a.derived.eps[z];
  }
  const auto b = lsa::make_instance(m2);
  const auto p = lsa::sample_path(a.model.noise, 300, 5);
  const auto ta = lsa::run_decomposition(a, 0.05, 300, Vector::Zero(2), p);
  const auto tb = lsa::run_decomposition(b, 0.05, 300, Vector::Zero(2), p);
  EXPECT_LE((tb.J0 - 2.0 * ta.J0).norm(), 1e-12 * (1.0 + ta.J0.norm()));
}

TEST(Decomposition, IdentitiesOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    lsa::GeneratorParams gp;
    gp.markov = seed % 2 == 0;
    const auto inst = lsa::make_instance(lsa::generate_instance(
        lsa::GeneratorKind::RandomHurwitz, 1 + seed % 5, 2 + seed % 9, seed, gp));
    const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
    const double alpha = s.alpha_q_inf(2.0);
    const auto path = lsa::sample_path(inst.model.noise, 1000, seed);
    const Vector th0 = Vector::Ones(inst.d());
    const auto tr = lsa::run_decomposition(inst, alpha, 1000, th0, path);
    const double scale = 1.0 + (tr.theta_n - inst.derived.theta_star).norm();
    EXPECT_LE(tr.residual_lsa, 1e-9 * scale);
    EXPECT_LE(tr.residual_h0, 1e-9 * scale);
    EXPECT_LE(lsa::check_pr_identity(inst, alpha, 1000, th0, path), 1e-9);
  }
}

TEST(PrIdentity, NoiselessAndT2) {
  const auto inst = noiseless_scalar();
  const auto path = lsa::sample_path(inst.model.noise, 100, 0);
  EXPECT_LE(lsa::check_pr_identity(inst, 0.1, 100, Vector::Zero(1), path), 1e-12);
  const auto t2 = oracle::t2();
  const auto p2 = lsa::sample_path(t2.model.noise, 2000, 1);
  EXPECT_LE(lsa::check_pr_identity(t2, 0.01, 2000, Vector::Zero(1), p2), 1e-9);
}

TEST(ProductNorm, Examples) {
  const auto inst = noiseless_scalar();
  const auto path = lsa::sample_path(inst.model.noise, 20, 0);
  EXPECT_EQ(lsa::product_norm(inst, 0.1, path, 5, 4), 1.0);
  EXPECT_NEAR(lsa::product_norm(inst, 0.1, path, 1, 10), std::pow(0.9, 10), 1e-15);

  const auto g = lsa::make_instance(lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, 3, 4, 8));
  const auto pg = lsa::sample_path(g.model.noise, 100, 3);
  const double ref = lsa::spectral_norm(oracle::naive_product(g, 0.0625, pg, 1, 100));
  EXPECT_NEAR(lsa::product_norm(g, 0.0625, pg, 1, 100), ref, 1e-12 * (1.0 + ref));
  EXPECT_THROW(lsa::product_norm(g, 0.0625, pg, 1, 101), lsa::Error);

  const std::vector<long> grid{0, 10, 50, 100};
  const auto norms = lsa::product_norms(g, 0.0625, pg, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(norms[i], lsa::product_norm(g, 0.0625, pg, 1, grid[i]), 1e-12);
  }
}

TEST(MeanDynamics, IidCases) {
  const auto inst = oracle::t1();
  const auto at_star = lsa::exact_mean_dynamics(inst, 0.1, 50, inst.derived.theta_star);
  EXPECT_EQ(at_star.bias, 0.0);

  const auto g = lsa::make_instance(lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, 3, 4, 6));
  const Vector th0 = Vector::Ones(3);
  const double alpha = 0.05;
  const auto md = lsa::exact_mean_dynamics(g, alpha, 40, th0);
  Matrix M = Matrix::Identity(3, 3);
  const Matrix step = Matrix::Identity(3, 3) - alpha * g.derived.Abar;
  for (int k = 0; k <= 40; ++k) {
    EXPECT_LE((md.mean_theta[k] - g.derived.theta_star - M * (th0 - g.derived.theta_star)).norm(), 1e-12);
    M = step * M;
  }
}

TEST(MeanDynamics, T2MatchesEnumeration) {
  const auto inst = oracle::t2();
  const auto md = lsa::exact_mean_dynamics(inst, 0.05, 8, inst.derived.theta_star);
  const double ref = oracle::enumerate_bias(inst, 0.05, 8, inst.derived.theta_star,
                                            Vector::Unit(2, 0), oracle::t2_chain());
  EXPECT_NEAR(md.bias, ref, 1e-12);
  EXPECT_GT(lsa::exact_mean_dynamics(inst, 0.05, 512, inst.derived.theta_star).bias, 0.0);
}

TEST(MeanDynamics, CouplingBelowD7) {
  lsa::GeneratorParams gp;
  gp.markov = true;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto inst = lsa::make_instance(
        lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, 2, 4, seed, gp));
    const auto s = lsa::iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
    const double d7 = 4.0 / 3.0 * std::sqrt(s.kappa_Q) * inst.derived.b_A / s.a;
    const double t = static_cast<double>(inst.derived.t_mix);
    for (double f : {0.01, 0.1, 1.0}) {
      const double alpha = f * s.alpha_inf;
      const auto c = lsa::mean_noise_coupling(inst, alpha, 400);
      double worst = 0.0;
      for (double v : c) worst = std::max(worst, v);
      EXPECT_GT(worst, 0.0);
      EXPECT_LE(worst, d7 * alpha * s.a * t * inst.derived.eps_sup);
    }
  }
}
