#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lsa/bounds.hpp"
#include "lsa/chains.hpp"
#include "lsa/recursion.hpp"
#include "lsa/rng.hpp"
#include "oracles.hpp"

using lsa::Vector;

namespace {

constexpr double e = std::numbers::e;

lsa::BoundInputs t1_inputs(long n, double p, double alpha) {
  lsa::BoundInputs in;
  in.n = n;
  in.p = p;
  in.alpha = alpha;
  in.tr_sigma = 0.25;
  in.eps_sup = 0.5;
  in.init_dist = 1.0;
  return in;
}

// Coefficient table: each term is coef * Π var^power.
struct Mono {
  double coef;
  std::vector<std::pair<std::string, double>> pow;
};

double eval(const std::vector<Mono>& poly, const std::map<std::string, double>& v) {
  double s = 0.0;
  for (const auto& m : poly) {
    double t = m.coef;
    for (const auto& [name, k] : m.pow) t *= std::pow(v.at(name), k);
    s += t;
  }
  return s;
}

const std::vector<Mono> kMseFl = {
    {64 * e, {{"D2", 2}, {"alpha", -1}, {"n", -1}}},
    {16 * e, {{"alpha", 1}, {"bA", 2}, {"D2", 2}}}};
const std::vector<Mono> kMseTr = {
    {32 * e, {{"kappa", 1}, {"alpha", -2}, {"n", -1}}},
    {128 * e / 7, {{"kappa", 1}, {"bA", 2}, {"alpha", -1}, {"a", -1}, {"n", -1}}}};
const std::vector<Mono> kPrFl = {
    {4, {{"ep", 1}, {"D2", 1}, {"a", 0.5}, {"p", 0.5}, {"alpha", -0.5}, {"n", -0.5}}},
    {1, {{"ep", 1}, {"bA", 1}, {"D3", 1}, {"alpha", 1}, {"a", 1}, {"p", 2.5}}},
    {1, {{"ep", 1}, {"bA", 1}, {"D4", 1}, {"alpha", 1}, {"a", 1}, {"p", 2.5}}},
    {2 * 60, {{"p", 1}, {"n", -0.5}}},
    {1, {{"bA", 1}, {"D1", 1}, {"alpha", 0.5}, {"a", 0.5}, {"p", 1.5}}}};
const std::vector<Mono> kPrTr = {
    {4, {{"ep", 1}, {"kappa", 0.5}, {"alpha", -1}, {"n", -0.5}}},
    {1 / std::numbers::sqrt2, {{"ep", 1}, {"kappa", 0.5}, {"n", 0.5}, {"bA", 1}}}};
const std::vector<Mono> kMarkovFl = {
    {8, {{"DM2", 1}, {"ep", 1}, {"a", 0.5}, {"p", 0.5}, {"t", 0.5}, {"alpha", -0.5}, {"n", -0.5}}},
    {std::numbers::sqrt2, {{"CR1", 1}, {"t", 0.75}, {"p", 1}, {"lg", 1}, {"n", -0.25}}},
    {2, {{"CR2", 1}, {"t", 1}, {"p", 1}, {"lg", 1}, {"n", -0.5}}},
    {8, {{"ep", 1}, {"JH1", 1}, {"a", 1}, {"t", 1}, {"sl", 1}, {"p", 2}, {"n", -0.5}}},
    {8, {{"ep", 1}, {"JH1", 1}, {"alpha", 1}, {"a", 1}, {"t", 1}, {"sl", 1}, {"p", 2}, {"n", 0.5}, {"bA", 1}}},
    {8, {{"ep", 1}, {"JH2", 1}, {"alpha", 0.5}, {"a", 1.5}, {"t", 1.5}, {"p", 0.5}, {"n", -0.5}}},
    {8, {{"ep", 1}, {"JH2", 1}, {"alpha", 1.5}, {"a", 1.5}, {"t", 1.5}, {"p", 0.5}, {"n", 0.5}, {"bA", 1}}}};
const std::vector<Mono> kMarkovTr = {
    {4, {{"ep", 1}, {"E2", 1}, {"kappa", 0.5}, {"alpha", -1}, {"n", -0.5}}},
    {1 / std::numbers::sqrt2, {{"ep", 1}, {"E2", 1}, {"kappa", 0.5}, {"n", 0.5}, {"bA", 1}}}};

}  // namespace

TEST(Constants, T1Golden) {
  const auto ctx = lsa::make_context(oracle::t1());
  EXPECT_NEAR(ctx.c.D1, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ctx.c.D2, 5 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ctx.c.D3, 2.0, 1e-14);
  EXPECT_NEAR(ctx.c.D4, 8.0, 1e-14);
  EXPECT_EQ(ctx.c.C_Rm1, 60 * e);
  EXPECT_EQ(ctx.c.C_Rm2, 60.0);
  EXPECT_NEAR(ctx.c.C_Rm1, 163.0969, 1e-4);
}

TEST(Constants, MarkovGoldenAndPositive) {
  const auto ctx = lsa::make_context(oracle::t2());
  const auto& c = ctx.c;
  EXPECT_NEAR(c.DM1, std::pow(2.0, 3.5) * (std::exp(-0.25) + std::sqrt(2 * std::numbers::pi * e)), 1e-12);
  EXPECT_NEAR(c.DM1, 55.56, 0.01);
  for (double v : {c.DM1, c.DM2, c.DMJ1, c.DMJ2, c.DMH1, c.DMH2, c.DM4, c.DM5, c.DM6, c.DM7,
                   c.DM_S, c.C_Ros1, c.C_Ros2, c.c3, c.c4, c.c5, c.c2(1)}) {
    EXPECT_GT(v, 0.0);
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_THROW(lsa::pr_moment_bound_markov(lsa::make_context(oracle::t1()), t1_inputs(8, 2, 1e-4)),
               lsa::Error);
}

TEST(StepSize, Iid) {
  const auto s = lsa::make_context(oracle::t1()).s;
  EXPECT_NEAR(lsa::step_size_iid(100, 1, 2, s), 0.00625, 1e-15);
  EXPECT_DOUBLE_EQ(lsa::step_size_iid(100, 1, 4, s), 0.5 * lsa::step_size_iid(100, 1, 2, s));
  EXPECT_DOUBLE_EQ(lsa::step_size_iid(400, 1, 2, s), 0.5 * lsa::step_size_iid(100, 1, 2, s));
}

TEST(StepSize, Markov) {
  const auto ctx = lsa::make_context(oracle::t2());
  const double a = lsa::step_size_markov(1000, 1, 2, 4, ctx.s, *ctx.m);
  EXPECT_NEAR(a, ctx.m->c_A_M / (200 * std::cbrt(4.0)), 1e-18);
  EXPECT_NEAR(a, 6.03e-6, 0.01e-6);
  EXPECT_THROW(lsa::step_size_markov(2, 1, 2, 4, ctx.s, *ctx.m), lsa::Error);
  EXPECT_NO_THROW(lsa::step_size_markov(8, 1, 2, 1, ctx.s, *ctx.m));
}

TEST(MseBound, T1Example) {
  const auto ctx = lsa::make_context(oracle::t1());
  const auto r = lsa::mse_bound_iid(ctx, t1_inputs(10000, 2, 0.01));
  EXPECT_NEAR(r.leading, 1.0, 1e-15);
  EXPECT_NEAR(r.fluctuation, 40 * e * 0.5, 1e-9);
  EXPECT_NEAR(r.transient, std::exp(-25.0) * (32 * e + 128 * e / 700), 1e-18);
  EXPECT_TRUE(r.eligible());
  EXPECT_DOUBLE_EQ(r.total, r.leading + r.fluctuation + r.transient);

  auto zero = t1_inputs(10000, 2, 0.01);
  zero.tr_sigma = zero.eps_sup = zero.init_dist = 0.0;
  EXPECT_EQ(lsa::mse_bound_iid(ctx, zero).total, 0.0);

  const auto bad = lsa::mse_bound_iid(ctx, t1_inputs(100, 2, 0.2));
  EXPECT_FALSE(bad.eligible());
  EXPECT_TRUE(std::isfinite(bad.total));
}

TEST(MomentBound, IidStructure) {
  const auto ctx = lsa::make_context(oracle::t1());
  auto in = t1_inputs(100, 2, 0.0);
  const auto opt = lsa::pr_moment_bound_iid(ctx, in, lsa::AlphaMode::Optimized);
  EXPECT_NEAR(opt.leading, 60 * e * std::sqrt(0.5), 1e-12);
  EXPECT_GT(opt.fluctuation, 0.0);
  EXPECT_GT(opt.transient, 0.0);
  EXPECT_TRUE(opt.eligible());
  in.init_dist = 2.0;
  const auto twice = lsa::pr_moment_bound_iid(ctx, in, lsa::AlphaMode::Optimized);
  EXPECT_NEAR(twice.transient, 2.0 * opt.transient, 1e-14 * opt.transient);

  auto zero = t1_inputs(100, 2, 0.005);
  zero.tr_sigma = zero.eps_sup = zero.init_dist = 0.0;
  EXPECT_EQ(lsa::pr_moment_bound_iid(ctx, zero).total, 0.0);
}

TEST(MomentBound, MarkovLeadingOnly) {
  const auto inst = oracle::t2();
  const auto ctx = lsa::make_context(inst);
  const double sm = lsa::asymptotic_noise_covariance(inst.derived, inst.model.noise).trace();
  lsa::BoundInputs in;
  in.n = 4096;
  in.p = 2;
  in.tr_sigma = sm;
  const auto r = lsa::pr_moment_bound_markov(ctx, in, lsa::AlphaMode::Optimized);
  EXPECT_NEAR(r.total, 60 * e * std::sqrt(2 * 34.0 / 27.0), 1e-10);
  in.eps_sup = 2.0 / 3.0;
  in.init_dist = 1.0;
  const auto full = lsa::pr_moment_bound_markov(ctx, in, lsa::AlphaMode::Optimized);
  EXPECT_TRUE(std::isfinite(full.total));
  EXPECT_TRUE(full.eligible());
}

TEST(MomentBound, SecondTranscriptionAgrees) {
  lsa::CounterRng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    lsa::GeneratorParams gp;
    gp.markov = true;
    const int d = 1 + trial % 4;
    const auto inst = lsa::make_instance(
        lsa::generate_instance(lsa::GeneratorKind::RandomHurwitz, d, 3, trial, gp));
    const auto ctx = lsa::make_context(inst);
    const auto& s = ctx.s;
    const auto& c = ctx.c;
    lsa::BoundInputs in;
    in.n = 2 * (4 + static_cast<long>(rng.uniform() * 50000));
    in.p = 2.0 + 6.0 * rng.uniform();
    in.alpha = s.alpha_inf * (0.001 + 0.5 * rng.uniform());
    in.tr_sigma = rng.uniform();
    in.eps_sup = rng.uniform();
    in.init_dist = rng.uniform();
    const double n = static_cast<double>(in.n);
    const double aa = in.alpha * s.a;
    std::map<std::string, double> v = {
        {"alpha", in.alpha}, {"n", n}, {"p", in.p}, {"a", s.a}, {"kappa", s.kappa_Q},
        {"bA", s.b_A}, {"D1", c.D1}, {"D2", c.D2}, {"D3", c.D3}, {"D4", c.D4},
        {"ep", std::exp(1.0 / in.p)}, {"DM2", c.DM2}, {"CR1", c.C_Ros1}, {"CR2", c.C_Ros2},
        {"t", static_cast<double>(ctx.t_mix)}, {"lg", std::log2(2.0 * in.p)},
        {"sl", std::sqrt(std::log(1.0 / aa))}, {"JH1", c.DMJ1 + c.DMH1},
        {"JH2", c.DMJ2 + c.DMH2}, {"E2", e * e}};

    const auto mse = lsa::mse_bound_iid(ctx, in);
    EXPECT_NEAR(mse.fluctuation, eval(kMseFl, v) * in.eps_sup, 1e-12 * mse.fluctuation);
    const double mtr = std::exp(-aa * n / 4) * eval(kMseTr, v) * in.init_dist * in.init_dist;
    EXPECT_NEAR(mse.transient, mtr, 1e-12 * mtr + 1e-300);

    const auto pr = lsa::pr_moment_bound_iid(ctx, in);
    EXPECT_NEAR(pr.fluctuation, eval(kPrFl, v) * in.eps_sup, 1e-12 * pr.fluctuation);
    const double ptr = std::exp(-aa * n / 8) * eval(kPrTr, v) * in.init_dist;
    EXPECT_NEAR(pr.transient, ptr, 1e-12 * ptr + 1e-300);

    const auto mk = lsa::pr_moment_bound_markov(ctx, in);
    EXPECT_NEAR(mk.fluctuation, eval(kMarkovFl, v) * in.eps_sup, 1e-12 * mk.fluctuation);
    const double ktr = std::exp(-aa * n / 24) * eval(kMarkovTr, v) * in.init_dist;
    EXPECT_NEAR(mk.transient, ktr, 1e-12 * ktr + 1e-300);
  }
}

TEST(HighProbability, OrderAndScaling) {
  EXPECT_NEAR(lsa::hp_order(0.05), 1.0 + std::log(60.0), 1e-14);
  EXPECT_NEAR(lsa::hp_order(0.025) - lsa::hp_order(0.05), std::log(2.0), 1e-14);
  EXPECT_THROW(lsa::hp_order(3.0 / e), lsa::Error);
  EXPECT_THROW(lsa::hp_order(0.0), lsa::Error);
  EXPECT_THROW(lsa::hp_order(1.0), lsa::Error);

  const auto ctx = lsa::make_context(oracle::t1());
  const auto in = t1_inputs(10000, 2, 0.0);
  const auto r05 = lsa::hp_bound(lsa::Regime::Iid, ctx, in, 0.05);
  const auto r025 = lsa::hp_bound(lsa::Regime::Iid, ctx, in, 0.025);
  const double p = lsa::hp_order(0.05);
  EXPECT_NEAR(r025.leading / r05.leading, std::sqrt((p + std::log(2.0)) / p), 1e-12);
  auto at = in;
  at.p = p;
  const auto mom = lsa::pr_moment_bound_iid(ctx, at, lsa::AlphaMode::Optimized);
  EXPECT_NEAR(r05.total, std::sqrt(2.0) * e * mom.total, 1e-9 * r05.total);

  const auto exact = lsa::hp_iid_exact(ctx, in, 0.05);
  EXPECT_NEAR(exact.leading, 3 * e * std::sqrt(2.0) * std::sqrt(0.25 * p), 1e-12);
  EXPECT_TRUE(std::isfinite(exact.total));

  const auto mctx = lsa::make_context(oracle::t2());
  const auto cor = lsa::hp_markov_corollary(mctx, in, 0.05);
  EXPECT_NE(std::find(cor.flags.begin(), cor.flags.end(), "c1_markov_unspecified"), cor.flags.end());
}

TEST(TermBounds, T1Examples) {
  const auto ctx = lsa::make_context(oracle::t1());
  auto in = t1_inputs(1000000, 2, 0.01);
  in.q = 2;
  const auto r = lsa::iterate_and_term_bounds(lsa::Regime::Iid, ctx, in);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR(r[0].total, 0.1, 1e-14);
  EXPECT_NEAR(r[1].fluctuation, 0.5, 1e-14);
  EXPECT_LT(r[1].transient, 1e-100);
  EXPECT_NEAR(r[2].total, 2.0 * 0.01 * std::pow(2.0, 1.5) * 0.5, 1e-14);
  EXPECT_NEAR(r[3].total, 8.0 * 0.01 * std::pow(2.0, 1.5) * 0.5, 1e-14);

  in.eps_sup = 0.0;
  in.init_dist = 0.0;
  for (auto regime : {lsa::Regime::Iid, lsa::Regime::SubGaussian}) {
    for (const auto& b : lsa::iterate_and_term_bounds(regime, ctx, in)) EXPECT_EQ(b.total, 0.0);
  }
  const auto mctx = lsa::make_context(oracle::t2());
  in.alpha = 1e-5;
  in.q = 0.0;
  for (const auto& b : lsa::iterate_and_term_bounds(lsa::Regime::Markov, mctx, in)) {
    EXPECT_EQ(b.total, 0.0);
    EXPECT_TRUE(b.eligible());
  }
}

TEST(StabilityBound, Examples) {
  const auto ctx = lsa::make_context(oracle::t2());
  EXPECT_NEAR(lsa::stability_bound(lsa::Regime::Iid, 100, 2, 2, 0.0625, 1, ctx.s),
              std::pow(0.96875, 50), 1e-15);
  EXPECT_NEAR(std::pow(0.96875, 50), 0.20444, 1e-5);
  EXPECT_EQ(lsa::stability_bound(lsa::Regime::Iid, 0, 2, 2, 0.0625, 1, ctx.s), 1.0);
  const double thr = ctx.m->alpha_q_inf_M(2) / 4;
  EXPECT_NEAR(lsa::stability_bound(lsa::Regime::Markov, 0, 2, 2, thr, 1, ctx.s, &*ctx.m), e * e, 1e-14);
  try {
    lsa::stability_bound(lsa::Regime::Iid, 10, 2, 2, 0.07, 1, ctx.s);
    FAIL();
  } catch (const lsa::Error& err) {
    EXPECT_EQ(err.kind(), lsa::ErrorKind::Precondition);
  }
  EXPECT_THROW(lsa::stability_bound(lsa::Regime::Markov, 10, 2, 2, 2 * thr, 1, ctx.s, &*ctx.m),
               lsa::Error);
}

TEST(BiasBound, ZeroAndDominatesExact) {
  const auto inst = oracle::t2();
  const auto ctx = lsa::make_context(inst);
  lsa::BoundInputs in;
  in.n = 1 << 16;
  in.alpha = 1e-4;
  EXPECT_EQ(lsa::bias_bound_markov(ctx, in).total, 0.0);
  in.eps_sup = inst.derived.eps_sup;
  const auto r = lsa::bias_bound_markov(ctx, in);
  EXPECT_TRUE(r.eligible());
  const double exact = lsa::exact_mean_dynamics(inst, 1e-4, in.n, inst.derived.theta_star).bias;
  EXPECT_GE(r.total, exact);
}

TEST(Reports, TransientDecreasesInN) {
  const auto ctx = lsa::make_context(oracle::t1());
  double prev = INFINITY;
  for (long n = 64; n <= 65536; n *= 4) {
    const auto r = lsa::pr_moment_bound_iid(ctx, t1_inputs(n, 2, 0.01));
    EXPECT_LT(r.transient, prev);
    prev = r.transient;
  }
}
