#include "lsa/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lsa {

namespace {

constexpr double e = std::numbers::e;

double log1d(int d) { return 1.0 + std::log(static_cast<double>(d)); }

void echo(BoundReport& r, const BoundContext& ctx, const BoundInputs& in,
          double alpha) {
  r.inputs = {{"n", static_cast<double>(in.n)},
              {"p", in.p},
              {"q", in.q},
              {"alpha", alpha},
              {"d", static_cast<double>(ctx.d)},
              {"t_mix", static_cast<double>(ctx.t_mix)},
              {"tr_sigma", in.tr_sigma},
              {"eps_sup", in.eps_sup},
              {"sigma_eps", in.sigma_eps},
              {"init_dist", in.init_dist}};
}

void check(BoundReport& r, const std::string& name, double value,
           double threshold, bool strict) {
  const bool ok = strict ? value < threshold : value <= threshold;
  r.eligibility.push_back({name, value, threshold, ok});
}

void check_n_even(BoundReport& r, long n, long minimum) {
  const bool ok = n >= minimum && n % 2 == 0;
  r.eligibility.push_back({"n_even_min", static_cast<double>(n),
                           static_cast<double>(minimum), ok});
}

void check_alpha_positive(BoundReport& r, double alpha) {
  r.eligibility.push_back({"alpha_positive", alpha, 0.0, alpha > 0.0});
}

const MarkovStabilityConstants& need_markov(const BoundContext& ctx) {
  if (!ctx.m || !ctx.c.has_markov) {
    throw Error(ErrorKind::Configuration,
                "Markov bound requested without Markov constants (t_mix)");
  }
  return *ctx.m;
}

void check_p(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::Domain, "p must be finite and >= 2");
  }
}

}  // namespace

double ConstantSet::c2(int d) const {
  const double l = log1d(d);
  return 3.0 * e * std::sqrt(2.0) *
         std::max((c3 + c4) * std::sqrt(l), c5 * l);
}

ConstantSet constants(const StabilityConstants& s,
                      const MarkovStabilityConstants* mk) {
  ConstantSet c;
  const double a = s.a;
  const double k = s.kappa_Q;
  const double sk = std::sqrt(k);
  const double bA = s.b_A;

  c.D1 = std::sqrt(2.0 * k) / a;
  c.D2 = std::sqrt(2.0 * k) / a * (1.0 + 4.0 * sk * bA / a);
  c.D3 = 2.0 * k * bA / (a * a);
  c.D4 = 4.0 * sk * bA * c.D3 / a;
  c.c1 = 4.0 * c.D1 * bA * sk / a;

  c.D1_sg = c.D1;
  c.D_sg = c.D2;
  c.D3_sg = 4.0 * k * bA / (a * a);
  c.D4_sg = 4.0 * sk * bA * c.D3_sg / (a * a);

  c.m = s.c_A_infinite ? s.alpha_inf : std::min(s.alpha_inf, s.c_A);
  c.c3 = 4.0 * std::sqrt(a) * c.D2 / std::sqrt(c.m) + 2.0 * c.C_Rm2 +
         std::sqrt(c.m) * std::sqrt(a) * bA * c.D1;
  c.c4 = bA * (c.D3 + c.D4) * a * c.m;
  c.c5 = sk * (4.0 / c.m + bA);

  if (mk != nullptr) {
    c.has_markov = true;
    const double ln2 = std::log(2.0);
    const double pi = std::numbers::pi;
    c.DM1 = std::pow(2.0, 3.5) * sk / a *
            (std::exp(-0.25) + std::sqrt(2.0 * pi * e) * bA / a);
    c.DM2 = c.DM1 * (1.0 + 24.0 * std::sqrt(2.0) * e * e * sk * bA / a);
    c.DMJ1 = 64.0 * k * bA / (a * a) *
             ((std::sqrt(2.0) + sk) / std::sqrt(2.0 * ln2) +
              2.0 * std::sqrt(pi) * sk + sk / std::sqrt(ln2));
    c.DMJ2 = (128.0 / 3.0) * k * sk * bA / (a * a);
    c.DMH1 = 96.0 / a * bA * e * e * sk * c.DMJ1;
    c.DMH2 = 48.0 / a * bA * e * e * sk * c.DMJ2;
    c.DM4 = 48.0 * sk * e * e * e;
    c.DM7 = (4.0 / 3.0) * sk * bA / a;
    c.DM5 = 4.0 * e * (c.DMJ1 + c.DMH1) + c.DM7 / std::sqrt(ln2);
    c.DM6 = std::sqrt(2.0) * e * (c.DMJ2 + c.DMH2);
    c.DM_S = 16.0 * k * bA;
    c.C_sigma = 2.0 * (sk * bA + a / 6.0);
    c.C_Ros1 = 16.0 * std::sqrt(19.0) / (3.0 * std::sqrt(3.0)) *
               std::pow(c.C_Rm1, 2.5);
    c.C_Ros2 = 64.0 * (c.C_Rm1 * c.C_Rm1 * std::sqrt(c.C_Rm2) + c.C_Rm2);
  }
  return c;
}

bool BoundReport::eligible() const {
  return std::all_of(eligibility.begin(), eligibility.end(),
                     [](const EligibilityCheck& c) { return c.passed; });
}

void BoundReport::finalize() {
  total = leading + fluctuation + transient + bias;
  if (!eligible()) flags.emplace_back("ineligible");
  if (!std::isfinite(total)) flags.emplace_back("non_finite");
}

BoundContext make_context(const Matrix& Abar, double b_A, int d,
                          std::optional<long> t_mix) {
  BoundContext ctx;
  ctx.d = d;
  ctx.s = iid_stability_constants(Abar, b_A);
  if (t_mix) {
    ctx.t_mix = *t_mix;
    ctx.m = markov_stability_constants(ctx.s, *t_mix);
  }
  ctx.c = constants(ctx.s, ctx.m ? &*ctx.m : nullptr);
  return ctx;
}

BoundContext make_context(const Instance& inst) {
  std::optional<long> t_mix;
  if (is_markov(inst.model.noise)) t_mix = inst.derived.t_mix;
  return make_context(inst.derived.Abar, inst.derived.b_A, inst.d(), t_mix);
}

double step_size_iid(long n, int d, double p, const StabilityConstants& s) {
  if (n < 2 || n % 2 != 0) throw Error(ErrorKind::Domain, "n must be even and >= 2");
  check_p(p);
  const double cap = s.c_A_infinite ? s.alpha_inf
                                    : std::min(s.alpha_inf, s.c_A / log1d(d));
  return cap / (p * std::sqrt(static_cast<double>(n)));
}

double step_size_markov(long n, int d, double p, long t_mix,
                        const StabilityConstants& s,
                        const MarkovStabilityConstants& m) {
  (void)s;
  if (n % 2 != 0 || n < std::max(4L, t_mix)) {
    throw Error(ErrorKind::Domain, "n must be even and >= max(4, t_mix)");
  }
  check_p(p);
  const double cap = std::min(m.alpha_inf_M, m.c_A_M / log1d(d));
  return cap / (p * std::pow(static_cast<double>(n), 2.0 / 3.0) *
                std::cbrt(static_cast<double>(t_mix)));
}

BoundReport mse_bound_iid(const BoundContext& ctx, const BoundInputs& in,
                          NoiseMode noise) {
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  const double al = in.alpha;
  const double n = static_cast<double>(in.n);
  BoundReport r;
  r.bound_id = noise == NoiseMode::Bounded ? "mse_iid" : "mse_subgaussian";
  echo(r, ctx, in, al);
  check_alpha_positive(r, al);
  const double thr = s.c_A_infinite
                         ? s.alpha_inf
                         : std::min(s.alpha_inf, s.c_A / (2.0 + 2.0 * std::log(static_cast<double>(ctx.d))));
  check(r, "alpha_lt_min(alpha_inf,c_A/(2+2log d))", al, thr, true);
  check_n_even(r, in.n, 2);

  const double D2sq = c.D2 * c.D2;
  const double d_fl = 64.0 * e * D2sq / (al * n) + 16.0 * e * al * s.b_A * s.b_A * D2sq;
  const double d_tr = 32.0 * e * s.kappa_Q / (al * al * n) +
                      128.0 * e * s.kappa_Q * s.b_A * s.b_A / (7.0 * al * s.a * n);
  const double scale = noise == NoiseMode::Bounded ? in.eps_sup : in.sigma_eps;
  r.leading = 4.0 * (noise == NoiseMode::Bounded ? in.tr_sigma : in.u_sigma_u);
  r.fluctuation = d_fl * scale;
  r.transient = std::exp(-al * s.a * n / 4.0) * d_tr * in.init_dist * in.init_dist;
  r.flags.emplace_back("fluctuation_linear_in_noise_scale");
  r.finalize();
  return r;
}

BoundReport pr_moment_bound_iid(const BoundContext& ctx, const BoundInputs& in,
                                AlphaMode mode, NoiseMode noise) {
  check_p(in.p);
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  const double p = in.p;
  const double n = static_cast<double>(in.n);
  const double rn = std::sqrt(n);
  const double ep = std::exp(1.0 / p);
  const double l = log1d(ctx.d);
  const double al = mode == AlphaMode::Optimized ? step_size_iid(in.n, ctx.d, p, s)
                                                 : in.alpha;
  BoundReport r;
  echo(r, ctx, in, al);
  check_alpha_positive(r, al);
  check_n_even(r, in.n, 2);
  if (mode == AlphaMode::Optimized) r.flags.emplace_back("optimized_step");

  if (noise == NoiseMode::Bounded) {
    r.bound_id = "pr_moment_iid";
    check(r, "alpha_lt_alpha_{p(1+log d),inf}", al, s.alpha_q_inf(p * l), true);
    r.leading = c.C_Rm1 * std::sqrt(in.tr_sigma * p);
    if (mode == AlphaMode::Optimized) {
      r.fluctuation = ep * in.eps_sup *
                      (c.c3 * std::sqrt(l) * p / std::pow(n, 0.25) + c.c4 * p / rn);
      r.transient = ep * c.c5 * l * (p + rn) * in.init_dist *
                    std::exp(-c.m * rn / (8.0 * p * l));
    } else {
      const double d_fl = 4.0 * ep * c.D2 * std::sqrt(s.a * p) / std::sqrt(al * n) +
                          ep * s.b_A * (c.D3 + c.D4) * al * s.a * std::pow(p, 2.5) +
                          2.0 * c.C_Rm2 * p / rn +
                          s.b_A * c.D1 * std::sqrt(al * s.a) * std::pow(p, 1.5);
      const double d_tr = ep * std::sqrt(s.kappa_Q) *
                          (4.0 / (al * rn) + rn * s.b_A / std::sqrt(2.0));
      r.fluctuation = d_fl * in.eps_sup;
      r.transient = std::exp(-al * s.a * n / 8.0) * d_tr * in.init_dist;
    }
  } else {
    r.bound_id = "pr_moment_subgaussian";
    const double thr = s.c_A_infinite ? s.alpha_inf
                                      : std::min(s.alpha_inf, s.c_A / (p * l));
    check(r, "alpha_lt_min(alpha_inf,c_A/(p(1+log d)))", al, thr, true);
    const double d_fl =
        4.0 * ep * c.D_sg * std::sqrt(p) / std::sqrt(al * n) +
        ep * s.b_A * (c.D3_sg + c.D4_sg) * al * s.a * std::pow(p, 3.0) +
        3.0 * std::sqrt(2.0) * c.C_Rm2 * std::sqrt(std::log(e * n)) * std::pow(p, 1.5) / rn +
        s.b_A * c.D1_sg * std::sqrt(al) * std::pow(p, 1.5);
    const double d_tr = ep * std::sqrt(s.kappa_Q) *
                        (2.0 * std::sqrt(2.0) / (al * rn) + rn * s.b_A / std::sqrt(2.0));
    r.leading = c.C_Rm1 * std::sqrt(in.u_sigma_u) * std::sqrt(p);
    r.fluctuation = in.sigma_eps * d_fl;
    r.transient = d_tr * std::pow(1.0 - al * s.a / 4.0, n / 2.0) * in.init_dist;
  }
  r.finalize();
  return r;
}

BoundReport pr_moment_bound_markov(const BoundContext& ctx,
                                   const BoundInputs& in, AlphaMode mode) {
  check_p(in.p);
  const auto& mk = need_markov(ctx);
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  const double p = in.p;
  const double n = static_cast<double>(in.n);
  const double rn = std::sqrt(n);
  const double t = static_cast<double>(ctx.t_mix);
  const double ep = std::exp(1.0 / p);
  const double l = log1d(ctx.d);
  const double al = mode == AlphaMode::Optimized
                        ? step_size_markov(in.n, ctx.d, p, ctx.t_mix, s, mk)
                        : in.alpha;
  BoundReport r;
  r.bound_id = "pr_moment_markov";
  echo(r, ctx, in, al);
  check_alpha_positive(r, al);
  check_n_even(r, in.n, 4);
  check(r, "alpha_le_alpha^M_{p(1+log d),inf}/t_mix", al, mk.alpha_q_inf_M(p * l) / t,
        false);
  if (mode == AlphaMode::Optimized) r.flags.emplace_back("optimized_step");

  const double aa = al * s.a;
  const double lg2 = std::log2(2.0 * p);
  const double tail = 1.0 / (al * rn) + rn * s.b_A;
  const double r_fl =
      8.0 * c.DM2 * ep * std::sqrt(s.a * p * t) / std::sqrt(al * n) +
      std::sqrt(2.0) * c.C_Ros1 * std::pow(t, 0.75) * p * lg2 / std::pow(n, 0.25) +
      2.0 * c.C_Ros2 * t * p * lg2 / rn +
      8.0 * ep * ((c.DMJ1 + c.DMH1) * aa * t * std::sqrt(std::log(1.0 / aa)) * p * p) * tail +
      8.0 * ep * (c.DMJ2 + c.DMH2) * std::pow(aa * t, 1.5) * std::sqrt(p) * tail;
  const double r_tr = std::exp(2.0 + 1.0 / p) * std::sqrt(s.kappa_Q) *
                      (4.0 / (al * rn) + rn * s.b_A / std::sqrt(2.0));
  r.leading = c.C_Rm1 * std::sqrt(in.tr_sigma * p);
  r.fluctuation = in.eps_sup * r_fl;
  r.transient = r_tr * in.init_dist * std::exp(-aa * n / 24.0);
  r.finalize();
  return r;
}

double hp_order(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(ErrorKind::Domain, "delta must lie in (0, 1)");
  }
  return std::log(3.0 * e / delta);
}

BoundReport hp_bound(Regime regime, const BoundContext& ctx,
                     const BoundInputs& in, double delta) {
  BoundInputs at = in;
  at.p = hp_order(delta);
  BoundReport r;
  if (regime == Regime::Markov) {
    r = pr_moment_bound_markov(ctx, at, AlphaMode::Optimized);
    r.bound_id = "hp_markov";
  } else {
    r = pr_moment_bound_iid(ctx, at, AlphaMode::Optimized,
                            regime == Regime::SubGaussian ? NoiseMode::SubGaussian
                                                          : NoiseMode::Bounded);
    r.bound_id = regime == Regime::SubGaussian ? "hp_subgaussian" : "hp_iid";
  }
  // Markov inequality at order p, scaled to the full-window normalisation.
  const double k = std::sqrt(2.0) * e;
  r.leading *= k;
  r.fluctuation *= k;
  r.transient *= k;
  r.inputs.emplace_back("delta", delta);
  r.flags.emplace_back("markov_inequality_radius");
  r.flags.erase(std::remove(r.flags.begin(), r.flags.end(), "ineligible"), r.flags.end());
  r.finalize();
  return r;
}

BoundReport hp_iid_exact(const BoundContext& ctx, const BoundInputs& in,
                         double delta) {
  const double p = hp_order(delta);
  const auto& c = ctx.c;
  const double n = static_cast<double>(in.n);
  const double rn = std::sqrt(n);
  const double l = log1d(ctx.d);
  const double al = step_size_iid(in.n, ctx.d, p, ctx.s);
  BoundReport r;
  r.bound_id = "hp_iid_exact";
  BoundInputs at = in;
  at.p = p;
  echo(r, ctx, at, al);
  r.inputs.emplace_back("delta", delta);
  check_n_even(r, in.n, 2);
  const double c2 = c.c2(ctx.d);
  r.leading = 3.0 * e * std::sqrt(2.0) * std::sqrt(in.tr_sigma * p);
  r.fluctuation = c2 * std::pow(n, -0.25) * in.eps_sup * std::pow(p, 1.5);
  r.transient = c2 * (p + rn) * in.init_dist * std::exp(-c.m * rn / (8.0 * l * p));
  r.finalize();
  return r;
}

BoundReport hp_markov_corollary(const BoundContext& ctx, const BoundInputs& in,
                                double delta, double c1_markov) {
  const double p = hp_order(delta);
  const auto& mk = need_markov(ctx);
  const double n = static_cast<double>(in.n);
  const double t = static_cast<double>(ctx.t_mix);
  const double l = log1d(ctx.d);
  const double al = step_size_markov(in.n, ctx.d, p, ctx.t_mix, ctx.s, mk);
  BoundReport r;
  r.bound_id = "hp_markov_corollary";
  BoundInputs at = in;
  at.p = p;
  echo(r, ctx, at, al);
  r.inputs.emplace_back("delta", delta);
  r.inputs.emplace_back("c1_markov", c1_markov);
  check_n_even(r, in.n, std::max(4L, ctx.t_mix));
  const double cap = std::min(mk.alpha_inf_M, mk.c_A_M);
  r.leading = std::sqrt(in.tr_sigma * p);
  r.fluctuation = c1_markov * in.eps_sup * p *
                  (std::pow(n, -1.0 / 6.0) * std::log(n) * std::pow(t, 2.0 / 3.0) +
                   t * p / std::sqrt(n));
  r.transient = c1_markov *
                (std::pow(n, 1.0 / 6.0) * std::cbrt(t) * p + std::sqrt(n)) *
                in.init_dist *
                std::exp(-cap * std::cbrt(n) / (24.0 * std::cbrt(t) * l * p));
  r.flags.emplace_back("c1_markov_unspecified");
  r.flags.emplace_back("leading_constant_unspecified");
  r.finalize();
  return r;
}

std::vector<BoundReport> iterate_and_term_bounds(Regime regime,
                                                 const BoundContext& ctx,
                                                 const BoundInputs& in) {
  check_p(in.p);
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  const double p = in.p;
  const double al = in.alpha;
  const double n = static_cast<double>(in.n);
  const double aa = al * s.a;
  const double l = log1d(ctx.d);
  const double sk = std::sqrt(s.kappa_Q);
  std::vector<BoundReport> out(4);
  const char* ids[4] = {"J0", "theta_err", "J1", "H1"};

  if (regime == Regime::Markov) {
    const auto& mk = need_markov(ctx);
    const double q = in.q > 0.0 ? in.q : 2.0 * p * l;
    const double dq = std::pow(static_cast<double>(ctx.d), 1.0 / q);
    const double t = static_cast<double>(ctx.t_mix);
    const double thr = mk.alpha_q_inf_M(q) / t;
    BoundInputs echoed = in;
    echoed.q = q;
    for (int i = 0; i < 4; ++i) {
      out[i].bound_id = std::string(ids[i]) + "_markov";
      echo(out[i], ctx, echoed, al);
      check_alpha_positive(out[i], al);
    }
    check(out[0], "alpha_le_alpha_inf", al, s.alpha_inf, false);
    out[0].fluctuation = c.DM1 * std::sqrt(aa * p * t) * in.eps_sup;

    check(out[1], "alpha_le_alpha^M_{q,inf}/t_mix", al, thr, false);
    check(out[1], "p_le_q/2", p, q / 2.0, false);
    out[1].transient = sk * e * e * dq * std::exp(-aa * n / 12.0) * in.init_dist;
    out[1].fluctuation = c.DM2 * dq * std::sqrt(aa * p * t) * in.eps_sup;

    const double lg = std::sqrt(std::log(1.0 / aa));
    check(out[2], "alpha_le_alpha_inf", al, s.alpha_inf, false);
    out[2].fluctuation = in.eps_sup * (aa * t) *
                         (c.DMJ1 * lg * p * p + c.DMJ2 * std::sqrt(aa * t) * std::sqrt(p));

    check(out[3], "alpha_le_alpha^M_{q,inf}/t_mix", al, thr, false);
    check(out[3], "p_le_q/2", p, q / 2.0, false);
    out[3].fluctuation = dq * in.eps_sup * (aa * t) *
                         (c.DMH1 * lg * p * p + c.DMH2 * std::sqrt(aa * t) * std::sqrt(p));
  } else {
    const bool sg = regime == Regime::SubGaussian;
    const double q = in.q > 0.0 ? in.q : p * l;
    const double dq = std::pow(static_cast<double>(ctx.d), 1.0 / q);
    const double scale = sg ? in.sigma_eps : in.eps_sup;
    BoundInputs echoed = in;
    echoed.q = q;
    for (int i = 0; i < 4; ++i) {
      out[i].bound_id = std::string(ids[i]) + (sg ? "_subgaussian" : "_iid");
      echo(out[i], ctx, echoed, al);
      check_alpha_positive(out[i], al);
      if (sg) out[i].flags.emplace_back("projection_bound");
    }
    check(out[0], "alpha_le_alpha_inf", al, s.alpha_inf, false);
    out[0].fluctuation = (sg ? c.D1_sg : c.D1) * std::sqrt(aa * p) * scale;

    check(out[1], "alpha_le_alpha_{q,inf}", al, s.alpha_q_inf(q), false);
    check(out[1], "p_le_q", p, q, false);
    out[1].transient = dq * sk * std::pow(1.0 - aa / 4.0, n) * in.init_dist;
    out[1].fluctuation = dq * (sg ? c.D_sg : c.D2) * std::sqrt(aa * p) * scale;

    check(out[2], "alpha_le_alpha_inf", al, s.alpha_inf, false);
    out[2].fluctuation = sg ? c.D3_sg * aa * p * p * scale
                            : c.D3 * aa * std::pow(p, 1.5) * scale;

    check(out[3], "alpha_le_alpha_{q,inf}", al, s.alpha_q_inf(q), false);
    check(out[3], "p_le_q", p, q, false);
    out[3].fluctuation = sg ? c.D4_sg * aa * p * p * dq * scale
                            : c.D4 * aa * std::pow(p, 1.5) * dq * scale;
  }
  for (auto& r : out) r.finalize();
  return out;
}

double stability_bound(Regime regime, long n, double p, double q,
                       double alpha, int d, const StabilityConstants& s,
                       const MarkovStabilityConstants* m) {
  if (!(p >= 2.0 && q >= p)) throw Error(ErrorKind::Domain, "need 2 <= p <= q");
  if (n < 0) throw Error(ErrorKind::Domain, "n must be >= 0");
  if (!(alpha > 0.0)) throw Error(ErrorKind::Domain, "alpha must be positive");
  const double dq = std::pow(static_cast<double>(d), 1.0 / q);
  const double sk = std::sqrt(s.kappa_Q);
  if (regime == Regime::Markov) {
    if (m == nullptr) {
      throw Error(ErrorKind::Configuration, "Markov stability needs Markov constants");
    }
    const double thr = m->alpha_q_inf_M(q) / static_cast<double>(m->t_mix);
    if (alpha > thr) {
      throw Error(ErrorKind::Precondition,
                  "alpha exceeds alpha^(M)_{q,inf}/t_mix = " + std::to_string(thr));
    }
    return sk * e * e * dq * std::exp(-s.a * alpha * static_cast<double>(n) / 12.0);
  }
  const double thr = s.alpha_q_inf(q);
  if (alpha > thr) {
    throw Error(ErrorKind::Precondition,
                "alpha exceeds alpha_{q,inf} = " + std::to_string(thr));
  }
  return sk * dq * std::pow(1.0 - s.a * alpha / 2.0, static_cast<double>(n) / 2.0);
}

BoundReport bias_bound_markov(const BoundContext& ctx, const BoundInputs& in) {
  const auto& mk = need_markov(ctx);
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  const double al = in.alpha;
  const double n = static_cast<double>(in.n);
  const double t = static_cast<double>(ctx.t_mix);
  const double aa = al * s.a;
  BoundReport r;
  r.bound_id = "bias_markov";
  echo(r, ctx, in, al);
  check_alpha_positive(r, al);
  check_n_even(r, in.n, 2);
  check(r, "alpha_le_alpha^M_{2(1+log d),inf}/t_mix", al,
        mk.alpha_q_inf_M(2.0 * log1d(ctx.d)) / t, false);
  r.transient = c.DM4 * std::exp(-aa * n / 24.0) * in.init_dist / (aa * n);
  r.bias = c.DM5 * in.eps_sup * (aa * t) * std::sqrt(std::log(1.0 / aa)) +
           c.DM6 * in.eps_sup * std::pow(aa * t, 1.5);
  r.finalize();
  return r;
}

}  // namespace lsa
