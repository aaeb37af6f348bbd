#include "lsa/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lsa/bounds.hpp"
#include "lsa/chains.hpp"
#include "lsa/estimators.hpp"
#include "lsa/problem.hpp"
#include "lsa/recursion.hpp"
#include "lsa/spectral.hpp"

namespace fs = std::filesystem;

namespace lsa::cli {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kExperiments = {
    "validate", "mse-sweep", "moment-sweep", "stability",
    "bias",     "covariance", "bounds-only"};

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorKind::Parse, "config: " + msg);
}

[[noreturn]] void unsupported(const std::string& msg) {
  throw Error(ErrorKind::Configuration, msg);
}

long as_long(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key + " must be an integer");
  return v.get<long>();
}

double as_double(const Json& v, const std::string& key) {
  if (!v.is_number()) bad(key + " must be a number");
  return v.get<double>();
}

std::uint64_t parse_seed_text(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, what + ": not an unsigned 64-bit integer: " + s);
  }
}

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

Regime regime_of(const Instance& inst) {
  if (is_markov(inst.model.noise)) return Regime::Markov;
  if (std::holds_alternative<SubGaussianNoise>(inst.model.noise)) {
    return Regime::SubGaussian;
  }
  return Regime::Iid;
}

struct Setup {
  Instance inst;
  BoundContext ctx;
  Regime regime = Regime::Iid;
  Vector theta0;
  Matrix sigma_lead;  // Σ_ε, or Σ^(M) for Markov noise
  BoundInputs base;
};

Vector resolve_theta0(const ExperimentConfig& cfg, const Instance& inst) {
  if (cfg.theta0 == "zero") return Vector::Zero(inst.d());
  if (cfg.theta0 == "theta_star") return inst.derived.theta_star;
  if (static_cast<int>(cfg.theta0_values.size()) != inst.d()) {
    bad("theta0 must have d entries");
  }
  return Eigen::Map<const Vector>(cfg.theta0_values.data(), inst.d());
}

Setup prepare(const ExperimentConfig& cfg) {
  Setup s{make_instance(load_model(cfg.instance_path)), {}, {}, {}, {}, {}};
  s.ctx = make_context(s.inst);
  s.regime = regime_of(s.inst);
  s.theta0 = resolve_theta0(cfg, s.inst);
  s.sigma_lead = s.regime == Regime::Markov
                     ? asymptotic_noise_covariance(s.inst.derived, s.inst.model.noise,
                                                   cfg.literal_covariance)
                     : s.inst.derived.Sigma_eps;
  s.base.q = cfg.q;
  s.base.tr_sigma = s.sigma_lead.trace();
  s.base.u_sigma_u = Eigen::SelfAdjointEigenSolver<Matrix>(s.inst.derived.Sigma_eps)
                         .eigenvalues()
                         .maxCoeff();
  s.base.eps_sup = s.inst.derived.eps_sup;
  if (const auto* sg = std::get_if<SubGaussianNoise>(&s.inst.model.noise)) {
    s.base.sigma_eps = sg->sigma_eps;
  }
  s.base.init_dist = (s.theta0 - s.inst.derived.theta_star).norm();
  return s;
}

NoiseMode noise_mode(Regime r) {
  return r == Regime::SubGaussian ? NoiseMode::SubGaussian : NoiseMode::Bounded;
}

double optimized_alpha(const Setup& s, long n, double p) {
  if (s.regime == Regime::Markov) {
    return step_size_markov(n, s.ctx.d, p, s.ctx.t_mix, s.ctx.s, *s.ctx.m);
  }
  return step_size_iid(n, s.ctx.d, p, s.ctx.s);
}

BoundReport moment_bound(const Setup& s, const BoundInputs& in, bool optimized) {
  const AlphaMode mode = optimized ? AlphaMode::Optimized : AlphaMode::Explicit;
  if (s.regime == Regime::Markov) return pr_moment_bound_markov(s.ctx, in, mode);
  return pr_moment_bound_iid(s.ctx, in, mode, noise_mode(s.regime));
}

void fill_bound(ResultRow& row, const BoundReport& r) {
  row.bound_total = r.total;
  row.bound_leading = r.leading;
  row.bound_fluctuation = r.fluctuation;
  row.bound_transient = r.transient;
  row.bound_bias = r.bias;
  row.eligible = r.eligible();
}

void no_bound(ResultRow& row) {
  row.bound_total = row.bound_leading = row.bound_fluctuation = kNaN;
  row.bound_transient = row.bound_bias = kNaN;
  row.eligible = true;
}

BoundReport wrap_scalar(const std::string& id, double value, const BoundInputs& in) {
  BoundReport r;
  r.bound_id = id;
  r.transient = value;
  r.inputs = {{"n", static_cast<double>(in.n)},
              {"p", in.p},
              {"q", in.q},
              {"alpha", in.alpha}};
  r.finalize();
  return r;
}

BoundReport failed_report(const std::string& id, const Error& e) {
  BoundReport r;
  r.bound_id = id;
  r.leading = kNaN;
  r.eligibility.push_back({std::string("precondition: ") + e.what(), 0.0, 0.0, false});
  r.finalize();
  return r;
}

EnsembleOptions ensemble_options(const ExperimentConfig& cfg) {
  EnsembleOptions o;
  o.threads = cfg.threads;
  o.budget = cfg.budget;
  o.budget_override = cfg.budget_override;
  o.bootstrap_replicates = cfg.bootstrap_replicates;
  return o;
}

std::vector<double> alphas_for(const ExperimentConfig& cfg) {
  if (cfg.alpha_optimized) return {kNaN};
  return cfg.alpha;
}

// Planned elementary updates, checked before anything is simulated.
double planned_work(const ExperimentConfig& cfg, int d) {
  const double d2 = static_cast<double>(d) * d;
  const double n_sum = [&] {
    double t = 0.0;
    for (long n : cfg.n_grid) t += static_cast<double>(n);
    return t;
  }();
  const double n_max =
      cfg.n_grid.empty() ? 0.0 : static_cast<double>(*std::max_element(cfg.n_grid.begin(), cfg.n_grid.end()));
  const double n_alpha = static_cast<double>(alphas_for(cfg).size());
  const double n_p = static_cast<double>(cfg.p_grid.size());
  if (cfg.experiment == "mse-sweep") return cfg.R * n_sum * d2 * n_alpha;
  if (cfg.experiment == "moment-sweep") return cfg.R * n_sum * d2 * n_alpha * n_p;
  if (cfg.experiment == "stability") return cfg.R * n_max * d2 * d * n_alpha * n_p;
  if (cfg.experiment == "covariance") return static_cast<double>(cfg.path_length) * d2;
  return 0.0;
}

struct RunOutput {
  std::vector<ResultRow> rows;
  Json reports = Json::array();
  Json extras = Json::object();
};

void add_report(RunOutput& o, const BoundReport& r) { o.reports.push_back(report_to_json(r)); }

ResultRow base_row(const ExperimentConfig& cfg, const std::string& quantity, long n,
                   double p, double alpha) {
  ResultRow row;
  row.experiment = cfg.experiment;
  row.quantity = quantity;
  row.n = n;
  row.p = p;
  row.alpha = alpha;
  row.seed = cfg.master_seed;
  return row;
}

void run_mse_sweep(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  if (s.regime == Regime::Markov) {
    unsupported("mse-sweep needs i.i.d. noise; use moment-sweep for Markov noise");
  }
  const auto opts = ensemble_options(cfg);
  for (double a : alphas_for(cfg)) {
    for (long n : cfg.n_grid) {
      const double alpha = cfg.alpha_optimized ? optimized_alpha(s, n, 2.0) : a;
      const double t0 = now_ms();
      const MomentTable t = run_ensemble(s.inst, alpha, {n}, {2.0}, cfg.R, cfg.master_seed,
                                         {Quantity::PrErr}, s.theta0, opts);
      const double elapsed = now_ms() - t0;
      BoundInputs in = s.base;
      in.n = n;
      in.p = 2.0;
      in.alpha = alpha;
      const BoundReport rep = mse_bound_iid(s.ctx, in, noise_mode(s.regime));
      add_report(o, rep);
      const double h = static_cast<double>(n) / 2.0;
      const MomentRow& m = t.rows.front();
      ResultRow row = base_row(cfg, "pr_mse", n, 2.0, alpha);
      row.estimate = h * m.estimate * m.estimate;
      row.ci_low = h * m.ci_low * m.ci_low;
      row.ci_high = h * m.ci_high * m.ci_high;
      fill_bound(row, rep);
      row.wall_time_ms = elapsed;
      o.rows.push_back(row);
    }
  }
}

void run_moment_sweep(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  std::vector<Quantity> qs;
  for (const auto& id : cfg.quantities) qs.push_back(parse_quantity(id));
  const auto opts = ensemble_options(cfg);
  for (double a : alphas_for(cfg)) {
    for (long n : cfg.n_grid) {
      for (double p : cfg.p_grid) {
        const double alpha = cfg.alpha_optimized ? optimized_alpha(s, n, p) : a;
        const double t0 = now_ms();
        const MomentTable t =
            run_ensemble(s.inst, alpha, {n}, {p}, cfg.R, cfg.master_seed, qs, s.theta0, opts);
        const double elapsed = now_ms() - t0;
        BoundInputs in = s.base;
        in.n = n;
        in.p = p;
        in.alpha = alpha;
        const BoundReport pr = moment_bound(s, in, cfg.alpha_optimized);
        add_report(o, pr);
        const auto terms = iterate_and_term_bounds(s.regime, s.ctx, in);
        for (const auto& r : terms) add_report(o, r);
        for (const MomentRow& m : t.rows) {
          ResultRow row = base_row(cfg, m.quantity, n, p, alpha);
          const bool pr_err = m.quantity == quantity_id(Quantity::PrErr);
          const double scale = pr_err ? std::sqrt(static_cast<double>(n) / 2.0) : 1.0;
          row.estimate = scale * m.estimate;
          row.ci_low = scale * m.ci_low;
          row.ci_high = scale * m.ci_high;
          no_bound(row);
          if (pr_err) {
            fill_bound(row, pr);
          } else {
            for (const auto& r : terms) {
              if (r.bound_id.rfind(m.quantity + "_", 0) == 0) fill_bound(row, r);
            }
          }
          row.wall_time_ms = elapsed;
          o.rows.push_back(row);
        }
      }
    }
  }
}

void run_stability(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  const auto opts = ensemble_options(cfg);
  const Regime reg = s.regime == Regime::Markov ? Regime::Markov : Regime::Iid;
  const MarkovStabilityConstants* mk = s.ctx.m ? &*s.ctx.m : nullptr;
  for (double a : alphas_for(cfg)) {
    for (double p : cfg.p_grid) {
      const double q = cfg.q > 0.0 ? cfg.q : p;
      double alpha = a;
      if (cfg.alpha_optimized) {
        alpha = reg == Regime::Markov
                    ? mk->alpha_q_inf_M(q) / static_cast<double>(s.ctx.t_mix)
                    : s.ctx.s.alpha_q_inf(q);
      }
      const double t0 = now_ms();
      const MomentTable t =
          empirical_stability(s.inst, alpha, p, q, cfg.n_grid, cfg.R, cfg.master_seed, opts);
      const double elapsed = now_ms() - t0;
      for (const MomentRow& m : t.rows) {
        ResultRow row = base_row(cfg, m.quantity, m.n, p, alpha);
        row.estimate = m.estimate;
        row.ci_low = m.ci_low;
        row.ci_high = m.ci_high;
        const double b = stability_bound(reg, m.n, p, q, alpha, s.ctx.d, s.ctx.s, mk);
        BoundInputs in = s.base;
        in.n = m.n;
        in.p = p;
        in.q = q;
        in.alpha = alpha;
        const BoundReport rep =
            wrap_scalar(reg == Regime::Markov ? "stability_markov" : "stability_iid", b, in);
        add_report(o, rep);
        fill_bound(row, rep);
        row.wall_time_ms = elapsed;
        o.rows.push_back(row);
      }
    }
  }
}

void run_bias(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  if (s.regime != Regime::Markov) unsupported("bias needs Markov noise");
  if (cfg.alpha_optimized) unsupported("bias needs an explicit alpha list");
  for (double alpha : cfg.alpha) {
    for (long n : cfg.n_grid) {
      const double t0 = now_ms();
      const MeanDynamics md = exact_mean_dynamics(s.inst, alpha, n, s.theta0);
      const double elapsed = now_ms() - t0;
      BoundInputs in = s.base;
      in.n = n;
      in.alpha = alpha;
      const BoundReport rep = bias_bound_markov(s.ctx, in);
      add_report(o, rep);
      ResultRow row = base_row(cfg, "bias", n, 0.0, alpha);
      row.estimate = row.ci_low = row.ci_high = md.bias;
      fill_bound(row, rep);
      row.wall_time_ms = elapsed;
      o.rows.push_back(row);
    }
  }
}

void run_covariance(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  if (s.regime != Regime::Markov) unsupported("covariance needs Markov noise");
  const double t0 = now_ms();
  const Matrix est = batch_means_covariance(s.inst, s.inst.model.noise, cfg.path_length,
                                            cfg.batch_count, cfg.master_seed);
  const double elapsed = now_ms() - t0;
  const double rel = (est - s.sigma_lead).norm() / s.sigma_lead.norm();
  ResultRow row = base_row(cfg, "sigma_M_frobenius", cfg.path_length, 0.0, 0.0);
  row.estimate = row.ci_low = row.ci_high = est.norm();
  no_bound(row);
  row.bound_total = row.bound_leading = s.sigma_lead.norm();
  row.bound_fluctuation = row.bound_transient = row.bound_bias = 0.0;
  row.wall_time_ms = elapsed;
  o.rows.push_back(row);
  o.extras["covariance"] = {{"batch_means", matrix_to_json(est)},
                            {"exact", matrix_to_json(s.sigma_lead)},
                            {"relative_frobenius_error", rel},
                            {"path_length", cfg.path_length},
                            {"batch_count", cfg.batch_count}};
}

void run_bounds_only(const ExperimentConfig& cfg, const Setup& s, RunOutput& o) {
  const bool markov = s.regime == Regime::Markov;
  const MarkovStabilityConstants* mk = s.ctx.m ? &*s.ctx.m : nullptr;
  auto guarded = [&](const std::string& id, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Precondition && e.kind() != ErrorKind::Domain) throw;
      add_report(o, failed_report(id, e));
    }
  };
  for (double a : alphas_for(cfg)) {
    for (long n : cfg.n_grid) {
      for (double p : cfg.p_grid) {
        BoundInputs in = s.base;
        in.n = n;
        in.p = p;
        guarded("pr_moment", [&] {
          in.alpha = cfg.alpha_optimized ? optimized_alpha(s, n, p) : a;
          add_report(o, moment_bound(s, in, cfg.alpha_optimized));
          for (const auto& r : iterate_and_term_bounds(s.regime, s.ctx, in)) add_report(o, r);
        });
        if (!markov && p == 2.0) {
          guarded("mse", [&] { add_report(o, mse_bound_iid(s.ctx, in, noise_mode(s.regime))); });
        }
        guarded("stability", [&] {
          const double q = cfg.q > 0.0 ? cfg.q : p;
          const Regime reg = markov ? Regime::Markov : Regime::Iid;
          const double b = stability_bound(reg, n, p, q, in.alpha, s.ctx.d, s.ctx.s, mk);
          BoundInputs qi = in;
          qi.q = q;
          add_report(o, wrap_scalar(markov ? "stability_markov" : "stability_iid", b, qi));
        });
        if (markov) {
          guarded("bias_markov", [&] { add_report(o, bias_bound_markov(s.ctx, in)); });
        }
      }
      if (cfg.delta) {
        BoundInputs in = s.base;
        in.n = n;
        guarded("hp", [&] { add_report(o, hp_bound(s.regime, s.ctx, in, *cfg.delta)); });
        if (markov) {
          guarded("hp_markov_corollary", [&] {
            add_report(o, hp_markov_corollary(s.ctx, in, *cfg.delta, cfg.c1_markov));
          });
        } else if (s.regime == Regime::Iid) {
          guarded("hp_iid_exact", [&] { add_report(o, hp_iid_exact(s.ctx, in, *cfg.delta)); });
        }
      }
    }
  }
}

Json constants_json(const BoundContext& ctx) {
  const auto& s = ctx.s;
  const auto& c = ctx.c;
  Json j = {{"a", s.a},
            {"alpha_inf", s.alpha_inf},
            {"kappa_Q", s.kappa_Q},
            {"b_Q", s.b_Q},
            {"c_A", s.c_A_infinite ? Json("inf") : Json(s.c_A)},
            {"b_A", s.b_A},
            {"D1", c.D1},
            {"D2", c.D2},
            {"D3", c.D3},
            {"D4", c.D4},
            {"C_Rm1", c.C_Rm1},
            {"C_Rm2", c.C_Rm2},
            {"c2", c.c2(ctx.d)}};
  if (ctx.m) {
    j["alpha_inf_M"] = ctx.m->alpha_inf_M;
    j["C_Gamma"] = ctx.m->C_Gamma;
    j["c_A_M"] = ctx.m->c_A_M;
    j["block_h"] = ctx.m->block_h;
    j["t_mix"] = ctx.t_mix;
    j["DM1"] = c.DM1;
    j["DM2"] = c.DM2;
    j["DM4"] = c.DM4;
    j["DM5"] = c.DM5;
    j["DM6"] = c.DM6;
    j["DM7"] = c.DM7;
  }
  return j;
}

Json derived_json(const Setup& s) {
  const auto& d = s.inst.derived;
  Json j = {{"theta_star", vector_to_json(d.theta_star)},
            {"Abar", matrix_to_json(d.Abar)},
            {"bbar", vector_to_json(d.bbar)},
            {"pi", vector_to_json(d.pi)},
            {"Sigma_eps", matrix_to_json(d.Sigma_eps)},
            {"eps_sup", d.eps_sup},
            {"b_A", d.b_A},
            {"init_dist", s.base.init_dist}};
  if (s.regime == Regime::Markov) j["Sigma_M"] = matrix_to_json(s.sigma_lead);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Configuration, "cannot write " + path.string());
  f << text;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_num(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "results.csv: bad number '" + s + "'");
  }
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Configuration:
    case ErrorKind::Dimension:
      return kParse;
    case ErrorKind::Numerical:
      return kNumerical;
    case ErrorKind::Budget:
      return kBudget;
    default:
      return kAssumption;
  }
}

ExperimentConfig parse_config(const Json& j, const fs::path& base_dir) {
  static const std::set<std::string> allowed = {
      "instance",   "experiment",          "n_grid",      "p_grid",
      "alpha",      "R",                   "master_seed", "output_dir",
      "threads",    "budget_override",     "budget",      "theta0",
      "quantities", "q",                   "delta",       "c1_markov",
      "bootstrap_replicates", "path_length", "batch_count", "literal_covariance"};
  if (!j.is_object()) bad("expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) bad("unknown key '" + k + "'");
  }
  ExperimentConfig c;
  c.raw = j;
  if (!j.contains("instance") || !j["instance"].is_string()) bad("instance path required");
  c.instance_path = j["instance"].get<std::string>();
  if (c.instance_path.is_relative()) c.instance_path = base_dir / c.instance_path;
  if (!j.contains("experiment") || !j["experiment"].is_string()) bad("experiment required");
  c.experiment = j["experiment"].get<std::string>();
  if (!kExperiments.count(c.experiment)) bad("unknown experiment '" + c.experiment + "'");

  if (j.contains("n_grid")) {
    if (!j["n_grid"].is_array()) bad("n_grid must be an array");
    for (const auto& v : j["n_grid"]) {
      const long n = as_long(v, "n_grid");
      if (n < 2 || n % 2 != 0) bad("n_grid entries must be even and >= 2");
      c.n_grid.push_back(n);
    }
  }
  if (j.contains("p_grid")) {
    if (!j["p_grid"].is_array() || j["p_grid"].empty()) bad("p_grid must be a non-empty array");
    c.p_grid.clear();
    for (const auto& v : j["p_grid"]) {
      const double p = as_double(v, "p_grid");
      if (!(p >= 1.0) || !std::isfinite(p)) bad("p_grid entries must be finite and >= 1");
      c.p_grid.push_back(p);
    }
  }
  if (j.contains("alpha")) {
    const Json& a = j["alpha"];
    if (a.is_string()) {
      if (a.get<std::string>() != "optimized") bad("alpha must be \"optimized\" or a list");
      c.alpha_optimized = true;
    } else if (a.is_array() && !a.empty()) {
      c.alpha_optimized = false;
      for (const auto& v : a) {
        const double x = as_double(v, "alpha");
        if (!(x > 0.0) || !std::isfinite(x)) bad("alpha entries must be positive");
        c.alpha.push_back(x);
      }
    } else {
      bad("alpha must be \"optimized\" or a non-empty list");
    }
  }
  if (j.contains("R")) {
    c.R = as_long(j["R"], "R");
    if (c.R < 1) bad("R must be >= 1");
  }
  if (j.contains("master_seed")) {
    const Json& v = j["master_seed"];
    if (v.is_number_unsigned()) {
      c.master_seed = v.get<std::uint64_t>();
    } else if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      c.master_seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
    } else if (v.is_string()) {
      c.master_seed = parse_seed_text(v.get<std::string>(), "master_seed");
    } else {
      bad("master_seed must be a non-negative integer");
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) bad("output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("threads")) {
    c.threads = static_cast<int>(as_long(j["threads"], "threads"));
    if (c.threads < 0) bad("threads must be >= 0");
  }
  if (j.contains("budget_override")) {
    if (!j["budget_override"].is_boolean()) bad("budget_override must be a boolean");
    c.budget_override = j["budget_override"].get<bool>();
  }
  if (j.contains("budget")) {
    c.budget = as_double(j["budget"], "budget");
    if (!(c.budget > 0.0)) bad("budget must be positive");
  }
  if (j.contains("theta0")) {
    const Json& t = j["theta0"];
    if (t.is_string()) {
      c.theta0 = t.get<std::string>();
      if (c.theta0 != "zero" && c.theta0 != "theta_star") {
        bad("theta0 must be \"zero\", \"theta_star\" or a vector");
      }
    } else if (t.is_array()) {
      c.theta0 = "explicit";
      for (const auto& v : t) c.theta0_values.push_back(as_double(v, "theta0"));
    } else {
      bad("theta0 must be a string or a vector");
    }
  }
  if (j.contains("quantities")) {
    if (!j["quantities"].is_array() || j["quantities"].empty()) bad("quantities must be a non-empty array");
    c.quantities.clear();
    for (const auto& v : j["quantities"]) {
      if (!v.is_string()) bad("quantities entries must be strings");
      const std::string id = v.get<std::string>();
      try {
        parse_quantity(id);
      } catch (const Error&) {
        bad("unknown quantity '" + id + "'");
      }
      c.quantities.push_back(id);
    }
  }
  if (j.contains("q")) c.q = as_double(j["q"], "q");
  if (j.contains("delta")) c.delta = as_double(j["delta"], "delta");
  if (j.contains("c1_markov")) c.c1_markov = as_double(j["c1_markov"], "c1_markov");
  if (j.contains("bootstrap_replicates")) {
    c.bootstrap_replicates = static_cast<int>(as_long(j["bootstrap_replicates"], "bootstrap_replicates"));
    if (c.bootstrap_replicates < 0) bad("bootstrap_replicates must be >= 0");
  }
  if (j.contains("path_length")) c.path_length = as_long(j["path_length"], "path_length");
  if (j.contains("batch_count")) c.batch_count = as_long(j["batch_count"], "batch_count");
  if (j.contains("literal_covariance")) {
    if (!j["literal_covariance"].is_boolean()) bad("literal_covariance must be a boolean");
    c.literal_covariance = j["literal_covariance"].get<bool>();
  }

  const bool needs_n = c.experiment != "validate" && c.experiment != "covariance";
  if (needs_n && c.n_grid.empty()) bad("n_grid required for " + c.experiment);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

const char* const kCsvHeader =
    "experiment,quantity,n,p,alpha,estimate,ci_low,ci_high,bound_total,"
    "bound_leading,bound_fluctuation,bound_transient,bound_bias,eligible,seed,"
    "wall_time_ms";

std::string csv_line(const ResultRow& r) {
  std::ostringstream s;
  s << r.experiment << ',' << r.quantity << ',' << r.n << ',' << format_double(r.p) << ','
    << format_double(r.alpha) << ',' << format_double(r.estimate) << ','
    << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
    << format_double(r.bound_total) << ',' << format_double(r.bound_leading) << ','
    << format_double(r.bound_fluctuation) << ',' << format_double(r.bound_transient) << ','
    << format_double(r.bound_bias) << ',' << (r.eligible ? 1 : 0) << ',' << r.seed << ','
    << format_double(r.wall_time_ms);
  return s.str();
}

void execute_validate(const ExperimentConfig& cfg, std::ostream& out) {
  const Setup s = prepare(cfg);
  const Json j = {{"status", "ok"},
                  {"noise", noise_name(s.inst.model.noise)},
                  {"derived", derived_json(s)},
                  {"constants", constants_json(s.ctx)}};
  if (const auto* mk = std::get_if<MarkovNoise>(&s.inst.model.noise)) {
    const ChainAnalysis ch = analyze_chain(mk->P);
    out << "t_mix declared " << mk->t_mix << ", minimal " << ch.t_mix_min << "\n";
  }
  out << j.dump(2) << "\n";
}

void execute_run(const ExperimentConfig& cfg, std::ostream& out) {
  const Setup s = prepare(cfg);
  const double work = planned_work(cfg, s.inst.d());
  if (!cfg.budget_override && work > cfg.budget) {
    throw Error(ErrorKind::Budget, "planned work " + std::to_string(work) +
                                       " exceeds budget " + std::to_string(cfg.budget));
  }
  RunOutput o;
  if (cfg.experiment == "mse-sweep") {
    run_mse_sweep(cfg, s, o);
  } else if (cfg.experiment == "moment-sweep") {
    run_moment_sweep(cfg, s, o);
  } else if (cfg.experiment == "stability") {
    run_stability(cfg, s, o);
  } else if (cfg.experiment == "bias") {
    run_bias(cfg, s, o);
  } else if (cfg.experiment == "covariance") {
    run_covariance(cfg, s, o);
  } else if (cfg.experiment == "bounds-only") {
    run_bounds_only(cfg, s, o);
  }

  fs::create_directories(cfg.output_dir);
  Json bounds = {{"experiment", cfg.experiment},
                 {"constants", constants_json(s.ctx)},
                 {"reports", o.reports}};
  if (!o.extras.empty()) bounds["extras"] = o.extras;
  write_text(cfg.output_dir / "bounds.json", bounds.dump(2) + "\n");
  if (cfg.experiment == "bounds-only") {
    out << "wrote " << (cfg.output_dir / "bounds.json").string() << "\n";
    return;
  }

  std::string csv = std::string(kCsvHeader) + "\n";
  for (const auto& r : o.rows) csv += csv_line(r) + "\n";
  write_text(cfg.output_dir / "results.csv", csv);

  Json meta = {{"tool", "lsa_lab"},
               {"version", kVersion},
               {"config", cfg.raw},
               {"instance", cfg.instance_path.string()},
               {"experiment", cfg.experiment},
               {"master_seed", cfg.master_seed},
               {"seed_source", cfg.seed_source},
               {"threads", cfg.threads},
               {"rows", o.rows.size()},
               {"noise", noise_name(s.inst.model.noise)},
               {"derived", derived_json(s)},
               {"versions",
                {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                               std::to_string(EIGEN_MAJOR_VERSION) + "." +
                               std::to_string(EIGEN_MINOR_VERSION)},
                 {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  write_text(cfg.output_dir / "meta.json", meta.dump(2) + "\n");
  out << "wrote " << o.rows.size() << " rows to " << (cfg.output_dir / "results.csv").string()
      << "\n";
}

void execute_report(const fs::path& dir, std::ostream& out) {
  const fs::path csv = dir / "results.csv";
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::Parse, "missing " + csv.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::Parse, csv.string() + ": unexpected header");
  }
  struct Point {
    double x, est, lo, hi, bound;
  };
  std::map<std::string, std::vector<Point>> series;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) throw Error(ErrorKind::Parse, csv.string() + ": expected 16 columns");
    ++rows;
    const std::string& exp = f[0];
    const bool by_alpha = exp == "bias";
    std::ostringstream key;
    key << exp << "_" << f[1];
    if (by_alpha) {
      key << "_n" << f[2];
    } else {
      key << "_p" << f[3];
    }
    const double x = by_alpha ? parse_num(f[4]) : parse_num(f[2]);
    series[key.str()].push_back(
        {x, parse_num(f[5]), parse_num(f[6]), parse_num(f[7]), parse_num(f[8])});
  }
  if (rows == 0) throw Error(ErrorKind::Parse, csv.string() + ": no data rows");

  std::ostringstream summary;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    std::vector<double> lx, ly;
    long violations = 0;
    std::ostringstream data;
    data << "# x estimate ci_low ci_high bound_total\n";
    for (const auto& p : pts) {
      if (p.x > 0.0 && p.est > 0.0) {
        lx.push_back(std::log(p.x));
        ly.push_back(std::log(p.est));
      }
      if (std::isfinite(p.bound) && p.lo > p.bound) ++violations;
      data << format_double(p.x) << ' ' << format_double(p.est) << ' ' << format_double(p.lo)
           << ' ' << format_double(p.hi) << ' ' << format_double(p.bound) << '\n';
    }
    write_text(dir / ("series_" + key + ".txt"), data.str());
    summary << key << ": points=" << pts.size();
    if (lx.size() >= 2) {
      Eigen::MatrixXd X(lx.size(), 2);
      Eigen::VectorXd y(ly.size());
      for (std::size_t i = 0; i < lx.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = lx[i];
        y(i) = ly[i];
      }
      const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
      summary << " slope=" << format_double(beta(1));
    }
    summary << " violations=" << violations << "\n";
  }
  write_text(dir / "summary.txt", summary.str());
  out << summary.str();
}

namespace {

int guard(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error [io]: " << e.what() << "\n";
    return kParse;
  }
}

}  // namespace

int cmd_validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guard(err, [&] { execute_validate(cfg, out); });
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guard(err, [&] { execute_run(cfg, out); });
}

int cmd_report(const fs::path& dir, std::ostream& out, std::ostream& err) {
  return guard(err, [&] { execute_report(dir, out); });
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear stochastic approximation lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir, report_dir, seed_text;
  int threads = -1;

  auto* validate = app.add_subcommand("validate", "Check an instance and print derived constants");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required();

  auto* run = app.add_subcommand("run", "Run an experiment and write results");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed_text, "Master seed (u64)");

  auto* report = app.add_subcommand("report", "Summarise a results directory");
  report->add_option("dir", report_dir, "Results directory");
  report->add_option("--out", out_dir, "Results directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (report->parsed()) {
    const fs::path dir = !report_dir.empty() ? report_dir : out_dir;
    if (dir.empty()) {
      err << "error [parse]: report needs a results directory\n";
      return kParse;
    }
    return cmd_report(dir, out, err);
  }

  ExperimentConfig cfg;
  const int rc = guard(err, [&] {
    cfg = load_config(config_path);
    if (const char* env = std::getenv("LSA_LAB_SEED"); env != nullptr && *env != '\0') {
      cfg.master_seed = parse_seed_text(env, "LSA_LAB_SEED");
      cfg.seed_source = "env";
    }
    if (!seed_text.empty()) {
      cfg.master_seed = parse_seed_text(seed_text, "--seed");
      cfg.seed_source = "flag";
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads >= 0) cfg.threads = threads;
  });
  if (rc != kOk) return rc;
  if (validate->parsed()) return cmd_validate(cfg, out, err);
  return cmd_run(cfg, out, err);
}

}  // namespace lsa::cli
