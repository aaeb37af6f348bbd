#include "lsa/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "lsa/chains.hpp"
#include "lsa/recursion.hpp"
#include "lsa/rng.hpp"
#include "lsa/spectral.hpp"

namespace lsa {

namespace {

constexpr std::uint64_t kBootstrapSalt = 0xb0075a4dULL;

}  // namespace

const char* quantity_id(Quantity q) {
  switch (q) {
    case Quantity::ThetaErr: return "theta_err";
    case Quantity::ThetaBarErr: return "theta_bar_err";
    case Quantity::PrErr: return "pr_err";
    case Quantity::J0: return "J0";
    case Quantity::J1: return "J1";
    case Quantity::H0: return "H0";
    case Quantity::H1: return "H1";
    case Quantity::Transient: return "transient";
  }
  return "unknown";
}

Quantity parse_quantity(const std::string& id) {
  for (Quantity q : {Quantity::ThetaErr, Quantity::ThetaBarErr, Quantity::PrErr,
                     Quantity::J0, Quantity::J1, Quantity::H0, Quantity::H1,
                     Quantity::Transient}) {
    if (id == quantity_id(q)) return q;
  }
  throw Error(ErrorKind::Configuration, "unknown quantity '" + id + "'");
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pth_moment_of_norms(const std::vector<double>& norms, double p) {
  if (norms.empty()) throw Error(ErrorKind::Domain, "no samples");
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorKind::Domain, "p must be finite and >= 1");
  }
  const double scale = *std::max_element(norms.begin(), norms.end());
  if (scale == 0.0) return 0.0;
  std::vector<double> terms(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    terms[i] = std::pow(norms[i] / scale, p);
  }
  const double mean = pairwise_sum(terms.data(), terms.size()) /
                      static_cast<double>(terms.size());
  return scale * std::pow(mean, 1.0 / p);
}

double pth_moment(const std::vector<Vector>& samples, double p) {
  std::vector<double> norms;
  norms.reserve(samples.size());
  for (const auto& v : samples) norms.push_back(v.norm());
  return pth_moment_of_norms(norms, p);
}

Interval bootstrap_ci(const std::vector<double>& norms, double p,
                      int replicates, std::uint64_t seed) {
  const double est = pth_moment_of_norms(norms, p);
  if (replicates < 1) return {est, est};
  CounterRng rng(seed);
  const std::size_t R = norms.size();
  std::vector<double> stats(static_cast<std::size_t>(replicates));
  std::vector<double> draw(R);
  for (int b = 0; b < replicates; ++b) {
    for (std::size_t i = 0; i < R; ++i) {
      auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(R));
      draw[i] = norms[std::min(j, R - 1)];
    }
    stats[static_cast<std::size_t>(b)] = pth_moment_of_norms(draw, p);
  }
  std::sort(stats.begin(), stats.end());
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(replicates - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  return {std::min(at(0.025), est), std::max(at(0.975), est)};
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(long count, int threads,
                  const std::function<void(long)>& body) {
  const int workers =
      static_cast<int>(std::min<long>(resolve_threads(threads), std::max(1L, count)));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

void check_budget(double work, const EnsembleOptions& opts) {
  if (!opts.budget_override && work > opts.budget) {
    throw Error(ErrorKind::Budget,
                "requested work " + std::to_string(work) +
                    " exceeds budget " + std::to_string(opts.budget));
  }
}

void check_grid(const std::vector<long>& n_grid, bool even) {
  if (n_grid.empty()) throw Error(ErrorKind::Domain, "empty n grid");
  for (long n : n_grid) {
    if (n < 0 || (even && (n < 2 || n % 2 != 0))) {
      throw Error(ErrorKind::Domain, "n must be even and >= 2, got " + std::to_string(n));
    }
  }
}

// Moments of norms[q][n][r] for all p, with bootstrap CIs.
void fill_rows(MomentTable& table, const std::vector<std::string>& names,
               const std::vector<std::vector<std::vector<double>>>& norms,
               const std::vector<long>& n_grid, std::vector<double> p_grid,
               double alpha, long R, std::uint64_t seed,
               const EnsembleOptions& opts) {
  std::sort(p_grid.begin(), p_grid.end());
  std::uint64_t row_index = 0;
  for (std::size_t qi = 0; qi < names.size(); ++qi) {
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      double previous = 0.0;
      for (double p : p_grid) {
        const auto& v = norms[qi][ni];
        MomentRow row;
        row.quantity = names[qi];
        row.n = n_grid[ni];
        row.p = p;
        row.alpha = alpha;
        row.R = R;
        row.master_seed = seed;
        row.estimate = pth_moment_of_norms(v, p);
        Interval ci = bootstrap_ci(
            v, p, opts.bootstrap_replicates,
            CounterRng::split(seed ^ kBootstrapSalt, row_index++));
        row.ci_low = ci.low;
        row.ci_high = ci.high;
        if (row.estimate < previous * (1.0 - 1e-12)) {
          throw Error(ErrorKind::Numerical,
                      "moment estimate decreased in p for " + row.quantity);
        }
        previous = row.estimate;
        table.rows.push_back(std::move(row));
      }
    }
  }
}

}  // namespace

MomentTable run_ensemble(const Instance& inst, double alpha,
                         const std::vector<long>& n_grid,
                         const std::vector<double>& p_grid, long R,
                         std::uint64_t master_seed,
                         const std::vector<Quantity>& quantities,
                         const Vector& theta0, const EnsembleOptions& opts) {
  if (R < 1) throw Error(ErrorKind::Domain, "R must be >= 1");
  check_grid(n_grid, true);
  if (p_grid.empty()) throw Error(ErrorKind::Domain, "empty p grid");
  if (quantities.empty()) throw Error(ErrorKind::Domain, "no quantities");
  double total_n = 0.0;
  for (long n : n_grid) total_n += static_cast<double>(n);
  const double d = inst.d();
  check_budget(static_cast<double>(R) * total_n * d * d, opts);

  const long n_max = *std::max_element(n_grid.begin(), n_grid.end());
  bool need_terms = false;
  for (Quantity q : quantities) {
    need_terms |= q != Quantity::ThetaErr && q != Quantity::ThetaBarErr &&
                  q != Quantity::PrErr;
  }
  const std::size_t Q = quantities.size();
  const std::size_t N = n_grid.size();
  std::vector<std::vector<std::vector<double>>> norms(
      Q, std::vector<std::vector<double>>(N, std::vector<double>(static_cast<std::size_t>(R))));
  const Vector& ts = inst.derived.theta_star;
  const Matrix& Abar = inst.derived.Abar;

  parallel_for(R, opts.threads, [&](long r) {
    const PathSample path =
        sample_path(inst.model.noise, n_max,
                    CounterRng::split(master_seed, static_cast<std::uint64_t>(r)));
    for (std::size_t ni = 0; ni < N; ++ni) {
      const long n = n_grid[ni];
      DecompositionTrace t;
      if (need_terms) {
        t = run_decomposition(inst, alpha, n, theta0, path);
      } else {
        LsaRun run = run_lsa(inst, alpha, n, theta0, path);
        t.theta_n = run.theta_n;
        t.theta_bar = run.theta_bar;
      }
      for (std::size_t qi = 0; qi < Q; ++qi) {
        double v = 0.0;
        switch (quantities[qi]) {
          case Quantity::ThetaErr: v = (t.theta_n - ts).norm(); break;
          case Quantity::ThetaBarErr: v = (t.theta_bar - ts).norm(); break;
          case Quantity::PrErr: v = (Abar * (t.theta_bar - ts)).norm(); break;
          case Quantity::J0: v = t.J0.norm(); break;
          case Quantity::J1: v = t.J1.norm(); break;
          case Quantity::H0: v = t.H0.norm(); break;
          case Quantity::H1: v = t.H1.norm(); break;
          case Quantity::Transient: v = t.tr_term.norm(); break;
        }
        norms[qi][ni][static_cast<std::size_t>(r)] = v;
      }
    }
  });

  std::vector<std::string> names;
  for (Quantity q : quantities) names.emplace_back(quantity_id(q));
  MomentTable table;
  table.bootstrap_replicates = opts.bootstrap_replicates;
  fill_rows(table, names, norms, n_grid, p_grid, alpha, R, master_seed, opts);
  return table;
}

MomentTable empirical_stability(const Instance& inst, double alpha, double p,
                                double q, const std::vector<long>& n_grid,
                                long R, std::uint64_t master_seed,
                                const EnsembleOptions& opts) {
  if (!(p >= 2.0) || !(q >= p)) throw Error(ErrorKind::Domain, "need 2 <= p <= q");
  if (R < 1) throw Error(ErrorKind::Domain, "R must be >= 1");
  check_grid(n_grid, false);
  if (!std::is_sorted(n_grid.begin(), n_grid.end())) {
    throw Error(ErrorKind::Domain, "n grid must be ascending");
  }
  const StabilityConstants c =
      iid_stability_constants(inst.derived.Abar, inst.derived.b_A);
  if (is_markov(inst.model.noise)) {
    const long t_mix = inst.derived.t_mix;
    const double limit =
        markov_stability_constants(c, t_mix).alpha_q_inf_M(q) / static_cast<double>(t_mix);
    if (!(alpha > 0.0 && alpha <= limit)) {
      throw Error(ErrorKind::Precondition,
                  "alpha exceeds alpha^(M)_{q,inf}/t_mix = " + std::to_string(limit));
    }
  } else {
    const double limit = c.alpha_q_inf(q);
    if (!(alpha > 0.0 && alpha <= limit)) {
      throw Error(ErrorKind::Precondition,
                  "alpha exceeds alpha_{q,inf} = " + std::to_string(limit));
    }
  }
  const long n_max = n_grid.back();
  const double d = inst.d();
  check_budget(static_cast<double>(R) * static_cast<double>(n_max) * d * d * d, opts);

  const std::size_t N = n_grid.size();
  std::vector<std::vector<std::vector<double>>> norms(
      1, std::vector<std::vector<double>>(N, std::vector<double>(static_cast<std::size_t>(R))));
  parallel_for(R, opts.threads, [&](long r) {
    const PathSample path =
        sample_path(inst.model.noise, std::max(1L, n_max),
                    CounterRng::split(master_seed, static_cast<std::uint64_t>(r)));
    const std::vector<double> v = product_norms(inst, alpha, path, n_grid);
    for (std::size_t ni = 0; ni < N; ++ni) norms[0][ni][static_cast<std::size_t>(r)] = v[ni];
  });
  MomentTable table;
  table.bootstrap_replicates = opts.bootstrap_replicates;
  fill_rows(table, {"product_norm"}, norms, n_grid, {p}, alpha, R, master_seed, opts);
  return table;
}

Matrix batch_means_covariance(const Instance& inst, const NoiseProcess& noise,
                              long path_length, long batch_count,
                              std::uint64_t seed) {
  if (batch_count < 2) {
    throw Error(ErrorKind::Configuration, "need at least 2 batches");
  }
  long t_mix = 1;
  if (const auto* m = std::get_if<MarkovNoise>(&noise)) t_mix = m->t_mix;
  const long L = path_length / batch_count;
  if (L < 100 * t_mix) {
    throw Error(ErrorKind::Configuration,
                "batch length " + std::to_string(L) + " is below 100 * t_mix");
  }
  const long d = inst.d();
  const PathSample path = sample_path(noise, L * batch_count, seed);
  Matrix means(d, batch_count);
  for (long b = 0; b < batch_count; ++b) {
    Vector s = Vector::Zero(d);
    for (long k = b * L; k < (b + 1) * L; ++k) {
      s += inst.derived.eps[static_cast<std::size_t>(path.states[static_cast<std::size_t>(k)])];
      if (path.additive.size() > 0) s -= path.additive.col(k);
    }
    means.col(b) = s / static_cast<double>(L);
  }
  const Vector grand = means.rowwise().mean();
  const Matrix centered = means.colwise() - grand;
  Matrix cov = static_cast<double>(L) / static_cast<double>(batch_count - 1) *
               (centered * centered.transpose());
  return 0.5 * (cov + cov.transpose());
}

}  // namespace lsa
