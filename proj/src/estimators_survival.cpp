#include "gosp/estimators.hpp"
#include "gosp/replicas.hpp"

#include <algorithm>
#include <cmath>

namespace gosp {

using nlohmann::json;

Field replica_field(const NormalizedModel& model, double p, std::uint64_t seed, std::uint64_t i) {
  return Field(FieldSpec{replica_seed(seed, i), p, std::nullopt, model.dim()});
}

namespace {

std::vector<SlabSite> origin_site(const NormalizedModel& model) {
  return {SlabSite{std::vector<Coord>(model.spatial_dim(), 0), 0}};
}

struct EngineCtx {
  Engine engine;
};

auto engine_maker(const NormalizedModel& model) {
  return [&model] {
    return EngineCtx{Engine(model, Field(FieldSpec{0, 0.5, std::nullopt, model.dim()}),
                            DomainSpec::full())};
  };
}

// Extinction times of the origin process, -1 when alive at T.
std::vector<Coord> origin_taus(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                               const Run& run, Direction dir) {
  const auto A = origin_site(model);
  return run_replicas<Coord>(reps, run.threads, engine_maker(model),
                             [&](EngineCtx& c, std::size_t i) -> Coord {
                               c.engine.set_field(replica_field(model, p, run.seed, i));
                               c.engine.restart(A, 0, dir);
                               auto s = run_until(c.engine, T);
                               return s.died ? s.t : -1;
                             });
}

SurvivalResult survival_common(const NormalizedModel& model, double p, Coord T,
                               std::uint64_t reps, const Run& run, Direction dir) {
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (T < 0) throw std::invalid_argument("T must be non-negative");
  SurvivalResult out;
  out.taus = origin_taus(model, p, T, reps, run, dir);
  std::vector<std::uint64_t> alive(static_cast<std::size_t>(T) + 1, 0);
  for (Coord tau : out.taus) {
    Coord until = tau < 0 ? T : tau - 1;
    for (Coord t = 0; t <= until; ++t) ++alive[t];
  }
  for (auto a : alive) out.curve.push_back(static_cast<double>(a) / static_cast<double>(reps));
  out.alive = proportion(alive[T], reps);
  const std::string name = dir == Direction::Primal ? "survival" : "dual_survival";
  for (std::size_t i = 0; i < out.taus.size(); ++i)
    out.report.records.push_back(
        {{"replica", i}, {"tau", out.taus[i] < 0 ? json(nullptr) : json(out.taus[i])}});
  out.report.summary.push_back({name, p, T, reps, out.alive, run.seed});
  out.report.details["curve"] = out.curve;
  return out;
}

}  // namespace

SurvivalResult survival_curve(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                              const Run& run) {
  return survival_common(model, p, T, reps, run, Direction::Primal);
}

SurvivalResult dual_survival_curve(const NormalizedModel& model, double p, Coord T,
                                   std::uint64_t reps, const Run& run) {
  return survival_common(model, p, T, reps, run, Direction::Dual);
}

// ---- critical point ------------------------------------------------------------------------

namespace {

double event_frequency(const NormalizedModel& model, double p, Coord T, Coord L_stop,
                       std::uint64_t reps, std::uint64_t seed, int threads) {
  const auto A = origin_site(model);
  auto hits = run_replicas<char>(reps, threads, engine_maker(model),
                                 [&](EngineCtx& c, std::size_t i) -> char {
                                   c.engine.set_field(replica_field(model, p, seed, i));
                                   c.engine.restart(A);
                                   auto s = run_until(c.engine, T, L_stop);
                                   return !s.died;
                                 });
  std::uint64_t k = 0;
  for (char h : hits) k += h;
  return static_cast<double>(k) / static_cast<double>(reps);
}

struct Bisection {
  double lo, hi;
  std::vector<std::pair<double, double>> sweep;
};

Bisection bisect(const NormalizedModel& model, Coord T, Coord L_stop, std::uint64_t reps,
                 double tol, std::uint64_t seed, int threads) {
  Bisection b{0.0, 1.0, {}};
  double f0 = event_frequency(model, 0.0, T, L_stop, reps, seed, threads);
  double f1 = event_frequency(model, 1.0, T, L_stop, reps, seed, threads);
  b.sweep = {{0.0, f0}, {1.0, f1}};
  if (f0 >= 0.5 || f1 < 0.5)
    throw Refusal("BracketNotFound", "event frequency does not cross 1/2 on [0,1] (f(0)=" +
                                         std::to_string(f0) + ", f(1)=" + std::to_string(f1) + ")");
  while (b.hi - b.lo > tol) {
    double mid = 0.5 * (b.lo + b.hi);
    double f = event_frequency(model, mid, T, L_stop, reps, seed, threads);
    b.sweep.emplace_back(mid, f);
    (f >= 0.5 ? b.hi : b.lo) = mid;
  }
  return b;
}

}  // namespace

CriticalPoint critical_point(const NormalizedModel& model, Coord T, Coord L_stop,
                             std::uint64_t reps, double tol, const Run& run,
                             int stability_seeds) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  CriticalPoint out;
  auto main = bisect(model, T, L_stop, reps, tol, run.seed, run.threads);
  out.lo = main.lo;
  out.hi = main.hi;
  out.sweep = main.sweep;
  for (const auto& [p, f] : main.sweep) out.report.records.push_back({{"seed_index", 0}, {"p", p}, {"frequency", f}});
  out.stability.push_back(0.5 * (main.lo + main.hi));
  for (int k = 1; k < stability_seeds; ++k) {
    auto b = bisect(model, T, L_stop, reps, tol, replica_seed(run.seed ^ 0x7063ULL, k), run.threads);
    for (const auto& [p, f] : b.sweep) out.report.records.push_back({{"seed_index", k}, {"p", p}, {"frequency", f}});
    out.stability.push_back(0.5 * (b.lo + b.hi));
  }
  auto [mn, mx] = std::minmax_element(out.stability.begin(), out.stability.end());
  out.spread = *mx - *mn;
  double mid = 0.5 * (out.lo + out.hi);
  Estimate e;
  e.mean = mid;
  e.n = reps;
  e.stderr_ = out.spread / 2;
  e.ci_lo = out.lo;
  e.ci_hi = out.hi;
  out.report.summary.push_back({"pc", mid, T, reps, e, run.seed});
  out.report.details = {{"bracket", {out.lo, out.hi}},
                        {"stability", out.stability},
                        {"spread", out.spread},
                        {"L_stop", L_stop},
                        {"proxy", "frequency of reaching time T or extent L_stop crosses 1/2"}};
  return out;
}

// ---- death bounds --------------------------------------------------------------------------

DeathFit death_bound_fit(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                         Coord window_lo, Coord window_hi, const Run& run,
                         std::uint64_t min_deaths) {
  if (window_lo < 1 || window_hi > T || window_lo >= window_hi)
    throw std::invalid_argument("window must satisfy 1 <= lo < hi <= T");
  auto taus = origin_taus(model, p, T, reps, run, Direction::Primal);
  std::uint64_t survivors = std::count(taus.begin(), taus.end(), Coord{-1});
  if (survivors == 0)
    throw Refusal("SubcriticalRefused", "no replica survived to T=" + std::to_string(T));
  DeathFit out;
  std::vector<std::uint64_t> dead_at(static_cast<std::size_t>(T) + 2, 0);
  for (Coord tau : taus)
    if (tau >= 0) ++dead_at[tau];
  std::vector<double> xs, ys;
  std::uint64_t acc = 0;
  out.tail.assign(static_cast<std::size_t>(window_hi - window_lo) + 1, 0);
  for (Coord t = T; t >= window_lo; --t) {
    acc += dead_at[t];
    if (t <= window_hi) out.tail[t - window_lo] = acc;
  }
  out.deaths_in_window = out.tail[0];
  for (Coord t = window_lo; t <= window_hi; ++t) {
    auto k = out.tail[t - window_lo];
    out.report.records.push_back({{"t", t}, {"tail", k}, {"reps", reps}});
    if (k == 0) continue;
    xs.push_back(static_cast<double>(t));
    ys.push_back(std::log(static_cast<double>(k) / static_cast<double>(reps)));
  }
  if (out.deaths_in_window < min_deaths || xs.size() < 3)
    throw Refusal("InsufficientDeaths", std::to_string(out.deaths_in_window) +
                                            " deaths with tau in [" + std::to_string(window_lo) +
                                            ", " + std::to_string(T) + "]");
  out.fit = fit_line(xs, ys);
  Estimate e;
  e.mean = out.fit.slope;
  e.stderr_ = out.fit.slope_stderr;
  e.n = xs.size();
  e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
  e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
  out.report.summary.push_back({"deathfit", p, T, reps, e, run.seed});
  out.report.details = {{"slope", out.fit.slope}, {"intercept", out.fit.intercept},
                        {"r2", out.fit.r2}, {"points", xs.size()},
                        {"window", {window_lo, window_hi}}, {"survivors", survivors}};
  return out;
}

// ---- subcritical decay ---------------------------------------------------------------------

SubcriticalDecay subcritical_decay(const NormalizedModel& model, double p, Coord T,
                                   std::uint64_t reps, const Run& run,
                                   std::vector<std::pair<Coord, Coord>> windows,
                                   std::uint64_t min_count) {
  for (auto [lo, hi] : windows)
    if (lo < 1 || hi > T + 1 || lo >= hi)
      throw std::invalid_argument("decay windows must lie in [1, T+1]");
  // Replicas run in fixed chunks of histogram counts to keep memory flat.
  constexpr std::uint64_t kChunk = 1 << 14;
  const std::uint64_t chunks = (reps + kChunk - 1) / kChunk;
  const auto A = origin_site(model);
  const std::size_t bins = static_cast<std::size_t>(T) + 2;
  auto hists = run_replicas<std::vector<std::uint64_t>>(
      chunks, run.threads, engine_maker(model), [&](EngineCtx& c, std::size_t k) {
        std::vector<std::uint64_t> h(bins, 0);
        std::uint64_t end = std::min(reps, (k + 1) * kChunk);
        for (std::uint64_t i = k * kChunk; i < end; ++i) {
          c.engine.set_field(replica_field(model, p, run.seed, i));
          c.engine.restart(A);
          auto s = run_until(c.engine, T);
          ++h[s.died ? s.t : T + 1];
        }
        return h;
      });
  std::vector<std::uint64_t> hist(bins, 0);
  for (const auto& h : hists)
    for (std::size_t b = 0; b < bins; ++b) hist[b] += h[b];
  SubcriticalDecay out;
  out.at_least.assign(bins, 0);
  std::uint64_t acc = 0;
  for (std::size_t t = bins; t-- > 0;) {
    acc += hist[t];
    out.at_least[t] = acc;
  }
  for (std::size_t t = 0; t < bins; ++t)
    out.report.records.push_back({{"t", t}, {"at_least", out.at_least[t]}, {"reps", reps}});
  const double n = static_cast<double>(reps);
  for (auto [lo, hi] : windows) {
    DecayWindow w{lo, hi, 0, 0, out.at_least[hi]};
    if (w.min_count < min_count)
      throw Refusal("InsufficientSurvivals", std::to_string(w.min_count) +
                                                 " replicas with tau >= " + std::to_string(hi));
    std::vector<double> xs, ys;
    double sum = 0;
    for (Coord t = lo; t <= hi; ++t) {
      double lp = std::log(static_cast<double>(out.at_least[t]) / n);
      sum += -lp / static_cast<double>(t);
      xs.push_back(static_cast<double>(t));
      ys.push_back(lp);
    }
    w.c_ratio = sum / static_cast<double>(hi - lo + 1);
    w.c_slope = -fit_line(xs, ys).slope;
    out.windows.push_back(w);
  }
  json wj = json::array();
  for (const auto& w : out.windows) {
    wj.push_back({{"window", {w.lo, w.hi}}, {"c_ratio", w.c_ratio}, {"c_slope", w.c_slope},
                  {"min_count", w.min_count}});
    Estimate e;
    e.mean = w.c_ratio;
    // Delta method at the window's end, the noisiest point.
    double k = static_cast<double>(w.min_count);
    e.stderr_ = std::sqrt((1 - k / n) / k) / static_cast<double>(w.hi);
    e.n = reps;
    e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
    e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
    out.report.summary.push_back({"subcrit", p, w.hi, reps, e, run.seed});
  }
  if (out.windows.size() >= 2) {
    double a = out.windows[0].c_ratio, b = out.windows[1].c_ratio;
    out.relative_gap = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
  }
  out.report.details = {{"windows", wj}, {"relative_gap", out.relative_gap}};
  return out;
}

// ---- torus ---------------------------------------------------------------------------------

TorusStats torus_stats(const NormalizedModel& model, double p, const std::vector<Coord>& sizes,
                       std::uint64_t reps, Coord T_max, const Run& run,
                       std::optional<double> decay_rate, double max_censored) {
  TorusStats out;
  const int D = model.spatial_dim();
  std::vector<double> logn, means, vols, logmeans;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    Coord n = sizes[si];
    TorusSize ts;
    ts.n = n;
    std::uint64_t seed = replica_seed(run.seed, 0x746f7275ULL + si);
    ts.taus = run_replicas<Coord>(reps, run.threads, [&](std::size_t i) -> Coord {
      auto o = torus_extinction(model, replica_field(model, p, seed, i), n, T_max);
      return o.tau ? *o.tau : -1;
    });
    std::vector<double> done;
    for (std::size_t i = 0; i < ts.taus.size(); ++i) {
      Coord tau = ts.taus[i];
      out.report.records.push_back({{"n", n}, {"replica", i},
                                    {"tau", tau < 0 ? json(nullptr) : json(tau)}});
      if (tau < 0)
        ++ts.censored;
      else
        done.push_back(static_cast<double>(tau));
    }
    if (static_cast<double>(ts.censored) > max_censored * static_cast<double>(reps) || done.empty())
      throw Refusal("CensoredMean", std::to_string(ts.censored) + " of " + std::to_string(reps) +
                                        " runs survived to T_max on n=" + std::to_string(n));
    ts.mean = mean_of(done);
    ts.mean_over_log_n = ts.mean.mean / std::log(static_cast<double>(n));
    ts.ks = ks_exponential(done);
    logn.push_back(std::log(static_cast<double>(n)));
    means.push_back(ts.mean.mean);
    vols.push_back(std::pow(static_cast<double>(n), D));
    logmeans.push_back(std::log(ts.mean.mean));
    out.report.summary.push_back({"torus_n" + std::to_string(n), p, T_max, reps, ts.mean, run.seed});
    out.sizes.push_back(std::move(ts));
  }
  if (out.sizes.size() >= 2) {
    out.mean_vs_log_n = fit_line(logn, means);
    out.log_mean_vs_volume = fit_line(vols, logmeans);
  }
  if (decay_rate && *decay_rate > 0) out.target_slope = D / *decay_rate;
  json sz = json::array();
  for (const auto& s : out.sizes)
    sz.push_back({{"n", s.n}, {"mean", s.mean.mean}, {"stderr", s.mean.stderr_},
                  {"mean_over_log_n", s.mean_over_log_n}, {"ks", s.ks}, {"censored", s.censored}});
  out.report.details["sizes"] = sz;
  if (out.mean_vs_log_n)
    out.report.details["mean_vs_log_n_slope"] = out.mean_vs_log_n->slope;
  if (out.log_mean_vs_volume)
    out.report.details["log_mean_vs_volume_slope"] = out.log_mean_vs_volume->slope;
  if (out.target_slope) out.report.details["target_slope"] = *out.target_slope;
  return out;
}

}  // namespace gosp
