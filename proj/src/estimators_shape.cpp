#include "gosp/estimators.hpp"
#include "gosp/replicas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace gosp {

using nlohmann::json;

namespace {

// Visits every integer point of a box in row-major order.
template <class F>
void for_each_point(const Box& b, F&& f) {
  if (b.empty()) return;
  std::vector<Coord> x = b.lo;
  for (;;) {
    f(std::span<const Coord>(x));
    int k = b.dim() - 1;
    while (k >= 0 && ++x[k] == b.hi[k]) {
      x[k] = b.lo[k];
      --k;
    }
    if (k < 0) return;
  }
}

std::vector<std::vector<double>> direction_grid(int D, int grid) {
  std::vector<std::vector<double>> out;
  if (D == 1) return {{1.0}, {-1.0}};
  if (D == 2) {
    int k = std::max(grid, 4);
    for (int i = 0; i < k; ++i) {
      double a = 2 * std::numbers::pi * i / k;
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  // Nonzero points of {-1,0,1}^D, normalised.
  Box cube{std::vector<Coord>(D, -1), std::vector<Coord>(D, 2)};
  for_each_point(cube, [&](std::span<const Coord> x) {
    double n = 0;
    for (Coord c : x) n += static_cast<double>(c * c);
    if (n == 0) return;
    std::vector<double> u;
    for (Coord c : x) u.push_back(static_cast<double>(c) / std::sqrt(n));
    out.push_back(u);
  });
  return out;
}

double dot(std::span<const Coord> x, const std::vector<double>& u) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(x[i]) * u[i];
  return s;
}

Box symmetric_box(int D, Coord r) {
  return Box{std::vector<Coord>(D, -r), std::vector<Coord>(D, r + 1)};
}

// Largest axis-connected component of the marked sites of a box. H cap K also
// holds scattered sites where both processes are empty; only the solid core
// tracks t U.
std::vector<char> largest_component(const Box& b, const std::vector<char>& marked) {
  const int D = b.dim();
  std::vector<std::size_t> stride(D, 1);
  for (int i = D - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(b.extent(i + 1));
  std::vector<int> label(marked.size(), -1);
  std::vector<std::size_t> size;
  std::vector<std::size_t> stack;
  for (std::size_t s0 = 0; s0 < marked.size(); ++s0) {
    if (!marked[s0] || label[s0] >= 0) continue;
    const int id = static_cast<int>(size.size());
    size.push_back(0);
    label[s0] = id;
    stack.push_back(s0);
    while (!stack.empty()) {
      std::size_t j = stack.back();
      stack.pop_back();
      ++size[id];
      for (int i = 0; i < D; ++i) {
        const auto c = static_cast<Coord>(j / stride[i] % static_cast<std::size_t>(b.extent(i)));
        for (int dir : {-1, 1}) {
          const Coord nc = c + dir;
          if (nc < 0 || nc >= b.extent(i)) continue;
          std::size_t n = dir < 0 ? j - stride[i] : j + stride[i];
          if (marked[n] && label[n] < 0) {
            label[n] = id;
            stack.push_back(n);
          }
        }
      }
    }
  }
  std::vector<char> out(marked.size(), 0);
  if (size.empty()) return out;
  const int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = label[j] == best;
  return out;
}

// Indices < attempts whose origin process survives to T_cond, in index order,
// stopping at `want`. Attempts run in parallel batches.
std::vector<std::uint64_t> surviving_indices(const NormalizedModel& model, double p, Coord T_cond,
                                             std::uint64_t want, std::uint64_t attempts,
                                             const Run& run) {
  std::vector<std::uint64_t> out;
  const std::vector<SlabSite> A{SlabSite{std::vector<Coord>(model.spatial_dim(), 0), 0}};
  std::uint64_t next = 0;
  const std::uint64_t batch = std::max<std::uint64_t>(64, 2 * want);
  while (out.size() < want && next < attempts) {
    std::uint64_t n = std::min(batch, attempts - next);
    auto alive = run_replicas<char>(
        n, run.threads,
        [&] { return Engine(model, Field(FieldSpec{0, p, std::nullopt, model.dim()}), DomainSpec::full()); },
        [&](Engine& e, std::size_t k) -> char {
          e.set_field(replica_field(model, p, run.seed, next + k));
          e.restart(A);
          return !run_until(e, T_cond).died;
        });
    for (std::uint64_t k = 0; k < n && out.size() < want; ++k)
      if (alive[k]) out.push_back(next + k);
    next += n;
  }
  return out;
}

}  // namespace

// ---- shape ---------------------------------------------------------------------------------

ShapeEstimate shape_and_time_constants(const NormalizedModel& model, double p, Coord t,
                                       std::uint64_t reps, int grid, Coord T_cond,
                                       const Run& run, double eps, double min_acceptance) {
  if (t < 1 || reps < 1) throw std::invalid_argument("shape needs t >= 1 and reps >= 1");
  const int D = model.spatial_dim();
  ShapeEstimate out;
  out.t = t;
  out.T_cond = T_cond;
  out.reps = reps;
  out.p = p;
  out.directions = direction_grid(D, grid);
  const std::size_t K = out.directions.size();

  auto attempts = static_cast<std::uint64_t>(std::ceil(static_cast<double>(reps) / min_acceptance));
  auto kept = surviving_indices(model, p, T_cond, reps, attempts, run);
  if (kept.size() < reps)
    throw Refusal("SubcriticalRefused",
                  "only " + std::to_string(kept.size()) + " of " + std::to_string(attempts) +
                      " runs survived to T_cond=" + std::to_string(T_cond));
  std::uint64_t tried = kept.back() + 1;
  out.acceptance = static_cast<double>(reps) / static_cast<double>(tried);

  struct PerRep {
    std::vector<double> support;  // max <x,u>/t over the core of H cap K, row 0
    std::vector<double> extreme;  // max <x,u>/t over xi_t (all rows)
    std::vector<double> mu;       // NaN when the ray is not hit often enough
  };
  const double td = static_cast<double>(t);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto per = run_replicas<PerRep>(reps, run.threads, [&](std::size_t r) {
    Field f = replica_field(model, p, run.seed, kept[r]);
    auto hk = hit_and_coupled_regions(model, f, t, Box{});
    const Box& window = hk.H.window;
    PerRep pr{std::vector<double>(K, -std::numeric_limits<double>::infinity()),
              std::vector<double>(K, -std::numeric_limits<double>::infinity()),
              std::vector<double>(K, nan)};
    std::vector<char> hk0(window.volume());
    for (std::size_t j = 0; j < hk0.size(); ++j) hk0[j] = hk.H.rows[0][j] && hk.K.rows[0][j];
    const auto core = largest_component(window, hk0);
    std::size_t idx = 0;
    for_each_point(window, [&](std::span<const Coord> x) {
      if (core[idx])
        for (std::size_t k = 0; k < K; ++k)
          pr.support[k] = std::max(pr.support[k], dot(x, out.directions[k]) / td);
      ++idx;
    });
    if (hk.origin_alive)
      for (const auto& s : hk.origin_state.sites())
        for (std::size_t k = 0; k < K; ++k)
          pr.extreme[k] = std::max(pr.extreme[k], dot(s.x, out.directions[k]) / td);
    // Hitting-time regression along each direction.
    for (std::size_t k = 0; k < K; ++k) {
      Coord N = static_cast<Coord>(std::floor(0.8 * pr.support[k] * td));
      std::vector<double> ns, ts;
      std::vector<Coord> x(D);
      for (Coord n = std::max<Coord>(1, N / 4); n <= N; ++n) {
        for (int i = 0; i < D; ++i)
          x[i] = static_cast<Coord>(std::floor(static_cast<double>(n) * out.directions[k][i]));
        if (auto h = hk.hitting.time(x)) {
          ns.push_back(static_cast<double>(n));
          ts.push_back(static_cast<double>(*h));
        }
      }
      if (ns.size() >= 3) pr.mu[k] = fit_line(ns, ts).slope;
    }
    return pr;
  });

  out.support.assign(K, 0);
  out.support_stderr.assign(K, 0);
  out.mu_hat.assign(K, nan);
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> hs, mus;
    for (const auto& pr : per) {
      hs.push_back(pr.support[k]);
      if (!std::isnan(pr.mu[k])) mus.push_back(pr.mu[k]);
    }
    auto e = mean_of(hs);
    out.support[k] = e.mean;
    out.support_stderr[k] = e.stderr_;
    if (!mus.empty()) out.mu_hat[k] = mean_of(mus).mean;
  }
  // Intercepts of {x : <x,u_k> <= h_k} along each grid direction.
  out.radius.assign(K, std::numeric_limits<double>::infinity());
  out.centre.assign(D, 0);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      double c = 0;
      for (int i = 0; i < D; ++i) c += out.directions[j][i] * out.directions[k][i];
      if (c > 1e-12) out.radius[j] = std::min(out.radius[j], out.support[k] / c);
    }
    for (int i = 0; i < D; ++i) out.centre[i] += out.radius[j] * out.directions[j][i] / static_cast<double>(K);
  }
  std::uint64_t inside = 0;
  for (const auto& pr : per) {
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) {
      double cu = 0;
      for (int i = 0; i < D; ++i) cu += out.centre[i] * out.directions[k][i];
      ok = pr.extreme[k] - cu <= (1 + eps) * (out.support[k] - cu);
    }
    inside += ok;
  }
  out.containment = static_cast<double>(inside) / static_cast<double>(reps);

  for (std::size_t r = 0; r < reps; ++r) {
    json mu = json::array();
    for (double m : per[r].mu) mu.push_back(std::isnan(m) ? json(nullptr) : json(m));
    out.report.records.push_back({{"replica", r}, {"attempt", kept[r]},
                                  {"support", per[r].support}, {"extreme", per[r].extreme},
                                  {"mu", mu}});
  }
  json mu = json::array();
  for (double m : out.mu_hat) mu.push_back(std::isnan(m) ? json(nullptr) : json(m));
  out.report.details = {{"directions", out.directions}, {"support", out.support},
                        {"support_stderr", out.support_stderr}, {"mu_hat", mu},
                        {"radius", out.radius}, {"centre", out.centre},
                        {"containment", out.containment}, {"eps", eps},
                        {"acceptance", out.acceptance}, {"T_cond", T_cond}};
  for (std::size_t k = 0; k < K; ++k) {
    Estimate e;
    e.mean = out.support[k];
    e.stderr_ = out.support_stderr[k];
    e.n = reps;
    e.ci_lo = e.mean - 1.959963984540054 * e.stderr_;
    e.ci_hi = e.mean + 1.959963984540054 * e.stderr_;
    out.report.summary.push_back({"shape_support_" + std::to_string(k), p, t, reps, e, run.seed});
  }
  out.report.summary.push_back({"shape_containment", p, t, reps, proportion(inside, reps), run.seed});
  return out;
}

// ---- edges ---------------------------------------------------------------------------------

EdgeSpeeds edge_speeds(const NormalizedModel& model, double p, Coord T, std::uint64_t reps,
                       const Run& run) {
  if (model.dim() != 2) throw DimensionNot2();
  if (T < 1) throw std::invalid_argument("T must be positive");
  struct PerRep {
    std::vector<Coord> right, left;
  };
  auto per = run_replicas<PerRep>(reps, run.threads, [&](std::size_t i) {
    Field f = replica_field(model, p, run.seed, i);
    auto r = edge_track(model, f, Side::Right, T);
    auto l = edge_track(model, f, Side::Left, T);
    if (r.extinct_from || l.extinct_from || r.values.size() <= static_cast<std::size_t>(T) ||
        l.values.size() <= static_cast<std::size_t>(T))
      throw std::runtime_error("half-slab process died; truncation too small");
    return PerRep{std::move(r.values), std::move(l.values)};
  });
  EdgeSpeeds out;
  std::vector<double> a, b;
  out.mean_right.assign(T + 1, 0);
  out.mean_left.assign(T + 1, 0);
  for (std::size_t i = 0; i < reps; ++i) {
    a.push_back(static_cast<double>(per[i].right[T]) / static_cast<double>(T));
    b.push_back(static_cast<double>(per[i].left[T]) / static_cast<double>(T));
    for (Coord t = 0; t <= T; ++t) {
      out.mean_right[t] += static_cast<double>(per[i].right[t]) / static_cast<double>(reps);
      out.mean_left[t] += static_cast<double>(per[i].left[t]) / static_cast<double>(reps);
    }
    out.report.records.push_back({{"replica", i}, {"r_T", per[i].right[T]}, {"l_T", per[i].left[T]}});
  }
  out.alpha = mean_of(a);
  out.beta = mean_of(b);
  out.alpha_upper = std::numeric_limits<double>::infinity();
  out.beta_lower = -std::numeric_limits<double>::infinity();
  for (Coord t = 1; t <= T; ++t) {
    out.alpha_upper = std::min(out.alpha_upper, out.mean_right[t] / static_cast<double>(t));
    out.beta_lower = std::max(out.beta_lower, out.mean_left[t] / static_cast<double>(t));
  }
  out.report.summary.push_back({"edge_alpha", p, T, reps, out.alpha, run.seed});
  out.report.summary.push_back({"edge_beta", p, T, reps, out.beta, run.seed});
  out.report.details = {{"alpha", out.alpha.mean}, {"beta", out.beta.mean},
                        {"alpha_upper", out.alpha_upper}, {"beta_lower", out.beta_lower}};
  return out;
}

// ---- primal/dual meeting -------------------------------------------------------------------

MeetResult primal_dual_meet(const NormalizedModel& model, double p, Coord t, std::uint64_t reps,
                            const std::vector<Rational>& v_hat, const Run& run) {
  const int D = model.spatial_dim();
  if (static_cast<int>(v_hat.size()) != D) throw std::invalid_argument("v_hat has the wrong dimension");
  if (t < 1) throw std::invalid_argument("t must be positive");
  MeetResult out;
  for (const auto& v : v_hat) out.displacement.push_back(round_half_down(v * (2 * t)));
  const int R = model.R;
  const Coord dual_origin = 2 * t + R - 1;
  const std::uint64_t dual_seed = replica_seed(run.seed, 0x6475616cULL);
  struct Outcome {
    char alive = 0, fail = 0;
  };
  auto res = run_replicas<Outcome>(reps, run.threads, [&](std::size_t i) {
    Probes pr;
    pr.counts = false;
    auto a = evolve(model, {SlabSite{std::vector<Coord>(D, 0), 0}},
                    replica_field(model, p, run.seed, i), DomainSpec::full(), t, pr);
    auto b = dual_evolve(model, {SlabSite{out.displacement, 0}},
                         replica_field(model, p, dual_seed, i), DomainSpec::full(), t,
                         dual_origin, pr);
    Outcome o;
    if (!a.survived() || !b.survived()) return o;
    o.alive = 1;
    // Primal row s and dual row R-1-s sit at the same absolute time t+s.
    bool meet = false;
    for (const auto& s : a.final_state.sites())
      if (b.final_state.occupied(s.x, R - 1 - s.s)) {
        meet = true;
        break;
      }
    o.fail = !meet;
    return o;
  });
  std::uint64_t alive = 0, fail = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    alive += res[i].alive;
    fail += res[i].fail;
    out.report.records.push_back({{"replica", i}, {"both_alive", res[i].alive != 0},
                                  {"disjoint", res[i].fail != 0}});
  }
  out.failure = proportion(fail, reps);
  out.both_alive = proportion(alive, reps);
  out.report.summary.push_back({"meet_failure", p, t, reps, out.failure, run.seed});
  out.report.summary.push_back({"meet_both_alive", p, t, reps, out.both_alive, run.seed});
  out.report.details = {{"displacement", out.displacement}, {"dual_origin", dual_origin}};
  return out;
}

// ---- density -------------------------------------------------------------------------------

DensitySpectrum density_spectrum(const NormalizedModel& model, double p,
                                 const std::vector<Coord>& ns, Coord T_inf, std::uint64_t reps,
                                 const std::vector<double>& levels, const Run& run) {
  if (ns.empty()) throw std::invalid_argument("density needs at least one box size");
  const int D = model.spatial_dim();
  const int R = model.R;
  if (T_inf < R) throw std::invalid_argument("T_inf must be at least R");
  const Coord N = *std::max_element(ns.begin(), ns.end());
  // Level tau holds absolute time -tau, tau < T_inf. A step to depth T_inf or
  // beyond ends a dual path, whatever the end site. Level tau reads
  // x - y at level tau + u, so the windows only grow on the side each offset
  // points to.
  std::vector<Coord> grow_lo(D, 0), grow_hi(D, 0);
  for (const auto& so : model.split_offsets)
    for (int i = 0; i < D; ++i) {
      grow_lo[i] = std::max(grow_lo[i], (std::max<Coord>(0, so.y[i]) + so.u - 1) / so.u);
      grow_hi[i] = std::max(grow_hi[i], (std::max<Coord>(0, -so.y[i]) + so.u - 1) / so.u);
    }
  std::vector<Box> win(T_inf);
  std::vector<std::size_t> base(T_inf + 1, 0);
  for (Coord tau = 0; tau < T_inf; ++tau) {
    win[tau] = Box{std::vector<Coord>(D), std::vector<Coord>(D)};
    for (int i = 0; i < D; ++i) {
      win[tau].lo[i] = -N - grow_lo[i] * tau;
      win[tau].hi[i] = N - 1 + grow_hi[i] * tau;
    }
    base[tau + 1] = base[tau] + win[tau].volume();
  }
  auto flat = [&](Coord tau, std::span<const Coord> z) {
    const Box& w = win[tau];
    std::size_t j = 0;
    for (int i = 0; i < D; ++i)
      j = j * static_cast<std::size_t>(w.extent(i)) + static_cast<std::size_t>(z[i] - w.lo[i]);
    return base[tau] + j;
  };
  auto samples = run_replicas<std::vector<double>>(
      reps, run.threads, [&] { return std::vector<char>(base[T_inf]); },
      [&](std::vector<char>& good, std::size_t rep) {
        Field f = replica_field(model, p, run.seed, rep);
        std::vector<Coord> z(D);
        for (Coord tau = T_inf - 1; tau >= 0; --tau) {
          auto row = f.row(-tau);
          const Box& w = win[tau];
          if (D == 1) {
            // Branch-free: open sites are random, so short-circuiting mispredicts.
            char* out = good.data() + base[tau];
            const Coord w_lo = w.lo[0], w_hi = w.hi[0];
            std::array<const char*, 8> src{};
            std::array<Coord, 8> shift{};
            std::size_t k = 0;
            bool any_end = false;
            for (const auto& so : model.split_offsets) {
              const Coord lv = tau + so.u;
              if (lv >= T_inf) {
                any_end = true;
                continue;
              }
              if (k == src.size()) throw std::logic_error("density: too many offsets for the d == 2 path");
              src[k] = good.data() + base[lv];
              shift[k++] = -so.y[0] - win[lv].lo[0];
            }
            for (Coord x = w_lo; x <= w_hi; ++x) {
              char ok = any_end;
              for (std::size_t j = 0; j < k; ++j) ok |= src[j][x + shift[j]];
              out[x - w_lo] = ok & static_cast<char>(f.open_in_row1(row, x));
            }
            continue;
          }
          std::size_t idx = base[tau];
          for_each_point(w, [&](std::span<const Coord> x) {
            bool ok = false;
            for (const auto& so : model.split_offsets) {
              const Coord lv = tau + so.u;
              if (lv >= T_inf) {
                ok = true;
                break;
              }
              for (int i = 0; i < D; ++i) z[i] = x[i] - so.y[i];
              if (good[flat(lv, z)]) {
                ok = true;
                break;
              }
            }
            good[idx++] = ok && f.open_in_row(row, x);
          });
        }
        std::vector<double> ys;
        for (Coord n : ns) {
          std::uint64_t cnt = 0, tot = 0;
          Box bn = symmetric_box(D, n);
          for (auto& h : bn.hi) --h;  // [-n, n)
          for (int s = 0; s < R; ++s)
            for_each_point(bn, [&](std::span<const Coord> x) {
              cnt += good[flat(s, x)];
              ++tot;
            });
          ys.push_back(static_cast<double>(cnt) / static_cast<double>(tot));
        }
        return ys;
      });
  DensitySpectrum out;
  out.levels = levels;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    DensityLevel dl;
    dl.n = ns[k];
    for (const auto& s : samples) dl.samples.push_back(s[k]);
    dl.mean = mean_of(dl.samples);
    for (double a : levels) {
      auto c = std::count_if(dl.samples.begin(), dl.samples.end(), [a](double y) { return y <= a; });
      dl.below.push_back(static_cast<double>(c) / static_cast<double>(reps));
    }
    dl.histogram.assign(20, 0);
    for (double y : dl.samples) ++dl.histogram[std::min<std::size_t>(19, static_cast<std::size_t>(y * 20))];
    out.report.summary.push_back({"density_n" + std::to_string(dl.n), p, T_inf, reps, dl.mean, run.seed});
    out.report.details["sizes"].push_back({{"n", dl.n}, {"mean", dl.mean.mean},
                                           {"stderr", dl.mean.stderr_}, {"below", dl.below},
                                           {"histogram", dl.histogram}});
    out.sizes.push_back(std::move(dl));
  }
  out.report.details["levels"] = levels;
  for (std::size_t i = 0; i < reps; ++i) out.report.records.push_back({{"replica", i}, {"Y", samples[i]}});
  return out;
}

// ---- cone ----------------------------------------------------------------------------------

ConeSurvival restricted_cone_survival(const NormalizedModel& model, double p, const Polytope& O,
                                      Coord T, Coord t0, std::uint64_t reps, const Run& run,
                                      const ShapeEstimate* shape) {
  const int D = model.spatial_dim();
  const int R = model.R;
  if (t0 < R) throw std::invalid_argument("start window t0 must be at least R");
  if (T <= t0) throw std::invalid_argument("T must exceed t0");
  const Coord bound = ceil_of(model.gamma) + 2;
  if (shape) {
    // O must sit strictly inside every supporting half-space of U_hat; checked
    // on the lattice points of O at scale 64.
    const Coord scale = 64;
    std::vector<Coord> site(D + 1);
    site[D] = scale;
    Box probe = symmetric_box(D, bound * scale);
    bool ok = true;
    std::string where;
    for_each_point(probe, [&](std::span<const Coord> x) {
      if (!ok) return;
      std::copy(x.begin(), x.end(), site.begin());
      if (!cone_contains(O, site)) return;
      for (std::size_t k = 0; k < shape->directions.size(); ++k)
        if (dot(x, shape->directions[k]) / scale >= shape->support[k]) {
          ok = false;
          where = "point " + std::to_string(static_cast<double>(x[0]) / scale) +
                  " on direction " + std::to_string(k) + " (support " +
                  std::to_string(shape->support[k]) + ")";
          return;
        }
    });
    if (!ok) throw Refusal("ConeOutsideShape", "cone base reaches the estimated shape at " + where);
  }
  // Every cone site up to t0 is a start; by additivity the union equals the
  // process from the cone's slab at times t0-R+1 .. t0.
  const Coord origin = t0 - R + 1;
  std::vector<SlabSite> A;
  std::vector<Coord> site(D + 1);
  for (int s = 0; s < R; ++s) {
    Coord tt = origin + s;
    site[D] = tt;
    for_each_point(symmetric_box(D, bound * tt), [&](std::span<const Coord> x) {
      std::copy(x.begin(), x.end(), site.begin());
      if (cone_contains(O, site)) A.push_back(SlabSite{std::vector<Coord>(x.begin(), x.end()), s});
    });
  }
  if (A.empty()) throw Refusal("EmptyCone", "no lattice site of the cone up to t0");
  const DomainSpec dom = DomainSpec::in_cone(O);
  ProcessState init = initial_state(model, A, dom, origin);
  auto hits = run_replicas<char>(reps, run.threads, [&](std::size_t i) -> char {
    Probes pr;
    pr.counts = false;
    return evolve(model, init, replica_field(model, p, run.seed, i), dom, T - origin, pr).survived();
  });
  ConeSurvival out;
  out.start_window = t0;
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    k += hits[i];
    out.report.records.push_back({{"replica", i}, {"percolates", hits[i] != 0}});
  }
  out.percolates = proportion(k, reps);
  out.report.summary.push_back({"cone", p, T, reps, out.percolates, run.seed});
  out.report.details = {{"start_window", t0}, {"start_sites", A.size()},
                        {"policy", "all cone sites at times <= t0 are starts"}};
  return out;
}

}  // namespace gosp
