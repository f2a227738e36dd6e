#include "gosp/estimators.hpp"
#include "gosp/replicas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_set>

namespace gosp {

using nlohmann::json;

namespace {

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

Estimate collect(const std::vector<char>& hits, Report& rep, const char* key) {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    k += hits[i];
    rep.records.push_back({{"replica", i}, {key, hits[i] != 0}});
  }
  return proportion(k, hits.size());
}

// Uniform integer in [lo, hi) from a hash stream.
Coord pick(std::uint64_t& state, Coord lo, Coord hi) {
  state = mix64(state + kGolden);
  return lo + static_cast<Coord>(state % static_cast<std::uint64_t>(hi - lo));
}

}  // namespace

// ---- crossing ------------------------------------------------------------------------------

CrossingResult crossing_probability(const NormalizedModel& model, double p, Coord L, double eps,
                                    const Rational& slope, std::uint64_t reps, const Run& run) {
  if (model.dim() != 2) throw DimensionNot2();
  if (L < 1 || !(eps > 0)) throw std::invalid_argument("crossing needs L >= 1 and eps > 0");
  const int R = model.R;
  CrossingResult out;
  out.width = std::max<Coord>(1, static_cast<Coord>(std::floor(eps * static_cast<double>(L))));
  BlockGeometry g{{out.width}, L + R, {slope}};
  const DomainSpec dom = DomainSpec::in_block(Block{g, {}});
  // The left half slab, truncated where no first step can enter the box.
  Rational lowest = std::min(Rational(0), slope * (2 * R));
  Coord lo = floor_of(lowest) - out.width - ceil_of(model.gamma * R) - 1;
  std::vector<SlabSite> A;
  for (int s = 0; s < R; ++s)
    for (Coord x = lo; x <= 0; ++x) A.push_back(SlabSite{{x}, s});
  ProcessState init = initial_state(model, A, dom);
  auto hits = run_replicas<char>(reps, run.threads, [&](std::size_t i) -> char {
    Probes pr;
    pr.counts = false;
    return evolve(model, init, replica_field(model, p, run.seed, i), dom, L, pr).survived();
  });
  out.crossed = collect(hits, out.report, "crossed");
  out.report.summary.push_back({"crossing", p, L, reps, out.crossed, run.seed});
  out.report.details = {{"width", out.width}, {"height", L + R}, {"slope", to_string(slope)},
                        {"start_lo", lo}};
  return out;
}

// ---- BG event ------------------------------------------------------------------------------

BgResult bg_event_probability(const NormalizedModel& model, double p, const BlockGeometry& g,
                              Coord n, std::uint64_t reps, const Run& run) {
  const int D = model.spatial_dim();
  const int R = model.R;
  if (g.spatial_dim() != D || static_cast<int>(g.v.size()) != D)
    throw std::invalid_argument("block geometry has the wrong dimension");
  if (n < 1 || n >= *std::min_element(g.w.begin(), g.w.end()))
    throw Refusal("GeometryPrecondition", "need 1 <= n < min w");
  if (g.h <= R) throw Refusal("GeometryPrecondition", "need h > R");
  const BgRegions reg = bg_target_blocks(g);
  const DomainSpec dom = DomainSpec::in_block(reg.envelope);
  const Coord t_lo = 7 * g.h, t_hi = 8 * g.h;  // target base times
  const Coord t_end = t_hi - 1;                // last time inside the envelope
  // Spatial box holding the envelope over the target times.
  Box area{std::vector<Coord>(D), std::vector<Coord>(D)};
  for (int i = 0; i < D; ++i) {
    Rational a = g.v[i] * t_lo, b = g.v[i] * t_end;
    area.lo[i] = floor_of(std::min(a, b)) - 4 * g.w[i] - 1;
    area.hi[i] = ceil_of(std::max(a, b)) + 4 * g.w[i] + 1;
  }
  const std::size_t vol = area.volume();
  auto flat = [&](std::span<const Coord> x) {
    std::size_t j = 0;
    for (int i = 0; i < D; ++i) {
      if (x[i] < area.lo[i] || x[i] >= area.hi[i]) return std::size_t(-1);
      j = j * static_cast<std::size_t>(area.extent(i)) + static_cast<std::size_t>(x[i] - area.lo[i]);
    }
    return j;
  };
  auto hits = run_replicas<char>(reps, run.threads, [&](std::size_t i) -> char {
    std::uint64_t h = replica_seed(run.seed ^ 0x6267ULL, i);
    Coord t = pick(h, 0, g.h);
    std::vector<Coord> x(D);
    for (int k = 0; k < D; ++k) {
      auto r = block_row_range(g, k, t);
      x[k] = pick(h, r.lo, r.hi);
    }
    std::vector<SlabSite> A;
    Box bn{std::vector<Coord>(D), std::vector<Coord>(D)};
    for (int k = 0; k < D; ++k) {
      bn.lo[k] = x[k] - n;
      bn.hi[k] = x[k] + n;
    }
    for (int s = 0; s < R; ++s)
      for_each_point(bn, [&](std::span<const Coord> z) {
        A.push_back(SlabSite{std::vector<Coord>(z.begin(), z.end()), s});
      });
    Engine e(model, replica_field(model, p, run.seed, i), dom);
    e.reset(initial_state(model, A, dom, t));
    // occ[tau - t_lo]: reachable sites at absolute time tau.
    std::vector<std::vector<char>> occ(static_cast<std::size_t>(t_end - t_lo + 1),
                                       std::vector<char>(vol, 0));
    std::vector<Coord> c(D);
    for (Coord tau = t + 1; tau <= t_end; ++tau) {
      e.advance();
      if (e.state().empty()) return 0;
      if (tau < t_lo) continue;
      auto& row = occ[tau - t_lo];
      bits::for_each_set(e.state().row_bits(0), [&](std::size_t idx) {
        e.state().coords_of(idx, c.data());
        auto j = flat(c);
        if (j != std::size_t(-1)) row[j] = 1;
      });
    }
    for (const Block* tb : {&reg.target_left, &reg.target_right}) {
      for (Coord s = t_lo; s < t_hi; ++s) {
        Box rows{std::vector<Coord>(D), std::vector<Coord>(D)};
        for (int k = 0; k < D; ++k) {
          auto r = block_row_range(g, k, s - t_lo, tb->offset[k]);
          rows.lo[k] = r.lo;
          rows.hi[k] = r.hi;
        }
        bool found = false;
        for_each_point(rows, [&](std::span<const Coord> y) {
          if (found) return;
          bool all = true;
          for (int r = 0; r < R && all; ++r) {
            if (s + r > t_end) {
              all = false;
              break;
            }
            const auto& row = occ[s + r - t_lo];
            Box tgt{std::vector<Coord>(D), std::vector<Coord>(D)};
            for (int k = 0; k < D; ++k) {
              tgt.lo[k] = y[k] - n;
              tgt.hi[k] = y[k] + n;
            }
            for_each_point(tgt, [&](std::span<const Coord> z) {
              if (!all) return;
              auto j = flat(z);
              all = j != std::size_t(-1) && row[j];
            });
          }
          found = all;
        });
        if (found) return 1;
      }
    }
    return 0;
  });
  BgResult out;
  out.event = collect(hits, out.report, "event");
  out.report.summary.push_back({"bgprobe", p, 8 * g.h, reps, out.event, run.seed});
  out.report.details = {{"geometry", to_json(g)}, {"n", n}};
  return out;
}

// ---- good blocks ---------------------------------------------------------------------------

GoodBlock good_block_probability(const NormalizedModel& model, double p, Coord L, Coord C,
                                 const std::vector<Rational>& v, std::uint64_t reps,
                                 const Run& run) {
  const int D = model.spatial_dim();
  const int R = model.R;
  if (model.dim() < 2) throw std::invalid_argument("good blocks need d >= 2");
  if (C < 2 || L < 1) throw std::invalid_argument("good blocks need C >= 2 and L >= 1");
  if (static_cast<int>(v.size()) != D) throw std::invalid_argument("tilt has the wrong dimension");
  const Rational quick(L, C);                      // tau < L/C counts as a quick death
  const Coord quick_t = ceil_of(quick);            // tau < L/C  <=>  tau < quick_t
  const Coord top = C * L;
  const Coord s_t = ceil_of(Rational(C * L) + quick);  // tau >= s  <=>  tau >= s_t
  const BlockGeometry base{std::vector<Coord>(D, L), R, v};

  // Spatial window holding B(3w,R,v) + u v for rows 0..R-1, padded by one.
  auto window_at = [&](Coord u) {
    Box b{std::vector<Coord>(D), std::vector<Coord>(D)};
    for (int i = 0; i < D; ++i) {
      Rational a = v[i] * u, c = v[i] * (u + R - 1);
      b.lo[i] = floor_of(std::min(a, c)) - 3 * L - 1;
      b.hi[i] = ceil_of(std::max(a, c)) + 3 * L + 2;
    }
    return b;
  };
  // Rational membership of x at row r in B(half, R, v) + u v + shift.
  auto in_tilted = [&](std::span<const Coord> x, int r, Coord u, const Rational& half,
                       int shift_axis, Coord shift) {
    for (int i = 0; i < D; ++i) {
      Rational c = x[i] - v[i] * (u + r) - (i == shift_axis ? shift : 0);
      if (c < -half || c >= half) return false;
    }
    return true;
  };

  struct Outcome {
    char e1 = 0, e2 = 0, e3 = 0;
  };
  auto res = run_replicas<Outcome>(reps, run.threads, [&](std::size_t rep) {
    Field f = replica_field(model, p, run.seed, rep);
    Outcome o;
    // Full-slab processes by origin, restricted to the coupling windows.
    std::map<std::pair<Coord, Coord>, ProcessState> full;
    auto full_at = [&](Coord origin, Coord u) -> const ProcessState& {
      auto key = std::make_pair(origin, u);
      auto it = full.find(key);
      if (it == full.end())
        it = full.emplace(key, full_slab_restricted(model, f, u - origin, window_at(u), origin)).first;
      return it->second;
    };
    // Event 3 on the untranslated slab.
    {
      const auto& xs = full_at(0, s_t);
      bool plus = false, minus = false;
      for (const auto& site : xs.sites()) {
        plus = plus || in_tilted(site.x, site.s, s_t, quick, D - 1, L);
        minus = minus || in_tilted(site.x, site.s, s_t, quick, D - 1, -L);
      }
      o.e3 = plus && minus;
    }
    bool e1 = true, e2 = true;
    Box sites{std::vector<Coord>(D), std::vector<Coord>(D)};
    for (Coord t = 0; t < R && (e1 || e2); ++t) {
      for (int k = 0; k < D; ++k) {
        auto r = block_row_range(base, k, t);
        sites.lo[k] = r.lo;
        sites.hi[k] = r.hi;
      }
      for_each_point(sites, [&](std::span<const Coord> x) {
        if (!e1 && !e2) return;
        const Coord origin = t - R + 1;
        Engine e(model, f, DomainSpec::full());
        e.reset(initial_state(model, {SlabSite{std::vector<Coord>(x.begin(), x.end()), R - 1}},
                              DomainSpec::full(), origin));
        auto compare = [&](Coord u) {
          // K at absolute time u against the full slab started at the same origin.
          const auto& fs = full_at(origin, u);
          bool ok = true;
          Box w = window_at(u);
          for (int r = 0; r < R && ok; ++r)
            for_each_point(w, [&](std::span<const Coord> z) {
              if (!ok || !in_tilted(z, r, u, Rational(3 * L), -1, 0)) return;
              ok = e.state().occupied(z, r) == fs.occupied(z, r);
            });
          return ok;
        };
        // Chain step k puts row 0 at absolute time origin + k.
        bool top_done = false;
        for (;;) {
          const Coord k = e.state().t(), now = origin + k;
          if (e.state().empty()) {
            if (k < quick_t) return;
            if (k < s_t) {
              e1 = false;
              return;
            }
          }
          if (now == top) {
            top_done = true;
            if (!compare(top)) e2 = false;
          }
          if (now == s_t) {
            if (!compare(s_t)) e2 = false;
            return;
          }
          if (e.state().empty()) {
            // Died after s but before reaching the absolute coupling times.
            if (!top_done && !compare(top)) e2 = false;
            if (!compare(s_t)) e2 = false;
            return;
          }
          e.advance();
        }
      });
    }
    o.e1 = e1;
    o.e2 = e2;
    return o;
  });
  GoodBlock out;
  std::uint64_t a = 0, b = 0, c = 0, all = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    a += res[i].e1;
    b += res[i].e2;
    c += res[i].e3;
    bool g = res[i].e1 && res[i].e2 && res[i].e3;
    all += g;
    out.report.records.push_back({{"replica", i}, {"event1", res[i].e1 != 0},
                                  {"event2", res[i].e2 != 0}, {"event3", res[i].e3 != 0},
                                  {"good", g}});
  }
  out.good = proportion(all, reps);
  out.event1 = proportion(a, reps);
  out.event2 = proportion(b, reps);
  out.event3 = proportion(c, reps);
  out.report.summary.push_back({"goodblock", p, s_t, reps, out.good, run.seed});
  out.report.details = {{"L", L}, {"C", C}, {"s", s_t}, {"quick", quick_t},
                        {"event1", out.event1.mean}, {"event2", out.event2.mean},
                        {"event3", out.event3.mean}};
  return out;
}

// ---- crossing paths ------------------------------------------------------------------------

ProbeShift thickening_probe(const NormalizedModel& model, Coord n, Coord max_t) {
  if (model.dim() != 2) throw DimensionNot2();
  const int R = model.R;
  Probes pr;
  pr.counts = false;
  pr.snapshot_every = 1;
  auto tr = evolve(model, {SlabSite{{0}, 0}}, Field(FieldSpec{0, 1.0, std::nullopt, 2}), DomainSpec::full(), max_t, pr);
  for (Coord t = 1; t <= max_t; ++t) {
    const auto& st = tr.snapshots.at(t);
    Box sup = st.support();
    std::optional<Coord> best;
    for (Coord v = sup.lo[0] + n; v + n <= sup.hi[0]; ++v) {
      bool all = true;
      for (int r = 0; r < R && all; ++r)
        for (Coord z = v - n; z < v + n && all; ++z) all = st.occupied(std::vector<Coord>{z}, r);
      if (all && (!best || std::abs(v) < std::abs(*best) || (std::abs(v) == std::abs(*best) && v < *best)))
        best = v;
    }
    if (best) return ProbeShift{t, *best};
  }
  throw std::runtime_error("no time up to " + std::to_string(max_t) + " fills a box of half-width " +
                           std::to_string(n));
}

namespace {

struct SiteHash {
  std::size_t operator()(const std::pair<Coord, Coord>& a) const {
    return static_cast<std::size_t>(mix64(static_cast<std::uint64_t>(a.first) * kGolden ^
                                          static_cast<std::uint64_t>(a.second)));
  }
};
using SiteSet = std::unordered_set<std::pair<Coord, Coord>, SiteHash>;

// Tilted box: t in [0, height), x - t slope in [lo, hi).
struct TiltedBox {
  Rational slope;
  Coord lo, hi, height;
  IntRange row(Coord t) const {
    Rational c = slope * t;
    return IntRange{ceil_of(c + lo), ceil_of(c + hi)};
  }
};

// Leftmost crossing path of the box from its bottom slab to times >= L.
std::optional<Path> leftmost_crossing(const NormalizedModel& model, const Field& f,
                                      const TiltedBox& b, Coord L) {
  const int R = model.R;
  std::vector<IntRange> rows(b.height);
  std::vector<std::vector<char>> good(b.height);
  for (Coord t = b.height - 1; t >= 0; --t) {
    rows[t] = b.row(t);
    good[t].assign(static_cast<std::size_t>(std::max<Coord>(0, rows[t].hi - rows[t].lo)), 0);
  }
  auto is_good = [&](Coord x, Coord t) {
    if (t >= b.height) return false;
    if (x < rows[t].lo || x >= rows[t].hi) return false;
    return good[t][x - rows[t].lo] != 0;
  };
  for (Coord t = b.height - 1; t >= 0; --t) {
    auto row = f.row(t);
    for (Coord x = rows[t].lo; x < rows[t].hi; ++x) {
      bool ok = f.open_in_row1(row, x);
      if (ok && t < L) {
        ok = false;
        for (const auto& so : model.split_offsets)
          if (is_good(x + so.y[0], t + so.u)) {
            ok = true;
            break;
          }
      }
      good[t][x - rows[t].lo] = ok;
    }
  }
  auto successor = [&](Coord x, Coord t) -> std::optional<std::pair<Coord, Coord>> {
    std::optional<std::pair<Coord, Coord>> best;
    for (const auto& so : model.split_offsets) {
      std::pair<Coord, Coord> c{x + so.y[0], t + so.u};
      if (is_good(c.first, c.second) && (!best || c < *best)) best = c;
    }
    return best;
  };
  std::optional<std::pair<Coord, Coord>> start;
  for (Coord t = 0; t < R && t < b.height; ++t)
    for (Coord x = rows[t].lo; x < rows[t].hi; ++x)
      if (successor(x, t) && (!start || std::make_pair(x, t) < *start)) start = std::make_pair(x, t);
  if (!start) return std::nullopt;
  Path path{*start};
  while (path.back().second < L) path.push_back(*successor(path.back().first, path.back().second));
  return path;
}

}  // namespace

CrossingSample analyse_crossing(const NormalizedModel& model, const FieldSpec& field,
                                const TransferGeometry& g, const ProbeShift& probe) {
  if (model.dim() != 2) throw DimensionNot2();
  const int R = model.R;
  const Coord w = std::max<Coord>(1, static_cast<Coord>(std::floor(g.box_eps * static_cast<double>(g.L))));
  // The boxes force gamma and gamma' to swap order only if the top of the left
  // box lies right of the top of the right box.
  if (g.alpha * g.L - 3 * w < g.beta * g.L + 3 * w)
    throw Refusal("BoxesDoNotSwap", "L (alpha - beta) must be at least 6 w; w = " + std::to_string(w));
  const TiltedBox left{g.alpha, -3 * w, -w, g.L + R};
  const TiltedBox right{g.beta, w, 3 * w, g.L + R};
  Field base(field);
  CrossingSample out;
  auto ga = leftmost_crossing(model, base, left, g.L);
  if (!ga) return out;
  auto gb = leftmost_crossing(model, base, right, g.L);
  if (!gb) return out;
  out.crossed = true;
  out.gamma = std::move(*ga);
  out.gamma_prime = std::move(*gb);

  SiteSet on_a(out.gamma.begin(), out.gamma.end());
  SiteSet on_b(out.gamma_prime.begin(), out.gamma_prime.end());
  for (const auto& a : out.gamma_prime)
    if (on_a.count(a)) {
      out.share_vertex = true;
      break;
    }
  for (const auto& a : out.gamma) {
    for (Coord z = -g.n; z < g.n && !out.hat_meets; ++z)
      for (int r = 0; r < R && !out.hat_meets; ++r)
        out.hat_meets = on_b.count({a.first + probe.v + z, a.second + probe.t + r}) > 0;
    if (out.hat_meets) break;
  }

  // Region for the sprinkled transfer: both paths plus the sites within rho of both.
  const Coord rho = std::abs(probe.v) + g.n + probe.t * ceil_of(model.gamma) + R;
  SiteSet near_a;
  for (const auto& a : out.gamma)
    for (Coord dx = -rho; dx <= rho; ++dx)
      for (Coord dt = -rho; dt <= rho; ++dt) near_a.insert({a.first + dx, a.second + dt});
  SiteSet region = on_a;
  region.insert(on_b.begin(), on_b.end());
  for (const auto& a : out.gamma_prime)
    for (Coord dx = -rho; dx <= rho; ++dx)
      for (Coord dt = -rho; dt <= rho; ++dt) {
        std::pair<Coord, Coord> z{a.first + dx, a.second + dt};
        if (near_a.count(z)) region.insert(z);
      }
  Field sprinkled(field, field.sprinkle_eps ? Field::Layer::Sprinkled : Field::Layer::Base);
  const auto src = out.gamma.front(), dst = out.gamma_prime.back();
  SiteSet seen{src};
  std::deque<std::pair<Coord, Coord>> queue{src};
  while (!queue.empty() && !out.transfer) {
    auto a = queue.front();
    queue.pop_front();
    for (const auto& so : model.split_offsets) {
      std::pair<Coord, Coord> c{a.first + so.y[0], a.second + so.u};
      if (!region.count(c) || seen.count(c)) continue;
      if (!sprinkled.open1(c.first, c.second)) continue;
      if (c == dst) {
        out.transfer = true;
        break;
      }
      seen.insert(c);
      queue.push_back(c);
    }
  }
  return out;
}

TransferResult path_crossing_transfer(const NormalizedModel& model, double p, double eps,
                                      const TransferGeometry& g, std::uint64_t reps,
                                      const Run& run, std::uint64_t retry) {
  if (model.dim() != 2) throw DimensionNot2();
  if (eps < 0 || eps > 1 - p + 1e-12) throw std::invalid_argument("eps must lie in [0, 1-p]");
  TransferResult out;
  out.probe = thickening_probe(model, g.n);
  const std::uint64_t budget = reps * retry;
  std::vector<CrossingSample> kept;
  std::uint64_t attempts = 0;
  const std::uint64_t batch = std::max<std::uint64_t>(64, 2 * reps);
  while (kept.size() < reps && attempts < budget) {
    std::uint64_t n = std::min(batch, budget - attempts);
    auto samples = run_replicas<CrossingSample>(n, run.threads, [&](std::size_t k) {
      FieldSpec fs{replica_seed(run.seed, attempts + k), p, std::min(eps, 1 - p), 2};
      return analyse_crossing(model, fs, g, out.probe);
    });
    for (std::uint64_t k = 0; k < n && kept.size() < reps; ++k) {
      out.report.records.push_back({{"attempt", attempts + k}, {"crossed", samples[k].crossed},
                                    {"share_vertex", samples[k].share_vertex},
                                    {"hat_meets", samples[k].hat_meets},
                                    {"transfer", samples[k].transfer}});
      if (samples[k].crossed) kept.push_back(std::move(samples[k]));
      if (kept.size() == reps) attempts += k + 1;
    }
    if (kept.size() < reps) attempts += n;
  }
  if (kept.empty())
    throw Refusal("NoCrossingFound", "no field crossed both boxes in " + std::to_string(budget) +
                                         " attempts");
  std::uint64_t tr = 0, hm = 0, sv = 0;
  for (const auto& s : kept) {
    tr += s.transfer;
    hm += s.hat_meets;
    sv += s.share_vertex;
  }
  out.crossing_samples = kept.size();
  out.crossing = proportion(kept.size(), attempts);
  out.transfer = proportion(tr, kept.size());
  out.hat_meets = proportion(hm, kept.size());
  out.share_vertex = proportion(sv, kept.size());
  out.report.summary.push_back({"crosspath_crossing", p, g.L, attempts, out.crossing, run.seed});
  out.report.summary.push_back({"crosspath_transfer", p, g.L, kept.size(), out.transfer, run.seed});
  out.report.summary.push_back({"crosspath_hat_meets", p, g.L, kept.size(), out.hat_meets, run.seed});
  out.report.summary.push_back({"crosspath_share_vertex", p, g.L, kept.size(), out.share_vertex, run.seed});
  out.report.details = {{"probe", {{"t", out.probe.t}, {"v", out.probe.v}, {"n", g.n}}},
                        {"attempts", attempts}, {"crossing_samples", kept.size()},
                        {"eps", eps}, {"box_eps", g.box_eps}};
  return out;
}

}  // namespace gosp
