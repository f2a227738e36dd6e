#include "gosp/dynamics.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

namespace gosp {

// ---- HittingData ------------------------------------------------------------

std::optional<Coord> HittingData::time(std::span<const Coord> x) const {
  if (D_ == 1) {
    Coord i = x[0] - lo_;
    if (i < 0 || i >= static_cast<Coord>(dense_.size()) || dense_[i] < 0) return std::nullopt;
    return dense_[i];
  }
  auto it = sparse_.find(std::vector<Coord>(x.begin(), x.end()));
  if (it == sparse_.end()) return std::nullopt;
  return it->second;
}

void HittingData::record(std::span<const Coord> x, Coord t) {
  if (D_ == 1) {
    Coord c = x[0];
    if (dense_.empty()) {
      lo_ = c - 32;
      dense_.assign(65, -1);
    }
    if (c < lo_) {
      Coord grow = std::max<Coord>(lo_ - c, static_cast<Coord>(dense_.size()));
      dense_.insert(dense_.begin(), static_cast<std::size_t>(grow), -1);
      lo_ -= grow;
    }
    Coord i = c - lo_;
    if (i >= static_cast<Coord>(dense_.size()))
      dense_.resize(static_cast<std::size_t>(std::max<Coord>(i + 1, 2 * static_cast<Coord>(dense_.size()))), -1);
    if (dense_[i] < 0) dense_[i] = t;
    return;
  }
  sparse_.emplace(std::vector<Coord>(x.begin(), x.end()), t);
}

std::size_t HittingData::size() const {
  if (D_ == 1) return static_cast<std::size_t>(std::count_if(dense_.begin(), dense_.end(), [](Coord v) { return v >= 0; }));
  return sparse_.size();
}

Box HittingData::support() const {
  Box b{std::vector<Coord>(D_, 0), std::vector<Coord>(D_, 0)};
  bool any = false;
  for (const auto& [x, t] : entries()) {
    if (!any) {
      b.lo = x;
      b.hi = x;
      for (auto& h : b.hi) ++h;
      any = true;
      continue;
    }
    for (int k = 0; k < D_; ++k) {
      b.lo[k] = std::min(b.lo[k], x[k]);
      b.hi[k] = std::max(b.hi[k], x[k] + 1);
    }
  }
  return b;
}

std::vector<std::pair<std::vector<Coord>, Coord>> HittingData::entries() const {
  std::vector<std::pair<std::vector<Coord>, Coord>> out;
  if (D_ == 1) {
    for (std::size_t i = 0; i < dense_.size(); ++i)
      if (dense_[i] >= 0) out.push_back({{lo_ + static_cast<Coord>(i)}, dense_[i]});
    return out;
  }
  out.assign(sparse_.begin(), sparse_.end());
  return out;
}

// ---- evolve -------------------------------------------------------------------

namespace {

void observe(const ProcessState& st, Coord t, const Probes& probes, Trajectory& tr) {
  if (probes.counts) tr.counts.push_back(st.count());
  if (probes.edges) {
    Box sup = st.support();
    if (st.empty()) {
      tr.right_edge.push_back(-kFar);
      tr.left_edge.push_back(kFar);
    } else {
      tr.right_edge.push_back(sup.hi[0] - 1);
      tr.left_edge.push_back(sup.lo[0]);
    }
  }
  if (tr.hitting && !st.empty()) {
    const int D = st.spatial_dim();
    std::vector<Coord> x(D);
    bits::for_each_set(st.row_bits(0), [&](std::size_t i) {
      st.coords_of(i, x.data());
      tr.hitting->record(x, t);
    });
  }
  bool snap = probes.snapshot_every > 0 && t % probes.snapshot_every == 0;
  if (!snap)
    snap = std::find(probes.snapshot_times.begin(), probes.snapshot_times.end(), t) !=
           probes.snapshot_times.end();
  if (snap) tr.snapshots.emplace(t, st);
}

bool extent_hit(const ProcessState& st, Coord stop) {
  if (stop <= 0 || st.empty()) return false;
  Box sup = st.support();
  for (int k = 0; k < sup.dim(); ++k)
    if (-sup.lo[k] >= stop || sup.hi[k] - 1 >= stop) return true;
  return false;
}

Trajectory run(const NormalizedModel& model, const ProcessState& initial, const Field& field,
               const DomainSpec& domain, Coord T, const Probes& probes) {
  if (T < 0) throw std::invalid_argument("horizon must be non-negative");
  Engine e(model, field, domain, probes.clip);
  e.reset(initial);
  Trajectory tr;
  tr.horizon = T;
  if (probes.hitting) {
    if (initial.direction() != Direction::Primal)
      throw std::invalid_argument("hitting data is defined for the primal process");
    tr.hitting = HittingData(model.spatial_dim(), T);
  }
  observe(e.state(), 0, probes, tr);
  if (e.state().empty()) {
    tr.tau = 0;
  } else if (extent_hit(e.state(), probes.extent_stop)) {
    tr.extent_reached = 0;
  } else {
    for (Coord t = 1; t <= T; ++t) {
      e.advance();
      observe(e.state(), t, probes, tr);
      if (e.state().empty()) {
        tr.tau = t;
        break;
      }
      if (extent_hit(e.state(), probes.extent_stop)) {
        tr.extent_reached = t;
        break;
      }
    }
  }
  tr.last_t = e.state().t();
  tr.final_state = std::move(e.state());
  return tr;
}

}  // namespace

Trajectory evolve(const NormalizedModel& model, const ProcessState& initial, const Field& field,
                  const DomainSpec& domain, Coord T, const Probes& probes) {
  return run(model, initial, field, domain, T, probes);
}

Trajectory evolve(const NormalizedModel& model, const std::vector<SlabSite>& A, const Field& field,
                  const DomainSpec& domain, Coord T, const Probes& probes) {
  return run(model, initial_state(model, A, domain), field, domain, T, probes);
}

Trajectory dual_evolve(const NormalizedModel& model, const std::vector<SlabSite>& A,
                       const Field& field, const DomainSpec& domain, Coord T, Coord origin,
                       const Probes& probes) {
  return run(model, initial_state(model, A, domain, origin, Direction::Dual), field, domain, T,
             probes);
}

// ---- connectivity -------------------------------------------------------------

namespace {

// |b_i - x_i| <= gamma * dt for every spatial axis.
bool within_cone(const NormalizedModel& m, const Site& x, const Site& b, Coord dt) {
  if (dt < 0) return false;
  const int D = m.spatial_dim();
  for (int i = 0; i < D; ++i) {
    Coord dx = std::abs(b[i] - x[i]);
    if (Rational(dx) > m.gamma * dt) return false;
  }
  return true;
}

bool site_ok(const Field& field, const DomainSpec& domain, const Site& c) {
  std::span<const Coord> x(c.data(), c.size() - 1);
  return domain.contains(x, c.back()) && field.open(x, c.back());
}

}  // namespace

bool reaches(const NormalizedModel& model, const Site& a, const Site& b, const Field& field,
             const DomainSpec& domain) {
  if (a == b) return true;
  const int d = model.dim();
  if (!within_cone(model, a, b, b[d - 1] - a[d - 1])) return false;
  std::set<Site> seen{a};
  std::deque<Site> queue{a};
  while (!queue.empty()) {
    Site cur = std::move(queue.front());
    queue.pop_front();
    for (const auto& off : model.spec.offsets) {
      Site nxt = cur;
      for (int k = 0; k < d; ++k) nxt[k] += off[k];
      if (!within_cone(model, nxt, b, b[d - 1] - nxt[d - 1])) continue;
      if (seen.count(nxt) || !site_ok(field, domain, nxt)) continue;
      if (nxt == b) return true;
      seen.insert(nxt);
      queue.push_back(std::move(nxt));
    }
  }
  return false;
}

bool dual_reaches(const NormalizedModel& model, const Site& b, const Site& a, const Field& field,
                  const DomainSpec& domain) {
  if (a == b) return true;
  const int d = model.dim();
  if (!within_cone(model, a, b, b[d - 1] - a[d - 1])) return false;
  std::set<Site> seen{b};
  std::deque<Site> queue{b};
  while (!queue.empty()) {
    Site cur = std::move(queue.front());
    queue.pop_front();
    if (!site_ok(field, domain, cur)) continue;  // only open sites extend
    for (const auto& off : model.spec.offsets) {
      Site nxt = cur;
      for (int k = 0; k < d; ++k) nxt[k] -= off[k];
      if (nxt == a) return true;
      if (!within_cone(model, a, nxt, nxt[d - 1] - a[d - 1])) continue;
      if (seen.insert(nxt).second) queue.push_back(std::move(nxt));
    }
  }
  return false;
}

// ---- hit and coupled regions ---------------------------------------------------------

bool SlabRegion::contains(std::span<const Coord> x, int s) const {
  if (s < 0 || s >= R || !window.contains(x)) return false;
  std::size_t idx = 0, stride = 1;
  for (int i = window.dim() - 1; i >= 0; --i) {
    idx += static_cast<std::size_t>(x[i] - window.lo[i]) * stride;
    stride *= static_cast<std::size_t>(window.extent(i));
  }
  return rows[s][idx] != 0;
}

std::size_t SlabRegion::count() const {
  std::size_t c = 0;
  for (const auto& r : rows) c += static_cast<std::size_t>(std::count(r.begin(), r.end(), 1));
  return c;
}

std::vector<SlabSite> SlabRegion::sites() const {
  std::vector<SlabSite> out;
  const int D = window.dim();
  for (int s = 0; s < R; ++s) {
    for (std::size_t i = 0; i < rows[s].size(); ++i) {
      if (!rows[s][i]) continue;
      SlabSite site{std::vector<Coord>(D), s};
      std::size_t rest = i;
      for (int k = D - 1; k >= 0; --k) {
        auto e = static_cast<std::size_t>(window.extent(k));
        site.x[k] = window.lo[k] + static_cast<Coord>(rest % e);
        rest /= e;
      }
      out.push_back(std::move(site));
    }
  }
  return out;
}

DilationTooSmall::DilationTooSmall(Coord given, Coord required)
    : std::runtime_error("dilation " + std::to_string(given) + " below the required " +
                         std::to_string(required)),
      required_(required) {}

Coord required_dilation(const NormalizedModel& model, Coord t) {
  return ceil_of(model.gamma * (t + model.R - 1));
}

ProcessState full_slab_restricted(const NormalizedModel& model, const Field& field, Coord t,
                                  const Box& window, Coord origin, std::optional<Coord> dilation) {
  Coord need = required_dilation(model, t);
  Coord dil = dilation.value_or(need);
  if (dil < need) throw DilationTooSmall(dil, need);
  // Sites farther than gamma * (remaining time) from the window cannot influence it.
  Coord final_time = origin + t + model.R - 1;
  Rational g = model.gamma;
  ClipRule clip = [&window, final_time, g](Coord tau) {
    Coord r = ceil_of(g * (final_time - tau));
    return window.dilated(r);
  };
  Probes probes;
  probes.counts = false;
  probes.clip = clip;
  auto init = full_slab_state(model, window.dilated(dil), origin);
  auto tr = evolve(model, init, field, DomainSpec::full(), t, probes);
  return std::move(tr.final_state);
}

HitCoupled hit_and_coupled_regions(const NormalizedModel& model, const Field& field, Coord t,
                                   const Box& window, std::optional<Coord> dilation) {
  Coord need = required_dilation(model, t);
  Coord dil = dilation.value_or(need);
  if (dil < need) throw DilationTooSmall(dil, need);
  const int D = model.spatial_dim();
  Probes probes;
  probes.counts = false;
  probes.hitting = true;
  auto origin_run = evolve(model, {SlabSite{std::vector<Coord>(D, 0), 0}}, field,
                           DomainSpec::full(), t, probes);
  HitCoupled out;
  out.dilation = dil;
  out.hitting = std::move(*origin_run.hitting);
  out.origin_state = std::move(origin_run.final_state);
  out.origin_alive = !out.origin_state.empty() && out.origin_state.t() == t;
  const Box win = window.dim() == 0 ? out.hitting.support() : window;
  auto full = full_slab_restricted(model, field, t, win, 0, dil);

  const std::size_t vol = win.volume();
  out.H = SlabRegion{win, model.R, std::vector<std::vector<char>>(model.R, std::vector<char>(vol, 0))};
  out.K = out.H;
  std::vector<Coord> x = win.lo;
  for (std::size_t i = 0; i < vol; ++i) {
    auto ht = out.hitting.time(x);
    for (int s = 0; s < model.R; ++s) {
      if (ht && *ht <= t - s) out.H.rows[s][i] = 1;
      bool a = out.origin_alive && out.origin_state.occupied(x, s);
      bool b = full.occupied(x, s);
      out.K.rows[s][i] = a == b;
    }
    for (int k = D - 1; k >= 0; --k) {
      if (++x[k] < win.hi[k]) break;
      x[k] = win.lo[k];
    }
  }
  return out;
}

// ---- edges ---------------------------------------------------------------------------------

EdgeTrack edge_track(const NormalizedModel& model, const Field& field, Side side, Coord T,
                     double margin) {
  if (model.dim() != 2) throw DimensionNot2();
  EdgeTrack out;
  out.side = side;
  // The exact part of the truncated slab recedes at speed gamma while the edge
  // may move toward it at up to gamma, so the depth must exceed 2 gamma T.
  Coord M = ceil_of(model.gamma * (2 * T) * approximate(1.0 + margin, 1000)) + model.R;
  out.truncation = M;
  const Rational g = model.gamma;
  Box init;
  ClipRule clip;
  if (side == Side::Right) {
    init = Box{{-M}, {1}};
    clip = [M, g](Coord tau) { return Box{{ceil_of(g * tau - M)}, {kFar}}; };
  } else {
    init = Box{{0}, {M + 1}};
    clip = [M, g](Coord tau) { return Box{{-kFar}, {floor_of(Rational(M) - g * tau) + 1}}; };
  }
  Probes probes;
  probes.counts = false;
  probes.edges = true;
  probes.clip = clip;
  auto tr = evolve(model, full_slab_state(model, init), field, DomainSpec::full(), T, probes);
  const auto& vals = side == Side::Right ? tr.right_edge : tr.left_edge;
  for (std::size_t t = 0; t < vals.size(); ++t) {
    if (tr.tau && static_cast<Coord>(t) >= *tr.tau) break;
    out.values.push_back(vals[t]);
    // Positions at least gamma * (t + R - 1) inside the truncation are exact.
    Rational bound = g * static_cast<Coord>(t + model.R - 1) - M;
    bool ok = side == Side::Right ? Rational(vals[t]) >= bound : Rational(-vals[t]) >= bound;
    out.certified.push_back(ok);
  }
  if (tr.tau) out.extinct_from = *tr.tau;
  return out;
}

// ---- torus -----------------------------------------------------------------------------------

TorusOutcome torus_extinction(const NormalizedModel& model, const Field& field, Coord n,
                              Coord T_max) {
  if (n < 1) throw TorusTooSmall("torus side must be positive");
  if (!(Rational(n) > 2 * model.gamma * model.R))
    throw TorusTooSmall("torus side " + std::to_string(n) + " must exceed 2 * gamma * R = " +
                        to_string(2 * model.gamma * model.R));
  const int D = model.spatial_dim();
  const int R = model.R;
  Field f(field.spec(), field.layer(), n);
  std::size_t vol = 1;
  for (int i = 0; i < D; ++i) vol *= static_cast<std::size_t>(n);
  TorusOutcome out;
  out.T_max = T_max;

  auto mod = [n](Coord v) { Coord r = v % n; return r < 0 ? r + n : r; };
  std::vector<Coord> x(D);
  auto coords = [&](std::size_t idx) {
    for (int i = D - 1; i >= 0; --i) {
      x[i] = static_cast<Coord>(idx % static_cast<std::size_t>(n));
      idx /= static_cast<std::size_t>(n);
    }
  };

  if (D == 1 && n <= 64) {
    const std::uint64_t full = n == 64 ? ~0ULL : ((1ULL << n) - 1);
    std::vector<std::uint64_t> rows(R, full);
    std::vector<unsigned> rot;
    for (const auto& so : model.split_offsets) rot.push_back(static_cast<unsigned>(mod(so.y[0])));
    auto rotl = [n, full](std::uint64_t w, unsigned k) -> std::uint64_t {
      if (k == 0) return w;
      return ((w << k) | (w >> (n - k))) & full;
    };
    int head = 0;
    for (Coord t = 1; t <= T_max; ++t) {
      std::uint64_t cand = 0;
      for (std::size_t k = 0; k < rot.size(); ++k)
        cand |= rotl(rows[(head + R - model.split_offsets[k].u) % R], rot[k]);
      auto hrow = f.row(t + R - 1);
      std::uint64_t out_row = 0;
      for (std::uint64_t q = cand; q; q &= q - 1) {
        int b = std::countr_zero(q);
        if (f.open_in_row1(hrow, b)) out_row |= 1ULL << b;
      }
      rows[head] = out_row;
      head = (head + 1) % R;
      bool any = false;
      for (auto r : rows) any |= r != 0;
      if (!any) {
        out.tau = t;
        return out;
      }
    }
    return out;
  }

  // General case: index tables per offset.
  std::vector<std::vector<std::uint32_t>> src(model.split_offsets.size(), std::vector<std::uint32_t>(vol));
  for (std::size_t k = 0; k < model.split_offsets.size(); ++k) {
    for (std::size_t i = 0; i < vol; ++i) {
      coords(i);
      std::size_t j = 0;
      for (int a = 0; a < D; ++a) j = j * static_cast<std::size_t>(n) + static_cast<std::size_t>(mod(x[a] - model.split_offsets[k].y[a]));
      src[k][i] = static_cast<std::uint32_t>(j);
    }
  }
  std::vector<std::vector<char>> rows(R, std::vector<char>(vol, 1));
  int head = 0;
  std::vector<char> next(vol);
  for (Coord t = 1; t <= T_max; ++t) {
    auto hrow = f.row(t + R - 1);
    bool any_new = false;
    for (std::size_t i = 0; i < vol; ++i) {
      char c = 0;
      for (std::size_t k = 0; k < src.size() && !c; ++k)
        c = rows[(head + R - model.split_offsets[k].u) % R][src[k][i]];
      if (c) {
        coords(i);
        c = f.open_in_row(hrow, x) ? 1 : 0;
      }
      next[i] = c;
      any_new |= c != 0;
    }
    rows[head].swap(next);
    head = (head + 1) % R;
    bool any = any_new;
    for (const auto& r : rows)
      if (!any) any = std::find(r.begin(), r.end(), 1) != r.end();
    if (!any) {
      out.tau = t;
      return out;
    }
  }
  return out;
}

// ---- tilted lattice ---------------------------------------------------------------------------

Coord tilted_period(const std::vector<Rational>& v, int R) {
  Coord q = lcm_of_denominators(v);
  return q * ((R + q - 1) / q);
}

std::vector<Rational> rational_tilt(const std::vector<double>& v, std::int64_t max_den) {
  std::vector<Rational> out;
  for (double x : v) {
    Rational r = approximate(x, max_den);
    if (std::abs(to_double(r) - x) > 1e-14 * std::max(1.0, std::abs(x)))
      throw IrrationalTilt("IrrationalTilt: " + std::to_string(x) + " has no exact small rational form");
    out.push_back(r);
  }
  return out;
}

TiltedView::TiltedView(const Trajectory& traj, std::vector<Rational> v, int R, const Trajectory* full)
    : traj_(traj), full_(full), v_(std::move(v)), R_(R), period_(tilted_period(v_, R)) {}

bool TiltedView::row0(const Trajectory& tr, Coord time, std::span<const Coord> x) const {
  auto it = tr.snapshots.find(time);
  if (it == tr.snapshots.end()) {
    // Past extinction every later state is empty.
    if (tr.tau && time >= *tr.tau) return false;
    throw MissingSnapshots("MissingSnapshots: no snapshot at t=" + std::to_string(time));
  }
  return it->second.occupied(x, 0);
}

std::vector<Coord> TiltedView::shifted(std::span<const Coord> x, Coord k) const {
  std::vector<Coord> y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) {
    Rational s = v_[i] * k;
    if (s.denominator() != 1)
      throw std::invalid_argument("time " + std::to_string(k) + " is not a multiple of the tilt denominator");
    y[i] += s.numerator();
  }
  return y;
}

bool TiltedView::xi_hat(Coord t, std::span<const Coord> x, Coord s) const {
  if (s < 0 || s >= period_) throw std::out_of_range("tilted row outside the base");
  return row0(traj_, t + s, shifted(x, t));
}

bool TiltedView::k_hat(Coord t, std::span<const Coord> x, Coord s) const {
  if (!full_) throw MissingSnapshots("MissingSnapshots: coupled region needs the full-slab trajectory");
  if (s < 0 || s >= period_) throw std::out_of_range("tilted row outside the base");
  auto y = shifted(x, t);
  return row0(traj_, t + s, y) == row0(*full_, t + s, y);
}

std::optional<Coord> TiltedView::t_hat(std::span<const Coord> x, Coord s) const {
  if (s < 0 || s >= period_) throw std::out_of_range("tilted row outside the base");
  for (Coord k = 0;; ++k) {
    Coord t = s + k * period_;
    if (t > traj_.horizon) return std::nullopt;
    if (row0(traj_, t, shifted(x, k * period_))) return t;
  }
}

bool TiltedView::h_hat(Coord t, std::span<const Coord> x, Coord s) const {
  auto th = t_hat(x, s);
  return th && *th <= t;
}

}  // namespace gosp
