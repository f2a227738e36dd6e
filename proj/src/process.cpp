#include "gosp/dynamics.hpp"

#include <algorithm>
#include <string>

namespace gosp {

namespace {

Box box_around(const std::vector<Coord>& lo, const std::vector<Coord>& hi_incl) {
  Box b{lo, hi_incl};
  for (auto& h : b.hi) ++h;
  return b;
}

}  // namespace

// ---- ProcessState -------------------------------------------------------

void ProcessState::set_window(const Box& b) {
  window_ = b;
  strides_.assign(D_, 1);
  for (int i = D_ - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * window_.extent(i + 1);
  words_ = bits::words_for(window_.volume());
  rows_.resize(R_);
  for (auto& r : rows_) r.assign(words_, 0);
  if (dir_ == Direction::Dual) {
    ext_.resize(R_);
    for (auto& r : ext_) r.assign(words_, 0);
    ext_ready_.assign(R_, 0);
  }
  extent_.resize(R_);
  for (auto& e : extent_) e.any = false;
}

std::size_t ProcessState::index_of(std::span<const Coord> x) const {
  std::size_t idx = 0;
  for (int i = 0; i < D_; ++i) idx += static_cast<std::size_t>((x[i] - window_.lo[i]) * strides_[i]);
  return idx;
}

void ProcessState::coords_of(std::size_t idx, Coord* out) const {
  for (int i = 0; i < D_; ++i)
    out[i] = window_.lo[i] + static_cast<Coord>(idx / strides_[i]) % window_.extent(i);
}

void ProcessState::rewindow(const Box& b) {
  ProcessState old = std::move(*this);
  *this = ProcessState{};
  dir_ = old.dir_;
  t_ = old.t_;
  origin_ = old.origin_;
  R_ = old.R_;
  D_ = old.D_;
  head_ = old.head_;
  set_window(b);
  for (int r = 0; r < R_; ++r) {
    extent_[r] = old.extent_[r];
    if (D_ == 1) {
      std::int64_t shift = old.window_.lo[0] - window_.lo[0];
      bits::copy_shifted(rows_[r], old.rows_[r], shift);
      if (dir_ == Direction::Dual) {
        ext_ready_[r] = old.ext_ready_[r];
        if (ext_ready_[r]) bits::copy_shifted(ext_[r], old.ext_[r], shift);
      }
    } else {
      std::vector<Coord> x(D_);
      bits::for_each_set(old.rows_[r], [&](std::size_t i) {
        old.coords_of(i, x.data());
        bits::set(rows_[r], index_of(x));
      });
      if (dir_ == Direction::Dual) {
        ext_ready_[r] = old.ext_ready_[r];
        if (ext_ready_[r])
          bits::for_each_set(old.ext_[r], [&](std::size_t i) {
            old.coords_of(i, x.data());
            bits::set(ext_[r], index_of(x));
          });
      }
    }
  }
}

void ProcessState::recompute_extent(int s) {
  auto& e = extent_[slot(s)];
  const auto& row = rows_[slot(s)];
  e.any = false;
  e.lo.assign(D_, 0);
  e.hi.assign(D_, 0);
  if (D_ == 1) {
    auto a = bits::first_set(row);
    if (a == bits::npos) return;
    e.any = true;
    e.lo[0] = window_.lo[0] + static_cast<Coord>(a);
    e.hi[0] = window_.lo[0] + static_cast<Coord>(bits::last_set(row));
    return;
  }
  std::vector<Coord> x(D_);
  bits::for_each_set(row, [&](std::size_t i) {
    coords_of(i, x.data());
    if (!e.any) {
      e.lo = x;
      e.hi = x;
      e.any = true;
    }
    for (int k = 0; k < D_; ++k) {
      e.lo[k] = std::min(e.lo[k], x[k]);
      e.hi[k] = std::max(e.hi[k], x[k]);
    }
  });
}

bool ProcessState::empty() const {
  for (const auto& e : extent_)
    if (e.any) return false;
  return true;
}

std::size_t ProcessState::count() const {
  std::size_t c = 0;
  for (const auto& r : rows_) c += bits::count(r);
  return c;
}

bool ProcessState::occupied(std::span<const Coord> x, int s) const {
  if (s < 0 || s >= R_ || rows_.empty() || !window_.contains(x)) return false;
  return bits::test(rows_[slot(s)], index_of(x));
}

std::vector<SlabSite> ProcessState::sites() const {
  std::vector<SlabSite> out;
  for (int s = 0; s < R_ && !rows_.empty(); ++s) {
    bits::for_each_set(rows_[slot(s)], [&](std::size_t i) {
      SlabSite site{std::vector<Coord>(D_), s};
      coords_of(i, site.x.data());
      out.push_back(std::move(site));
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::set<SlabSite> ProcessState::site_set() const {
  auto v = sites();
  return {v.begin(), v.end()};
}

Coord ProcessState::max_abs_coord() const {
  Coord m = -1;
  for (const auto& e : extent_)
    if (e.any)
      for (int k = 0; k < D_; ++k) m = std::max({m, -e.lo[k], e.hi[k]});
  return m;
}

StopInfo run_until(Engine& engine, Coord T, Coord extent_stop) {
  StopInfo out;
  auto& st = engine.state();
  for (;;) {
    out.t = st.t();
    if (st.empty()) {
      out.died = true;
      return out;
    }
    if (extent_stop > 0 && st.max_abs_coord() >= extent_stop) {
      out.extent = true;
      return out;
    }
    if (out.t >= T) return out;
    engine.advance();
  }
}

Box ProcessState::support() const {
  Box b;
  bool any = false;
  std::vector<Coord> lo(D_), hi(D_);
  for (const auto& e : extent_) {
    if (!e.any) continue;
    if (!any) {
      lo = e.lo;
      hi = e.hi;
      any = true;
      continue;
    }
    for (int k = 0; k < D_; ++k) {
      lo[k] = std::min(lo[k], e.lo[k]);
      hi[k] = std::max(hi[k], e.hi[k]);
    }
  }
  if (!any) return Box{std::vector<Coord>(D_, 0), std::vector<Coord>(D_, 0)};
  return box_around(lo, hi);
}

void ProcessState::assign(const NormalizedModel& model, const std::vector<SlabSite>& A,
                          Coord origin, Direction dir) {
  const int D = model.spatial_dim();
  dir_ = dir;
  t_ = 0;
  head_ = 0;
  origin_ = origin;
  R_ = model.R;
  D_ = D;
  Box b{std::vector<Coord>(D, 0), std::vector<Coord>(D, 1)};
  for (std::size_t k = 0; k < A.size(); ++k) {
    const auto& a = A[k];
    if (static_cast<int>(a.x.size()) != D || a.s < 0 || a.s >= model.R)
      throw std::invalid_argument("initial site outside the slab (row " + std::to_string(a.s) + ")");
    for (int i = 0; i < D; ++i) {
      b.lo[i] = k ? std::min(b.lo[i], a.x[i]) : a.x[i];
      b.hi[i] = k ? std::max(b.hi[i], a.x[i] + 1) : a.x[i] + 1;
    }
  }
  for (int i = 0; i < D; ++i) {
    b.lo[i] -= model.reach[i] + 8;
    b.hi[i] += model.reach[i] + 8;
  }
  set_window(b);
  for (const auto& a : A) bits::set(rows_[slot(a.s)], index_of(a.x));
  for (int s = 0; s < model.R; ++s) recompute_extent(s);
}

ProcessState initial_state(const NormalizedModel& model, const std::vector<SlabSite>& A,
                           const DomainSpec& domain, Coord origin, Direction dir) {
  (void)domain;  // the start set is admitted as given
  ProcessState st;
  st.assign(model, A, origin, dir);
  return st;
}

ProcessState full_slab_state(const NormalizedModel& model, const Box& spatial, Coord origin,
                             Direction dir) {
  const int D = model.spatial_dim();
  ProcessState st;
  st.dir_ = dir;
  st.origin_ = origin;
  st.R_ = model.R;
  st.D_ = D;
  std::vector<Coord> pad(D);
  for (int i = 0; i < D; ++i) pad[i] = model.reach[i] + 8;
  st.set_window(spatial.dilated(pad));
  if (!spatial.empty()) {
    std::vector<Coord> x = spatial.lo;
    while (true) {
      std::size_t idx = st.index_of(x);
      for (int s = 0; s < model.R; ++s) bits::set(st.rows_[s], idx);
      int k = D - 1;
      while (k >= 0 && ++x[k] == spatial.hi[k]) {
        x[k] = spatial.lo[k];
        --k;
      }
      if (k < 0) break;
    }
  }
  for (int s = 0; s < model.R; ++s) st.recompute_extent(s);
  return st;
}

// ---- Engine ---------------------------------------------------------------

Engine::Engine(const NormalizedModel& model, const Field& field, const DomainSpec& domain,
               ClipRule clip)
    : model_(model), field_(field), domain_(domain), clip_(std::move(clip)) {
  if (domain.kind == DomainSpec::Kind::Torus)
    throw std::invalid_argument("torus domains run through torus_extinction");
  if (field.dim() != model.dim()) throw std::invalid_argument("field and model dimensions differ");
}

void Engine::reset(ProcessState state) {
  st_ = std::move(state);
  shifts_.clear();
}

void Engine::ensure_margin(const Box& extra) {
  const int D = st_.D_;
  bool any = false;
  lo_.resize(D);
  hi_.resize(D);
  auto merge = [&](const std::vector<Coord>& a, const std::vector<Coord>& b, Coord hi_shift) {
    for (int k = 0; k < D; ++k) {
      Coord l = a[k], h = b[k] + hi_shift;
      lo_[k] = any ? std::min(lo_[k], l) : l;
      hi_[k] = any ? std::max(hi_[k], h) : h;
    }
    any = true;
  };
  for (const auto& e : st_.extent_)
    if (e.any) merge(e.lo, e.hi, 0);
  if (!extra.lo.empty() && !extra.empty()) merge(extra.lo, extra.hi, -1);
  if (!any) return;
  const Box& w = st_.window_;
  bool inside = true;
  std::size_t need = 1;
  for (int k = 0; k < D; ++k) {
    Coord r = model_.reach[k];
    if (lo_[k] - r < w.lo[k] || hi_[k] + r + 1 > w.hi[k]) inside = false;
    need *= static_cast<std::size_t>(hi_[k] - lo_[k] + 1 + 2 * r);
  }
  if (inside && w.volume() <= 4 * need + 4096) return;
  Box b{lo_, hi_};
  for (int k = 0; k < D; ++k) {
    Coord pad = model_.reach[k] + 8 + (hi_[k] - lo_[k] + 1) / 4;
    b.lo[k] -= pad;
    b.hi[k] += pad + 1;
  }
  st_.rewindow(b);
  shifts_.clear();
}

void Engine::restart(const std::vector<SlabSite>& A, Coord origin, Direction dir) {
  st_.assign(model_, A, origin, dir);
  shifts_.clear();
}

void Engine::set_field(const Field& field) { field_ = field; }

void Engine::compute_ext(int s) {
  auto sl = st_.slot(s);
  auto& ext = st_.ext_[sl];
  const auto& row = st_.rows_[sl];
  std::fill(ext.begin(), ext.end(), 0);
  st_.ext_ready_[sl] = 1;
  if (!st_.extent_[sl].any) return;
  Coord tau = st_.absolute_time(s);
  auto hrow = field_.row(tau);
  if (st_.D_ == 1) {
    IntRange r = domain_.row_interval(tau);
    Coord wlo = st_.window_.lo[0];
    const FieldCache* cache = field_.cache();
    for (std::size_t w = 0; w < row.size(); ++w) {
      std::uint64_t c = row[w];
      if (!c) continue;
      Coord x0 = wlo + static_cast<Coord>(w) * 64;
      if (cache && cache->covers(x0, x0 + 64, tau)) {
        c &= cache->word(x0, tau);
      } else {
        std::uint64_t m = 0;
        for (std::uint64_t q = c; q; q &= q - 1) {
          int b = std::countr_zero(q);
          if (field_.open_in_row1(hrow, x0 + b)) m |= 1ULL << b;
        }
        c = m;
      }
      for (std::uint64_t q = c; q; q &= q - 1) {
        int b = std::countr_zero(q);
        Coord x = x0 + b;
        if (x < r.lo || x >= r.hi) c &= ~(1ULL << b);
      }
      ext[w] = c;
    }
    return;
  }
  std::vector<Coord> x(st_.D_);
  bits::for_each_set(row, [&](std::size_t i) {
    st_.coords_of(i, x.data());
    if (domain_.contains(x, tau) && field_.open_in_row(hrow, x)) bits::set(ext, i);
  });
}

void Engine::fill_new_row(bits::Words& out, ProcessState::Extent& ext, Coord tau, bool primal) {
  const int D = st_.D_;
  std::fill(out.begin(), out.end(), 0);
  ext.any = false;
  ext.lo.assign(D, 0);
  ext.hi.assign(D, 0);
  const Box& win = st_.window_;
  std::optional<Box> clip;
  if (clip_) clip = clip_(tau);

  if (D == 1) {
    Coord lo = -kFar, hi = kFar;
    if (primal) {
      IntRange r = domain_.row_interval(tau);
      lo = r.lo;
      hi = r.hi;
    }
    if (clip) {
      lo = std::max(lo, clip->lo[0]);
      hi = std::min(hi, clip->hi[0]);
    }
    Coord wlo = win.lo[0];
    Coord a = std::clamp<Coord>(lo - wlo, 0, win.extent(0));
    Coord b = std::clamp<Coord>(hi - wlo, 0, win.extent(0));
    if (a >= b) return;
    auto hrow = field_.row(tau);
    const FieldCache* cache = primal ? field_.cache() : nullptr;
    std::size_t first = bits::npos, last = 0;
    for (std::size_t w = static_cast<std::size_t>(a) / 64; w * 64 < static_cast<std::size_t>(b); ++w) {
      std::uint64_t c = cand_[w] & bits::range_mask(a, b, w);
      if (!c) continue;
      if (primal) {
        Coord x0 = wlo + static_cast<Coord>(w) * 64;
        if (cache && cache->covers(x0, x0 + 64, tau)) {
          c &= cache->word(x0, tau);
        } else {
          std::uint64_t m = 0;
          for (std::uint64_t q = c; q; q &= q - 1) {
            int bit = std::countr_zero(q);
            if (field_.open_in_row1(hrow, x0 + bit)) m |= 1ULL << bit;
          }
          c = m;
        }
      }
      if (!c) continue;
      out[w] = c;
      if (first == bits::npos) first = w * 64 + static_cast<std::size_t>(std::countr_zero(c));
      last = w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(c));
    }
    if (first != bits::npos) {
      ext.any = true;
      ext.lo[0] = wlo + static_cast<Coord>(first);
      ext.hi[0] = wlo + static_cast<Coord>(last);
    }
    return;
  }

  auto hrow = field_.row(tau);
  std::vector<Coord> x(D);
  bits::for_each_set(cand_, [&](std::size_t i) {
    st_.coords_of(i, x.data());
    if (clip && !clip->contains(x)) return;
    if (primal && !(domain_.contains(x, tau) && field_.open_in_row(hrow, x))) return;
    bits::set(out, i);
    if (!ext.any) {
      ext.lo = x;
      ext.hi = x;
      ext.any = true;
    }
    for (int k = 0; k < D; ++k) {
      ext.lo[k] = std::min(ext.lo[k], x[k]);
      ext.hi[k] = std::max(ext.hi[k], x[k]);
    }
  });
}

void Engine::advance() {
  const bool primal = st_.dir_ == Direction::Primal;
  const int R = st_.R_;
  if (st_.empty()) {
    ++st_.t_;
    return;
  }
  ensure_margin();
  if (!primal)
    for (int s = 0; s < R; ++s)
      if (!st_.ext_ready_[st_.slot(s)]) compute_ext(s);
  if (shifts_.empty()) {
    for (const auto& so : model_.split_offsets) {
      std::int64_t sh = 0;
      for (int i = 0; i < st_.D_; ++i) sh += so.y[i] * st_.strides_[i];
      shifts_.push_back(sh);
    }
  }
  cand_.assign(st_.words_, 0);
  bool any = false;
  for (std::size_t k = 0; k < model_.split_offsets.size(); ++k) {
    int s = R - model_.split_offsets[k].u;
    auto sl = st_.slot(s);
    if (!st_.extent_[sl].any) continue;
    const auto& src = primal ? st_.rows_[sl] : st_.ext_[sl];
    bits::or_shifted(cand_.data(), src.data(), st_.words_, primal ? shifts_[k] : -shifts_[k]);
    any = true;
  }
  Coord tau = primal ? st_.origin_ + st_.t_ + R : st_.origin_ - (st_.t_ + R);
  auto sl = st_.slot(0);
  if (any) {
    fill_new_row(st_.rows_[sl], st_.extent_[sl], tau, primal);
  } else {
    std::fill(st_.rows_[sl].begin(), st_.rows_[sl].end(), 0);
    st_.extent_[sl].any = false;
  }
  if (!primal) st_.ext_ready_[sl] = 0;
  st_.head_ = (st_.head_ + 1) % R;
  ++st_.t_;
}

void Engine::add_top_row_sites(const std::vector<std::vector<Coord>>& xs) {
  if (xs.empty()) return;
  const int D = st_.D_;
  std::vector<Coord> lo = xs[0], hi = xs[0];
  for (const auto& x : xs)
    for (int k = 0; k < D; ++k) {
      lo[k] = std::min(lo[k], x[k]);
      hi[k] = std::max(hi[k], x[k]);
    }
  ensure_margin(box_around(lo, hi));
  int s = st_.R_ - 1;
  auto sl = st_.slot(s);
  for (const auto& x : xs) bits::set(st_.rows_[sl], st_.index_of(x));
  st_.recompute_extent(s);
  if (st_.dir_ == Direction::Dual) st_.ext_ready_[sl] = 0;
}

ProcessState step(const NormalizedModel& model, const ProcessState& state, const Field& field,
                  const DomainSpec& domain) {
  Engine e(model, field, domain);
  e.reset(state);
  e.advance();
  return e.state();
}

}  // namespace gosp
