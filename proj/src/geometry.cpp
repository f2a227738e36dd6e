#include "gosp/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace gosp {

std::size_t Box::volume() const {
  std::size_t v = 1;
  for (int i = 0; i < dim(); ++i) v *= static_cast<std::size_t>(std::max<Coord>(0, extent(i)));
  return v;
}

bool Box::empty() const {
  for (int i = 0; i < dim(); ++i)
    if (hi[i] <= lo[i]) return true;
  return false;
}

bool Box::contains(std::span<const Coord> x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] >= hi[i]) return false;
  return true;
}

Box Box::dilated(Coord r) const { return dilated(std::vector<Coord>(dim(), r)); }

Box Box::dilated(const std::vector<Coord>& r) const {
  Box b = *this;
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] -= r[i];
    b.hi[i] += r[i];
  }
  return b;
}

Box Box::hull(const Box& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  Box b = *this;
  for (int i = 0; i < dim(); ++i) {
    b.lo[i] = std::min(lo[i], other.lo[i]);
    b.hi[i] = std::max(hi[i], other.hi[i]);
  }
  return b;
}

bool Box::includes(const Box& inner) const {
  if (inner.empty()) return true;
  for (int i = 0; i < dim(); ++i)
    if (inner.lo[i] < lo[i] || inner.hi[i] > hi[i]) return false;
  return true;
}

Polytope Polytope::interval(Rational lo, Rational hi) {
  Polytope p;
  p.faces.push_back({{Rational(1)}, hi});
  p.faces.push_back({{Rational(-1)}, -lo});
  return p;
}

bool Polytope::contains(std::span<const Rational> x) const {
  for (const auto& f : faces) {
    Rational s = 0;
    for (std::size_t i = 0; i < f.a.size(); ++i) s += f.a[i] * x[i];
    if (s > f.b) return false;
  }
  return true;
}

bool block_contains(const BlockGeometry& g, std::span<const Coord> site) {
  const int D = g.spatial_dim();
  if (static_cast<int>(site.size()) != D + 1) throw std::invalid_argument("site dimension mismatch");
  Coord t = site[D];
  if (t < 0 || t >= g.h) return false;
  for (int i = 0; i < D; ++i) {
    Rational rel = Rational(site[i]) - g.v[i] * t;
    if (rel < -g.w[i] || rel >= g.w[i]) return false;
  }
  return true;
}

bool block_contains(const Block& b, std::span<const Coord> site) {
  const int D = b.g.spatial_dim();
  if (b.offset.empty()) return block_contains(b.g, site);
  Rational t = Rational(site[D]) - b.offset[D];
  if (t < 0 || t >= b.g.h) return false;
  for (int i = 0; i < D; ++i) {
    Rational rel = Rational(site[i]) - b.offset[i] - b.g.v[i] * t;
    if (rel < -b.g.w[i] || rel >= b.g.w[i]) return false;
  }
  return true;
}

BlockGeometry box_geometry(Coord n, int spatial_dim, int R) {
  return BlockGeometry{std::vector<Coord>(spatial_dim, n), R, std::vector<Rational>(spatial_dim, 0)};
}

bool cone_contains(const Polytope& O, std::span<const Coord> site) {
  Coord t = site.back();
  if (t <= 0) return false;
  std::vector<Rational> x;
  for (std::size_t i = 0; i + 1 < site.size(); ++i) x.emplace_back(site[i], t);
  return O.contains(x);
}

BgRegions bg_target_blocks(const BlockGeometry& g) {
  const int D = g.spatial_dim();
  BgRegions r;
  r.source = Block{g, {}};
  std::vector<Rational> off(D + 1);
  for (int i = 0; i < D; ++i) off[i] = g.v[i] * (7 * g.h);
  off[D] = 7 * g.h;
  r.target_left = Block{g, off};
  r.target_right = Block{g, off};
  r.target_left.offset[D - 1] -= 2 * g.w[D - 1];
  r.target_right.offset[D - 1] += 2 * g.w[D - 1];
  BlockGeometry env = g;
  for (auto& wi : env.w) wi *= 4;
  env.h = 8 * g.h;
  r.envelope = Block{env, {}};
  return r;
}

IntRange block_row_range(const BlockGeometry& g, int axis, Coord t, const Rational& shift) {
  Rational c = g.v[axis] * t + shift;
  // x - c in [-w, w)  <=>  x in [c - w, c + w)
  return IntRange{ceil_of(c - g.w[axis]), ceil_of(c + g.w[axis])};
}

BlockGeometry geometry_from_json(const nlohmann::json& j) {
  BlockGeometry g;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "w" && it.key() != "h" && it.key() != "v")
      throw std::invalid_argument("unknown geometry key \"" + it.key() + "\"");
  }
  const auto& w = j.at("w");
  if (w.is_array()) g.w = w.get<std::vector<Coord>>();
  else g.w = {w.get<Coord>()};
  g.h = j.at("h").get<Coord>();
  if (j.contains("v")) {
    const auto& v = j.at("v");
    auto one = [](const nlohmann::json& e) {
      return e.is_string() ? parse_rational(e.get<std::string>()) : Rational(e.get<Coord>());
    };
    if (v.is_array())
      for (const auto& e : v) g.v.push_back(one(e));
    else
      g.v.push_back(one(v));
  } else {
    g.v.assign(g.w.size(), 0);
  }
  if (g.v.size() != g.w.size()) throw std::invalid_argument("geometry w and v lengths differ");
  for (auto wi : g.w)
    if (wi < 1) throw std::invalid_argument("geometry w must be positive");
  if (g.h < 1) throw std::invalid_argument("geometry h must be positive");
  return g;
}

nlohmann::json to_json(const BlockGeometry& g) {
  std::vector<std::string> v;
  for (const auto& r : g.v) v.push_back(to_string(r));
  return nlohmann::json{{"w", g.w}, {"h", g.h}, {"v", v}};
}

}  // namespace gosp
