#pragma once

#include "gosp/rational.hpp"

#include <json.hpp>

#include <span>
#include <vector>

namespace gosp {

// Integer box prod [lo_i, hi_i), used for spatial windows.
struct Box {
  std::vector<Coord> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  Coord extent(int i) const { return hi[i] - lo[i]; }
  std::size_t volume() const;
  bool empty() const;
  bool contains(std::span<const Coord> x) const;
  Box dilated(Coord r) const;
  Box dilated(const std::vector<Coord>& r) const;
  Box hull(const Box& other) const;
  bool includes(const Box& inner) const;
  bool operator==(const Box&) const = default;
};

struct BlockGeometry {
  std::vector<Coord> w;       // half-widths, one per spatial axis
  Coord h = 1;
  std::vector<Rational> v;    // tilt

  int spatial_dim() const { return static_cast<int>(w.size()); }
};

// B(w,h,v) translated by a (possibly rational) offset in space-time.
struct Block {
  BlockGeometry g;
  std::vector<Rational> offset;  // d entries, time last; empty means zero
};

struct HalfSpace {
  std::vector<Rational> a;
  Rational b;  // a . x <= b
};

// Convex polytope in R^{d-1} given by half-spaces.
struct Polytope {
  std::vector<HalfSpace> faces;

  static Polytope interval(Rational lo, Rational hi);
  bool contains(std::span<const Rational> x) const;
};

bool block_contains(const BlockGeometry& g, std::span<const Coord> site);
bool block_contains(const Block& b, std::span<const Coord> site);
BlockGeometry box_geometry(Coord n, int spatial_dim, int R);  // B_n
bool cone_contains(const Polytope& O, std::span<const Coord> site);

struct BgRegions {
  Block source;
  Block target_left, target_right;
  Block envelope;
};
BgRegions bg_target_blocks(const BlockGeometry& g);

// Integer range of x with x - t v inside [-w, w) along one axis at time t.
struct IntRange {
  Coord lo, hi;  // [lo, hi)
};
IntRange block_row_range(const BlockGeometry& g, int axis, Coord t, const Rational& shift = 0);

BlockGeometry geometry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BlockGeometry& g);

}  // namespace gosp
