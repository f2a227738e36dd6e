#pragma once

#include "gosp/geometry.hpp"

#include <limits>
#include <span>

namespace gosp {

inline constexpr Coord kFar = std::numeric_limits<Coord>::max() / 4;

// Restriction region for paths. Full places no restriction beyond the
// implicit requirement that new sites lie above the starting slab.
struct DomainSpec {
  enum class Kind { Full, HalfSpace, Block, Cone, Tube, Torus };
  Kind kind = Kind::Full;

  // HalfSpace: sign * x[axis] >= threshold (axis d-1 is time).
  int sign = 1;
  int axis = 0;
  Coord threshold = 0;
  struct Block block;
  Polytope cone;
  Box tube;
  Coord torus_n = 0;

  static DomainSpec full() { return {}; }
  static DomainSpec half_space(int sign, int axis, Coord threshold);
  static DomainSpec in_block(struct Block b);
  static DomainSpec in_cone(Polytope O);
  static DomainSpec in_tube(Box spatial);
  static DomainSpec torus(Coord n);

  bool is_full() const { return kind == Kind::Full; }
  bool contains(std::span<const Coord> x, Coord t) const;
  // Spatial dimension 1 only: allowed x at time t as [lo, hi).
  IntRange row_interval(Coord t) const;
};

}  // namespace gosp
