#include "gosp/domain.hpp"

#include <stdexcept>

namespace gosp {

DomainSpec DomainSpec::half_space(int sign, int axis, Coord threshold) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("half-space sign must be +1 or -1");
  DomainSpec d;
  d.kind = Kind::HalfSpace;
  d.sign = sign;
  d.axis = axis;
  d.threshold = threshold;
  return d;
}

DomainSpec DomainSpec::in_block(struct Block b) {
  DomainSpec d;
  d.kind = Kind::Block;
  d.block = std::move(b);
  return d;
}

DomainSpec DomainSpec::in_cone(Polytope O) {
  DomainSpec d;
  d.kind = Kind::Cone;
  d.cone = std::move(O);
  return d;
}

DomainSpec DomainSpec::in_tube(Box spatial) {
  DomainSpec d;
  d.kind = Kind::Tube;
  d.tube = std::move(spatial);
  return d;
}

DomainSpec DomainSpec::torus(Coord n) {
  if (n < 1) throw std::invalid_argument("torus side must be positive");
  DomainSpec d;
  d.kind = Kind::Torus;
  d.torus_n = n;
  return d;
}

bool DomainSpec::contains(std::span<const Coord> x, Coord t) const {
  switch (kind) {
    case Kind::Full:
    case Kind::Torus:
      return true;
    case Kind::HalfSpace: {
      Coord c = axis == static_cast<int>(x.size()) ? t : x[axis];
      return sign * c >= threshold;
    }
    case Kind::Block: {
      std::vector<Coord> site(x.begin(), x.end());
      site.push_back(t);
      return block_contains(block, site);
    }
    case Kind::Cone: {
      std::vector<Coord> site(x.begin(), x.end());
      site.push_back(t);
      return cone_contains(cone, site);
    }
    case Kind::Tube:
      return tube.contains(x);
  }
  return false;
}

IntRange DomainSpec::row_interval(Coord t) const {
  const IntRange all{-kFar, kFar}, none{0, 0};
  switch (kind) {
    case Kind::Full:
    case Kind::Torus:
      return all;
    case Kind::HalfSpace:
      if (axis == 1) return sign * t >= threshold ? all : none;
      // sign * x >= threshold
      if (sign > 0) return IntRange{threshold, kFar};
      return IntRange{-kFar, -threshold + 1};
    case Kind::Block: {
      const auto& b = block;
      Rational ot = b.offset.empty() ? Rational(0) : b.offset[1];
      Rational ox = b.offset.empty() ? Rational(0) : b.offset[0];
      Rational rel = Rational(t) - ot;
      if (rel < 0 || rel >= b.g.h) return none;
      Rational c = ox + b.g.v[0] * rel;
      return IntRange{ceil_of(c - b.g.w[0]), ceil_of(c + b.g.w[0])};
    }
    case Kind::Cone: {
      if (t <= 0) return none;
      Coord lo = -kFar, hi = kFar;
      for (const auto& f : cone.faces) {
        // a x <= b t
        const Rational& a = f.a[0];
        Rational rhs = f.b * t;
        if (a > 0) hi = std::min(hi, floor_of(rhs / a) + 1);
        else if (a < 0) lo = std::max(lo, ceil_of(rhs / a));
        else if (rhs < 0) return none;
      }
      return lo < hi ? IntRange{lo, hi} : none;
    }
    case Kind::Tube:
      return IntRange{tube.lo[0], tube.hi[0]};
  }
  return none;
}

}  // namespace gosp
