#pragma once

// Reference implementations by exhaustive path enumeration. They share no
// code with the engine beyond the field and domain predicates.

#include "gosp/dynamics.hpp"

#include <functional>
#include <set>
#include <vector>

namespace oracle {

using gosp::Coord;
using gosp::Site;
using OpenFn = std::function<bool(const Site&)>;

inline Site add(const Site& a, const gosp::Offset& x, int sign = 1) {
  Site b = a;
  for (std::size_t k = 0; k < b.size(); ++k) b[k] += sign * x[k];
  return b;
}

// Slab sites (x, s) such that some a in A has a path to (x, T + s) whose
// sites after the start are admissible and sit at time >= R.
inline std::set<gosp::SlabSite> xi(const gosp::NormalizedModel& m, const std::vector<gosp::SlabSite>& A,
                                   Coord T, const OpenFn& admissible) {
  std::set<gosp::SlabSite> out;
  const Coord top = T + m.R;  // exclusive
  std::function<void(const Site&)> walk = [&](const Site& c) {
    Coord t = c.back();
    if (t >= T && t < top) out.insert({Site(c.begin(), c.end() - 1), static_cast<int>(t - T)});
    for (const auto& x : m.spec.offsets) {
      Site n = add(c, x);
      if (n.back() >= top || n.back() < m.R || !admissible(n)) continue;
      walk(n);
    }
  };
  for (const auto& a : A) {
    Site c = a.x;
    c.push_back(a.s);
    walk(c);
  }
  return out;
}

inline bool reaches(const gosp::NormalizedModel& m, const Site& a, const Site& b, const OpenFn& admissible) {
  if (a == b) return true;
  std::function<bool(const Site&)> walk = [&](const Site& c) {
    for (const auto& x : m.spec.offsets) {
      Site n = add(c, x);
      if (n.back() > b.back() || !admissible(n)) continue;
      if (n == b || walk(n)) return true;
    }
    return false;
  };
  return walk(a);
}

inline bool dual_reaches(const gosp::NormalizedModel& m, const Site& b, const Site& a, const OpenFn& admissible) {
  if (a == b) return true;
  std::function<bool(const Site&)> walk = [&](const Site& c) {
    if (!admissible(c)) return false;
    for (const auto& x : m.spec.offsets) {
      Site n = add(c, x, -1);
      if (n.back() < a.back()) continue;
      if (n == a || walk(n)) return true;
    }
    return false;
  };
  return walk(b);
}

// Dual chain from A in the dual slab anchored at `origin`: slab sites (x, s)
// at absolute time origin - T - s reachable by dual paths.
inline std::set<gosp::SlabSite> dual_xi(const gosp::NormalizedModel& m, const std::vector<gosp::SlabSite>& A,
                                        Coord T, Coord origin, const OpenFn& admissible) {
  std::set<gosp::SlabSite> out;
  // Work in reversed time r = origin - t.
  auto rtime = [&](const Site& c) { return origin - c.back(); };
  const Coord top = T + m.R;
  std::function<void(const Site&)> walk = [&](const Site& c) {
    Coord r = rtime(c);
    if (r >= T && r < top) out.insert({Site(c.begin(), c.end() - 1), static_cast<int>(r - T)});
    if (!admissible(c)) return;
    for (const auto& x : m.spec.offsets) {
      Site n = add(c, x, -1);
      Coord rn = rtime(n);
      if (rn >= top || rn < m.R) continue;
      walk(n);
    }
  };
  for (const auto& a : A) {
    Site c = a.x;
    c.push_back(origin - a.s);
    walk(c);
  }
  return out;
}

// Exact P(xi^o_T nonempty) by enumerating all configurations of the sites
// reachable from the origin within T + R - 1 time units.
inline double survival_probability(const gosp::NormalizedModel& m, Coord T, double p, bool dual = false) {
  std::vector<Site> cone;
  std::set<Site> seen;
  const int d = m.dim();
  Site o(d, 0);
  std::function<void(const Site&)> collect = [&](const Site& c) {
    for (const auto& x : m.spec.offsets) {
      Site n = add(c, x, dual ? -1 : 1);
      Coord r = dual ? -n.back() : n.back();
      if (r >= T + m.R || r < m.R) continue;
      if (seen.insert(n).second) {
        cone.push_back(n);
        collect(n);
      }
    }
  };
  collect(o);
  if (dual) cone.push_back(o);  // the dual start must be open
  const std::size_t n = cone.size();
  double total = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::set<Site> open;
    int k = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) {
        open.insert(cone[i]);
        ++k;
      }
    OpenFn adm = [&](const Site& s) { return open.count(s) > 0; };
    bool alive = dual ? !dual_xi(m, {{Site(d - 1, 0), 0}}, T, 0, adm).empty()
                      : !xi(m, {{Site(d - 1, 0), 0}}, T, adm).empty();
    if (alive) total += std::pow(p, k) * std::pow(1 - p, static_cast<double>(n - k));
  }
  return total;
}

}  // namespace oracle
