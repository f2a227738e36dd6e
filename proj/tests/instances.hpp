#pragma once

// Random small instances shared by the unit and acceptance suites.

#include "gosp/dynamics.hpp"
#include "oracle.hpp"

#include <random>

namespace instances {

using namespace gosp;

inline const NeighborhoodSpec kSkew = make_spec(2, {{-1, 1}, {0, 1}, {2, 1}});
inline const NeighborhoodSpec kOP = make_spec(2, {{0, 1}, {1, 1}});

inline std::vector<NeighborhoodSpec> model_pool() {
  return {
      kSkew,
      kOP,
      make_spec(2, {{-1, 1}, {0, 1}, {1, 1}}),
      make_spec(2, {{0, 1}, {1, 2}, {-1, 2}}),
      make_spec(2, {{1, 1}, {-2, 3}, {0, 1}}),
      make_spec(2, {{-1, 2}, {0, 1}, {3, 2}}),
      make_spec(3, {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}}),
      make_spec(3, {{-1, 0, 1}, {0, 1, 1}, {1, -1, 2}, {0, 0, 1}}),
  };
}

inline NormalizedModel random_model(std::mt19937_64& rng) {
  static const auto pool = model_pool();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() + 1);
  std::size_t k = pick(rng);
  if (k < pool.size()) return validate(pool[k]);
  // fresh random d = 2 neighbourhood
  std::uniform_int_distribution<int> yc(-2, 2), uc(1, 2), nc(2, 4);
  while (true) {
    NeighborhoodSpec s;
    s.d = 2;
    int n = nc(rng);
    for (int i = 0; i < n; ++i) s.offsets.push_back({yc(rng), uc(rng)});
    try {
      return validate(s);
    } catch (const ModelError&) {
    }
  }
}

struct Instance {
  NormalizedModel model;
  FieldSpec field;
  DomainSpec domain;
  std::vector<SlabSite> A;
  Coord T = 0;
  Coord width = 9;
};

inline Instance random_instance(std::mt19937_64& rng) {
  Instance in;
  in.model = random_model(rng);
  const int D = in.model.spatial_dim();
  std::uniform_real_distribution<double> pu(0.3, 0.95);
  in.field = FieldSpec{rng(), pu(rng), std::nullopt, in.model.dim()};
  std::uniform_int_distribution<Coord> wd(3, D == 1 ? 9 : 3), td(0, 6);
  in.width = wd(rng);
  in.T = td(rng);
  Box tube{std::vector<Coord>(D, 0), std::vector<Coord>(D, in.width)};
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0: in.domain = DomainSpec::full(); break;
    case 1:
    case 2: in.domain = DomainSpec::in_tube(tube); break;
    default: in.domain = DomainSpec::half_space(-1, 0, -(in.width - 1)); break;
  }
  std::uniform_int_distribution<Coord> xc(0, in.width - 1);
  std::uniform_int_distribution<int> sc(0, in.model.R - 1), nc(0, 4);
  int n = nc(rng);
  for (int i = 0; i < n; ++i) {
    SlabSite a{std::vector<Coord>(D), sc(rng)};
    for (auto& c : a.x) c = xc(rng);
    in.A.push_back(a);
  }
  return in;
}

inline oracle::OpenFn admissible(const Field& f, const DomainSpec& d) {
  return [&f, &d](const Site& s) {
    std::span<const Coord> x(s.data(), s.size() - 1);
    return d.contains(x, s.back()) && f.open(x, s.back());
  };
}

// Independent p = 1 support: the t-fold sumset of the spatial parts, with
// rows handled by a time-indexed dynamic program.
inline std::set<SlabSite> sumset_state(const NormalizedModel& m, Coord t) {
  // reach[tau] = spatial positions reachable at absolute time tau from the origin.
  std::vector<std::set<std::vector<Coord>>> reach(static_cast<std::size_t>(t + m.R));
  reach[0].insert(std::vector<Coord>(m.spatial_dim(), 0));
  for (Coord tau = 0; tau < t + m.R; ++tau)
    for (const auto& x : reach[tau])
      for (const auto& so : m.split_offsets) {
        Coord nt = tau + so.u;
        if (nt >= t + m.R || nt < m.R) continue;
        std::vector<Coord> y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += so.y[i];
        reach[nt].insert(y);
      }
  std::set<SlabSite> out;
  for (Coord tau = t; tau < t + m.R; ++tau)
    for (const auto& x : reach[tau]) out.insert({x, static_cast<int>(tau - t)});
  return out;
}

}  // namespace instances
