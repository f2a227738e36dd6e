#include <doctest.h>

#include "instances.hpp"

#include <random>

using namespace gosp;
using instances::kSkew;
using instances::kOP;

namespace {

std::vector<SlabSite> origin(int D) { return {SlabSite{std::vector<Coord>(D, 0), 0}}; }

std::uint64_t digest(const Trajectory& tr) {
  std::uint64_t h = 0;
  for (auto c : tr.counts) h = mix64(h ^ c);
  for (const auto& s : tr.final_state.sites()) {
    for (auto c : s.x) h = mix64(h + static_cast<std::uint64_t>(c));
    h = mix64(h + static_cast<std::uint64_t>(s.s));
  }
  return h;
}

}  // namespace

TEST_CASE("initial state") {
  auto m = validate(kSkew);
  auto st = initial_state(m, origin(1));
  CHECK(st.t() == 0);
  CHECK(st.site_set() == std::set<SlabSite>{{{0}, 0}});
  CHECK(initial_state(m, {}).empty());
  CHECK_THROWS(initial_state(m, {SlabSite{{0}, 1}}));
  // closed start sites are still occupied
  Field closed(FieldSpec{1, 0.0});
  CHECK(evolve(m, origin(1), closed, DomainSpec::full(), 0).final_state.count() == 1);
}

TEST_CASE("step examples") {
  auto m = validate(kOP);
  Field all(FieldSpec{3, 1.0});
  CHECK(step(m, initial_state(m, {}), all).empty());
  auto st = initial_state(m, origin(1));
  for (Coord t = 1; t <= 40; ++t) {
    st = step(m, st, all);
    std::set<SlabSite> expect;
    for (Coord x = 0; x <= t; ++x) expect.insert({{x}, 0});
    CHECK(st.site_set() == expect);
  }
  Field none(FieldSpec{3, 0.0});
  CHECK(step(m, initial_state(m, origin(1)), none).empty());
}

TEST_CASE("evolve examples") {
  auto m = validate(kOP);
  auto tr0 = evolve(m, origin(1), Field(FieldSpec{1, 0.0}), DomainSpec::full(), 10);
  CHECK(tr0.tau == std::optional<Coord>(1));
  auto tr1 = evolve(m, std::vector<SlabSite>{}, Field(FieldSpec{1, 0.5}), DomainSpec::full(), 10);
  CHECK(tr1.tau == std::optional<Coord>(0));
  // golden run, frozen from the first build after oracle agreement at T <= 6
  auto tr = evolve(m, origin(1), Field(FieldSpec{1, 0.8}), DomainSpec::full(), 64);
  auto again = evolve(m, origin(1), Field(FieldSpec{1, 0.8}), DomainSpec::full(), 64);
  CHECK(digest(tr) == digest(again));
  CHECK(tr.counts == again.counts);
  CHECK(digest(tr) == 6256604300176810170ULL);
  CHECK(tr.counts.back() == 18);
}

TEST_CASE("oracle agreement on random instances") {
  std::mt19937_64 rng(101);
  int nonempty = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto in = instances::random_instance(rng);
    Field f(in.field);
    auto adm = instances::admissible(f, in.domain);
    Probes pr;
    pr.snapshot_every = 1;
    auto tr = evolve(in.model, in.A, f, in.domain, in.T, pr);
    for (Coord t = 0; t <= in.T; ++t) {
      auto expect = oracle::xi(in.model, in.A, t, adm);
      auto it = tr.snapshots.find(t);
      std::set<SlabSite> got = it == tr.snapshots.end() ? std::set<SlabSite>{} : it->second.site_set();
      CHECK(got == expect);
      nonempty += t == in.T && !expect.empty();
    }
    Coord origin_time = in.T + in.model.R;
    auto dtr = dual_evolve(in.model, in.A, f, in.domain, in.T, origin_time);
    CHECK(dtr.final_state.site_set() == oracle::dual_xi(in.model, in.A, in.T, origin_time, adm));
  }
  CHECK(nonempty > 60);
}

TEST_CASE("reaches and duality on random instances") {
  std::mt19937_64 rng(202);
  int positives = 0;
  for (int trial = 0; trial < 600; ++trial) {
    auto in = instances::random_instance(rng);
    Field f(in.field);
    auto adm = instances::admissible(f, in.domain);
    const int D = in.model.spatial_dim();
    std::uniform_int_distribution<Coord> xc(0, in.width - 1), tc(0, 3), dt(0, 6);
    Site a(D + 1), b(D + 1);
    for (int i = 0; i < D; ++i) {
      a[i] = xc(rng);
      b[i] = xc(rng);
    }
    a[D] = tc(rng);
    b[D] = a[D] + dt(rng);
    bool r = reaches(in.model, a, b, f, in.domain);
    CHECK(r == oracle::reaches(in.model, a, b, adm));
    CHECK(r == dual_reaches(in.model, b, a, f, in.domain));
    CHECK(r == oracle::dual_reaches(in.model, b, a, adm));
    positives += r;
  }
  CHECK(positives > 30);
  CHECK(reaches(validate(kOP), {0, 0}, {0, 0}, Field(FieldSpec{1, 0.0})));
  CHECK_FALSE(reaches(validate(kOP), {0, 0}, {0, 1}, Field(FieldSpec{1, 0.0})));
}

TEST_CASE("dual examples") {
  auto m = validate(kSkew);
  auto closed = dual_evolve(m, origin(1), Field(FieldSpec{1, 0.0}), DomainSpec::full(), 3);
  CHECK(closed.tau == std::optional<Coord>(1));
  // p = 1: reflected sumset of the spatial parts
  auto tr = dual_evolve(m, origin(1), Field(FieldSpec{1, 1.0}), DomainSpec::full(), 6, 0,
                        Probes{.snapshot_every = 1});
  for (Coord t = 0; t <= 6; ++t) {
    std::set<SlabSite> expect;
    for (const auto& s : instances::sumset_state(m, t)) expect.insert({{-s.x[0]}, s.s});
    CHECK(tr.snapshots.at(t).site_set() == expect);
  }
}

TEST_CASE("structural identities") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = instances::random_model(rng);
    const int D = m.spatial_dim();
    std::uniform_int_distribution<Coord> xc(-6, 6);
    std::uniform_int_distribution<int> sc(0, m.R - 1);
    auto random_set = [&](int n) {
      std::vector<SlabSite> A;
      for (int i = 0; i < n; ++i) {
        SlabSite a{std::vector<Coord>(D), sc(rng)};
        for (auto& c : a.x) c = xc(rng);
        A.push_back(a);
      }
      return A;
    };
    auto A = random_set(3), B = random_set(3);
    auto AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    std::uint64_t seed = rng();
    const double p = 0.55 + 0.3 * (trial % 2);
    Field f(FieldSpec{seed, p, std::nullopt, m.dim()});
    Field f_hi(FieldSpec{seed, p + 0.1, std::nullopt, m.dim()});
    const Coord T = D == 1 ? 40 : 15;
    Probes pr;
    pr.snapshot_every = 1;
    auto ta = evolve(m, A, f, DomainSpec::full(), T, pr);
    auto tb = evolve(m, B, f, DomainSpec::full(), T, pr);
    auto tab = evolve(m, AB, f, DomainSpec::full(), T, pr);
    auto ta_hi = evolve(m, A, f_hi, DomainSpec::full(), T, pr);
    auto sites_at = [](const Trajectory& tr, Coord t) {
      auto it = tr.snapshots.find(t);
      return it == tr.snapshots.end() ? std::set<SlabSite>{} : it->second.site_set();
    };
    Rational g = m.gamma;
    for (Coord t = 0; t <= T; ++t) {
      auto sa = sites_at(ta, t), sb = sites_at(tb, t), sab = sites_at(tab, t);
      std::set<SlabSite> uni = sa;
      uni.insert(sb.begin(), sb.end());
      CHECK(sab == uni);
      for (const auto& s : sa) CHECK(sab.count(s));
      auto hi = sites_at(ta_hi, t);
      for (const auto& s : sa) CHECK(hi.count(s));
      if (t > 0) {
        auto prev = sites_at(ta, t - 1);
        for (int s = 0; s + 1 < m.R; ++s) {
          for (const auto& q : prev)
            if (q.s == s + 1) CHECK(sa.count({q.x, s}));
          for (const auto& q : sa)
            if (q.s == s) CHECK(prev.count({q.x, s + 1}));
        }
      }
      for (const auto& q : sa) {
        bool within = false;
        for (const auto& a : A) {
          bool ok = true;
          for (int i = 0; i < D; ++i)
            ok &= Rational(std::abs(q.x[i] - a.x[i])) <= g * (t + q.s - a.s);
          within |= ok;
        }
        CHECK(within);
      }
    }
  }
}

TEST_CASE("domain monotonicity") {
  std::mt19937_64 rng(404);
  auto m = validate(kSkew);
  for (int trial = 0; trial < 50; ++trial) {
    Field f(FieldSpec{rng(), 0.7});
    auto small = DomainSpec::in_tube(Box{{-5}, {6}});
    auto big = DomainSpec::in_tube(Box{{-9}, {12}});
    Probes pr;
    pr.snapshot_every = 1;
    auto a = evolve(m, origin(1), f, small, 25, pr);
    auto b = evolve(m, origin(1), f, big, 25, pr);
    auto c = evolve(m, origin(1), f, DomainSpec::full(), 25, pr);
    for (const auto& [t, st] : a.snapshots) {
      for (const auto& s : st.sites()) {
        CHECK(b.snapshots.at(t).occupied(s.x, s.s));
        CHECK(c.snapshots.at(t).occupied(s.x, s.s));
      }
    }
  }
}

TEST_CASE("p = 1 sumset law") {
  for (const auto& spec : {kSkew, kOP, make_spec(2, {{0, 1}, {1, 2}, {-1, 2}})}) {
    auto m = validate(spec);
    Probes pr;
    pr.snapshot_every = 1;
    auto tr = evolve(m, origin(1), Field(FieldSpec{77, 1.0}), DomainSpec::full(), 30, pr);
    for (Coord t = 0; t <= 30; ++t) CHECK(tr.snapshots.at(t).site_set() == instances::sumset_state(m, t));
  }
}

TEST_CASE("hitting data") {
  auto m = validate(kSkew);
  Field f(FieldSpec{5, 0.75});
  Probes pr;
  pr.hitting = true;
  pr.snapshot_every = 1;
  auto tr = evolve(m, origin(1), f, DomainSpec::full(), 60, pr);
  REQUIRE(tr.hitting);
  for (const auto& [x, t] : tr.hitting->entries()) {
    CHECK(t <= 60);
    CHECK(tr.snapshots.at(t).occupied(x, 0));
    for (Coord s = 0; s < t; ++s) {
      auto it = tr.snapshots.find(s);
      if (it != tr.snapshots.end()) CHECK_FALSE(it->second.occupied(x, 0));
    }
  }
}

TEST_CASE("hit and coupled regions") {
  auto m = validate(kSkew);
  Box win{{-30}, {31}};
  auto r0 = hit_and_coupled_regions(m, Field(FieldSpec{8, 0.8}), 0, win);
  CHECK(r0.K.sites() == std::vector<SlabSite>{{{0}, 0}});
  auto full = hit_and_coupled_regions(m, Field(FieldSpec{8, 1.0}), 30, win);
  CHECK(full.K.count() == win.volume());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Field f(FieldSpec{seed, 0.8});
    Coord need = required_dilation(m, 25);
    auto a = hit_and_coupled_regions(m, f, 25, win);
    auto b = hit_and_coupled_regions(m, f, 25, win, 2 * need);
    CHECK(a.H.rows == b.H.rows);
    CHECK(a.K.rows == b.K.rows);
    auto c = hit_and_coupled_regions(m, f, 26, win);
    for (const auto& s : a.H.sites()) CHECK(c.H.contains(s.x, s.s));
    CHECK_THROWS_AS(hit_and_coupled_regions(m, f, 25, win, need - 1), DilationTooSmall);
  }
}

TEST_CASE("edge tracks") {
  auto skew = validate(kSkew);
  Field all(FieldSpec{1, 1.0});
  auto r = edge_track(skew, all, Side::Right, 50);
  auto l = edge_track(skew, all, Side::Left, 50);
  for (Coord t = 0; t <= 50; ++t) {
    CHECK(r.values[t] == 2 * t);
    CHECK(l.values[t] == -t);
    CHECK(r.certified[t]);
  }
  auto op = validate(kOP);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto tr = edge_track(op, Field(FieldSpec{seed, 0.8}), Side::Right, 200);
    for (Coord t = 0; t <= 200; ++t) CHECK(tr.values[t] <= t);
    // truncation does not matter
    auto wide = edge_track(op, Field(FieldSpec{seed, 0.8}), Side::Right, 200, 1.0);
    CHECK(wide.values == tr.values);
  }
  auto dead = edge_track(op, Field(FieldSpec{1, 0.0}), Side::Right, 10);
  CHECK(dead.extinct_from == std::optional<Coord>(1));
  CHECK_THROWS_AS(edge_track(validate(make_spec(3, {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}})), Field(FieldSpec{1, 1.0, {}, 3}), Side::Right, 5), DimensionNot2);
}

TEST_CASE("torus extinction") {
  auto m = validate(kOP);
  CHECK(torus_extinction(m, Field(FieldSpec{1, 0.0}), 4, 100).tau == std::optional<Coord>(1));
  CHECK_FALSE(torus_extinction(m, Field(FieldSpec{1, 1.0}), 4, 1000).tau);
  CHECK_THROWS_AS(torus_extinction(validate(kSkew), Field(FieldSpec{1, 0.5}), 4, 10), TorusTooSmall);
  // Quotient dynamics agree with the planar process on the periodic field.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (Coord n : {4, 5, 70}) {
      Field f(FieldSpec{seed, 0.5});
      auto out = torus_extinction(m, f, n, 300);
      Field periodic(FieldSpec{seed, 0.5}, Field::Layer::Base, n);
      Coord limit = out.tau ? *out.tau : 300;
      for (Coord t = std::max<Coord>(0, limit - 2); t <= limit && t <= 60; ++t) {
        auto st = full_slab_restricted(m, periodic, t, Box{{0}, {n}});
        CHECK(st.empty() == (out.tau && t >= *out.tau));
      }
    }
  }
  auto skew = validate(kSkew);
  auto big = torus_extinction(skew, Field(FieldSpec{3, 0.45}), 9, 400);
  Field periodic(FieldSpec{3, 0.45}, Field::Layer::Base, 9);
  if (big.tau && *big.tau <= 60) {
    CHECK(full_slab_restricted(skew, periodic, *big.tau, Box{{0}, {9}}).empty());
    CHECK_FALSE(full_slab_restricted(skew, periodic, *big.tau - 1, Box{{0}, {9}}).empty());
  }
  CHECK(torus_extinction(m, Field(FieldSpec{12345, 0.5}), 4, 10000).tau == std::optional<Coord>(6));
}

TEST_CASE("tilted view") {
  auto m = validate(kOP);
  CHECK(tilted_period({Rational(0)}, 1) == 1);
  CHECK(tilted_period({Rational(1, 2)}, 1) == 2);
  CHECK(tilted_period({Rational(1, 2)}, 3) == 4);
  CHECK_THROWS_AS(rational_tilt({0.7071067811865476}), IrrationalTilt);
  Field f(FieldSpec{17, 0.8});
  Probes pr;
  pr.snapshot_every = 1;
  auto tr = evolve(m, origin(1), f, DomainSpec::full(), 40, pr);
  TiltedView flat(tr, {Rational(0)}, m.R);
  for (Coord t = 0; t < 39; ++t)
    for (Coord x = -3; x < 45; ++x) {
      std::vector<Coord> xs{x};
      CHECK(flat.xi_hat(t, xs, 0) == tr.snapshots.at(t).occupied(xs, 0));
    }
  TiltedView tilt(tr, {Rational(1)}, m.R);
  for (Coord t = 0; t < 39; ++t)
    for (Coord x = -5; x < 10; ++x) {
      std::vector<Coord> xs{x};
      Site target{x + t, t};
      CHECK(tilt.xi_hat(t, xs, 0) == reaches(m, {0, 0}, target, f));
    }
  TiltedView half(tr, {Rational(1, 2)}, m.R);
  for (Coord x = 0; x < 20; ++x) {
    std::vector<Coord> xs{x};
    for (Coord s = 0; s < 2; ++s) {
      auto th = half.t_hat(xs, s);
      if (th) {
        CHECK((*th - s) % 2 == 0);
        CHECK(reaches(m, {0, 0}, {x + (*th - s) / 2, *th}, f));
      }
    }
  }
  TiltedView sparse(evolve(m, origin(1), f, DomainSpec::full(), 10), {Rational(0)}, 1);
  std::vector<Coord> zero{0};
  CHECK_THROWS_AS((void)sparse.xi_hat(3, zero, 0), MissingSnapshots);
}
