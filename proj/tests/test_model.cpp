#include <doctest.h>

#include "gosp/model.hpp"

#include <random>

using namespace gosp;

namespace {

const NeighborhoodSpec kSkew = make_spec(2, {{-1, 1}, {0, 1}, {2, 1}});

ModelErrorKind error_kind(const NeighborhoodSpec& s) {
  try {
    validate(s);
  } catch (const ModelError& e) {
    return e.kind();
  }
  FAIL("validate accepted");
  return ModelErrorKind::BadDimension;
}

}  // namespace

TEST_CASE("validate derives range and spread") {
  auto m = validate(kSkew);
  CHECK(m.R == 1);
  CHECK(m.gamma == Rational(2));
  CHECK(m.split_offsets.size() == 3);
  CHECK(m.reach == std::vector<Coord>{2});

  auto m2 = validate(make_spec(2, {{1, 2}, {0, 1}, {-3, 2}}));
  CHECK(m2.R == 2);
  CHECK(m2.gamma == Rational(3, 2));
  // canonical lexicographic order
  CHECK(m2.spec.offsets.front() == Offset{-3, 2});
}

TEST_CASE("validate diagnostics") {
  try {
    validate(make_spec(2, {{-1, 1}, {1, 1}}));
    FAIL("accepted a sublattice");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::ProperSublattice);
    CHECK(e.index() == 2);
  }
  CHECK(error_kind(make_spec(2, {{0, 1}})) == ModelErrorKind::TooFewOffsets);
  CHECK(error_kind(make_spec(2, {{0, 0}, {0, 1}})) == ModelErrorKind::ZeroOffset);
  CHECK(error_kind(make_spec(2, {{0, 1}, {0, 1}, {1, 1}})) == ModelErrorKind::DuplicateOffset);
  try {
    validate(make_spec(2, {{1, 0}, {0, 1}}));
    FAIL("accepted a flat offset");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::NonPositiveTimeComponent);
    CHECK(e.offending() == Offset{1, 0});
  }
  try {
    validate(make_spec(3, {{0, 0, 1}, {1, 0, 1}}));
    FAIL("accepted rank-deficient offsets");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelErrorKind::ProperSublattice);
    CHECK(e.index() == 0);
  }
}

TEST_CASE("orientation certificate") {
  auto u = orientation_certificate(make_spec(2, {{1, 0}, {0, 1}}));
  REQUIRE(u);
  CHECK(*u == std::vector<Rational>{1, 1});
  CHECK_FALSE(orientation_certificate(make_spec(2, {{0, 1}, {0, -1}})));
  auto u2 = orientation_certificate(make_spec(2, {{-1, 1}, {2, 1}}));
  REQUIRE(u2);
  CHECK(*u2 == std::vector<Rational>{0, 1});
  // Needs a non-axis direction.
  auto u3 = orientation_certificate(make_spec(3, {{1, -5, 0}, {0, 1, -5}, {-5, 0, 1}, {1, 1, 1}}));
  CHECK_FALSE(u3);
  auto u4 = orientation_certificate(make_spec(2, {{3, -1}, {-1, 3}}));
  REQUIRE(u4);
  CHECK(3 * (*u4)[0] - (*u4)[1] > 0);
  CHECK(-(*u4)[0] + 3 * (*u4)[1] > 0);
}

TEST_CASE("lattice index") {
  CHECK(lattice_index(make_spec(2, {{-1, 1}, {1, 1}})) == std::optional<std::uint64_t>(2));
  CHECK(lattice_index(make_spec(2, {{0, 1}, {1, 0}})) == std::optional<std::uint64_t>(1));
  CHECK(lattice_index(kSkew) == std::optional<std::uint64_t>(1));
  CHECK(lattice_index(make_spec(2, {{2, 2}, {4, 6}})) == std::optional<std::uint64_t>(4));
  CHECK_FALSE(lattice_index(make_spec(2, {{1, 1}, {2, 2}})));
  CHECK(lattice_index(make_spec(3, {{1, 0, 1}, {0, 1, 1}, {-1, -1, 1}})) == std::optional<std::uint64_t>(3));
}

TEST_CASE("random specs: validate agrees with certificate and index") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coord(-3, 3), count(2, 5), dim(2, 3);
  int accepted = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    NeighborhoodSpec s;
    s.d = dim(rng);
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
      Offset x(s.d);
      for (auto& c : x) c = coord(rng);
      s.offsets.push_back(x);
    }
    bool distinct_nonzero = true;
    for (std::size_t i = 0; i < s.offsets.size(); ++i) {
      if (std::all_of(s.offsets[i].begin(), s.offsets[i].end(), [](Coord c) { return c == 0; }))
        distinct_nonzero = false;
      for (std::size_t j = 0; j < i; ++j)
        if (s.offsets[i] == s.offsets[j]) distinct_nonzero = false;
    }
    bool normalised = std::all_of(s.offsets.begin(), s.offsets.end(), [](const Offset& x) { return x.back() >= 1; });
    auto idx = lattice_index(s);
    bool expect = distinct_nonzero && normalised && idx && *idx == 1;
    bool ok = true;
    NormalizedModel m;
    try {
      m = validate(s);
    } catch (const ModelError&) {
      ok = false;
    }
    CHECK(ok == expect);
    auto u = orientation_certificate(s);
    if (u) {
      for (const auto& x : s.offsets) {
        Rational ip = 0;
        for (int k = 0; k < s.d; ++k) ip += (*u)[k] * x[k];
        CHECK(ip > 0);
      }
    }
    if (normalised) CHECK(u.has_value());
    if (ok) {
      ++accepted;
      bool attained = false;
      for (const auto& so : m.split_offsets) {
        Coord norm = 0;
        for (auto c : so.y) norm = std::max(norm, std::abs(c));
        CHECK(Rational(norm) <= m.gamma * so.u);
        attained |= Rational(norm) == m.gamma * so.u;
        CHECK(so.u <= m.R);
      }
      CHECK(attained);
    }
  }
  CHECK(accepted > 20);
}

TEST_CASE("model json round trip") {
  auto j = nlohmann::json::parse(R"({"d": 2, "X": [[-1,1],[0,1],[2,1]]})");
  auto s = spec_from_json(j);
  CHECK(s.offsets == kSkew.offsets);
  CHECK(to_json(s) == j);
  CHECK_THROWS(spec_from_json(nlohmann::json::parse(R"({"d": 2, "X": [[0,1],[1,1]], "foo": 1})")));
}
