#pragma once

#include "gosp/rational.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace gosp {

// Identifier of the site hash, recorded in run manifests.
inline constexpr std::string_view kMixerId = "splitmix64-chain-v1";

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Replica seed derived from a master seed and a replica index.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x5851f42d4c957f2dULL) + kGolden * (index + 1));
}

// A space-time site: spatial coordinates then time.
using Site = std::vector<Coord>;

struct FieldSpec {
  std::uint64_t seed = 0;
  double p = 0.5;
  std::optional<double> sprinkle_eps;
  int d = 2;
};

class SprinkleUnset : public std::logic_error {
 public:
  SprinkleUnset() : std::logic_error("SprinkleUnset: field has no sprinkle_eps") {}
};

class FieldCache;

// Read-only view of one layer of the configuration. Cheap to copy.
class Field {
 public:
  enum class Layer { Base, Sprinkled, Extra };

  explicit Field(const FieldSpec& spec, Layer layer = Layer::Base, Coord period = 0);

  const FieldSpec& spec() const { return spec_; }
  Layer layer() const { return layer_; }
  Coord period() const { return period_; }
  int dim() const { return spec_.d; }

  // Site given as spatial coordinates and time.
  bool open(std::span<const Coord> x, Coord t) const;
  bool open1(Coord x, Coord t) const;  // d == 2 shortcut

  // Per-row hashing: the row key depends on (seed, t) only.
  struct Row {
    std::uint64_t base_key = 0;
    std::uint64_t extra_key = 0;
  };
  Row row(Coord t) const;
  bool open_in_row(const Row& r, std::span<const Coord> x) const;
  bool open_in_row1(const Row& r, Coord x) const {
    if (period_) x = wrap(x);
    const std::uint64_t ux = kGolden * static_cast<std::uint64_t>(x);
    switch (layer_) {
      case Layer::Base: return (mix64(r.base_key + ux) >> 11) < base_threshold_;
      case Layer::Extra: return (mix64(r.extra_key + ux) >> 11) < extra_threshold_;
      case Layer::Sprinkled:
        return (mix64(r.base_key + ux) >> 11) < base_threshold_ ||
               (mix64(r.extra_key + ux) >> 11) < extra_threshold_;
    }
    return false;
  }

  // Attach a precomputed bitmap for a d == 2 region; lookups outside fall back to hashing.
  Field with_cache(Coord x_lo, Coord x_hi, Coord t_lo, Coord t_hi) const;
  const FieldCache* cache() const { return cache_.get(); }

  // 53-bit uniform in [0,1) used for the base layer.
  double uniform(std::span<const Coord> x, Coord t) const;

 private:
  Coord wrap(Coord x) const {
    Coord r = x % period_;
    return r < 0 ? r + period_ : r;
  }
  bool test(const Row&, std::uint64_t hb, std::uint64_t he) const {
    switch (layer_) {
      case Layer::Base: return (hb >> 11) < base_threshold_;
      case Layer::Extra: return (he >> 11) < extra_threshold_;
      case Layer::Sprinkled:
        return (hb >> 11) < base_threshold_ || (he >> 11) < extra_threshold_;
    }
    return false;
  }
  std::uint64_t hash_site(std::uint64_t key, std::span<const Coord> x) const;

  FieldSpec spec_;
  Layer layer_;
  Coord period_;
  std::uint64_t base_seed_ = 0, extra_seed_ = 0;
  std::uint64_t base_threshold_ = 0, extra_threshold_ = 0;
  std::shared_ptr<const FieldCache> cache_;
};

// Open-site bitmap over [x_lo, x_hi) x [t_lo, t_hi) for d == 2.
class FieldCache {
 public:
  FieldCache(const Field& field, Coord x_lo, Coord x_hi, Coord t_lo, Coord t_hi);
  bool covers(Coord x_lo, Coord x_hi, Coord t) const {
    return t >= t_lo_ && t < t_hi_ && x_lo >= x_lo_ && x_hi <= x_hi_;
  }
  // 64 bits starting at x (bit i <-> site x+i); caller guarantees coverage of x.
  std::uint64_t word(Coord x, Coord t) const;
  bool bit(Coord x, Coord t) const;
  Coord x_lo() const { return x_lo_; }
  Coord x_hi() const { return x_hi_; }

 private:
  Coord x_lo_, x_hi_, t_lo_, t_hi_;
  std::size_t words_per_row_;
  std::vector<std::uint64_t> bits_;
};

bool site_open(const FieldSpec& field, std::span<const Coord> site);
bool sprinkled_open(const FieldSpec& field, std::span<const Coord> site);
// The independent extra layer alone (probability eps / (1 - p)).
bool extra_open(const FieldSpec& field, std::span<const Coord> site);
double site_uniform(const FieldSpec& field, std::span<const Coord> site);

}  // namespace gosp
