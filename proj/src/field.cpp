#include "gosp/field.hpp"

#include <cmath>
#include <string>

namespace gosp {

namespace {

constexpr std::uint64_t kBaseSalt = 0x243f6a8885a308d3ULL;
constexpr std::uint64_t kExtraSalt = 0x13198a2e03707344ULL;

std::uint64_t threshold(double q) {
  if (!(q >= 0.0)) return 0;
  if (q >= 1.0) return 1ULL << 53;
  return static_cast<std::uint64_t>(std::ceil(std::ldexp(q, 53)));
}

void check_dim(const FieldSpec& f, std::span<const Coord> site) {
  if (static_cast<int>(site.size()) != f.d)
    throw std::invalid_argument("site has dimension " + std::to_string(site.size()) +
                                ", field expects " + std::to_string(f.d));
}

}  // namespace

Field::Field(const FieldSpec& spec, Layer layer, Coord period)
    : spec_(spec), layer_(layer), period_(period) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (layer != Layer::Base) {
    if (!spec.sprinkle_eps) throw SprinkleUnset();
    double eps = *spec.sprinkle_eps;
    if (eps < 0.0 || eps > 1.0 - spec.p + 1e-12)
      throw std::invalid_argument("sprinkle_eps must lie in [0, 1-p]");
    // base OR extra must be Bernoulli(p + eps).
    double q = spec.p >= 1.0 ? 0.0 : eps / (1.0 - spec.p);
    extra_threshold_ = threshold(q);
  }
  base_threshold_ = threshold(spec.p);
  base_seed_ = mix64(spec.seed ^ kBaseSalt);
  extra_seed_ = mix64(spec.seed ^ kExtraSalt);
}

Field::Row Field::row(Coord t) const {
  auto ut = static_cast<std::uint64_t>(t);
  return Row{mix64(base_seed_ + kGolden * ut), mix64(extra_seed_ + kGolden * ut)};
}

std::uint64_t Field::hash_site(std::uint64_t key, std::span<const Coord> x) const {
  std::uint64_t h = key;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    Coord c = period_ ? wrap(x[i]) : x[i];
    h = mix64(h + kGolden * static_cast<std::uint64_t>(c));
  }
  Coord c = period_ ? wrap(x.back()) : x.back();
  return mix64(h + kGolden * static_cast<std::uint64_t>(c));
}

bool Field::open_in_row(const Row& r, std::span<const Coord> x) const {
  if (x.size() == 1) return open_in_row1(r, x[0]);
  std::uint64_t hb = hash_site(r.base_key, x);
  std::uint64_t he = layer_ == Layer::Base ? 0 : hash_site(r.extra_key, x);
  return test(r, hb, he);
}

bool Field::open(std::span<const Coord> x, Coord t) const {
  if (x.size() == 1) return open1(x[0], t);
  return open_in_row(row(t), x);
}

bool Field::open1(Coord x, Coord t) const {
  if (cache_ && cache_->covers(x, x + 1, t)) return cache_->bit(x, t);
  return open_in_row1(row(t), x);
}

double Field::uniform(std::span<const Coord> x, Coord t) const {
  std::uint64_t hb = hash_site(row(t).base_key, x);
  return std::ldexp(static_cast<double>(hb >> 11), -53);
}

Field Field::with_cache(Coord x_lo, Coord x_hi, Coord t_lo, Coord t_hi) const {
  if (spec_.d != 2) throw std::invalid_argument("field cache supports d == 2 only");
  Field f = *this;
  f.cache_.reset();
  f.cache_ = std::make_shared<const FieldCache>(f, x_lo, x_hi, t_lo, t_hi);
  return f;
}

FieldCache::FieldCache(const Field& field, Coord x_lo, Coord x_hi, Coord t_lo, Coord t_hi)
    : x_lo_(x_lo), x_hi_(x_hi), t_lo_(t_lo), t_hi_(t_hi) {
  // One spare word per row so word() never reads past the row.
  words_per_row_ = static_cast<std::size_t>((x_hi - x_lo + 63) / 64) + 1;
  bits_.assign(words_per_row_ * static_cast<std::size_t>(std::max<Coord>(0, t_hi - t_lo)), 0);
  for (Coord t = t_lo; t < t_hi; ++t) {
    auto r = field.row(t);
    std::uint64_t* row = bits_.data() + words_per_row_ * static_cast<std::size_t>(t - t_lo);
    Coord n = static_cast<Coord>(words_per_row_) * 64;
    for (Coord i = 0; i < n; ++i) {
      if (field.open_in_row1(r, x_lo + i)) row[i >> 6] |= 1ULL << (i & 63);
    }
  }
}

std::uint64_t FieldCache::word(Coord x, Coord t) const {
  const std::uint64_t* row = bits_.data() + words_per_row_ * static_cast<std::size_t>(t - t_lo_);
  auto off = static_cast<std::uint64_t>(x - x_lo_);
  std::size_t w = off >> 6;
  unsigned b = off & 63;
  if (b == 0) return row[w];
  return (row[w] >> b) | (row[w + 1] << (64 - b));
}

bool FieldCache::bit(Coord x, Coord t) const {
  const std::uint64_t* row = bits_.data() + words_per_row_ * static_cast<std::size_t>(t - t_lo_);
  auto off = static_cast<std::uint64_t>(x - x_lo_);
  return (row[off >> 6] >> (off & 63)) & 1ULL;
}

bool site_open(const FieldSpec& field, std::span<const Coord> site) {
  check_dim(field, site);
  return Field(field).open(site.first(site.size() - 1), site.back());
}

bool sprinkled_open(const FieldSpec& field, std::span<const Coord> site) {
  check_dim(field, site);
  return Field(field, Field::Layer::Sprinkled).open(site.first(site.size() - 1), site.back());
}

bool extra_open(const FieldSpec& field, std::span<const Coord> site) {
  check_dim(field, site);
  return Field(field, Field::Layer::Extra).open(site.first(site.size() - 1), site.back());
}

double site_uniform(const FieldSpec& field, std::span<const Coord> site) {
  check_dim(field, site);
  return Field(field).uniform(site.first(site.size() - 1), site.back());
}

}  // namespace gosp
