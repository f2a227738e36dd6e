#include "gosp/rational.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gosp {

Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("not a rational: '" + std::string(text) + "'"); };
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) fail();
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      i = 1;
    }
    if (i == s.size()) fail();
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') fail();
      v = v * 10 + (s[i] - '0');
    }
    return neg ? -v : v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto den = parse_int(text.substr(slash + 1));
    if (den == 0) fail();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 15) fail();
    bool neg = !whole.empty() && whole[0] == '-';
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    if (f < 0) fail();
    std::int64_t num = std::abs(w) * scale + f;
    return Rational(neg ? -num : num, scale);
  }
  return Rational(parse_int(text));
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Coord floor_of(const Rational& r) {
  auto n = r.numerator(), d = r.denominator();
  auto q = n / d;
  if (n % d != 0 && n < 0) --q;
  return q;
}

Coord ceil_of(const Rational& r) { return -floor_of(-r); }

Coord round_half_down(const Rational& r) { return ceil_of(r - Rational(1, 2)); }

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

Rational approximate(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw std::invalid_argument("cannot approximate a non-finite value");
  // Continued fraction convergents, stopping before the denominator bound.
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    double a = std::floor(rest);
    if (std::abs(a) > 1e15) break;
    auto ai = static_cast<std::int64_t>(a);
    std::int64_t p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = rest - a;
    if (frac < 1e-12) break;
    rest = 1.0 / frac;
  }
  if (q1 == 0) return Rational(static_cast<std::int64_t>(std::llround(x)));
  return Rational(p1, q1);
}

Coord lcm_of_denominators(const std::vector<Rational>& v) {
  Coord l = 1;
  for (const auto& r : v) l = std::lcm(l, r.denominator());
  return l;
}

}  // namespace gosp
