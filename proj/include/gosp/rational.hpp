#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gosp {

using Coord = std::int64_t;
using Rational = boost::rational<std::int64_t>;

// Accepts "p/q", integers and finite decimals ("0.25").
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& r);

Coord floor_of(const Rational& r);
Coord ceil_of(const Rational& r);
// Nearest integer, ties toward -infinity.
Coord round_half_down(const Rational& r);
double to_double(const Rational& r);

// Best rational approximation with denominator <= max_den.
Rational approximate(double x, std::int64_t max_den);

Coord lcm_of_denominators(const std::vector<Rational>& v);

}  // namespace gosp
