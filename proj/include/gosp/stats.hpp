#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace gosp {

struct Estimate {
  double mean = 0, stderr_ = 0;
  std::size_t n = 0;
  double ci_lo = 0, ci_hi = 0;
};

// Proportion k/n with a Wilson 95% interval.
Estimate proportion(std::uint64_t k, std::uint64_t n);
// Sample mean with a normal 95% interval. Sums in index order.
Estimate mean_of(std::span<const double> xs);

double combined_stderr(const Estimate& a, const Estimate& b);

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
  double slope_stderr = 0;
  std::size_t n = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Kolmogorov-Smirnov distance between xs / mean(xs) and Exp(1).
double ks_exponential(std::vector<double> xs);

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gosp
