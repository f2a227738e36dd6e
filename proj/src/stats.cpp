#include "gosp/stats.hpp"

#include <algorithm>
#include <cmath>

namespace gosp {

namespace {
constexpr double kZ = 1.959963984540054;
}

Estimate proportion(std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw InsufficientData("proportion of zero samples");
  Estimate e;
  e.n = n;
  double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn;
  e.mean = ph;
  e.stderr_ = n > 1 ? std::sqrt(ph * (1 - ph) * nn / (nn - 1)) / std::sqrt(nn) : 0.0;
  double z2 = kZ * kZ;
  double centre = (ph + z2 / (2 * nn)) / (1 + z2 / nn);
  double half = kZ * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  e.ci_lo = std::max(0.0, centre - half);
  e.ci_hi = std::min(1.0, centre + half);
  return e;
}

Estimate mean_of(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientData("mean of zero samples");
  Estimate e;
  e.n = xs.size();
  double s = 0;
  for (double x : xs) s += x;
  e.mean = s / static_cast<double>(e.n);
  if (e.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    e.stderr_ = std::sqrt(ss / static_cast<double>(e.n - 1)) / std::sqrt(static_cast<double>(e.n));
  }
  e.ci_lo = e.mean - kZ * e.stderr_;
  e.ci_hi = e.mean + kZ * e.stderr_;
  return e;
}

double combined_stderr(const Estimate& a, const Estimate& b) {
  return std::hypot(a.stderr_, b.stderr_);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("line fit needs two points");
  LineFit f;
  f.n = x.size();
  double n = static_cast<double>(f.n), mx = 0, my = 0;
  for (std::size_t i = 0; i < f.n; ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw InsufficientData("line fit with constant abscissa");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = std::max(0.0, syy - f.slope * sxy);
  f.r2 = syy > 0 ? 1 - sse / syy : 1.0;
  if (f.n > 2) f.slope_stderr = std::sqrt(sse / (n - 2) / sxx);
  return f;
}

double ks_exponential(std::vector<double> xs) {
  if (xs.empty()) throw InsufficientData("KS of zero samples");
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  if (m <= 0) throw InsufficientData("KS with non-positive mean");
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size()), d = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = 1 - std::exp(-xs[i] / m);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace gosp
