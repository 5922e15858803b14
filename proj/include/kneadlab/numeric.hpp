#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

namespace kneadlab {

// Neumaier's variant of Kahan summation; robust when addends exceed the running sum.
template <class Real>
class CompensatedSum {
 public:
  void add(Real value) {
    Real t = sum_ + value;
    if (!std::isfinite(t)) {
      // -inf from ln|Df(c)| must survive; the correction term would turn it into NaN.
      sum_ = t;
      return;
    }
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  Real value() const { return std::isfinite(sum_) ? sum_ + compensation_ : sum_; }

 private:
  Real sum_{0};
  Real compensation_{0};
};

/// Closed interval [lo, hi]; `empty` marks the empty set.
template <class Real>
struct BasicInterval {
  Real lo{0};
  Real hi{0};
  bool empty{true};

  static BasicInterval make(Real a, Real b) { return {std::min(a, b), std::max(a, b), false}; }
  static BasicInterval none() { return {}; }

  Real width() const { return empty ? Real(0) : hi - lo; }
  Real mid() const { return (lo + hi) / 2; }
  bool contains(Real x) const { return !empty && lo <= x && x <= hi; }
  bool contains_interior(Real x) const { return !empty && lo < x && x < hi; }
  bool contains(const BasicInterval& o) const {
    return o.empty || (!empty && lo <= o.lo && o.hi <= hi);
  }

  BasicInterval intersect(const BasicInterval& o) const {
    if (empty || o.empty) return none();
    Real a = std::max(lo, o.lo);
    Real b = std::min(hi, o.hi);
    if (a > b) return none();
    return {a, b, false};
  }

  bool interiors_overlap(const BasicInterval& o) const {
    if (empty || o.empty) return false;
    return std::max(lo, o.lo) < std::min(hi, o.hi);
  }
};

using Interval = BasicInterval<double>;

struct LinearFit {
  double slope{0};
  double intercept{0};
  double slope_stderr{0};
  std::size_t points{0};
};

/// Ordinary least squares y = intercept + slope*x. Needs at least two distinct x.
template <class XRange, class YRange>
std::optional<LinearFit> least_squares(const XRange& xs, const YRange& ys) {
  const std::size_t n = std::size(xs);
  if (n < 2 || std::size(ys) != n) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0) return std::nullopt;
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = ys[i] - fit.intercept - fit.slope * xs[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / double(n - 2) / sxx);
  }
  return fit;
}

/// Bit-portable uniform double in [0, 1) from a 64-bit engine.
template <class Engine>
double uniform01(Engine& engine) {
  return double(engine() >> 11) * 0x1.0p-53;
}

}  // namespace kneadlab
