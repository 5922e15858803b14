#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/symbols.hpp"

namespace kneadlab {

enum class Family { quadratic, logistic, sine, custom };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::quadratic: return "quadratic";
    case Family::logistic: return "logistic";
    case Family::sine: return "sine";
    case Family::custom: return "custom";
  }
  return "custom";
}

inline Family parse_family(std::string_view name) {
  if (name == "quadratic") return Family::quadratic;
  if (name == "logistic") return Family::logistic;
  if (name == "sine") return Family::sine;
  throw Error(ErrorCode::InvalidParameter, "unknown map family '" + std::string(name) + "'");
}

// Tie tolerance and clamp slack, in units of the half-width of the domain.
inline constexpr double kTieTolerance = 1e-14;
inline constexpr double kDomainSlack = 1e-12;

/// A unimodal self-map of a closed interval with an interior maximum.
///
/// Built-in families:
///   quadratic  q(x) = t - 1 - t x^2          on [-1, 1], t in (0, 2]
///   logistic   f(x) = a x (1 - x)            on [0, 1],  a in (0, 4]
///   sine       g(x) = (2/pi) asin(sqrt(a)/2 sin(pi x)) on [0, 1], a in (0, 4)
/// Library callers may supply a custom map through `custom`; it is screened by
/// sampled checks of the unimodal contract before use.
///
/// `Real` selects the working precision (double, or long double for the
/// extended-precision nest path). Values are immutable after construction.
template <class Real>
class BasicUnimodalMap {
 public:
  using Fn = std::function<Real(Real)>;

  static BasicUnimodalMap quadratic(Real t) {
    if (!(t > 0 && t <= 2)) throw_range("quadratic", t, "(0, 2]");
    return BasicUnimodalMap(Family::quadratic, t, BasicInterval<Real>::make(-1, 1), 0);
  }

  static BasicUnimodalMap logistic(Real a) {
    if (!(a > 0 && a <= 4)) throw_range("logistic", a, "(0, 4]");
    return BasicUnimodalMap(Family::logistic, a, BasicInterval<Real>::make(0, 1), Real(1) / 2);
  }

  static BasicUnimodalMap sine(Real a) {
    if (!(a > 0 && a < 4)) throw_range("sine", a, "(0, 4)");
    return BasicUnimodalMap(Family::sine, a, BasicInterval<Real>::make(0, 1), Real(1) / 2);
  }

  static BasicUnimodalMap make(Family family, Real parameter) {
    switch (family) {
      case Family::quadratic: return quadratic(parameter);
      case Family::logistic: return logistic(parameter);
      case Family::sine: return sine(parameter);
      case Family::custom: break;
    }
    throw Error(ErrorCode::InvalidParameter, "custom maps need explicit callables");
  }

  /// `inverse`, when given, must return the preimage of y on the requested branch.
  static BasicUnimodalMap custom(BasicInterval<Real> domain, Real critical_point, Fn f, Fn df,
                                 std::function<Real(Real, Symbol)> inverse = {}) {
    BasicUnimodalMap m(Family::custom, 0, domain, critical_point);
    m.f_ = std::move(f);
    m.df_ = std::move(df);
    m.inverse_ = std::move(inverse);
    m.validate();
    return m;
  }

  Family family() const { return family_; }
  Real parameter() const { return parameter_; }
  const BasicInterval<Real>& domain() const { return domain_; }
  Real critical_point() const { return critical_; }
  Real half_width() const { return domain_.width() / 2; }
  Real tie_tolerance() const { return Real(kTieTolerance) * half_width(); }
  Real slack() const { return Real(kDomainSlack) * half_width(); }

  /// |D^2 f(c)|, so that |Df(x)| ~ K |x - c| near the critical point.
  Real critical_curvature() const {
    using std::sqrt;
    switch (family_) {
      case Family::quadratic: return 2 * parameter_;
      case Family::logistic: return 2 * parameter_;
      case Family::sine: return std::numbers::pi_v<Real> * sqrt(parameter_) / sqrt(1 - parameter_ / 4);
      case Family::custom: {
        const Real h = Real(1e-5) * half_width();
        return std::abs(df_(critical_ + h) - df_(critical_ - h)) / (2 * h);
      }
    }
    return 0;
  }

  /// True for maps with f(2c - x) = f(x); all built-in families are.
  bool symmetric() const { return family_ != Family::custom; }

  /// f(x) without any domain checks.
  Real raw(Real x) const {
    switch (family_) {
      case Family::quadratic: return parameter_ - 1 - parameter_ * x * x;
      case Family::logistic: return parameter_ * x * (1 - x);
      case Family::sine: {
        using std::asin, std::sin, std::sqrt;
        const Real pi = std::numbers::pi_v<Real>;
        return Real(2) / pi * asin(sqrt(parameter_) / 2 * sin(pi * x));
      }
      case Family::custom: return f_(x);
    }
    return x;
  }

  /// Checks that x lies in the domain (up to slack) and clamps it.
  Real admit(Real x) const {
    if (!(x >= domain_.lo - slack() && x <= domain_.hi + slack())) {
      throw Error(ErrorCode::OutOfDomain, "x = " + std::to_string(double(x)) + " outside the domain");
    }
    return std::clamp(x, domain_.lo, domain_.hi);
  }

  Real evaluate(Real x) const {
    x = admit(x);
    Real y = raw(x);
    if (!(y >= domain_.lo - slack() && y <= domain_.hi + slack())) {
      throw Error(ErrorCode::NotSelfMap, "f(" + std::to_string(double(x)) + ") = " +
                                             std::to_string(double(y)) + " leaves the domain");
    }
    return std::clamp(y, domain_.lo, domain_.hi);
  }

  Real operator()(Real x) const { return evaluate(x); }

  /// Closed-form Df for built-in families.
  Real derivative(Real x) const {
    x = admit(x);
    switch (family_) {
      case Family::quadratic: return -2 * parameter_ * x;
      case Family::logistic: return parameter_ * (1 - 2 * x);
      case Family::sine: {
        using std::cos, std::sin, std::sqrt;
        const Real pi = std::numbers::pi_v<Real>;
        const Real s = sin(pi * x);
        return sqrt(parameter_) * cos(pi * x) / sqrt(1 - parameter_ / 4 * s * s);
      }
      case Family::custom: return df_(x);
    }
    return 0;
  }

  Symbol symbol(Real x) const {
    if (std::abs(x - critical_) <= tie_tolerance()) return Symbol::crit;
    return x < critical_ ? Symbol::zero : Symbol::one;
  }

  /// Branch domain: [l, c] for 0, [c, r] for 1.
  BasicInterval<Real> branch(Symbol s) const {
    if (s == Symbol::zero) return BasicInterval<Real>::make(domain_.lo, critical_);
    if (s == Symbol::one) return BasicInterval<Real>::make(critical_, domain_.hi);
    return BasicInterval<Real>::make(critical_, critical_);
  }

  /// f(branch(s)), as an interval.
  BasicInterval<Real> branch_image(Symbol s) const {
    const Real top = raw(critical_);
    const Real end = raw(s == Symbol::zero ? domain_.lo : domain_.hi);
    return BasicInterval<Real>::make(end, top);
  }

  /// Preimage of y on branch s; y is clamped into the branch image first.
  Real branch_inverse(Real y, Symbol s) const {
    const auto img = branch_image(s);
    y = std::clamp(y, img.lo, img.hi);
    const bool left = s == Symbol::zero;
    switch (family_) {
      case Family::quadratic: {
        Real r = std::sqrt(std::max(Real(0), (parameter_ - 1 - y) / parameter_));
        return left ? -r : r;
      }
      case Family::logistic: {
        const Real q = y / parameter_;
        const Real s2 = std::sqrt(std::max(Real(0), Real(1) / 4 - q));
        return left ? q / (Real(1) / 2 + s2) : Real(1) / 2 + s2;
      }
      case Family::sine: {
        using std::asin, std::sin, std::sqrt;
        const Real pi = std::numbers::pi_v<Real>;
        const Real arg = std::min(Real(1), sin(pi * y / 2) / (sqrt(parameter_) / 2));
        const Real xl = asin(arg) / pi;
        return left ? xl : 1 - xl;
      }
      case Family::custom:
        if (inverse_) return inverse_(y, s);
        return bisect_inverse(y, s);
    }
    return critical_;
  }

 private:
  BasicUnimodalMap(Family family, Real parameter, BasicInterval<Real> domain, Real critical)
      : family_(family), parameter_(parameter), domain_(domain), critical_(critical) {}

  [[noreturn]] static void throw_range(const char* name, Real value, const char* range) {
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " parameter " +
                                                 std::to_string(double(value)) + " outside " + range);
  }

  Real bisect_inverse(Real y, Symbol s) const {
    // Increasing on the left branch, decreasing on the right.
    Real lo = s == Symbol::zero ? domain_.lo : critical_;
    Real hi = s == Symbol::zero ? critical_ : domain_.hi;
    const bool increasing = s == Symbol::zero;
    for (int i = 0; i < 200; ++i) {
      const Real mid = (lo + hi) / 2;
      if (mid == lo || mid == hi) break;
      const bool below = raw(mid) < y;
      if (below == increasing) lo = mid; else hi = mid;
    }
    return (lo + hi) / 2;
  }

  void validate() const {
    if (!f_ || !df_) throw Error(ErrorCode::InvalidParameter, "custom map needs f and Df");
    if (!domain_.contains_interior(critical_)) {
      throw Error(ErrorCode::InvalidParameter, "critical point must lie inside the domain");
    }
    for (Real end : {domain_.lo, domain_.hi}) {
      const Real y = f_(end);
      if (!(y >= domain_.lo - slack() && y <= domain_.hi + slack())) {
        throw Error(ErrorCode::NotSelfMap, "custom map does not preserve its domain");
      }
    }
    constexpr int kSamples = 1000;
    Real prev = f_(domain_.lo);
    for (int i = 1; i <= kSamples; ++i) {
      const Real x = domain_.lo + (critical_ - domain_.lo) * Real(i) / kSamples;
      const Real y = f_(x);
      if (!(y > prev)) throw Error(ErrorCode::InvalidParameter, "custom map not increasing left of c");
      prev = y;
    }
    for (int i = 1; i <= kSamples; ++i) {
      const Real x = critical_ + (domain_.hi - critical_) * Real(i) / kSamples;
      const Real y = f_(x);
      if (!(y < prev)) throw Error(ErrorCode::InvalidParameter, "custom map not decreasing right of c");
      prev = y;
    }
    if (std::abs(df_(critical_)) > Real(1e-8)) {
      throw Error(ErrorCode::InvalidParameter, "custom map derivative does not vanish at c");
    }
  }

  Family family_;
  Real parameter_;
  BasicInterval<Real> domain_;
  Real critical_;
  Fn f_;
  Fn df_;
  std::function<Real(Real, Symbol)> inverse_;
};

using UnimodalMap = BasicUnimodalMap<double>;
using ExtendedUnimodalMap = BasicUnimodalMap<long double>;

/// Coordinate change h(x) = (1 - cos(pi x)) / 2 with h o g_a = f_a o h.
template <class Real>
Real sine_to_logistic(Real x) {
  using std::cos;
  return (1 - cos(std::numbers::pi_v<Real> * x)) / 2;
}

template <class Real>
Real logistic_to_sine(Real y) {
  using std::acos;
  return acos(std::clamp(1 - 2 * y, Real(-1), Real(1))) / std::numbers::pi_v<Real>;
}

template <class Real>
struct BasicOrbitSegment {
  std::vector<Real> points;
  /// Sum of ln|Df| over the first n points, i.e. ln|Df^n(x0)|.
  Real log_derivative_sum{0};
  bool hit_critical{false};
  std::optional<std::size_t> first_critical_index;
};

using OrbitSegment = BasicOrbitSegment<double>;

template <class Real>
BasicOrbitSegment<Real> iterate_orbit(const BasicUnimodalMap<Real>& map, Real x0, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "iterate_orbit needs n >= 1");
  BasicOrbitSegment<Real> seg;
  seg.points.reserve(n + 1);
  CompensatedSum<Real> logsum;
  Real x = map.admit(x0);
  seg.points.push_back(x);
  for (std::size_t i = 0; i < n; ++i) {
    if (map.symbol(x) == Symbol::crit && !seg.hit_critical) {
      seg.hit_critical = true;
      seg.first_critical_index = i;
    }
    logsum.add(std::log(std::abs(map.derivative(x))));
    x = map.evaluate(x);
    seg.points.push_back(x);
  }
  seg.log_derivative_sum = logsum.value();
  return seg;
}

}  // namespace kneadlab
