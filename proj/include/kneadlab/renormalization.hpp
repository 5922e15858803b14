#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"

namespace kneadlab {

inline constexpr std::size_t kRenormalizationHorizon = 32;

/// Image of a closed interval; the fold at the critical point is taken into account.
template <class Real>
BasicInterval<Real> interval_image(const BasicUnimodalMap<Real>& map, const BasicInterval<Real>& j) {
  if (j.empty) return BasicInterval<Real>::none();
  auto out = BasicInterval<Real>::make(map.evaluate(j.lo), map.evaluate(j.hi));
  if (j.contains(map.critical_point())) out.hi = std::max(out.hi, map.evaluate(map.critical_point()));
  return out;
}

/// F = f^period, the return map of a restrictive interval.
template <class Real>
struct InducedMap {
  const BasicUnimodalMap<Real>* map;
  std::size_t period{1};

  Real operator()(Real x) const {
    for (std::size_t i = 0; i < period; ++i) x = map->evaluate(x);
    return x;
  }

  Real derivative(Real x) const {
    Real d = 1;
    for (std::size_t i = 0; i < period; ++i) {
      d *= map->derivative(x);
      x = map->evaluate(x);
    }
    return d;
  }

  BasicInterval<Real> image(BasicInterval<Real> j) const {
    for (std::size_t i = 0; i < period; ++i) j = interval_image(*map, j);
    return j;
  }
};

template <class Real>
struct BasicRestrictiveInterval {
  std::size_t period{1};
  /// [f^{2k}(c), f^k(c)], the core of the renormalized map around c.
  BasicInterval<Real> interval;
};

namespace detail {

// Relative slack for "f^k(T) inside T" and "f^j(T) meets int T" decisions.
inline constexpr double kCycleSlack = 1e-9;

/// Checks whether T = hull(F^k c, F^{2k} c) is a restrictive interval of period k
/// for the induced map F: c inside T, F^j(int T) disjoint from int T for 0 < j < k,
/// and F^k(T) inside T.
template <class Real>
std::optional<BasicRestrictiveInterval<Real>> restrictive_candidate(const InducedMap<Real>& F,
                                                                    std::size_t k) {
  const Real c = F.map->critical_point();
  Real a = c;
  for (std::size_t i = 0; i < k; ++i) a = F(a);
  Real b = a;
  for (std::size_t i = 0; i < k; ++i) b = F(b);
  const auto t = BasicInterval<Real>::make(a, b);
  const Real slack = Real(kCycleSlack) * t.width();
  if (t.width() <= Real(kCycleSlack) * F.map->half_width() || !t.contains_interior(c)) {
    return std::nullopt;
  }
  auto j = t;
  for (std::size_t i = 1; i < k; ++i) {
    j = F.image(j);
    const Real overlap = std::min(j.hi, t.hi) - std::max(j.lo, t.lo);
    if (overlap > slack) return std::nullopt;
  }
  j = F.image(j);
  if (j.lo < t.lo - slack || j.hi > t.hi + slack) return std::nullopt;
  return BasicRestrictiveInterval<Real>{k, t};
}

}  // namespace detail

/// Largest k <= horizon (k >= 2) for which a restrictive interval of period k
/// around the critical point is detected. Heuristic: absence of a result only
/// means none was found within the horizon.
template <class Real>
std::optional<BasicRestrictiveInterval<Real>> find_restrictive_interval(
    const BasicUnimodalMap<Real>& map, std::size_t horizon = kRenormalizationHorizon) {
  const InducedMap<Real> f{&map, 1};
  for (std::size_t k = horizon; k >= 2; --k) {
    if (auto found = detail::restrictive_candidate(f, k)) return found;
  }
  return std::nullopt;
}

}  // namespace kneadlab
