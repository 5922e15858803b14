#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/renormalization.hpp"

namespace kneadlab {

enum class NestTermination { DepthReached, CriticalNonReturn, RestrictiveIntervalFound, PrecisionExhausted };

constexpr std::string_view to_string(NestTermination t) {
  switch (t) {
    case NestTermination::DepthReached: return "DepthReached";
    case NestTermination::CriticalNonReturn: return "CriticalNonReturn";
    case NestTermination::RestrictiveIntervalFound: return "RestrictiveIntervalFound";
    case NestTermination::PrecisionExhausted: return "PrecisionExhausted";
  }
  return "DepthReached";
}

inline constexpr std::size_t kMaxNestDepth = 8;
inline constexpr std::uint64_t kMinNestIterates = 1000000;

/// Smallest representable |I_{n+1}| relative to the half-width of the domain.
template <class Real>
constexpr double nest_width_floor() {
  return sizeof(Real) > sizeof(double) ? 1e-18 : 1e-13;
}

/// All times are counts of f-iterates, even when the nest lives inside a
/// restrictive interval and is built for f^k.
template <class Real>
struct BasicNestLevel {
  std::size_t index{0};
  BasicInterval<Real> interval;
  std::uint64_t v_n{0};
  /// Visits of the critical orbit to I_n at times in [v_n, v_{n+1}), i.e. the
  /// returns to I_n preceding the first return to I_{n+1}. Zero for a central return.
  std::optional<std::uint64_t> s_n;
  std::optional<double> c_n;
  /// Length of the branch word of R_n(0) before it lands in I_{n+1}; equals s_n.
  std::optional<std::uint64_t> landing_word_length;
  /// Iterates needed by R_n(0) to land in I_{n+1}, accumulated return by return.
  std::optional<std::uint64_t> landing_iterates;
  /// Endpoints of I_n kept out of int I_n for v_{n+1} iterates.
  std::optional<bool> nice_on_horizon;
};

template <class Real>
struct BasicNestReport {
  std::vector<BasicNestLevel<Real>> levels;
  NestTermination termination{NestTermination::DepthReached};
  /// Index of the level that could not be completed (levels.size() when DepthReached).
  std::size_t termination_level{0};
  std::size_t renormalization_period{1};
  BasicInterval<Real> renormalization_interval;
  std::size_t renormalization_search_horizon{kRenormalizationHorizon};
  /// Orientation-reversing fixed point of the (renormalized) map; I_0 has it as an endpoint.
  Real fixed_point{0};
  std::vector<double> lyapunov_nest_sequence;
  bool extended_precision{false};
};

using NestLevel = BasicNestLevel<double>;
using NestReport = BasicNestReport<double>;

namespace detail {

template <class Real>
Real bisect_sign_change(auto&& g, Real a, Real b) {
  Real ga = g(a);
  for (int i = 0; i < 400; ++i) {
    const Real mid = a + (b - a) / 2;
    if (mid == a || mid == b) break;
    const Real gm = g(mid);
    if (gm == 0) return mid;
    if ((gm < 0) == (ga < 0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  return a + (b - a) / 2;
}

/// Fixed point of F between c and F(c) with DF <= -1.
template <class Real>
Real reversing_fixed_point(const InducedMap<Real>& F) {
  const Real c = F.map->critical_point();
  const Real fc = F(c);
  auto g = [&](Real x) { return F(x) - x; };
  const Real g0 = g(c);
  const Real g1 = g(fc);
  if (g0 == 0 || (g0 < 0) == (g1 < 0)) {
    throw Error(ErrorCode::NoReversingFixedPoint, "no fixed point between c and its image");
  }
  const Real p = bisect_sign_change(g, std::min(c, fc), std::max(c, fc));
  const Real d = F.derivative(p);
  if (!(d <= Real(-1) + Real(1e-9))) {
    throw Error(ErrorCode::NoReversingFixedPoint,
                "fixed point " + std::to_string(double(p)) + " has derivative " +
                    std::to_string(double(d)) + " > -1");
  }
  return p;
}

/// The other preimage of F(p) = p, on the far side of the critical point.
template <class Real>
Real dual_point(const InducedMap<Real>& F, Real p, const BasicInterval<Real>& core) {
  const auto& map = *F.map;
  const Real c = map.critical_point();
  if (map.symmetric()) return 2 * c - p;
  if (F.period == 1) return map.branch_inverse(p, p > c ? Symbol::zero : Symbol::one);
  const Real far = p > c ? core.lo : core.hi;
  return bisect_sign_change([&](Real x) { return F(x) - p; }, std::min(c, far), std::max(c, far));
}

// Minimum separation, in ulps, between F(c) and the images of the endpoints of a central domain.
inline constexpr double kFoldResolution = 1024;

template <class Real>
std::int8_t side_of(const BasicInterval<Real>& j, Real y) {
  if (y < j.lo) return -1;
  if (y > j.hi) return 1;
  return 0;
}

/// Central component of the first-return domain of I_n, found by spreading out
/// from c: a point belongs to it while its first v iterates follow the critical
/// orbit on the same side of I_n and its v-th iterate lands in I_n.
template <class Real>
std::optional<BasicInterval<Real>> central_domain(const InducedMap<Real>& F,
                                                  const BasicInterval<Real>& in,
                                                  std::uint64_t v, Real floor) {
  const Real c = F.map->critical_point();
  std::vector<std::int8_t> sides(v, 0);
  {
    Real y = c;
    for (std::uint64_t t = 1; t < v; ++t) {
      y = F(y);
      sides[t] = side_of(in, y);
    }
  }
  auto inside = [&](Real x) {
    Real y = x;
    for (std::uint64_t t = 1; t < v; ++t) {
      y = F(y);
      if (side_of(in, y) != sides[t]) return false;
    }
    return in.contains(F(y));
  };
  Real ends[2];
  for (int dir = 0; dir < 2; ++dir) {
    const Real sign = dir == 0 ? Real(-1) : Real(1);
    const Real reach = dir == 0 ? c - in.lo : in.hi - c;
    Real good = 0;
    Real bad = reach;
    Real d = floor / 8;
    bool found_bad = false;
    while (d < reach) {
      if (!inside(c + sign * d)) {
        bad = d;
        found_bad = true;
        break;
      }
      good = d;
      d *= 2;
    }
    if (good == 0) return std::nullopt;
    if (!found_bad && inside(c + sign * reach)) return BasicInterval<Real>::make(in.lo, in.hi);
    for (int i = 0; i < 400; ++i) {
      const Real mid = good + (bad - good) / 2;
      if (mid == good || mid == bad) break;
      if (inside(c + sign * mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    ends[dir] = c + sign * (good + (bad - good) / 2);
  }
  // Below a width of order sqrt(eps) the fold sends the whole interval onto one
  // floating-point value, and every point trivially shadows the critical orbit.
  const Real fc = F(c);
  const Real resolution = Real(kFoldResolution) * std::numeric_limits<Real>::epsilon() *
                          std::max(std::abs(fc), F.map->half_width());
  for (Real end : ends) {
    if (std::abs(F(end) - fc) < resolution) return std::nullopt;
  }
  return BasicInterval<Real>::make(ends[0], ends[1]);
}

/// Endpoints of I_n stay out of int I_n (shrunk by a relative slack) for
/// `horizon` iterates, or until they merge with the fixed point p or its dual.
template <class Real>
bool nice_on_horizon(const InducedMap<Real>& F, const BasicInterval<Real>& in, std::uint64_t horizon,
                     Real p, Real p_dual) {
  const Real slack = Real(1e-9) * in.width();
  const Real merge = Real(1e-10) * F.map->half_width();
  const auto core = BasicInterval<Real>::make(in.lo + slack, in.hi - slack);
  for (Real y : {in.lo, in.hi}) {
    for (std::uint64_t t = 1; t <= horizon; ++t) {
      y = F(y);
      if (core.contains_interior(y)) return false;
      if (std::abs(y - p) < merge || std::abs(y - p_dual) < merge) break;
    }
  }
  return true;
}

}  // namespace detail

/// Fixed point of f on the decreasing branch with Df <= -1.
template <class Real>
Real orientation_reversing_fixed_point(const BasicUnimodalMap<Real>& map) {
  return detail::reversing_fixed_point(InducedMap<Real>{&map, 1});
}

/// Principal nest I_0 = [p', p] > I_1 > ... of central return domains, built
/// inside the smallest restrictive interval found within the search horizon.
template <class Real>
BasicNestReport<Real> build_nest(const BasicUnimodalMap<Real>& map, std::size_t max_depth,
                                 std::uint64_t max_iterates,
                                 std::size_t horizon = kRenormalizationHorizon) {
  if (max_depth > kMaxNestDepth) throw Error(ErrorCode::InvalidParameter, "max_depth must be <= 8");
  if (max_iterates < kMinNestIterates) {
    throw Error(ErrorCode::InvalidParameter, "max_iterates must be >= 1e6");
  }
  BasicNestReport<Real> report;
  report.extended_precision = sizeof(Real) > sizeof(double);
  report.renormalization_search_horizon = horizon;
  report.renormalization_interval = map.domain();
  if (auto r = find_restrictive_interval(map, horizon)) {
    report.renormalization_period = r->period;
    report.renormalization_interval = r->interval;
  }
  const std::uint64_t k = report.renormalization_period;
  const InducedMap<Real> F{&map, k};
  const Real c = map.critical_point();
  const Real p = detail::reversing_fixed_point(F);
  const Real p_dual = detail::dual_point(F, p, report.renormalization_interval);
  report.fixed_point = p;
  const Real floor = Real(nest_width_floor<Real>()) * map.half_width();
  const std::uint64_t budget = max_iterates / k;

  auto finish = [&](NestTermination t, std::size_t level) {
    report.termination = t;
    report.termination_level = level;
    for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
      report.lyapunov_nest_sequence.push_back(2 * std::log(double(report.levels[i + 1].v_n)) /
                                              double(report.levels[i].v_n));
    }
    return report;
  };

  // Critical orbit, advanced monotonically; t counts F-iterates.
  Real y = c;
  std::uint64_t t = 0;
  auto step = [&] {
    y = F(y);
    ++t;
  };

  auto current = BasicInterval<Real>::make(p_dual, p);
  do step(); while (!current.contains(y) && t <= budget);
  if (!current.contains(y)) return finish(NestTermination::CriticalNonReturn, 0);
  report.levels.push_back({0, current, t * k, {}, {}, {}, {}, {}});

  for (std::size_t n = 0;; ++n) {
    if (n == max_depth) return finish(NestTermination::DepthReached, n + 1);
    auto& level = report.levels[n];
    const std::uint64_t v = level.v_n / k;
    const auto next = detail::central_domain(F, current, v, floor);
    if (!next || next->width() < floor) return finish(NestTermination::PrecisionExhausted, n + 1);
    if (next->width() >= current.width() * (1 - Real(detail::kCycleSlack))) {
      // The whole of I_n returns as one branch: F^v(I_n) inside I_n.
      const auto image = InducedMap<Real>{&map, std::size_t(k * v)}.image(current);
      const Real slack = Real(detail::kCycleSlack) * current.width();
      const bool restrictive = image.lo >= current.lo - slack && image.hi <= current.hi + slack;
      return finish(restrictive ? NestTermination::RestrictiveIntervalFound
                                : NestTermination::PrecisionExhausted,
                    n + 1);
    }
    level.c_n = double(next->width() / current.width());

    // y = F^v(c) is in I_n here; walk to the first visit to I_{n+1}.
    std::uint64_t visits = 0;
    while (!next->contains(y)) {
      if (current.contains(y)) ++visits;
      if (t > budget) return finish(NestTermination::CriticalNonReturn, n + 1);
      step();
    }
    level.s_n = visits;
    level.landing_word_length = visits;

    // Relaunch from R_n(0) and land in I_{n+1} one first return to I_n at a time.
    {
      Real x = c;
      for (std::uint64_t i = 0; i < v; ++i) x = F(x);
      std::uint64_t total = 0;
      while (!next->contains(x)) {
        std::uint64_t r = 0;
        do {
          x = F(x);
          ++r;
        } while (!current.contains(x) && r <= budget);
        total += r;
        if (total > budget) break;
      }
      level.landing_iterates = total * k;
    }
    level.nice_on_horizon = detail::nice_on_horizon(F, current, t, p, p_dual);

    // Central return: I_{n+1} may hold a restrictive interval of period k v.
    if (t == v && detail::restrictive_candidate(InducedMap<Real>{&map, 1}, std::size_t(k * v))) {
      return finish(NestTermination::RestrictiveIntervalFound, n + 1);
    }
    current = *next;
    report.levels.push_back({n + 1, current, t * k, {}, {}, {}, {}, {}});
  }
}

/// 2 ln(v_{n+1}) / v_n for consecutive levels.
template <class Real>
std::vector<double> nest_lyapunov(const BasicNestReport<Real>& report) {
  if (report.levels.size() < 2) throw Error(ErrorCode::TooShallow, "need at least two nest levels");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
    out.push_back(2 * std::log(double(report.levels[i + 1].v_n)) / double(report.levels[i].v_n));
  }
  return out;
}

struct NestAsymptoticsRow {
  std::size_t n{0};
  std::optional<double> v_ratio;
  std::optional<double> s_ratio;
  /// Set when c_n is outside (0, 1); the ratios are then meaningless.
  bool invalid_scaling{false};
};

/// ln v_{n+1} / ln(1/c_n) and ln s_n / ln(1/c_n) for every level with a successor.
template <class Real>
std::vector<NestAsymptoticsRow> nest_asymptotics(const BasicNestReport<Real>& report) {
  if (report.levels.size() < 3) throw Error(ErrorCode::TooShallow, "need at least three nest levels");
  std::vector<NestAsymptoticsRow> rows;
  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
    const auto& level = report.levels[i];
    NestAsymptoticsRow row;
    row.n = i;
    if (!level.c_n) continue;
    const double c = *level.c_n;
    if (!(c > 0 && c < 1)) {
      row.invalid_scaling = true;
    } else {
      const double scale = std::log(1 / c);
      row.v_ratio = std::log(double(report.levels[i + 1].v_n)) / scale;
      if (level.s_n && *level.s_n > 0) row.s_ratio = std::log(double(*level.s_n)) / scale;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kneadlab
