#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/renormalization.hpp"
#include "kneadlab/symbolic.hpp"
#include "kneadlab/typical.hpp"

namespace kneadlab {

inline constexpr std::uint64_t kMinDensitySamples = 100000;

/// Histogram of one long orbit over a uniform partition of the domain.
struct DensityEstimate {
  Interval domain;
  std::vector<std::uint64_t> counts;
  std::uint64_t sample_count{0};
  std::uint64_t seed{0};

  std::size_t bin_count() const { return counts.size(); }
  double bin_width() const { return domain.width() / double(counts.size()); }
  double bin_left(std::size_t i) const { return domain.lo + bin_width() * double(i); }
  double bin_right(std::size_t i) const {
    return i + 1 == counts.size() ? domain.hi : domain.lo + bin_width() * double(i + 1);
  }
  double mass(std::size_t i) const { return double(counts[i]) / double(sample_count); }

  std::vector<double> mass_per_bin() const {
    std::vector<double> out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = mass(i);
    return out;
  }

  std::size_t bin_of(double x) const {
    const double pos = (x - domain.lo) / bin_width();
    if (!(pos > 0)) return 0;
    return std::min(counts.size() - 1, std::size_t(pos));
  }
};

/// Histogram of `samples` points of the seeded typical orbit, without any screening.
inline DensityEstimate histogram_orbit(const UnimodalMap& map, std::uint64_t seed,
                                       std::uint64_t samples, std::size_t bins) {
  if (bins < 1) throw Error(ErrorCode::InvalidParameter, "bin count must be positive");
  if (samples < 1) throw Error(ErrorCode::InvalidParameter, "sample count must be positive");
  DensityEstimate d;
  d.domain = map.domain();
  d.counts.assign(bins, 0);
  d.sample_count = samples;
  d.seed = seed;
  TypicalOrbit orbit(map, seed);
  for (std::uint64_t i = 0; i < samples; ++i) ++d.counts[d.bin_of(orbit.next())];
  return d;
}

struct PeriodicAttractor {
  std::size_t period{0};
  double point{0};
};

inline constexpr std::uint64_t kAttractorTransient = 100000;
inline constexpr std::size_t kMaxAttractorPeriod = 256;
inline constexpr double kRecurrenceTolerance = 1e-8;

/// Near-recurrence test on the seeded typical orbit after a long transient; a
/// period is reported only if it recurs at two well separated times.
inline std::optional<PeriodicAttractor> detect_periodic_attractor(const UnimodalMap& map,
                                                                  std::uint64_t seed) {
  TypicalOrbit orbit(map, seed);
  for (std::uint64_t i = 0; i < kAttractorTransient; ++i) orbit.next();
  const double tol = kRecurrenceTolerance * map.half_width();
  auto recurrence = [&](double x0) -> std::size_t {
    double x = x0;
    for (std::size_t p = 1; p <= kMaxAttractorPeriod; ++p) {
      x = map.evaluate(x);
      if (std::abs(x - x0) < tol) return p;
    }
    return 0;
  };
  const double first = orbit.current();
  const std::size_t period = recurrence(first);
  if (period == 0) return std::nullopt;
  for (int i = 0; i < 1000; ++i) orbit.next();
  double x = orbit.current();
  const double x0 = x;
  for (std::size_t i = 0; i < period; ++i) x = map.evaluate(x);
  if (std::abs(x - x0) >= tol) return std::nullopt;
  return PeriodicAttractor{period, x0};
}

/// Birkhoff histogram of the physical measure. Refuses orbits that settle on
/// a periodic attractor, whose "density" is a set of spikes.
inline DensityEstimate estimate_density(const UnimodalMap& map, std::uint64_t samples,
                                        std::size_t bins, std::uint64_t seed) {
  if (samples < kMinDensitySamples) {
    throw Error(ErrorCode::InvalidParameter, "sample_count must be >= 1e5");
  }
  if (auto attractor = detect_periodic_attractor(map, seed)) {
    throw Error(ErrorCode::DegenerateOrbit, "orbit converges to a periodic attractor of period " +
                                                std::to_string(attractor->period) + " near " +
                                                std::to_string(attractor->point));
  }
  return histogram_orbit(map, seed, samples, bins);
}

/// Empirical measure of J: whole bins plus the overlapped fraction of the end bins.
inline double measure_of_interval(const DensityEstimate& d, const Interval& j) {
  const auto hit = j.intersect(d.domain);
  if (hit.empty || hit.width() <= 0) return 0;
  const double h = d.bin_width();
  const double n = double(d.bin_count());
  const double pos_lo = std::clamp((hit.lo - d.domain.lo) / h, 0.0, n);
  const double pos_hi = std::clamp((hit.hi - d.domain.lo) / h, 0.0, n);
  const std::size_t i0 = std::min(d.bin_count() - 1, std::size_t(pos_lo));
  const std::size_t i1 = std::min(d.bin_count() - 1, std::size_t(pos_hi));
  if (i0 == i1) return double(d.counts[i0]) * (pos_hi - pos_lo) / double(d.sample_count);
  std::uint64_t whole = 0;
  for (std::size_t i = i0 + 1; i < i1; ++i) whole += d.counts[i];
  const double partial = double(d.counts[i0]) * (double(i0 + 1) - pos_lo) +
                         double(d.counts[i1]) * (pos_hi - double(i1));
  return (double(whole) + partial) / double(d.sample_count);
}

struct AttractorCycle {
  std::size_t period{1};
  /// T_0 = [f^{2k}(c), f^k(c)] and T_j = f^j(T_0).
  std::vector<Interval> intervals;
};

/// Cycle of intervals carrying the physical measure, from the last detected renormalization.
inline AttractorCycle attractor_cycle(const UnimodalMap& map,
                                      std::size_t horizon = kRenormalizationHorizon) {
  const auto r = find_restrictive_interval(map, horizon);
  const std::size_t k = r ? r->period : 1;
  const double c = map.critical_point();
  double a = c;
  for (std::size_t i = 0; i < k; ++i) a = map.evaluate(a);
  double b = a;
  for (std::size_t i = 0; i < k; ++i) b = map.evaluate(b);
  AttractorCycle cycle;
  cycle.period = k;
  cycle.intervals.push_back(Interval::make(a, b));
  for (std::size_t j = 1; j < k; ++j) cycle.intervals.push_back(interval_image(map, cycle.intervals.back()));
  const auto& t0 = cycle.intervals.front();
  const double slack = detail::kCycleSlack * t0.width() + map.slack();
  const auto back = interval_image(map, cycle.intervals.back());
  if (back.lo < t0.lo - slack || back.hi > t0.hi + slack) {
    throw Error(ErrorCode::CycleNotClosed, "f^" + std::to_string(k) + "(T_0) leaves T_0");
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto& u = cycle.intervals[i];
      const auto& v = cycle.intervals[j];
      if (std::min(u.hi, v.hi) - std::max(u.lo, v.lo) > slack) {
        throw Error(ErrorCode::CycleNotClosed, "cycle intervals T_" + std::to_string(i) + " and T_" +
                                                   std::to_string(j) + " overlap");
      }
    }
  }
  return cycle;
}

struct LyapunovEstimate {
  double value{0};
  std::uint64_t n{0};
  bool hit_critical{false};
};

inline constexpr std::uint64_t kMinLyapunovIterates = 100000;

/// (1/n) sum_{k<n} ln|Df(f^k(x0))|.
inline LyapunovEstimate lyapunov_birkhoff(const UnimodalMap& map, double x0, std::uint64_t n) {
  if (n < kMinLyapunovIterates) throw Error(ErrorCode::InvalidParameter, "n must be >= 1e5");
  CompensatedSum<double> sum;
  LyapunovEstimate out;
  out.n = n;
  double x = map.admit(x0);
  for (std::uint64_t k = 0; k < n; ++k) {
    if (map.symbol(x) == Symbol::crit) out.hit_critical = true;
    sum.add(std::log(std::abs(map.derivative(x))));
    x = map.evaluate(x);
  }
  out.value = sum.value() / double(n);
  return out;
}

/// Same average along the seeded typical orbit.
inline LyapunovEstimate lyapunov_typical(const UnimodalMap& map, std::uint64_t seed, std::uint64_t n) {
  if (n < kMinLyapunovIterates) throw Error(ErrorCode::InvalidParameter, "n must be >= 1e5");
  CompensatedSum<double> sum;
  TypicalOrbit orbit(map, seed);
  for (std::uint64_t k = 0; k < n; ++k) sum.add(std::log(std::abs(map.derivative(orbit.next()))));
  return {sum.value() / double(n), n, false};
}

struct TypicalityRow {
  SymbolWord word;
  double critical_average{0};
  double typical_average{0};
  double measure{0};
};

struct TypicalityTable {
  std::vector<TypicalityRow> rows;
  std::uint64_t n{0};
  std::uint64_t seed{0};
  /// max over words of |critical - typical| and |critical - measure|.
  double max_discrepancy{0};
};

inline constexpr std::uint64_t kMinTypicalityIterates = 1000000;
inline constexpr std::size_t kTypicalityBins = 2048;

/// Time averages of cylinder indicators along the critical orbit, along a
/// typical orbit, and the histogram measure of each cylinder.
inline TypicalityTable verify_critical_typicality(const UnimodalMap& map,
                                                  const std::vector<SymbolWord>& observables,
                                                  std::uint64_t n, std::uint64_t seed) {
  if (n < kMinTypicalityIterates) throw Error(ErrorCode::InvalidParameter, "n must be >= 1e6");
  TypicalityTable table;
  table.n = n;
  table.seed = seed;
  auto critical = critical_stream(map);
  const auto critical_prefix = critical.take(n);
  auto typical = typical_stream(map, seed);
  const auto typical_prefix = typical.take(n);
  const auto density = histogram_orbit(map, seed, n, kTypicalityBins);
  for (const auto& word : observables) {
    TypicalityRow row;
    row.word = word;
    row.critical_average = frequency(word, std::span<const Symbol>(critical_prefix), 1).r_hat;
    row.typical_average = frequency(word, std::span<const Symbol>(typical_prefix), 1).r_hat;
    row.measure = measure_of_interval(density, cylinder(map, word).interval);
    table.max_discrepancy = std::max({table.max_discrepancy,
                                      std::abs(row.critical_average - row.typical_average),
                                      std::abs(row.critical_average - row.measure)});
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct LyapunovEquality {
  /// Birkhoff exponent of the critical value.
  double critical_value_exponent{0};
  bool hit_critical{false};
  /// sum over bins of mass * ln|Df|, bins touching c averaged analytically.
  double integral{0};
  double difference{0};
  std::size_t singular_bins{0};
  std::size_t bins{0};
  std::uint64_t n{0};
  std::uint64_t seed{0};
};

inline constexpr std::size_t kLyapunovBins = 2048;

/// Average of ln|Df| over [a, b] when [a, b] touches the critical point,
/// using |Df(x)| ~ K |x - c|.
inline double singular_bin_average(const UnimodalMap& map, double a, double b) {
  const double c = map.critical_point();
  auto antiderivative = [](double u) { return u == 0 ? 0.0 : u * std::log(std::abs(u)) - u; };
  return std::log(map.critical_curvature()) +
         (antiderivative(b - c) - antiderivative(a - c)) / (b - a);
}

/// Exponent of the critical value against the space average of ln|Df| under the histogram.
inline LyapunovEquality verify_lyapunov_equality(const UnimodalMap& map, std::uint64_t n,
                                                 std::uint64_t seed, std::size_t bins = kLyapunovBins) {
  if (n < kMinTypicalityIterates) throw Error(ErrorCode::InvalidParameter, "n must be >= 1e6");
  LyapunovEquality out;
  out.n = n;
  out.seed = seed;
  out.bins = bins;
  const double c = map.critical_point();
  const auto side = lyapunov_birkhoff(map, map.evaluate(c), n);
  out.critical_value_exponent = side.value;
  out.hit_critical = side.hit_critical;
  const auto density = histogram_orbit(map, seed, n, bins);
  CompensatedSum<double> integral;
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = density.bin_left(i);
    const double b = density.bin_right(i);
    const double m = density.mass(i);
    if (a - map.tie_tolerance() <= c && c <= b + map.tie_tolerance()) {
      ++out.singular_bins;
      if (m > 0) integral.add(m * singular_bin_average(map, a, b));
      continue;
    }
    if (m > 0) integral.add(m * std::log(std::abs(map.derivative((a + b) / 2))));
  }
  out.integral = integral.value();
  out.difference = out.critical_value_exponent - out.integral;
  return out;
}

struct ScreenResult {
  bool passed{false};
  std::optional<PeriodicAttractor> attractor;
  double lyapunov{0};
};

inline constexpr double kMinScreenLyapunov = 0.05;
inline constexpr std::uint64_t kScreenIterates = 1000000;

/// Heuristic filter for "typical" parameters: no periodic attractor and a
/// clearly positive Lyapunov exponent. Cannot certify typicality.
inline ScreenResult stochasticity_screen(const UnimodalMap& map, std::uint64_t seed) {
  ScreenResult out;
  out.attractor = detect_periodic_attractor(map, seed);
  out.lyapunov = lyapunov_typical(map, seed, kScreenIterates).value;
  out.passed = !out.attractor && out.lyapunov >= kMinScreenLyapunov;
  return out;
}

}  // namespace kneadlab
