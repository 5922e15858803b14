#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/symbolic.hpp"
#include "kneadlab/symbols.hpp"

namespace kneadlab {

/// sign * exp(log_abs); periods near 20 overflow a linear scale.
struct SignedExponent {
  int sign{1};
  double log_abs{0};

  double value() const { return sign * std::exp(log_abs); }
  /// |Df^m|^(1/m)
  double per_step(std::size_t m) const { return std::exp(log_abs / double(m)); }
};

struct PeriodicOrbit {
  /// points[0] has itinerary word^infinity; points[i+1] = f(points[i]).
  std::vector<double> points;
  SymbolWord word;
  SignedExponent exponent;
  double residual{0};

  std::size_t period() const { return word.size(); }
};

namespace detail {

inline double iterate_n(const UnimodalMap& map, double x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x = map.evaluate(x);
  return x;
}

/// Root of g on [a, b] with g(a), g(b) of opposite sign (or zero): secant steps,
/// with a forced bisection every third step and whenever the secant leaves the bracket.
template <class G>
double bracketed_root(G&& g, double a, double b, double ga, double gb, int max_steps = 200) {
  if (ga == 0) return a;
  if (gb == 0) return b;
  for (int step = 0; step < max_steps; ++step) {
    const double mid = a + (b - a) / 2;
    if (mid <= a || mid >= b) break;
    double x = a - ga * (b - a) / (gb - ga);
    if (step % 3 == 2 || !(x > a && x < b)) x = mid;
    const double gx = g(x);
    if (gx == 0) return x;
    if ((gx < 0) == (ga < 0)) {
      a = x;
      ga = gx;
    } else {
      b = x;
      gb = gx;
    }
  }
  return std::abs(ga) <= std::abs(gb) ? a : b;
}

}  // namespace detail

inline constexpr double kCylinderWidthTarget = 1e-13;
inline constexpr double kCylinderWidthFloor = 1e-15;
inline constexpr std::size_t kMaxCylinderDepth = 60;

/// Locates the periodic orbit whose itinerary is word^infinity.
///
/// The nested cylinders I_{w^k} are pulled back until their width drops below
/// 1e-13 (or k = 60); the fixed point of f^m is then polished inside the last
/// cylinder. Attracting orbits, whose cylinders stop shrinking, are still
/// found as long as f^m(x) - x changes sign across the final cylinder.
inline PeriodicOrbit find_periodic(const UnimodalMap& map, const SymbolWord& word) {
  if (word.empty()) throw Error(ErrorCode::InvalidWord, "empty word");
  require_no_critical(word);
  if (!word.is_irreducible()) {
    throw Error(ErrorCode::IrreducibleRequired, "word \"" + word.str() + "\" is a proper power");
  }
  const std::size_t m = word.size();
  const double scale = map.half_width();

  auto itinerary_matches = [&](double x) {
    for (std::size_t i = 0; i < m; ++i) {
      if (map.symbol(x) != word[i]) return false;
      x = map.evaluate(x);
    }
    return true;
  };

  Interval cyl = map.domain();
  double previous = cyl.width();
  int stalled = 0;
  for (std::size_t k = 1; k <= kMaxCylinderDepth; ++k) {
    cyl = pullback(map, cyl, word);
    if (cyl.empty) {
      throw Error(ErrorCode::EmptyCylinder,
                  "I_{" + word.str() + "^" + std::to_string(k) + "} is empty");
    }
    const double w = cyl.width();
    if (w < kCylinderWidthFloor * scale && !itinerary_matches(cyl.mid())) {
      throw Error(ErrorCode::EmptyCylinder, "cylinders of \"" + word.str() +
                                                "\" collapse onto a point with another itinerary");
    }
    if (w < kCylinderWidthTarget * scale) break;
    stalled = w >= previous * (1 - 1e-12) ? stalled + 1 : 0;
    if (stalled >= 3) break;
    previous = w;
  }

  auto g = [&](double x) { return detail::iterate_n(map, x, m) - x; };
  double p;
  const double ga = g(cyl.lo);
  const double gb = g(cyl.hi);
  if ((ga <= 0 && gb >= 0) || (ga >= 0 && gb <= 0)) {
    p = detail::bracketed_root(g, cyl.lo, cyl.hi, ga, gb);
  } else if (cyl.width() < kCylinderWidthTarget * scale) {
    p = cyl.mid();
  } else {
    throw Error(ErrorCode::NonContraction,
                "cylinders of \"" + word.str() + "\" stall at width " + std::to_string(cyl.width()));
  }

  // Derivative along a forward pass decides which direction is stable for
  // reconstructing the remaining orbit points.
  double forward_log = 0;
  {
    double x = p;
    for (std::size_t i = 0; i < m; ++i) {
      forward_log += std::log(std::abs(map.derivative(x)));
      x = map.evaluate(x);
    }
  }

  PeriodicOrbit orbit;
  orbit.word = word;
  orbit.points.assign(m, p);
  if (forward_log > 0) {
    // Backward iteration along the word contracts towards the orbit.
    double y = p;
    for (std::size_t i = m; i-- > 1;) {
      y = map.branch_inverse(y, word[i]);
      orbit.points[i] = y;
    }
  } else {
    for (std::size_t i = 1; i < m; ++i) orbit.points[i] = map.evaluate(orbit.points[i - 1]);
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (map.symbol(orbit.points[i]) != word[i]) {
      throw Error(ErrorCode::EmptyCylinder,
                  "no periodic orbit realizes \"" + word.str() + "\" (symbol mismatch at " +
                      std::to_string(i) + ")");
    }
  }

  CompensatedSum<double> log_abs;
  int sign = 1;
  for (double x : orbit.points) {
    const double d = map.derivative(x);
    if (d < 0) sign = -sign;
    log_abs.add(std::log(std::abs(d)));
  }
  orbit.exponent = {sign, log_abs.value()};
  orbit.residual = std::abs(detail::iterate_n(map, p, m) - p);
  return orbit;
}

struct FormulaExponent {
  /// (-1)^(#1s) / rho_hat
  double value{0};
  GeometricFrequencyEstimate estimate;
  /// Smallest nonzero frequency the prefix can resolve (1 / prefix length).
  double detection_floor{0};
};

inline constexpr std::pair<std::size_t, std::size_t> kDefaultPowerRange{2, 6};

/// Exponent predicted from the geometric frequency of pattern^k in a symbol sequence.
inline FormulaExponent exponent_from_formula(
    const SymbolWord& pattern, std::span<const Symbol> prefix,
    std::pair<std::size_t, std::size_t> k_range = kDefaultPowerRange) {
  require_no_critical(pattern);
  if (!pattern.is_irreducible()) {
    throw Error(ErrorCode::IrreducibleRequired, "word \"" + pattern.str() + "\" is a proper power");
  }
  FormulaExponent out;
  out.detection_floor = 1.0 / double(prefix.size());
  out.estimate = geometric_frequency(pattern, prefix, k_range.first, k_range.second);
  if (out.estimate.rho_hat <= 0) {
    throw Error(ErrorCode::NoOrbitPredicted,
                "no occurrence of \"" + pattern.str() + "\"^" + std::to_string(k_range.first) +
                    " in a prefix of length " + std::to_string(prefix.size()));
  }
  const double sign = pattern.count_ones() % 2 == 0 ? 1.0 : -1.0;
  out.value = sign / out.estimate.rho_hat;
  return out;
}

inline FormulaExponent exponent_from_formula(
    const SymbolWord& pattern, SymbolStream& stream, std::size_t prefix_length,
    std::pair<std::size_t, std::size_t> k_range = kDefaultPowerRange) {
  require_no_critical(pattern);
  const auto prefix = stream.take(prefix_length);
  return exponent_from_formula(pattern, std::span<const Symbol>(prefix), k_range);
}

struct EnumerationFailure {
  SymbolWord word;
  ErrorCode code;
  std::string message;
};

struct PeriodicEnumeration {
  /// Ordered by period, then by the Lyndon word naming the orbit.
  std::vector<PeriodicOrbit> orbits;
  std::vector<EnumerationFailure> failures;
};

inline constexpr std::size_t kMaxEnumerationPeriod = 20;

/// All prime-period orbits up to max_period, one per orbit: each candidate is
/// the lexicographically least rotation of an aperiodic binary word.
inline PeriodicEnumeration enumerate_periodic(const UnimodalMap& map, std::size_t max_period,
                                              unsigned threads = 1) {
  if (max_period < 1 || max_period > kMaxEnumerationPeriod) {
    throw Error(ErrorCode::InvalidParameter, "max_period must be in [1, 20]");
  }
  std::vector<SymbolWord> words;
  for (std::size_t n = 1; n <= max_period; ++n) {
    auto layer = lyndon_words(n);
    words.insert(words.end(), layer.begin(), layer.end());
  }
  std::vector<std::optional<PeriodicOrbit>> found(words.size());
  std::vector<std::optional<EnumerationFailure>> failed(words.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < words.size(); i += stride) {
      try {
        found[i] = find_periodic(map, words[i]);
      } catch (const Error& e) {
        failed[i] = EnumerationFailure{words[i], e.code(), e.what()};
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  PeriodicEnumeration out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (found[i]) out.orbits.push_back(std::move(*found[i]));
    if (failed[i]) out.failures.push_back(std::move(*failed[i]));
  }
  return out;
}

struct ZetaValue {
  std::complex<double> value;
  std::complex<double> log_value;
  /// Bound on the dropped tail of the inner geometric sums (in log_value).
  double remainder_bound{0};
};

/// Orbit table for the |Df|^-1-weighted zeta function, truncated at max_period.
class ZetaTruncation {
 public:
  static constexpr std::size_t kInnerFactor = 4;

  ZetaTruncation(const std::vector<PeriodicOrbit>& orbits, std::size_t max_period)
      : max_period_(max_period) {
    for (const auto& o : orbits) {
      if (o.period() <= max_period) table_[o.period()].push_back(o.exponent.log_abs);
    }
  }

  std::size_t max_period() const { return max_period_; }
  std::string_view weight_tag() const { return "inverse_abs_derivative"; }
  /// period -> ln|Df^n(p)| for each prime orbit of that period.
  const std::map<std::size_t, std::vector<double>>& table() const { return table_; }

  /// Radius below which every orbit's geometric series converges.
  double convergence_radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& [n, logs] : table_) {
      for (double l : logs) r = std::min(r, std::exp(l / double(n)));
    }
    return r;
  }

  ZetaValue evaluate(std::complex<double> z) const {
    if (std::abs(z) >= 1.0 || std::abs(z) >= convergence_radius()) {
      throw Error(ErrorCode::DivergentInput, "|z| = " + std::to_string(std::abs(z)) +
                                                 " outside the guaranteed convergence disc");
    }
    std::complex<double> log_value = 0;
    double remainder = 0;
    for (const auto& [n, logs] : table_) {
      const std::size_t inner = kInnerFactor * max_period_ / n;
      const std::complex<double> zn = std::pow(z, double(n));
      for (double l : logs) {
        const double weight = std::exp(-l);
        std::complex<double> term = 1;
        for (std::size_t m = 1; m <= inner; ++m) {
          term *= zn * weight;
          log_value += term / double(m);
        }
        const double q = std::abs(zn) * weight;
        remainder += std::pow(q, double(inner + 1)) / (double(inner + 1) * (1 - q));
      }
    }
    return {std::exp(log_value), log_value, remainder};
  }

 private:
  std::size_t max_period_;
  std::map<std::size_t, std::vector<double>> table_;
};

inline ZetaValue zeta_truncation(const std::vector<PeriodicOrbit>& orbits, std::size_t max_period,
                                 std::complex<double> z) {
  return ZetaTruncation(orbits, max_period).evaluate(z);
}

}  // namespace kneadlab
