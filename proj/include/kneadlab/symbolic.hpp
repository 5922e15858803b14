#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/symbols.hpp"
#include "kneadlab/typical.hpp"

namespace kneadlab {

/// Symbols of f^k(x0) for k = 0..n-1.
template <class Real>
SymbolWord itinerary(const BasicUnimodalMap<Real>& map, Real x0, std::size_t n) {
  std::vector<Symbol> out;
  out.reserve(n);
  Real x = map.admit(x0);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(map.symbol(x));
    if (k + 1 < n) x = map.evaluate(x);
  }
  return SymbolWord(std::move(out));
}

/// Itinerary of the critical point; the first symbol is always 'c'.
template <class Real>
SymbolWord kneading_sequence(const BasicUnimodalMap<Real>& map, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "kneading sequence length must be >= 1");
  return itinerary(map, map.critical_point(), n);
}

/// Single-consumer generator of symbols. Symbols already produced are a pure
/// function of how the stream was built (map, start point or seed).
class SymbolStream {
 public:
  using Generator = std::function<Symbol()>;

  explicit SymbolStream(Generator generator) : generator_(std::move(generator)) {}

  Symbol next() {
    ++produced_;
    return generator_();
  }

  std::vector<Symbol> take(std::size_t n) {
    std::vector<Symbol> out(n);
    for (auto& s : out) s = next();
    return out;
  }

  std::size_t produced_count() const { return produced_; }

 private:
  Generator generator_;
  std::size_t produced_{0};
};

template <class Real>
SymbolStream orbit_stream(const BasicUnimodalMap<Real>& map, Real x0) {
  auto state = std::make_shared<std::pair<BasicUnimodalMap<Real>, Real>>(map, map.admit(x0));
  return SymbolStream([state] {
    auto& [m, x] = *state;
    const Symbol s = m.symbol(x);
    x = m.evaluate(x);
    return s;
  });
}

template <class Real>
SymbolStream critical_stream(const BasicUnimodalMap<Real>& map) {
  return orbit_stream(map, map.critical_point());
}

template <class Real>
SymbolStream typical_stream(const BasicUnimodalMap<Real>& map, std::uint64_t seed,
                            std::size_t burn_in = kBurnIn) {
  auto orbit = std::make_shared<BasicTypicalOrbit<Real>>(map, seed, burn_in);
  auto m = std::make_shared<BasicUnimodalMap<Real>>(map);
  return SymbolStream([orbit, m] { return m->symbol(orbit->next()); });
}

/// word^infinity.
inline SymbolStream periodic_stream(const SymbolWord& word) {
  if (word.empty()) throw Error(ErrorCode::InvalidWord, "periodic stream needs a nonempty word");
  auto state = std::make_shared<std::pair<SymbolWord, std::size_t>>(word, 0);
  return SymbolStream([state] {
    auto& [w, i] = *state;
    const Symbol s = w[i];
    i = (i + 1) % w.size();
    return s;
  });
}

struct CylinderInterval {
  SymbolWord word;
  Interval interval;
};

/// Pulls J back through the monotone branch selected by s:
/// { x in branch(s) : f(x) in J }.
template <class Real>
BasicInterval<Real> branch_preimage(const BasicUnimodalMap<Real>& map,
                                    const BasicInterval<Real>& target, Symbol s) {
  const auto hit = target.intersect(map.branch_image(s));
  if (hit.empty) return BasicInterval<Real>::none();
  return BasicInterval<Real>::make(map.branch_inverse(hit.lo, s), map.branch_inverse(hit.hi, s));
}

/// Pulls `target` back through every symbol of `word`, last symbol first:
/// the set of x with itinerary starting with `word` and f^|word|(x) in target.
template <class Real>
BasicInterval<Real> pullback(const BasicUnimodalMap<Real>& map, BasicInterval<Real> target,
                             const SymbolWord& word) {
  for (std::size_t i = word.size(); i-- > 0;) {
    target = branch_preimage(map, target, word[i]);
    if (target.empty) break;
  }
  return target;
}

inline void require_no_critical(const SymbolWord& word) {
  if (word.contains_critical()) {
    throw Error(ErrorCode::ContainsCriticalSymbol, "word \"" + word.str() + "\" contains 'c'");
  }
}

/// I_word as a closed interval (possibly a point, possibly empty).
inline CylinderInterval cylinder(const UnimodalMap& map, const SymbolWord& word) {
  require_no_critical(word);
  return {word, pullback(map, map.domain(), word)};
}

struct FrequencyEstimate {
  SymbolWord pattern;
  std::size_t prefix_length{0};
  std::size_t occurrence_count{0};
  double r_hat{0};
  /// (k, number of occurrences of pattern^k), k = 1..max_power.
  std::vector<std::pair<std::size_t, std::size_t>> per_power_counts;
};

/// Overlapping occurrence counts of pattern^k, k = 1..max_power, in one pass.
/// A window counts only if it lies entirely inside the prefix.
inline FrequencyEstimate frequency(const SymbolWord& pattern, std::span<const Symbol> prefix,
                                   std::size_t max_power) {
  if (pattern.empty()) throw Error(ErrorCode::InvalidWord, "empty frequency pattern");
  require_no_critical(pattern);
  const std::size_t m = pattern.size();
  const std::size_t n = prefix.size();
  if (max_power < 1) throw Error(ErrorCode::InvalidParameter, "max_power must be >= 1");
  if (n < m * max_power) {
    throw Error(ErrorCode::PrefixTooShort, "prefix of length " + std::to_string(n) +
                                               " cannot hold " + std::to_string(max_power) +
                                               " repetitions of \"" + pattern.str() + "\"");
  }
  // run[i] = number of consecutive copies of the pattern starting at i (capped).
  const std::size_t windows = n - m + 1;
  std::vector<std::uint32_t> run(windows, 0);
  std::vector<std::size_t> at_least(max_power + 2, 0);
  for (std::size_t i = windows; i-- > 0;) {
    bool match = true;
    for (std::size_t j = 0; j < m && match; ++j) match = prefix[i + j] == pattern[j];
    if (!match) continue;
    const std::uint32_t next = i + m < windows ? run[i + m] : 0;
    run[i] = std::min<std::uint32_t>(next + 1, std::uint32_t(max_power));
    ++at_least[run[i]];
  }
  FrequencyEstimate est;
  est.pattern = pattern;
  est.prefix_length = n;
  std::size_t cumulative = 0;
  std::vector<std::size_t> counts(max_power + 1, 0);
  for (std::size_t k = max_power; k >= 1; --k) {
    cumulative += at_least[k];
    counts[k] = cumulative;
  }
  for (std::size_t k = 1; k <= max_power; ++k) est.per_power_counts.emplace_back(k, counts[k]);
  est.occurrence_count = counts[1];
  est.r_hat = double(est.occurrence_count) / double(n);
  return est;
}

inline FrequencyEstimate frequency(const SymbolWord& pattern, SymbolStream& stream,
                                   std::size_t prefix_length, std::size_t max_power) {
  require_no_critical(pattern);
  if (prefix_length < pattern.size() * max_power) {
    throw Error(ErrorCode::PrefixTooShort, "prefix too short for the requested powers");
  }
  const auto prefix = stream.take(prefix_length);
  return frequency(pattern, std::span<const Symbol>(prefix), max_power);
}

enum class GeometricStatus { Ok, RangeShrunk, ZeroFrequency };

constexpr std::string_view to_string(GeometricStatus s) {
  switch (s) {
    case GeometricStatus::Ok: return "Ok";
    case GeometricStatus::RangeShrunk: return "RangeShrunk";
    case GeometricStatus::ZeroFrequency: return "ZeroFrequency";
  }
  return "Ok";
}

inline constexpr std::size_t kMinOccurrences = 50;

struct GeometricFrequencyEstimate {
  double rho_hat{0};
  std::pair<std::size_t, std::size_t> fit_range{0, 0};
  double slope_stderr{0};
  /// Delta-method standard error of rho_hat.
  double rho_stderr{0};
  /// Last-ratio estimator r(a^k)/r(a^(k-1)) at the top of the fit range (diagnostic only).
  double ratio_estimate{0};
  std::vector<std::pair<std::size_t, double>> per_power_log_freq;
  GeometricStatus status{GeometricStatus::Ok};
  FrequencyEstimate counts;
};

/// exp(slope) of the least-squares line through ln r(pattern^k) against k.
///
/// Powers whose count falls below 50 are dropped from the top of the range.
/// The fit needs at least two powers.
inline GeometricFrequencyEstimate geometric_frequency(const SymbolWord& pattern,
                                                      std::span<const Symbol> prefix,
                                                      std::size_t k_min, std::size_t k_max) {
  if (k_min < 1 || k_max < k_min) throw Error(ErrorCode::InvalidParameter, "invalid power range");
  GeometricFrequencyEstimate est;
  est.counts = frequency(pattern, prefix, k_max);
  const auto& counts = est.counts.per_power_counts;
  const double n = double(prefix.size());
  const std::size_t at_min = counts[k_min - 1].second;
  est.fit_range = {k_min, k_min};
  if (at_min == 0) {
    est.status = GeometricStatus::ZeroFrequency;
    est.rho_hat = 0;
    return est;
  }
  if (at_min < kMinOccurrences) {
    throw Error(ErrorCode::InsufficientOccurrences,
                "only " + std::to_string(at_min) + " occurrences of \"" + pattern.str() + "\"^" +
                    std::to_string(k_min));
  }
  std::size_t k_used = k_min;
  while (k_used < k_max && counts[k_used].second >= kMinOccurrences) ++k_used;
  if (k_used == k_min) {
    throw Error(ErrorCode::InsufficientOccurrences,
                "fewer than two powers of \"" + pattern.str() + "\" have enough occurrences");
  }
  est.status = k_used < k_max ? GeometricStatus::RangeShrunk : GeometricStatus::Ok;
  est.fit_range = {k_min, k_used};
  std::vector<double> xs, ys;
  for (std::size_t k = k_min; k <= k_used; ++k) {
    const double lf = std::log(double(counts[k - 1].second) / n);
    est.per_power_log_freq.emplace_back(k, lf);
    xs.push_back(double(k));
    ys.push_back(lf);
  }
  const auto fit = least_squares(xs, ys);
  est.rho_hat = std::min(1.0, std::exp(fit->slope));
  est.slope_stderr = fit->slope_stderr;
  est.rho_stderr = est.rho_hat * fit->slope_stderr;
  est.ratio_estimate = double(counts[k_used - 1].second) / double(counts[k_used - 2].second);
  return est;
}

inline GeometricFrequencyEstimate geometric_frequency(const SymbolWord& pattern,
                                                      SymbolStream& stream,
                                                      std::size_t prefix_length, std::size_t k_min,
                                                      std::size_t k_max) {
  require_no_critical(pattern);
  const auto prefix = stream.take(prefix_length);
  return geometric_frequency(pattern, std::span<const Symbol>(prefix), k_min, k_max);
}

}  // namespace kneadlab
