#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "kneadlab/symbolic.hpp"

using namespace kneadlab;

namespace {

SymbolWord W(const char* text) { return SymbolWord::parse(text); }

// Naive occurrence count of `pattern` fully inside `prefix`.
std::size_t naive_count(const std::vector<Symbol>& prefix, const SymbolWord& pattern) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + pattern.size() <= prefix.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < pattern.size() && ok; ++j) ok = prefix[i + j] == pattern[j];
    count += ok;
  }
  return count;
}

}  // namespace

TEST(Words, ParseAndIrreducibility) {
  EXPECT_EQ(W("c10").str(), "c10");
  EXPECT_THROW(W("1x0"), Error);
  EXPECT_TRUE(W("10").is_irreducible());
  EXPECT_FALSE(W("1010").is_irreducible());
  EXPECT_EQ(W("1010").root(), W("10"));
  EXPECT_TRUE(W("1011").is_irreducible());
  EXPECT_EQ(W("011").least_rotation(), W("011"));
  EXPECT_EQ(W("110").least_rotation(), W("011"));
}

TEST(Words, LyndonCountsMatchNecklaceFormula) {
  // Number of binary Lyndon words: (1/n) sum_{d|n} mu(n/d) 2^d.
  auto mobius = [](int n) {
    int result = 1;
    for (int p = 2; p * p <= n; ++p) {
      if (n % p == 0) {
        n /= p;
        if (n % p == 0) return 0;
        result = -result;
      }
    }
    if (n > 1) result = -result;
    return result;
  };
  for (int n = 1; n <= 14; ++n) {
    long long total = 0;
    for (int d = 1; d <= n; ++d) {
      if (n % d == 0) total += mobius(n / d) * (1LL << d);
    }
    const auto words = lyndon_words(std::size_t(n));
    EXPECT_EQ(static_cast<long long>(words.size()), total / n) << "n=" << n;
    for (const auto& w : words) {
      ASSERT_TRUE(w.is_irreducible());
      ASSERT_EQ(w.least_rotation(), w);
    }
  }
}

TEST(Itinerary, Examples) {
  const auto q2 = UnimodalMap::quadratic(2.0);
  EXPECT_EQ(itinerary(q2, 0.0, 4), W("c100"));
  EXPECT_EQ(itinerary(q2, 0.5, 3), W("111"));
  EXPECT_EQ(itinerary(q2, -1.0, 3), W("000"));
}

TEST(Kneading, Examples) {
  EXPECT_EQ(kneading_sequence(UnimodalMap::quadratic(2.0), 4), W("c100"));
  // Orbit 0, 0.9, -0.639, 0.1242: signs +, -, + after the leading c.
  EXPECT_EQ(kneading_sequence(UnimodalMap::quadratic(1.9), 4), W("c101"));
  // Orbit 1/2, 1, 0, 0 with critical point 1/2.
  EXPECT_EQ(kneading_sequence(UnimodalMap::logistic(4.0), 4), W("c100"));
  EXPECT_THROW(kneading_sequence(UnimodalMap::quadratic(2.0), 0), Error);
}

TEST(Cylinder, Examples) {
  const auto q2 = UnimodalMap::quadratic(2.0);
  const auto c1 = cylinder(q2, W("1")).interval;
  EXPECT_DOUBLE_EQ(c1.lo, 0.0);
  EXPECT_DOUBLE_EQ(c1.hi, 1.0);
  // 1 - 2x^2 > 0 on x > 0.
  const auto c11 = cylinder(q2, W("11")).interval;
  EXPECT_NEAR(c11.lo, 0.0, 1e-15);
  EXPECT_NEAR(c11.hi, std::sqrt(0.5), 1e-15);
  // A left point followed by twenty right visits: pinned near -1/2.
  SymbolWord w = W("0");
  for (int i = 0; i < 20; ++i) w.push_back(Symbol::one);
  const auto c = cylinder(q2, w).interval;
  EXPECT_TRUE(c.empty || c.width() < 1e-5);
  if (!c.empty) {
    EXPECT_NEAR(c.mid(), -0.5, 1e-3);
  }
}

TEST(Cylinder, RejectsCriticalSymbol) {
  try {
    cylinder(UnimodalMap::quadratic(2.0), W("1c"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ContainsCriticalSymbol);
  }
}

TEST(Cylinder, EmptyWhenInadmissible) {
  // For t < 1 the whole interval maps left of 0, so nothing visits 1 twice.
  const auto q = UnimodalMap::quadratic(0.9);
  EXPECT_TRUE(cylinder(q, W("11")).interval.empty);
  EXPECT_TRUE(cylinder(q, W("01")).interval.empty);
  EXPECT_FALSE(cylinder(q, W("1")).interval.empty);
}

TEST(Cylinder, SampledPointsCarryTheWord) {
  std::mt19937_64 rng(3);
  const auto map = UnimodalMap::quadratic(1.87);
  for (std::size_t len = 1; len <= 6; ++len) {
    for (std::size_t bits = 0; bits < (1u << len); ++bits) {
      SymbolWord w;
      for (std::size_t i = 0; i < len; ++i) w.push_back((bits >> i) & 1 ? Symbol::one : Symbol::zero);
      const auto iv = cylinder(map, w).interval;
      if (iv.empty || iv.width() < 1e-9) continue;
      std::uniform_real_distribution<double> u(iv.lo, iv.hi);
      for (int s = 0; s < 50; ++s) {
        // Stay away from the endpoints, where the itinerary hits 'c'.
        const double x = iv.lo + (iv.hi - iv.lo) * (0.001 + 0.998 * (u(rng) - iv.lo) / iv.width());
        ASSERT_EQ(itinerary(map, x, len), w) << "x=" << x;
      }
    }
  }
}

TEST(Cylinder, NestingAndDisjointness) {
  for (auto map : {UnimodalMap::quadratic(2.0), UnimodalMap::quadratic(1.76), UnimodalMap::logistic(3.7)}) {
    for (std::size_t len = 1; len <= 7; ++len) {
      std::vector<Interval> same_length;
      for (std::size_t bits = 0; bits < (1u << len); ++bits) {
        SymbolWord w;
        for (std::size_t i = 0; i < len; ++i) w.push_back((bits >> i) & 1 ? Symbol::one : Symbol::zero);
        const auto parent = cylinder(map, w).interval;
        for (Symbol s : {Symbol::zero, Symbol::one}) {
          SymbolWord ext = w;
          ext.push_back(s);
          const auto child = cylinder(map, ext).interval;
          if (child.empty) continue;
          ASSERT_FALSE(parent.empty);
          ASSERT_GE(child.lo, parent.lo - 1e-15);
          ASSERT_LE(child.hi, parent.hi + 1e-15);
        }
        if (!parent.empty) same_length.push_back(parent);
      }
      for (std::size_t i = 0; i < same_length.size(); ++i) {
        for (std::size_t j = i + 1; j < same_length.size(); ++j) {
          const auto& a = same_length[i];
          const auto& b = same_length[j];
          const double overlap = std::min(a.hi, b.hi) - std::max(a.lo, b.lo);
          ASSERT_LE(overlap, 1e-12) << "len=" << len;
        }
      }
    }
  }
}

TEST(Itinerary, ShiftEquivariance) {
  std::mt19937_64 rng(17);
  for (auto map : {UnimodalMap::quadratic(1.93), UnimodalMap::sine(3.8)}) {
    std::uniform_real_distribution<double> u(map.domain().lo, map.domain().hi);
    for (int trial = 0; trial < 500; ++trial) {
      const double x = u(rng);
      const auto full = itinerary(map, x, 40);
      if (full.contains_critical()) continue;
      const auto shifted = itinerary(map, map.evaluate(x), 39);
      ASSERT_EQ(std::vector<Symbol>(full.begin() + 1, full.end()), shifted.symbols());
    }
  }
}

TEST(Frequency, PeriodicBlockExample) {
  const auto prefix = W("110110110").symbols();
  const auto est = frequency(W("11"), std::span<const Symbol>(prefix), 1);
  EXPECT_EQ(est.occurrence_count, 3u);
  EXPECT_DOUBLE_EQ(est.r_hat, 1.0 / 3.0);
}

TEST(Frequency, AlternatingStream) {
  auto stream = periodic_stream(W("10"));
  const std::size_t n = 100000;
  const auto est = frequency(W("10"), stream, n, 3);
  for (auto [k, count] : est.per_power_counts) {
    // Matches at even positions whose full window fits: n/2 - k + 1.
    EXPECT_EQ(count, n / 2 - k + 1);
    EXPECT_NEAR(double(count) / double(n), 0.5, 3.0 * double(k) / double(n));
  }
  EXPECT_EQ(stream.produced_count(), n);
}

TEST(Frequency, TypicalChebyshevSideBalance) {
  // Arcsine density gives each side of 0 mass 1/2.
  auto stream = typical_stream(UnimodalMap::quadratic(2.0), 2024);
  const auto est = frequency(W("1"), stream, 1000000, 1);
  EXPECT_NEAR(est.r_hat, 0.5, 0.01);
}

TEST(Frequency, Errors) {
  auto stream = periodic_stream(W("10"));
  EXPECT_THROW(frequency(W("1c"), stream, 100, 1), Error);
  try {
    frequency(W("10"), stream, 5, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PrefixTooShort);
  }
}

TEST(Frequency, MatchesNaiveCountsAndIsMonotone) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Symbol> prefix(300 + rng() % 300);
    const bool biased = trial % 2;
    for (auto& s : prefix) s = (rng() % (biased ? 5 : 2)) == 0 ? Symbol::zero : Symbol::one;
    SymbolWord pattern;
    const std::size_t len = 1 + rng() % 3;
    for (std::size_t i = 0; i < len; ++i) pattern.push_back(rng() % 2 ? Symbol::one : Symbol::zero);
    const std::size_t max_power = 1 + rng() % 6;
    const auto est = frequency(pattern, std::span<const Symbol>(prefix), max_power);
    for (auto [k, count] : est.per_power_counts) {
      ASSERT_EQ(count, naive_count(prefix, pattern.power(k)));
      if (k > 1) {
        ASSERT_LE(count, est.per_power_counts[k - 2].second);
      }
    }
  }
}

TEST(Frequency, ChebyshevCylinderMeasures) {
  // Tent conjugacy: every length-3 cylinder has measure 1/8.
  auto stream = typical_stream(UnimodalMap::quadratic(2.0), 77);
  const auto prefix = stream.take(10000000);
  for (std::size_t bits = 0; bits < 8; ++bits) {
    SymbolWord w;
    for (int i = 0; i < 3; ++i) w.push_back((bits >> i) & 1 ? Symbol::one : Symbol::zero);
    const auto est = frequency(w, std::span<const Symbol>(prefix), 1);
    EXPECT_NEAR(est.r_hat, 0.125, 0.01) << w.str();
  }
}

TEST(GeometricFrequency, AlternatingStreamIsOne) {
  auto stream = periodic_stream(W("10"));
  const auto est = geometric_frequency(W("10"), stream, 100000, 1, 5);
  EXPECT_NEAR(est.rho_hat, 1.0, 1e-4);
  EXPECT_EQ(est.status, GeometricStatus::Ok);
}

TEST(GeometricFrequency, ZeroFrequency) {
  auto stream = periodic_stream(W("0"));
  const auto est = geometric_frequency(W("1"), stream, 10000, 1, 4);
  EXPECT_EQ(est.rho_hat, 0.0);
  EXPECT_EQ(est.status, GeometricStatus::ZeroFrequency);
}

TEST(GeometricFrequency, InsufficientOccurrences) {
  std::vector<Symbol> prefix(1000, Symbol::zero);
  for (int i = 0; i < 10; ++i) prefix[std::size_t(i) * 50] = Symbol::one;
  try {
    geometric_frequency(W("1"), std::span<const Symbol>(prefix), 1, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientOccurrences);
  }
}

TEST(GeometricFrequency, ChebyshevTypicalHalf) {
  auto stream = typical_stream(UnimodalMap::quadratic(2.0), 4242);
  const auto est = geometric_frequency(W("1"), stream, 10000000, 2, 6);
  EXPECT_NEAR(est.rho_hat, 0.5, 0.02);
  EXPECT_GT(est.slope_stderr, 0.0);
  EXPECT_EQ(est.per_power_log_freq.size(), 5u);
}

TEST(GeometricFrequency, RangeShrinksForRareBlocks) {
  auto stream = typical_stream(UnimodalMap::quadratic(2.0), 5);
  const auto est = geometric_frequency(W("011"), stream, 1000000, 1, 8);
  EXPECT_EQ(est.status, GeometricStatus::RangeShrunk);
  EXPECT_LT(est.fit_range.second, 8u);
  EXPECT_NEAR(est.rho_hat, 0.125, 0.02);
}

TEST(SymbolStream, Reproducible) {
  const auto map = UnimodalMap::quadratic(1.8);
  auto a = typical_stream(map, 9);
  auto b = typical_stream(map, 9);
  EXPECT_EQ(a.take(5000), b.take(5000));
  auto c1 = critical_stream(map);
  EXPECT_EQ(SymbolWord(c1.take(30)), kneading_sequence(map, 30));
}

TEST(TypicalOrbit, RecoversFromFloatingPointCollapse) {
  // Seed 11 sends the double-precision Chebyshev orbit onto the fixed point -1.
  TypicalOrbit orbit(UnimodalMap::quadratic(2.0), 11);
  std::size_t at_minus_one = 0;
  for (int i = 0; i < 10000000; ++i) at_minus_one += orbit.next() == -1.0;
  EXPECT_LT(at_minus_one, 10u);
}
