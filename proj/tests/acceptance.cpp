// One PASS/FAIL line per acceptance criterion. Usage: acceptance [--criterion N]
// Exit status is 0 only if every requested criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kneadlab/kneadlab.hpp"

using namespace kneadlab;

namespace {

struct Outcome {
  bool pass{true};
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_{std::chrono::steady_clock::now()};
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> screened_parameters(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  while (out.size() < count) {
    const double tau = 1.75 + 0.25 * uniform01(rng);
    if (stochasticity_screen(UnimodalMap::quadratic(tau), 1).passed) out.push_back(tau);
  }
  return out;
}

std::vector<SymbolWord> all_words(std::size_t n) {
  std::vector<SymbolWord> out;
  for (std::size_t bits = 0; bits < (std::size_t(1) << n); ++bits) {
    std::string s;
    for (std::size_t i = n; i-- > 0;) s += (bits >> i) & 1 ? '1' : '0';
    out.push_back(SymbolWord::parse(s));
  }
  return out;
}

constexpr std::uint64_t kSeed = 2024;

// Orbit counts, per-step growth 2 and the sign law for the Chebyshev map.
Outcome criterion_1() {
  Outcome o;
  Stopwatch clock;
  const auto q2 = UnimodalMap::quadratic(2.0);
  const auto e = enumerate_periodic(q2, 10);
  const double elapsed = clock.seconds();
  o.require(e.failures.empty(), std::to_string(e.failures.size()) + " enumeration failures");
  std::map<std::size_t, std::uint64_t> prime;
  for (const auto& orbit : e.orbits) ++prime[orbit.period()];
  for (std::size_t n = 1; n <= 10; ++n) {
    std::uint64_t fixed = 0;
    for (std::size_t d = 1; d <= n; ++d) {
      if (n % d == 0) fixed += d * prime[d];
    }
    o.require(fixed == (std::uint64_t(1) << n),
              "#Fix(f^" + std::to_string(n) + ") = " + std::to_string(fixed));
  }
  double worst = 0;
  std::string worst_word;
  for (const auto& orbit : e.orbits) {
    const double growth = orbit.exponent.per_step(orbit.period());
    if (rel(growth, 2.0) > worst) {
      worst = rel(growth, 2.0);
      worst_word = orbit.word.str();
    }
    o.require(orbit.exponent.sign == (orbit.word.count_ones() % 2 ? -1 : 1), "sign of " + orbit.word.str());
  }
  o.require(worst <= 1e-9, "growth of orbit " + worst_word + " off by " + std::to_string(worst) + " relative");
  o.require(elapsed < 10, "runtime " + std::to_string(elapsed) + " s");
  o.detail << " orbits=" << e.orbits.size() << " worst_growth_rel=" << worst << " (" << worst_word
           << ") time=" << elapsed << "s";
  return o;
}

// Kneading-frequency formula on a typical stream against find_periodic.
Outcome criterion_2() {
  Outcome o;
  Stopwatch clock;
  const auto q2 = UnimodalMap::quadratic(2.0);
  auto typical = typical_stream(q2, kSeed);
  const auto prefix = typical.take(10000000);
  double worst = 0;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (const auto& w : all_words(n)) {
      if (!w.is_irreducible()) continue;
      const double formula = exponent_from_formula(w, std::span<const Symbol>(prefix)).value;
      const double orbit = find_periodic(q2, w).exponent.value();
      const double d = rel(formula, orbit);
      worst = std::max(worst, d);
      o.detail << " " << w.str() << ":" << formula << "/" << orbit;
      o.require(d <= 0.1 && std::signbit(formula) == std::signbit(orbit), "word " + w.str());
    }
  }
  auto critical = critical_stream(q2);
  const auto kneading = critical.take(10000000);
  for (const char* w : {"1", "01", "011"}) {
    try {
      exponent_from_formula(SymbolWord::parse(w), std::span<const Symbol>(kneading));
      o.require(false, std::string("critical stream produced a value for ") + w);
    } catch (const Error& e) {
      o.require(e.code() == ErrorCode::NoOrbitPredicted,
                std::string("critical stream ") + w + " raised " + std::string(to_string(e.code())));
    }
  }
  const double elapsed = clock.seconds();
  o.require(elapsed < 120, "runtime " + std::to_string(elapsed) + " s");
  o.detail << " worst_rel=" << worst << " time=" << elapsed << "s";
  return o;
}

// Histogram against the arcsine density.
Outcome criterion_3() {
  Outcome o;
  Stopwatch clock;
  const auto q2 = UnimodalMap::quadratic(2.0);
  const auto d = estimate_density(q2, 10000000, 512, kSeed);
  double l1 = 0;
  for (std::size_t i = 0; i < d.bin_count(); ++i) {
    const double exact = (std::asin(std::clamp(d.bin_right(i), -1.0, 1.0)) -
                          std::asin(std::clamp(d.bin_left(i), -1.0, 1.0))) /
                         std::numbers::pi;
    l1 += std::abs(d.mass(i) - exact);
  }
  const double half = measure_of_interval(d, Interval::make(0, 1));
  const double elapsed = clock.seconds();
  o.require(l1 < 0.02, "L1 " + std::to_string(l1));
  o.require(std::abs(half - 0.5) <= 0.005, "mass of [0,1] " + std::to_string(half));
  o.require(elapsed < 60, "runtime " + std::to_string(elapsed) + " s");
  o.detail << " L1=" << l1 << " mass[0,1]=" << half << " time=" << elapsed << "s";
  return o;
}

// Critical-value Lyapunov exponent against the space average.
Outcome criterion_4() {
  Outcome o;
  const auto eq = verify_lyapunov_equality(UnimodalMap::quadratic(2.0), 10000000, kSeed);
  const double ln2 = std::log(2.0);
  o.require(std::abs(eq.critical_value_exponent - ln2) <= 5e-3,
            "critical value exponent " + std::to_string(eq.critical_value_exponent));
  o.require(std::abs(eq.integral - ln2) <= 5e-3, "integral " + std::to_string(eq.integral));
  o.require(std::abs(eq.difference) < 1e-2, "difference " + std::to_string(eq.difference));
  o.detail << " critical=" << eq.critical_value_exponent << " integral=" << eq.integral
           << " difference=" << eq.difference;
  return o;
}

// Truncated zeta function against 1/(1-z).
Outcome criterion_5() {
  Outcome o;
  Stopwatch clock;
  const auto e = enumerate_periodic(UnimodalMap::quadratic(2.0), 12);
  const ZetaTruncation zeta(e.orbits, 12);
  for (auto [z, tol] : {std::pair{0.25, 0.01}, std::pair{0.5, 0.01}, std::pair{0.9, 0.1}}) {
    const double value = zeta.evaluate({z, 0}).value.real();
    const double d = rel(value, 1 / (1 - z));
    o.detail << " z=" << z << ":" << value << " rel=" << d;
    o.require(d <= tol, "z=" + std::to_string(z));
  }
  const double elapsed = clock.seconds();
  o.require(elapsed < 30, "runtime " + std::to_string(elapsed) + " s");
  o.detail << " time=" << elapsed << "s";
  return o;
}

// Logistic and sine families share interior exponents; endpoint exponents differ.
Outcome criterion_6() {
  Outcome o;
  for (double a : {2.5, 3.3, 3.9}) {
    const auto f = UnimodalMap::logistic(a);
    const auto g = UnimodalMap::sine(a);
    const auto fe = enumerate_periodic(f, 4);
    const auto ge = enumerate_periodic(g, 4);
    std::map<std::string, const PeriodicOrbit*> by_word;
    for (const auto& orbit : ge.orbits) by_word[orbit.word.str()] = &orbit;
    std::size_t matched = 0;
    double worst = 0;
    for (const auto& orbit : fe.orbits) {
      if (orbit.word.str() == "0") continue;
      const auto it = by_word.find(orbit.word.str());
      o.require(it != by_word.end(), "a=" + std::to_string(a) + " sine orbit " + orbit.word.str() + " missing");
      if (it == by_word.end()) continue;
      ++matched;
      const double d = rel(it->second->exponent.value(), orbit.exponent.value());
      const double point = std::abs(sine_to_logistic(it->second->points[0]) - orbit.points[0]);
      worst = std::max(worst, d);
      o.require(d <= 1e-9, "a=" + std::to_string(a) + " word " + orbit.word.str());
      o.require(point <= 1e-9, "a=" + std::to_string(a) + " h-image of " + orbit.word.str());
    }
    o.require(matched + by_word.count("0") == ge.orbits.size(), "a=" + std::to_string(a) + " orbit sets differ");
    const double df = f.derivative(0.0);
    const double dg = g.derivative(0.0);
    o.require(rel(df, a) <= 1e-12, "a=" + std::to_string(a) + " logistic endpoint " + std::to_string(df));
    o.require(rel(dg, std::sqrt(a)) <= 1e-12, "a=" + std::to_string(a) + " sine endpoint " + std::to_string(dg));
    o.detail << " a=" << a << ":matched=" << matched << ",worst_rel=" << worst << ",Df(0)=" << df
             << ",Dg(0)=" << dg;
  }
  return o;
}

// Fixed point and first return time at tau = 1.9; nest invariants at screened parameters.
Outcome criterion_7() {
  Outcome o;
  const auto q19 = UnimodalMap::quadratic(1.9);
  const double p = orientation_reversing_fixed_point(q19);
  o.require(std::abs(p - 9.0 / 19.0) <= 1e-12, "fixed point " + std::to_string(p));
  const auto base = build_nest(q19, 1, 10000000);
  o.require(!base.levels.empty() && base.levels[0].v_n == 3, "v_0");
  std::size_t levels_checked = 0;
  for (double tau : screened_parameters(20, kSeed)) {
    const std::string at = "tau=" + std::to_string(tau);
    const auto f = UnimodalMap::quadratic(tau);
    const auto r = build_nest(f, 6, 100000000);
    o.require(!r.levels.empty(), at + " no levels");
    const std::uint64_t k = r.renormalization_period;
    for (std::size_t n = 0; n + 1 < r.levels.size(); ++n) {
      const auto& level = r.levels[n];
      const auto& next = r.levels[n + 1];
      const auto& in = level.interval;
      const std::string lv = at + " level " + std::to_string(n);
      ++levels_checked;
      o.require(next.interval.lo > in.lo && next.interval.hi < in.hi, lv + " nesting");
      if (!(level.c_n && level.landing_iterates && level.nice_on_horizon)) {
        o.require(false, lv + " missing statistics");
        continue;
      }
      o.require(*level.c_n > 0 && *level.c_n < 1, lv + " c_n");
      o.require(next.v_n - level.v_n == *level.landing_iterates, lv + " recursion");
      o.require(*level.nice_on_horizon, lv + " nice flag");
      const double slack = 1e-9 * in.width();
      const auto core = Interval::make(in.lo + slack, in.hi - slack);
      for (double e : {in.lo, in.hi}) {
        double z = e;
        for (std::uint64_t t = 1; t <= next.v_n / k; ++t) {
          for (std::uint64_t j = 0; j < k; ++j) z = f.evaluate(z);
          if (std::abs(std::abs(z) - std::abs(r.fixed_point)) < 1e-10) break;
          if (core.contains_interior(z)) {
            o.require(false, lv + " endpoint returns at step " + std::to_string(t));
            break;
          }
        }
      }
    }
  }
  o.detail << " fixed_point=" << p << " v0=" << (base.levels.empty() ? 0 : base.levels[0].v_n)
           << " level_pairs_checked=" << levels_checked;
  return o;
}

// Gap-regularized density norms and mass-length scaling at screened parameters.
Outcome criterion_8() {
  Outcome o;
  Stopwatch clock;
  const std::vector<double> lp{1, 2, 4};
  for (double tau : screened_parameters(5, kSeed)) {
    const auto f = UnimodalMap::quadratic(tau);
    const auto density = estimate_density(f, 10000000, 2048, kSeed);
    for (std::size_t level : {1u, 2u}) {
      const std::string at = "tau=" + std::to_string(tau) + " level " + std::to_string(level);
      try {
        const auto rc = regularized_density_report(gap_family(f, level, 14), density, lp);
        const auto rf = regularized_density_report(gap_family(f, level, 18), density, lp);
        double worst_ratio = 1;
        for (std::size_t i = 0; i < lp.size(); ++i) {
          const double a = rc.norms[i].second;
          const double b = rf.norms[i].second;
          const bool finite = std::isfinite(a) && std::isfinite(b) && a > 0 && b > 0;
          o.require(finite, at + " non-finite norm");
          if (finite) worst_ratio = std::max({worst_ratio, a / b, b / a});
        }
        o.detail << " " << tau << "/" << level << ":ratio=" << worst_ratio << ",slopes="
                 << (rc.fit ? rc.fit->slope : NAN) << "," << (rf.fit ? rf.fit->slope : NAN);
        o.require(worst_ratio < 2, at + " norm ratio " + std::to_string(worst_ratio));
        for (const auto* fit : {&rc.fit, &rf.fit}) {
          o.require(fit->has_value() && (*fit)->slope >= 0.8 && (*fit)->slope <= 1.2,
                    at + " slope " + (fit->has_value() ? std::to_string((*fit)->slope) : "none"));
        }
      } catch (const Error& e) {
        o.require(false, at + " " + std::string(to_string(e.code())));
      }
    }
  }
  const double elapsed = clock.seconds();
  o.require(elapsed < 300, "runtime " + std::to_string(elapsed) + " s");
  o.detail << " time=" << elapsed << "s";
  return o;
}

// Property suites: shift equivariance, cylinders, counts, histograms, reports.
Outcome criterion_9() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  std::size_t shift_cases = 0;
  for (double tau : {1.9, 2.0}) {
    const auto f = UnimodalMap::quadratic(tau);
    for (int i = 0; i < 1000; ++i) {
      const double x = -1 + 2 * uniform01(rng);
      const auto w = itinerary(f, x, 40);
      if (w.contains_critical()) continue;
      const auto s = itinerary(f, f.evaluate(x), 39);
      ++shift_cases;
      o.require(std::equal(s.begin(), s.end(), w.begin() + 1), "shift at x=" + std::to_string(x));
    }
  }
  for (double tau : {1.9, 2.0}) {
    const auto f = UnimodalMap::quadratic(tau);
    for (std::size_t n = 1; n <= 8; ++n) {
      std::vector<Interval> layer;
      for (const auto& w : all_words(n)) {
        const auto c = cylinder(f, w).interval;
        for (Symbol s : {Symbol::zero, Symbol::one}) {
          auto longer = w.str() + to_char(s);
          const auto child = cylinder(f, SymbolWord::parse(longer)).interval;
          o.require(child.empty || (!c.empty && child.lo >= c.lo && child.hi <= c.hi), "nesting of " + longer);
        }
        if (!c.empty) layer.push_back(c);
      }
      std::sort(layer.begin(), layer.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
      for (std::size_t i = 1; i < layer.size(); ++i) {
        o.require(layer[i].lo >= layer[i - 1].hi, "overlap at length " + std::to_string(n));
      }
    }
  }
  {
    const auto f = UnimodalMap::quadratic(1.95);
    auto stream = typical_stream(f, kSeed);
    const auto prefix = stream.take(1000000);
    for (const char* w : {"0", "1", "01", "011", "0111"}) {
      const auto est = frequency(SymbolWord::parse(w), std::span<const Symbol>(prefix), 12);
      for (std::size_t k = 1; k < est.per_power_counts.size(); ++k) {
        o.require(est.per_power_counts[k].second <= est.per_power_counts[k - 1].second,
                  std::string("count monotonicity for ") + w);
      }
      o.require(est.r_hat == double(est.occurrence_count) / double(est.prefix_length), "r_hat");
    }
  }
  for (double tau : {1.8, 1.9, 2.0}) {
    const auto d = estimate_density(UnimodalMap::quadratic(tau), 200000, 333, kSeed);
    std::uint64_t total = 0;
    double mass = 0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
      total += d.counts[i];
      mass += d.mass(i);
    }
    o.require(total == d.sample_count, "histogram count at tau=" + std::to_string(tau));
    o.require(std::abs(mass - 1) <= 1e-12, "histogram mass at tau=" + std::to_string(tau));
  }
  {
    ExperimentConfig cfg;
    cfg.orbit_length_iterates = 1000000;
    cfg.words = {"1", "01"};
    for (auto tag : {TheoremTag::A, TheoremTag::B, TheoremTag::zeta, TheoremTag::lyap}) {
      o.require(run_verify(cfg, tag).dump() == run_verify(cfg, tag).dump(),
                std::string("report determinism for ") + std::string(to_string(tag)));
    }
    cfg.map_family = Family::logistic;
    cfg.map_parameter = 3.9;
    o.require(run_verify(cfg, TheoremTag::conjugacy).dump() == run_verify(cfg, TheoremTag::conjugacy).dump(),
              "report determinism for conjugacy");
  }
  o.detail << " shift_cases=" << shift_cases;
  return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"chebyshev exponent law", criterion_1},
    {"kneading-frequency formula on a typical stream", criterion_2},
    {"arcsine density", criterion_3},
    {"lyapunov equality", criterion_4},
    {"zeta closed form", criterion_5},
    {"logistic/sine conjugacy", criterion_6},
    {"principal nest sanity", criterion_7},
    {"gap-regularized density", criterion_8},
    {"property suites", criterion_9},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (n < 1 || n > int(kCriteria.size())) {
        std::fprintf(stderr, "criterion must be in 1..%zu\n", kCriteria.size());
        return 1;
      }
      selected.push_back(std::size_t(n));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 1;
    }
  }
  if (selected.empty()) {
    for (std::size_t n = 1; n <= kCriteria.size(); ++n) selected.push_back(n);
  }
  bool all = true;
  for (std::size_t n : selected) {
    const auto& [name, run] = kCriteria[n - 1];
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s criterion %zu (%s):%s\n", o.pass ? "PASS" : "FAIL", n, name, o.detail.str().c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
