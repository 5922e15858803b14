#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kneadlab/config.hpp"
#include "kneadlab/gaps.hpp"
#include "kneadlab/measure.hpp"
#include "kneadlab/nest.hpp"
#include "kneadlab/orbits.hpp"
#include "kneadlab/report.hpp"
#include "kneadlab/symbolic.hpp"

namespace kneadlab {

enum class TheoremTag { A, B, C, lyap, nest_lyapunov, zeta, conjugacy };

constexpr std::string_view to_string(TheoremTag t) {
  switch (t) {
    case TheoremTag::A: return "A";
    case TheoremTag::B: return "B";
    case TheoremTag::C: return "C";
    case TheoremTag::lyap: return "lyap";
    case TheoremTag::nest_lyapunov: return "nest-lyapunov";
    case TheoremTag::zeta: return "zeta";
    case TheoremTag::conjugacy: return "conjugacy";
  }
  return "A";
}

/// Accepts both the short tags and the CLI names (theorem-a, lyap-equality, ...).
inline TheoremTag parse_theorem_tag(std::string_view s) {
  if (s == "A" || s == "theorem-a") return TheoremTag::A;
  if (s == "B" || s == "theorem-b") return TheoremTag::B;
  if (s == "C" || s == "theorem-c") return TheoremTag::C;
  if (s == "lyap" || s == "lyap-equality") return TheoremTag::lyap;
  if (s == "nest-lyapunov") return TheoremTag::nest_lyapunov;
  if (s == "zeta") return TheoremTag::zeta;
  if (s == "conjugacy") return TheoremTag::conjugacy;
  throw Error(ErrorCode::InvalidConfig, "unknown verification target '" + std::string(s) + "'");
}

struct Preperiod {
  std::size_t preperiod{0};
  std::size_t period{0};
};

/// Detects f^i(c) == f^j(c) (to within the tie tolerance) for 1 <= i < j <= horizon.
inline std::optional<Preperiod> critical_orbit_preperiod(const UnimodalMap& map, std::size_t horizon = 64) {
  std::vector<double> orbit;
  double x = map.critical_point();
  const double tol = map.tie_tolerance();
  for (std::size_t j = 1; j <= horizon; ++j) {
    x = map.evaluate(x);
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      if (std::abs(orbit[i] - x) <= tol) return Preperiod{i + 1, j - (i + 1)};
    }
    orbit.push_back(x);
  }
  return std::nullopt;
}

/// Closed form of the |Df^n|^-1 weighted zeta function where the orbit data are
/// explicit: q_2 and its conjugate logistic 4. Every orbit has |Df^n| = 2^n except
/// the boundary fixed point, where |Df| = 4.
inline std::optional<std::complex<double>> zeta_closed_form(const UnimodalMap& map, std::complex<double> z) {
  const bool chebyshev = (map.family() == Family::quadratic && map.parameter() == 2.0) ||
                         (map.family() == Family::logistic && map.parameter() == 4.0);
  if (!chebyshev) return std::nullopt;
  return (1.0 - z / 2.0) / ((1.0 - z) * (1.0 - z / 4.0));
}

namespace detail {

inline double tolerance_for(const ExperimentConfig& cfg, TheoremTag tag) {
  switch (tag) {
    case TheoremTag::A: return cfg.tolerance_theorem_a_relative;
    case TheoremTag::B: return cfg.tolerance_theorem_b_absolute;
    case TheoremTag::C: return 1;
    case TheoremTag::lyap: return cfg.tolerance_lyap_absolute;
    case TheoremTag::nest_lyapunov: return cfg.tolerance_nest_lyapunov_relative;
    case TheoremTag::zeta: return cfg.tolerance_zeta_relative;
    case TheoremTag::conjugacy: return cfg.tolerance_conjugacy_relative;
  }
  return 0;
}

inline Json config_echo(const ExperimentConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.to_map()) {
    if (k != "threads_count" && k != "output_path") j[k] = v;
  }
  return j;
}

inline double relative(double measured, double predicted) {
  return std::abs(measured - predicted) / std::abs(predicted);
}

inline std::vector<SymbolWord> config_words(const ExperimentConfig& cfg) {
  std::vector<SymbolWord> words;
  for (const auto& w : cfg.words) words.push_back(SymbolWord::parse(w));
  return words;
}

inline std::string preperiod_note(const UnimodalMap& map) {
  const auto pre = critical_orbit_preperiod(map);
  if (!pre) return {};
  return "critical orbit is preperiodic (preperiod " + std::to_string(pre->preperiod) + ", period " +
         std::to_string(pre->period) + "): Misiurewicz parameter, expected negative control";
}

inline void verify_theorem_a(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = UnimodalMap::make(cfg.map_family, cfg.map_parameter);
  const bool critical = cfg.stream == "critical";
  auto stream = critical ? critical_stream(map) : typical_stream(map, cfg.seed);
  const auto prefix = stream.take(cfg.orbit_length_iterates);
  const std::span<const Symbol> view(prefix);
  double worst = 0;
  for (const auto& word : config_words(cfg)) {
    const auto orbit = find_periodic(map, word);
    FormulaExponent formula;
    try {
      formula = exponent_from_formula(word, view, {cfg.power_k_min, cfg.power_k_max});
    } catch (const Error& e) {
      const auto note = preperiod_note(map);
      if (e.code() != ErrorCode::NoOrbitPredicted || !critical || note.empty()) throw;
      rep.failure = error_json(e);
      (*rep.failure)["annotation"] = note;
      (*rep.failure)["word"] = word.str();
      return;
    }
    const double rel = relative(formula.value, orbit.exponent.value());
    rep.measured[word.str()] = {{"formula_exponent", formula.value},
                                {"geometric_frequency", geometric_json(formula.estimate)},
                                {"relative_error", rel}};
    rep.predicted[word.str()] = {{"orbit_exponent", orbit.exponent.value()}, {"orbit", orbit_json(orbit)}};
    worst = std::max(worst, rel);
  }
  rep.discrepancy = worst;
}

inline void verify_theorem_b(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = UnimodalMap::make(cfg.map_family, cfg.map_parameter);
  if (auto note = preperiod_note(map); !note.empty()) rep.warnings.push_back(note);
  const auto table = verify_critical_typicality(map, config_words(cfg), cfg.orbit_length_iterates, cfg.seed);
  for (const auto& row : table.rows) {
    rep.measured[row.word.str()] = {{"critical_average", row.critical_average}};
    rep.predicted[row.word.str()] = {{"typical_average", row.typical_average}, {"measure", row.measure}};
  }
  rep.discrepancy = table.max_discrepancy;
}

/// Worst normalized deviation over: norm ratios between the two generation caps
/// (ln ratio / ln allowed ratio) and regression slopes (distance from the middle of
/// the allowed window over its half-width). Passing means every entry <= 1.
inline void verify_theorem_c(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = UnimodalMap::make(cfg.map_family, cfg.map_parameter);
  const auto density = estimate_density(map, cfg.density_samples_iterates, cfg.density_bins_count, cfg.seed);
  const std::size_t level = cfg.nest_level_index;
  const auto coarse = gap_family(map, level, cfg.gap_max_generation_iterates);
  const auto fine = gap_family(map, level, cfg.gap_refined_generation_iterates);
  const auto rc = regularized_density_report(coarse, density, cfg.lp_exponents);
  const auto rf = regularized_density_report(fine, density, cfg.lp_exponents);
  rep.measured["coarse"] = gap_report_json(coarse, rc);
  rep.measured["refined"] = gap_report_json(fine, rf);
  for (const auto* r : {&rc, &rf}) {
    if (r->uncovered_mass_warning) {
      rep.warnings.push_back("gaps cover only " + std::to_string(r->covered_mass) + " of the mass");
    }
  }
  const double mid = (cfg.tolerance_theorem_c_slope_min + cfg.tolerance_theorem_c_slope_max) / 2;
  const double half = (cfg.tolerance_theorem_c_slope_max - cfg.tolerance_theorem_c_slope_min) / 2;
  rep.predicted = {{"norm_ratio_max", cfg.tolerance_theorem_c_norm_ratio},
                   {"slope_window", Json::array({cfg.tolerance_theorem_c_slope_min,
                                                 cfg.tolerance_theorem_c_slope_max})}};
  double worst = 0;
  Json deviations = Json::object();
  for (std::size_t i = 0; i < rc.norms.size(); ++i) {
    const double a = rc.norms[i].second;
    const double b = rf.norms[i].second;
    double d = std::numeric_limits<double>::infinity();
    if (std::isfinite(a) && std::isfinite(b) && a > 0 && b > 0) {
      d = std::abs(std::log(b / a)) / std::log(cfg.tolerance_theorem_c_norm_ratio);
    }
    deviations["L" + format_double(rc.norms[i].first)] = d;
    worst = std::max(worst, d);
  }
  for (auto [name, fit] : {std::pair{"slope_coarse", rc.fit}, std::pair{"slope_refined", rf.fit}}) {
    const double d = fit ? std::abs(fit->slope - mid) / half : std::numeric_limits<double>::infinity();
    deviations[name] = d;
    worst = std::max(worst, d);
  }
  rep.measured["normalized_deviations"] = deviations;
  rep.discrepancy = worst;
}

inline void verify_lyap(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = UnimodalMap::make(cfg.map_family, cfg.map_parameter);
  if (auto note = preperiod_note(map); !note.empty()) rep.warnings.push_back(note);
  const auto eq = verify_lyapunov_equality(map, cfg.orbit_length_iterates, cfg.seed, cfg.density_bins_count);
  rep.measured = {{"critical_value_exponent", eq.critical_value_exponent},
                  {"hit_critical", eq.hit_critical},
                  {"difference", eq.difference}};
  rep.predicted = {{"integral", eq.integral}, {"singular_bins", eq.singular_bins}, {"bins", eq.bins}};
  rep.discrepancy = std::abs(eq.difference);
}

template <class Real>
void verify_nest_lyapunov_as(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = BasicUnimodalMap<Real>::make(cfg.map_family, Real(cfg.map_parameter));
  const auto nest = build_nest(map, cfg.nest_max_depth_levels, cfg.nest_max_iterates);
  rep.measured["nest"] = nest_json(nest);
  const auto sequence = nest_lyapunov(nest);
  const auto birkhoff = lyapunov_typical(UnimodalMap::make(cfg.map_family, cfg.map_parameter), cfg.seed,
                                         cfg.orbit_length_iterates);
  rep.measured["lyapunov_nest_sequence"] = sequence;
  rep.measured["last"] = sequence.back();
  rep.predicted = {{"birkhoff_lyapunov", birkhoff.value}};
  rep.discrepancy = relative(sequence.back(), birkhoff.value);
}

inline void verify_zeta(const ExperimentConfig& cfg, VerificationReport& rep) {
  const auto map = UnimodalMap::make(cfg.map_family, cfg.map_parameter);
  const std::size_t n = cfg.zeta_max_period_iterates;
  const auto orbits = enumerate_periodic(map, n, unsigned(cfg.threads_count));
  for (const auto& f : orbits.failures) {
    rep.warnings.push_back("orbit " + f.word.str() + " not found: " + f.message);
  }
  const std::complex<double> z{cfg.zeta_z_real, cfg.zeta_z_imag};
  const ZetaTruncation table(orbits.orbits, n);
  const auto value = table.evaluate(z);
  rep.measured = {{"value", Json::array({value.value.real(), value.value.imag()})},
                  {"remainder_bound", value.remainder_bound},
                  {"convergence_radius", table.convergence_radius()},
                  {"orbit_count", orbits.orbits.size()}};
  if (const auto closed = zeta_closed_form(map, z)) {
    rep.predicted = {{"closed_form", Json::array({closed->real(), closed->imag()})}};
    rep.discrepancy = std::abs(value.value - *closed) / std::abs(*closed);
    return;
  }
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "truncation check needs zeta_max_period_iterates >= 2");
  const auto previous = ZetaTruncation(orbits.orbits, n - 1).evaluate(z);
  rep.predicted = {{"truncation_at_previous_period",
                    Json::array({previous.value.real(), previous.value.imag()})}};
  rep.discrepancy = std::abs(value.value - previous.value) / std::abs(value.value);
}

/// Logistic f_a and sine g_a are conjugate through h(x) = (1 - cos pi x) / 2, which is
/// smooth away from 0: interior orbit exponents agree, the fixed point 0 does not.
inline void verify_conjugacy(const ExperimentConfig& cfg, VerificationReport& rep) {
  if (cfg.map_family != Family::logistic && cfg.map_family != Family::sine) {
    throw Error(ErrorCode::InvalidConfig, "conjugacy check needs the logistic or sine family");
  }
  const double a = cfg.map_parameter;
  const auto f = UnimodalMap::logistic(a);
  const auto g = UnimodalMap::sine(a);
  const std::size_t n = cfg.conjugacy_max_period_iterates;
  const unsigned threads = unsigned(cfg.threads_count);
  std::map<std::string, PeriodicOrbit> sine_orbits;
  for (auto& o : enumerate_periodic(g, n, threads).orbits) sine_orbits.emplace(o.word.str(), o);
  const auto logistic_orbits = enumerate_periodic(f, n, threads).orbits;
  double worst = 0;
  std::size_t matched = 0;
  for (const auto& o : logistic_orbits) {
    const auto key = o.word.str();
    auto it = sine_orbits.find(key);
    if (it == sine_orbits.end()) {
      rep.warnings.push_back("orbit " + key + " has no sine counterpart");
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    const auto& s = it->second;
    if (o.word.count_ones() == 0) {
      const double df = o.exponent.value();
      const double dg = s.exponent.value();
      rep.measured["endpoint"] = {{"logistic", df}, {"sine", dg}};
      rep.predicted["endpoint"] = {{"logistic", a}, {"sine", std::sqrt(a)}};
      worst = std::max({worst, relative(df, a), relative(dg, std::sqrt(a))});
    } else {
      const double rel = relative(s.exponent.value(), o.exponent.value());
      const double point_gap = std::abs(sine_to_logistic(s.points[0]) - o.points[0]);
      rep.measured[key] = {{"sine_exponent", s.exponent.value()}, {"point_mismatch", point_gap}};
      rep.predicted[key] = {{"logistic_exponent", o.exponent.value()}};
      worst = std::max({worst, rel, point_gap});
      ++matched;
    }
    sine_orbits.erase(it);
  }
  for (const auto& [key, orbit] : sine_orbits) {
    rep.warnings.push_back("sine orbit " + key + " has no logistic counterpart");
    worst = std::numeric_limits<double>::infinity();
  }
  rep.measured["matched_interior_orbits"] = matched;
  rep.discrepancy = worst;
}

}  // namespace detail

/// Runs one verification. Module errors become a structured failure in the report.
inline VerificationReport run_verify(const ExperimentConfig& cfg, TheoremTag tag) {
  VerificationReport rep;
  rep.theorem_tag = std::string(to_string(tag));
  rep.inputs = detail::config_echo(cfg);
  rep.seed = cfg.seed;
  rep.tolerance = detail::tolerance_for(cfg, tag);
  try {
    cfg.validate();
    switch (tag) {
      case TheoremTag::A: detail::verify_theorem_a(cfg, rep); break;
      case TheoremTag::B: detail::verify_theorem_b(cfg, rep); break;
      case TheoremTag::C: detail::verify_theorem_c(cfg, rep); break;
      case TheoremTag::lyap: detail::verify_lyap(cfg, rep); break;
      case TheoremTag::nest_lyapunov:
        if (cfg.extended_precision) {
          detail::verify_nest_lyapunov_as<long double>(cfg, rep);
        } else {
          detail::verify_nest_lyapunov_as<double>(cfg, rep);
        }
        break;
      case TheoremTag::zeta: detail::verify_zeta(cfg, rep); break;
      case TheoremTag::conjugacy: detail::verify_conjugacy(cfg, rep); break;
    }
  } catch (const Error& e) {
    rep.failure = error_json(e);
  } catch (const std::exception& e) {
    rep.failure = Json{{"code", "InternalError"}, {"message", e.what()}};
  }
  rep.settle();
  return rep;
}

/// run_verify over a parameter list; reports come back in input order.
inline std::vector<VerificationReport> sweep(const ExperimentConfig& base, const std::vector<double>& parameters,
                                             TheoremTag tag, unsigned threads = 1) {
  if (parameters.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs at least one parameter");
  std::vector<VerificationReport> out(parameters.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < parameters.size();) {
      ExperimentConfig cfg = base;
      cfg.map_parameter = parameters[i];
      cfg.threads_count = 1;
      out[i] = run_verify(cfg, tag);
    }
  };
  threads = std::clamp(threads, 1u, unsigned(parameters.size()));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return out;
}

}  // namespace kneadlab
