#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kneadlab/config.hpp"
#include "kneadlab/error.hpp"
#include "kneadlab/gaps.hpp"
#include "kneadlab/measure.hpp"
#include "kneadlab/nest.hpp"
#include "kneadlab/orbits.hpp"

#ifndef KNEADLAB_VERSION
#define KNEADLAB_VERSION "0.0.0"
#endif

namespace kneadlab {

using Json = nlohmann::json;

inline std::string version_string() { return std::string("kneadlab-") + KNEADLAB_VERSION; }

inline Json interval_json(double lo, double hi) { return Json::array({lo, hi}); }

template <class Real>
Json interval_json(const BasicInterval<Real>& j) {
  return interval_json(double(j.lo), double(j.hi));
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json exponent_json(const SignedExponent& e) {
  return {{"sign", e.sign}, {"log_abs", e.log_abs}, {"value", e.value()}};
}

inline Json orbit_json(const PeriodicOrbit& o) {
  return {{"word", o.word.str()},
          {"period", o.period()},
          {"points", o.points},
          {"exponent", exponent_json(o.exponent)},
          {"per_step_growth", o.exponent.per_step(o.period())},
          {"residual", o.residual}};
}

inline Json geometric_json(const GeometricFrequencyEstimate& g) {
  Json powers = Json::array();
  for (auto [k, lf] : g.per_power_log_freq) powers.push_back({{"k", k}, {"log_frequency", lf}});
  return {{"rho_hat", g.rho_hat},
          {"rho_stderr", g.rho_stderr},
          {"fit_range", Json::array({g.fit_range.first, g.fit_range.second})},
          {"ratio_estimate", g.ratio_estimate},
          {"status", std::string(to_string(g.status))},
          {"per_power_log_frequency", powers}};
}

template <class Real>
Json nest_json(const BasicNestReport<Real>& r) {
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back({{"n", l.index},
                      {"interval", interval_json(l.interval)},
                      {"width", double(l.interval.width())},
                      {"v_n", l.v_n},
                      {"s_n", optional_json(l.s_n)},
                      {"c_n", optional_json(l.c_n)},
                      {"landing_word_length", optional_json(l.landing_word_length)},
                      {"landing_iterates", optional_json(l.landing_iterates)},
                      {"nice_on_horizon", optional_json(l.nice_on_horizon)}});
  }
  return {{"levels", levels},
          {"termination", std::string(to_string(r.termination))},
          {"termination_level", r.termination_level},
          {"renormalization_period", r.renormalization_period},
          {"renormalization_interval", interval_json(r.renormalization_interval)},
          {"renormalization_search_horizon", r.renormalization_search_horizon},
          {"fixed_point", double(r.fixed_point)},
          {"lyapunov_nest_sequence", r.lyapunov_nest_sequence},
          {"extended_precision", r.extended_precision}};
}

inline Json gap_report_json(const GapFamily& family, const RegularizedDensityReport& r) {
  Json norms = Json::array();
  for (auto [p, v] : r.norms) norms.push_back({{"p", p}, {"norm", v}});
  auto fit = [](const std::optional<LinearFit>& f) {
    if (!f) return Json(nullptr);
    return Json{{"slope", f->slope}, {"intercept", f->intercept}, {"slope_stderr", f->slope_stderr}};
  };
  return {{"nest_level", family.nest_level},
          {"target", interval_json(family.target)},
          {"max_generation", family.max_generation},
          {"gap_count", family.gaps.size()},
          {"kappa", family.kappa},
          {"norms", norms},
          {"fit", fit(r.fit)},
          {"resolved_fit", fit(r.resolved_fit)},
          {"covered_mass", r.covered_mass},
          {"covered_length", r.covered_length},
          {"sub_bin_gaps", r.sub_bin_gaps},
          {"uncovered_mass_warning", r.uncovered_mass_warning}};
}

inline Json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
}

/// One verification run. Serialized with sorted keys, so identical inputs give
/// byte-identical text.
struct VerificationReport {
  std::string theorem_tag;
  Json inputs = Json::object();
  Json measured = Json::object();
  Json predicted = Json::object();
  double discrepancy{std::numeric_limits<double>::infinity()};
  double tolerance{0};
  bool passed{false};
  /// Set when a module raised instead of producing a value.
  std::optional<Json> failure;
  std::vector<std::string> warnings;
  std::string version{version_string()};
  std::uint64_t seed{0};

  /// passed iff discrepancy <= tolerance, no failure, and every number finite.
  void settle() {
    std::vector<std::string> bad;
    scrub(measured, "measured", bad);
    scrub(predicted, "predicted", bad);
    scrub(inputs, "inputs", bad);
    for (const auto& path : bad) warnings.push_back("non-finite value replaced by null at " + path);
    passed = !failure && bad.empty() && std::isfinite(discrepancy) && discrepancy <= tolerance;
  }

  Json to_json() const {
    Json j;
    j["theorem_tag"] = theorem_tag;
    j["inputs"] = inputs;
    j["measured"] = measured;
    j["predicted"] = predicted;
    j["discrepancy"] = std::isfinite(discrepancy) ? Json(discrepancy) : Json(nullptr);
    j["tolerance"] = tolerance;
    j["passed"] = passed;
    j["failure"] = failure ? *failure : Json(nullptr);
    j["warnings"] = warnings;
    j["provenance"] = {{"version", version}, {"seed", seed}};
    return j;
  }

  std::string dump() const { return to_json().dump(2); }

 private:
  static void scrub(Json& j, const std::string& path, std::vector<std::string>& bad) {
    if (j.is_number_float()) {
      if (!std::isfinite(j.get<double>())) {
        bad.push_back(path);
        j = nullptr;
      }
    } else if (j.is_object()) {
      for (auto& [key, value] : j.items()) scrub(value, path + "." + key, bad);
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) scrub(j[i], path + "[" + std::to_string(i) + "]", bad);
    }
  }
};

}  // namespace kneadlab
