#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/measure.hpp"
#include "kneadlab/nest.hpp"
#include "kneadlab/numeric.hpp"
#include "kneadlab/symbolic.hpp"

namespace kneadlab {

inline constexpr std::size_t kGapBudget = 1000000;
inline constexpr std::size_t kMaxGapGeneration = 30;
inline constexpr std::uint64_t kGapNestIterates = 10000000;

/// Components of the first-landing domain to I_n, grouped by landing time.
struct GapFamily {
  std::size_t nest_level{0};
  Interval target;
  std::vector<Interval> gaps;
  std::vector<std::size_t> generations;
  std::size_t max_generation{0};
  /// max |Df| over the domain; |gap| >= |I_n| kappa^-g.
  double kappa{0};
};

/// max |Df| on the domain; unimodal derivatives peak at an endpoint for the
/// built-in families, so a fine sample is taken for custom maps only.
inline double max_abs_derivative(const UnimodalMap& map) {
  const auto d = map.domain();
  double best = std::max(std::abs(map.derivative(d.lo)), std::abs(map.derivative(d.hi)));
  if (map.family() == Family::custom) {
    for (int i = 1; i < 4096; ++i) {
      best = std::max(best, std::abs(map.derivative(d.lo + d.width() * i / 4096.0)));
    }
  }
  return best;
}

/// Breadth-first pullback of `target` through the monotone branches. A
/// preimage whose interior meets int target lands at time 0 and is dropped.
inline GapFamily gap_family(const UnimodalMap& map, const Interval& target, std::size_t nest_level,
                            std::size_t max_generation, std::size_t budget = kGapBudget) {
  if (max_generation > kMaxGapGeneration) {
    throw Error(ErrorCode::InvalidParameter, "max_generation must be <= 30");
  }
  GapFamily family;
  family.nest_level = nest_level;
  family.target = target;
  family.max_generation = max_generation;
  family.kappa = max_abs_derivative(map);
  family.gaps.push_back(target);
  family.generations.push_back(0);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const std::size_t g = family.generations[i];
    if (g == max_generation) continue;
    for (Symbol s : {Symbol::zero, Symbol::one}) {
      const auto pre = branch_preimage(map, family.gaps[i], s);
      if (pre.empty || !(pre.width() > 0) || pre.interiors_overlap(target)) continue;
      if (family.gaps.size() >= budget) {
        throw Error(ErrorCode::TooManyGaps,
                    "more than " + std::to_string(budget) + " gaps below generation " +
                        std::to_string(max_generation));
      }
      family.gaps.push_back(pre);
      family.generations.push_back(g + 1);
      queue.push_back(family.gaps.size() - 1);
    }
  }
  return family;
}

/// Gap family for the nest level of `map`; nest failures propagate as errors.
inline GapFamily gap_family(const UnimodalMap& map, std::size_t nest_level, std::size_t max_generation) {
  const auto nest = build_nest(map, nest_level, kGapNestIterates);
  if (nest.levels.size() <= nest_level) {
    const auto code = nest.termination == NestTermination::CriticalNonReturn ? ErrorCode::CriticalNonReturn
                                                                              : ErrorCode::PrecisionExhausted;
    throw Error(code, "principal nest stops before level " + std::to_string(nest_level) + " (" +
                          std::string(to_string(nest.termination)) + ")");
  }
  return gap_family(map, nest.levels[nest_level].interval, nest_level, max_generation);
}

struct GapDensityRow {
  Interval gap;
  std::size_t generation{0};
  double mass{0};
  /// mass / |gap|
  double value{0};
  bool below_bin_resolution{false};
};

struct RegularizedDensityReport {
  std::vector<GapDensityRow> rows;
  /// (p, (sum |gap| value^p)^(1/p)) over gaps carrying mass.
  std::vector<std::pair<double, double>> norms;
  /// Slope of ln mass against ln |gap| over every gap with mass > 0.
  std::optional<LinearFit> fit;
  /// Same fit restricted to gaps at least one bin wide.
  std::optional<LinearFit> resolved_fit;
  double covered_mass{0};
  double covered_length{0};
  std::size_t sub_bin_gaps{0};
  bool uncovered_mass_warning{false};
};

inline constexpr double kCoverageWarning = 0.95;

/// Gap-averaged density mu(gap) / |gap| and its L^p norms.
inline RegularizedDensityReport regularized_density_report(const GapFamily& family,
                                                           const DensityEstimate& density,
                                                           const std::vector<double>& p_list) {
  RegularizedDensityReport report;
  std::vector<double> lx, ly, rx, ry;
  CompensatedSum<double> mass_sum, length_sum;
  for (std::size_t i = 0; i < family.gaps.size(); ++i) {
    GapDensityRow row;
    row.gap = family.gaps[i];
    row.generation = family.generations[i];
    row.mass = measure_of_interval(density, row.gap);
    row.value = row.mass / row.gap.width();
    row.below_bin_resolution = row.gap.width() < density.bin_width();
    report.sub_bin_gaps += row.below_bin_resolution;
    mass_sum.add(row.mass);
    length_sum.add(row.gap.width());
    if (row.mass > 0) {
      lx.push_back(std::log(row.gap.width()));
      ly.push_back(std::log(row.mass));
      if (!row.below_bin_resolution) {
        rx.push_back(lx.back());
        ry.push_back(ly.back());
      }
    }
    report.rows.push_back(row);
  }
  for (double p : p_list) {
    if (!(p >= 1)) throw Error(ErrorCode::InvalidParameter, "L^p exponents must be >= 1");
    CompensatedSum<double> s;
    for (const auto& row : report.rows) {
      if (row.mass > 0) s.add(row.gap.width() * std::pow(row.value, p));
    }
    report.norms.emplace_back(p, std::pow(s.value(), 1 / p));
  }
  report.fit = least_squares(lx, ly);
  report.resolved_fit = least_squares(rx, ry);
  report.covered_mass = mass_sum.value();
  report.covered_length = length_sum.value();
  report.uncovered_mass_warning = report.covered_mass < kCoverageWarning;
  return report;
}

}  // namespace kneadlab
