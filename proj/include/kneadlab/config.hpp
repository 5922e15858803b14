#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kneadlab/error.hpp"
#include "kneadlab/map.hpp"
#include "kneadlab/symbols.hpp"

namespace kneadlab {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::InvalidConfig, "cannot format number");
  return std::string(buf, end);
}

inline double parse_double(std::string_view text, std::string_view key = "value") {
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig,
                "expected a number for " + std::string(key) + ", got '" + std::string(text) + "'");
  }
  return value;
}

/// Accepts integers written as 10000000 or 1e7.
inline std::uint64_t parse_count(std::string_view text, std::string_view key = "count") {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::uint64_t exact{};
  if (auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), exact);
      ec == std::errc{} && p == text.data() + text.size()) {
    return exact;
  }
  // Scientific form is only trusted where doubles hold integers exactly.
  const double v = parse_double(text, key);
  if (!(v >= 0) || v != std::floor(v) || v > 9007199254740992.0) {
    throw Error(ErrorCode::InvalidConfig,
                "expected a nonnegative integer for " + std::string(key) + ", got '" + std::string(text) + "'");
  }
  return std::uint64_t(v);
}

inline std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text) {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (ch != ' ') {
      item.push_back(ch);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

inline std::vector<double> parse_double_list(std::string_view text, std::string_view key) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(item, key));
  return out;
}

/// Everything a verification run depends on. Serialized as flat `key = value`
/// lines; unit suffixes in key names say what a number counts.
struct ExperimentConfig {
  Family map_family{Family::quadratic};
  double map_parameter{2.0};
  std::uint64_t seed{1};
  bool extended_precision{false};

  std::uint64_t orbit_length_iterates{10000000};
  std::uint64_t power_k_min{2};
  std::uint64_t power_k_max{6};
  std::string stream{"typical"};
  std::vector<std::string> words{"1"};

  std::uint64_t density_samples_iterates{10000000};
  std::uint64_t density_bins_count{2048};

  std::uint64_t nest_max_depth_levels{6};
  std::uint64_t nest_max_iterates{100000000};
  std::uint64_t nest_level_index{1};
  std::uint64_t gap_max_generation_iterates{14};
  std::uint64_t gap_refined_generation_iterates{18};
  std::vector<double> lp_exponents{1, 2, 4};

  std::uint64_t zeta_max_period_iterates{12};
  double zeta_z_real{0.5};
  double zeta_z_imag{0};
  std::uint64_t conjugacy_max_period_iterates{4};

  double tolerance_theorem_a_relative{0.1};
  double tolerance_theorem_b_absolute{0.02};
  double tolerance_theorem_c_norm_ratio{2.0};
  double tolerance_theorem_c_slope_min{0.8};
  double tolerance_theorem_c_slope_max{1.2};
  double tolerance_lyap_absolute{0.01};
  double tolerance_nest_lyapunov_relative{0.15};
  double tolerance_zeta_relative{0.01};
  double tolerance_conjugacy_relative{1e-9};

  std::uint64_t threads_count{1};
  std::string output_path;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  std::map<std::string, std::string> to_map() const {
    auto join_words = [](const std::vector<std::string>& v) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
      return out;
    };
    std::string lp;
    for (std::size_t i = 0; i < lp_exponents.size(); ++i) lp += (i ? "," : "") + format_double(lp_exponents[i]);
    return {
        {"map_family", std::string(to_string(map_family))},
        {"map_parameter", format_double(map_parameter)},
        {"seed", std::to_string(seed)},
        {"extended_precision", extended_precision ? "true" : "false"},
        {"orbit_length_iterates", std::to_string(orbit_length_iterates)},
        {"power_k_min", std::to_string(power_k_min)},
        {"power_k_max", std::to_string(power_k_max)},
        {"stream", stream},
        {"words", join_words(words)},
        {"density_samples_iterates", std::to_string(density_samples_iterates)},
        {"density_bins_count", std::to_string(density_bins_count)},
        {"nest_max_depth_levels", std::to_string(nest_max_depth_levels)},
        {"nest_max_iterates", std::to_string(nest_max_iterates)},
        {"nest_level_index", std::to_string(nest_level_index)},
        {"gap_max_generation_iterates", std::to_string(gap_max_generation_iterates)},
        {"gap_refined_generation_iterates", std::to_string(gap_refined_generation_iterates)},
        {"lp_exponents", lp},
        {"zeta_max_period_iterates", std::to_string(zeta_max_period_iterates)},
        {"zeta_z_real", format_double(zeta_z_real)},
        {"zeta_z_imag", format_double(zeta_z_imag)},
        {"conjugacy_max_period_iterates", std::to_string(conjugacy_max_period_iterates)},
        {"tolerance_theorem_a_relative", format_double(tolerance_theorem_a_relative)},
        {"tolerance_theorem_b_absolute", format_double(tolerance_theorem_b_absolute)},
        {"tolerance_theorem_c_norm_ratio", format_double(tolerance_theorem_c_norm_ratio)},
        {"tolerance_theorem_c_slope_min", format_double(tolerance_theorem_c_slope_min)},
        {"tolerance_theorem_c_slope_max", format_double(tolerance_theorem_c_slope_max)},
        {"tolerance_lyap_absolute", format_double(tolerance_lyap_absolute)},
        {"tolerance_nest_lyapunov_relative", format_double(tolerance_nest_lyapunov_relative)},
        {"tolerance_zeta_relative", format_double(tolerance_zeta_relative)},
        {"tolerance_conjugacy_relative", format_double(tolerance_conjugacy_relative)},
        {"threads_count", std::to_string(threads_count)},
        {"output_path", output_path},
    };
  }

  std::string serialize() const {
    std::string out;
    for (const auto& [key, value] : to_map()) out += key + " = " + value + "\n";
    return out;
  }

  void set(const std::string& key, const std::string& value) {
    auto count = [&](std::uint64_t& field) { field = parse_count(value, key); };
    auto number = [&](double& field) { field = parse_double(value, key); };
    if (key == "map_family") map_family = parse_family(value);
    else if (key == "map_parameter") number(map_parameter);
    else if (key == "seed") count(seed);
    else if (key == "extended_precision") {
      if (value != "true" && value != "false") throw Error(ErrorCode::InvalidConfig, "extended_precision must be true or false");
      extended_precision = value == "true";
    }
    else if (key == "orbit_length_iterates") count(orbit_length_iterates);
    else if (key == "power_k_min") count(power_k_min);
    else if (key == "power_k_max") count(power_k_max);
    else if (key == "stream") stream = value;
    else if (key == "words") words = split_list(value);
    else if (key == "density_samples_iterates") count(density_samples_iterates);
    else if (key == "density_bins_count") count(density_bins_count);
    else if (key == "nest_max_depth_levels") count(nest_max_depth_levels);
    else if (key == "nest_max_iterates") count(nest_max_iterates);
    else if (key == "nest_level_index") count(nest_level_index);
    else if (key == "gap_max_generation_iterates") count(gap_max_generation_iterates);
    else if (key == "gap_refined_generation_iterates") count(gap_refined_generation_iterates);
    else if (key == "lp_exponents") lp_exponents = parse_double_list(value, key);
    else if (key == "zeta_max_period_iterates") count(zeta_max_period_iterates);
    else if (key == "zeta_z_real") number(zeta_z_real);
    else if (key == "zeta_z_imag") number(zeta_z_imag);
    else if (key == "conjugacy_max_period_iterates") count(conjugacy_max_period_iterates);
    else if (key == "tolerance_theorem_a_relative") number(tolerance_theorem_a_relative);
    else if (key == "tolerance_theorem_b_absolute") number(tolerance_theorem_b_absolute);
    else if (key == "tolerance_theorem_c_norm_ratio") number(tolerance_theorem_c_norm_ratio);
    else if (key == "tolerance_theorem_c_slope_min") number(tolerance_theorem_c_slope_min);
    else if (key == "tolerance_theorem_c_slope_max") number(tolerance_theorem_c_slope_max);
    else if (key == "tolerance_lyap_absolute") number(tolerance_lyap_absolute);
    else if (key == "tolerance_nest_lyapunov_relative") number(tolerance_nest_lyapunov_relative);
    else if (key == "tolerance_zeta_relative") number(tolerance_zeta_relative);
    else if (key == "tolerance_conjugacy_relative") number(tolerance_conjugacy_relative);
    else if (key == "threads_count") count(threads_count);
    else if (key == "output_path") output_path = value;
    else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  }

  /// Parses `key = value` lines; '#' starts a comment. Keys not mentioned keep their defaults.
  static ExperimentConfig parse(std::string_view text) {
    ExperimentConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number) + ": expected key = value");
      }
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  void validate() const {
    (void)UnimodalMap::make(map_family, map_parameter);
    const std::pair<const char*, std::uint64_t> counts[] = {
        {"orbit_length_iterates", orbit_length_iterates},
        {"power_k_min", power_k_min},
        {"power_k_max", power_k_max},
        {"density_samples_iterates", density_samples_iterates},
        {"density_bins_count", density_bins_count},
        {"nest_max_iterates", nest_max_iterates},
        {"gap_max_generation_iterates", gap_max_generation_iterates},
        {"gap_refined_generation_iterates", gap_refined_generation_iterates},
        {"zeta_max_period_iterates", zeta_max_period_iterates},
        {"conjugacy_max_period_iterates", conjugacy_max_period_iterates},
        {"threads_count", threads_count},
    };
    for (auto [key, value] : counts) {
      if (value == 0) throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be positive");
    }
    if (power_k_max < power_k_min) throw Error(ErrorCode::InvalidConfig, "power_k_max < power_k_min");
    if (stream != "typical" && stream != "critical") {
      throw Error(ErrorCode::InvalidConfig, "stream must be typical or critical");
    }
    for (const auto& w : words) (void)SymbolWord::parse(w);
  }
};

}  // namespace kneadlab
