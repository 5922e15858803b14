#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kneadlab/kneadlab.hpp"

using namespace kneadlab;

namespace {

struct Globals {
  std::string format{"json"};
  std::optional<std::uint64_t> seed;
  bool extended{false};
  std::string out;
  std::string config_path;
  std::optional<std::string> map;
  std::optional<double> param;
  std::vector<std::string> sets;
};

ExperimentConfig make_config(const Globals& g) {
  ExperimentConfig cfg = g.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(g.config_path);
  if (g.map) cfg.map_family = parse_family(*g.map);
  if (g.param) cfg.map_parameter = *g.param;
  if (g.seed) cfg.seed = *g.seed;
  if (g.extended) cfg.extended_precision = true;
  if (!g.out.empty()) cfg.output_path = g.out;
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void emit(const Globals& g, const Json& json, const std::string& csv) {
  const std::string text = g.format == "csv" ? csv : json.dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(g.out);
  if (!file) throw Error(ErrorCode::InvalidConfig, "cannot write " + g.out);
  file << text;
}

Json map_json(const ExperimentConfig& cfg) {
  return {{"family", std::string(to_string(cfg.map_family))}, {"parameter", cfg.map_parameter}};
}

UnimodalMap map_of(const ExperimentConfig& cfg) { return UnimodalMap::make(cfg.map_family, cfg.map_parameter); }

std::string num(double x) { return format_double(x); }

std::string report_csv(const std::vector<VerificationReport>& reports) {
  std::string csv = "theorem_tag,family,parameter,passed,discrepancy,tolerance,failure\n";
  for (const auto& r : reports) {
    const std::string failure = r.failure ? (*r.failure)["code"].get<std::string>() : "";
    csv += r.theorem_tag + "," + r.inputs.value("map_family", "") + "," + r.inputs.value("map_parameter", "") +
           "," + (r.passed ? "true" : "false") + "," +
           (std::isfinite(r.discrepancy) ? num(r.discrepancy) : "inf") + "," + num(r.tolerance) + "," + failure +
           "\n";
  }
  return csv;
}

std::string symbols_csv(const SymbolWord& w) {
  std::string csv = "index,symbol\n";
  const auto s = w.str();
  for (std::size_t i = 0; i < s.size(); ++i) csv += std::to_string(i) + "," + s[i] + "\n";
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic dynamics, principal nests and invariant densities of unimodal maps", "kneadlab"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", g.seed, "Seed for typical orbits");
  app.add_flag("--extended-precision", g.extended, "Use long double where supported (nest)");
  app.add_option("--out", g.out, "Write output to this path instead of stdout");
  app.add_option("--config", g.config_path, "Flat key = value experiment config");
  app.add_option("--map", g.map, "Map family")->check(CLI::IsMember({"quadratic", "logistic", "sine"}));
  app.add_option("--param", g.param, "Family parameter");
  app.add_option("--set", g.sets, "Override a config key (key=value, repeatable)");

  std::string length{"64"}, x_text, word, stream_kind{"typical"}, max_period, z_imag{"0"};
  std::string samples{"1e7"}, bins{"512"}, interval, max_depth{"6"}, max_iterates{"1e8"};
  std::string level{"1"}, max_generation{"14"}, lp{"1,2,4"}, k_min{"2"}, max_power{"6"}, z_real{"0.5"};
  std::string sweep_target, sweep_params, threads{"1"};

  auto* kneading = app.add_subcommand("kneading", "Kneading sequence of the critical point");
  kneading->add_option("--length", length, "Number of symbols");

  auto* itin = app.add_subcommand("itinerary", "Itinerary of a point");
  itin->add_option("--x", x_text, "Start point")->required();
  itin->add_option("--length", length, "Number of symbols");

  auto* freq = app.add_subcommand("freq", "Frequencies of pattern^k along an orbit");
  freq->add_option("--word", word, "Pattern")->required();
  freq->add_option("--length", length, "Prefix length (accepts 1e7)");
  freq->add_option("--stream", stream_kind, "typical or critical")->check(CLI::IsMember({"typical", "critical"}));
  freq->add_option("--k-min", k_min, "Smallest power in the geometric fit");
  freq->add_option("--max-power", max_power, "Largest power counted");

  auto* periodic = app.add_subcommand("periodic", "Periodic orbits by itinerary");
  auto* word_opt = periodic->add_option("--word", word, "Itinerary word of the orbit");
  periodic->add_option("--max-period", max_period, "Enumerate every prime orbit up to this period")
      ->excludes(word_opt);
  periodic->add_option("--threads", threads, "Worker threads for enumeration");

  auto* zeta = app.add_subcommand("zeta", "Truncated |Df|^-1 weighted zeta function");
  zeta->add_option("--max-period", max_period, "Truncation period");
  zeta->add_option("--z", z_real, "Real part of z");
  zeta->add_option("--z-imag", z_imag, "Imaginary part of z");
  zeta->add_option("--threads", threads, "Worker threads for enumeration");

  auto* nest = app.add_subcommand("nest", "Principal nest of central return domains");
  nest->add_option("--max-depth", max_depth, "Deepest level");
  nest->add_option("--max-iterates", max_iterates, "Critical orbit budget (accepts 1e8)");

  auto* measure = app.add_subcommand("measure", "Histogram density of a typical orbit");
  measure->add_option("--samples", samples, "Orbit length (accepts 1e7)");
  measure->add_option("--bins", bins, "Number of bins");
  measure->add_option("--interval", interval, "lo,hi: also report the measure of this interval");

  auto* gaps = app.add_subcommand("gaps", "Gap family of a nest level and its regularized density");
  gaps->add_option("--level,--nest-level", level, "Nest level");
  gaps->add_option("--max-generation", max_generation, "Generation cap");
  gaps->add_option("--samples", samples, "Density samples (accepts 1e7)");
  gaps->add_option("--bins", bins, "Density bins");
  gaps->add_option("--lp,--p", lp, "Comma-separated L^p exponents");

  auto* verify = app.add_subcommand("verify", "Run one verification and report pass/fail");
  verify->require_subcommand(1);
  verify->fallthrough();
  std::string verify_target, verify_samples, verify_words, verify_stream;
  verify->add_option("--samples", verify_samples, "Orbit length (accepts 1e7)");
  verify->add_option("--words", verify_words, "Comma-separated itinerary words");
  verify->add_option("--stream", verify_stream, "typical or critical");
  for (const char* name :
       {"theorem-a", "theorem-b", "theorem-c", "lyap-equality", "nest-lyapunov", "conjugacy", "zeta"}) {
    verify->add_subcommand(name, std::string("Verification target ") + name)->fallthrough()->final_callback(
        [&verify_target, name] { verify_target = name; });
  }

  auto* sweep_cmd = app.add_subcommand("sweep", "run_verify over a list of parameters");
  sweep_cmd->add_option("--target", sweep_target, "Verification target")->required();
  sweep_cmd->add_option("--params", sweep_params, "Comma-separated parameters")->required();
  sweep_cmd->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig cfg = make_config(g);

    if (kneading->parsed()) {
      const auto k = kneading_sequence(map_of(cfg), parse_count(length, "--length"));
      emit(g, {{"map", map_json(cfg)}, {"kneading", k.str()}}, symbols_csv(k));
      return 0;
    }
    if (itin->parsed()) {
      const double x = parse_double(x_text, "--x");
      const auto w = itinerary(map_of(cfg), x, parse_count(length, "--length"));
      emit(g, {{"map", map_json(cfg)}, {"x", x}, {"itinerary", w.str()}}, symbols_csv(w));
      return 0;
    }
    if (freq->parsed()) {
      const auto map = map_of(cfg);
      const auto pattern = SymbolWord::parse(word);
      auto s = stream_kind == "critical" ? critical_stream(map) : typical_stream(map, cfg.seed);
      const auto prefix = s.take(parse_count(length, "--length"));
      const std::span<const Symbol> view(prefix);
      const auto top = parse_count(max_power, "--max-power");
      const auto f = frequency(pattern, view, top);
      Json counts = Json::array();
      std::string csv = "k,count,frequency\n";
      for (auto [k, c] : f.per_power_counts) {
        counts.push_back({{"k", k}, {"count", c}});
        csv += std::to_string(k) + "," + std::to_string(c) + "," + num(double(c) / double(f.prefix_length)) + "\n";
      }
      Json j{{"map", map_json(cfg)},       {"word", pattern.str()}, {"stream", stream_kind},
             {"seed", cfg.seed},           {"prefix_length", f.prefix_length}, {"r_hat", f.r_hat},
             {"per_power_counts", counts}};
      try {
        j["geometric_frequency"] = geometric_json(geometric_frequency(pattern, view, parse_count(k_min), top));
      } catch (const Error& e) {
        j["geometric_frequency"] = error_json(e);
      }
      emit(g, j, csv);
      return 0;
    }
    if (periodic->parsed()) {
      const auto map = map_of(cfg);
      std::vector<PeriodicOrbit> orbits;
      Json failures = Json::array();
      if (!word.empty()) {
        orbits.push_back(find_periodic(map, SymbolWord::parse(word)));
      } else {
        const auto n = parse_count(max_period.empty() ? "10" : max_period, "--max-period");
        auto e = enumerate_periodic(map, n, unsigned(parse_count(threads, "--threads")));
        orbits = std::move(e.orbits);
        for (const auto& f : e.failures) {
          failures.push_back({{"word", f.word.str()}, {"code", std::string(to_string(f.code))}});
        }
      }
      Json list = Json::array();
      std::string csv = "word,period,point,sign,log_abs_exponent,per_step_growth\n";
      for (const auto& o : orbits) {
        list.push_back(orbit_json(o));
        csv += o.word.str() + "," + std::to_string(o.period()) + "," + num(o.points[0]) + "," +
               std::to_string(o.exponent.sign) + "," + num(o.exponent.log_abs) + "," +
               num(o.exponent.per_step(o.period())) + "\n";
      }
      emit(g, {{"map", map_json(cfg)}, {"orbits", list}, {"failures", failures}}, csv);
      return 0;
    }
    if (zeta->parsed()) {
      const auto map = map_of(cfg);
      const auto n = parse_count(max_period.empty() ? "12" : max_period, "--max-period");
      const auto e = enumerate_periodic(map, n, unsigned(parse_count(threads, "--threads")));
      const ZetaTruncation table(e.orbits, n);
      const std::complex<double> z{parse_double(z_real, "--z"), parse_double(z_imag, "--z-imag")};
      const auto v = table.evaluate(z);
      Json periods = Json::object();
      for (const auto& [p, logs] : table.table()) periods[std::to_string(p)] = logs.size();
      emit(g,
           {{"map", map_json(cfg)},
            {"max_period", n},
            {"weight", std::string(table.weight_tag())},
            {"z", Json::array({z.real(), z.imag()})},
            {"value", Json::array({v.value.real(), v.value.imag()})},
            {"log_value", Json::array({v.log_value.real(), v.log_value.imag()})},
            {"remainder_bound", v.remainder_bound},
            {"convergence_radius", table.convergence_radius()},
            {"orbits_per_period", periods}},
           "z_real,z_imag,value_real,value_imag,remainder_bound\n" + num(z.real()) + "," + num(z.imag()) + "," +
               num(v.value.real()) + "," + num(v.value.imag()) + "," + num(v.remainder_bound) + "\n");
      return 0;
    }
    if (nest->parsed()) {
      const auto depth = parse_count(max_depth, "--max-depth");
      const auto budget = parse_count(max_iterates, "--max-iterates");
      auto run = [&](auto tag) {
        using Real = decltype(tag);
        const auto m = BasicUnimodalMap<Real>::make(cfg.map_family, Real(cfg.map_parameter));
        const auto r = build_nest(m, depth, budget);
        std::string csv = "index,lo,hi,v_n,s_n,c_n,landing_iterates,nice_on_horizon\n";
        auto opt = [](const auto& o) {
          if (!o) return std::string();
          if constexpr (std::is_same_v<std::decay_t<decltype(*o)>, bool>) return std::string(*o ? "true" : "false");
          else if constexpr (std::is_floating_point_v<std::decay_t<decltype(*o)>>) return num(double(*o));
          else return std::to_string(*o);
        };
        for (const auto& l : r.levels) {
          csv += std::to_string(l.index) + "," + num(double(l.interval.lo)) + "," + num(double(l.interval.hi)) +
                 "," + std::to_string(l.v_n) + "," + opt(l.s_n) + "," + opt(l.c_n) + "," +
                 opt(l.landing_iterates) + "," + opt(l.nice_on_horizon) + "\n";
        }
        Json j = nest_json(r);
        j["map"] = map_json(cfg);
        emit(g, j, csv);
      };
      if (cfg.extended_precision) run((long double)0);
      else run(0.0);
      return 0;
    }
    if (measure->parsed()) {
      const auto d = estimate_density(map_of(cfg), parse_count(samples, "--samples"), parse_count(bins, "--bins"),
                                      cfg.seed);
      std::string csv = "bin_left,bin_right,mass\n";
      Json rows = Json::array();
      for (std::size_t i = 0; i < d.bin_count(); ++i) {
        csv += num(d.bin_left(i)) + "," + num(d.bin_right(i)) + "," + num(d.mass(i)) + "\n";
        rows.push_back({{"bin_left", d.bin_left(i)}, {"bin_right", d.bin_right(i)}, {"mass", d.mass(i)}});
      }
      Json j{{"map", map_json(cfg)}, {"seed", d.seed}, {"samples", d.sample_count}, {"bins", rows}};
      if (!interval.empty()) {
        const auto ends = parse_double_list(interval, "--interval");
        if (ends.size() != 2) throw Error(ErrorCode::InvalidConfig, "--interval expects lo,hi");
        j["interval"] = interval_json(ends[0], ends[1]);
        j["interval_mass"] = measure_of_interval(d, Interval::make(ends[0], ends[1]));
      }
      emit(g, j, csv);
      return 0;
    }
    if (gaps->parsed()) {
      const auto map = map_of(cfg);
      const auto family = gap_family(map, parse_count(level, "--level"), parse_count(max_generation));
      const auto d = estimate_density(map, parse_count(samples, "--samples"), parse_count(bins, "--bins"), cfg.seed);
      const auto r = regularized_density_report(family, d, parse_double_list(lp, "--lp"));
      std::string csv = "generation,gap_left,gap_right,mass,density\n";
      for (const auto& row : r.rows) {
        csv += std::to_string(row.generation) + "," + num(row.gap.lo) + "," + num(row.gap.hi) + "," +
               num(row.mass) + "," + num(row.value) + "\n";
      }
      Json j = gap_report_json(family, r);
      j["map"] = map_json(cfg);
      emit(g, j, csv);
      return 0;
    }
    if (verify->parsed()) {
      ExperimentConfig run = cfg;
      if (!verify_samples.empty()) run.set("orbit_length_iterates", verify_samples);
      if (!verify_words.empty()) run.set("words", verify_words);
      if (!verify_stream.empty()) run.set("stream", verify_stream);
      run.validate();
      const auto report = run_verify(run, parse_theorem_tag(verify_target));
      emit(g, report.to_json(), report_csv({report}));
      return report.passed ? 0 : 2;
    }
    if (sweep_cmd->parsed()) {
      const auto reports = sweep(cfg, parse_double_list(sweep_params, "--params"), parse_theorem_tag(sweep_target),
                                 unsigned(parse_count(threads, "--threads")));
      Json list = Json::array();
      bool all = true;
      for (const auto& r : reports) {
        list.push_back(r.to_json());
        all = all && r.passed;
      }
      emit(g, list, report_csv(reports));
      return all ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "kneadlab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "kneadlab: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
