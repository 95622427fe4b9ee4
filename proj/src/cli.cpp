#include "pulsequota/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <variant>

#include "CLI11.hpp"
#include "json.hpp"

#include "pulsequota/analytics.hpp"
#include "pulsequota/config.hpp"
#include "pulsequota/deterministic.hpp"
#include "pulsequota/report.hpp"
#include "pulsequota/rng.hpp"

namespace pulsequota::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// At most this many trajectory files per simulate call; further paths only
// contribute closure records.
constexpr std::size_t kMaxTrajectoryFiles = 100;

struct Flags {
  std::string config;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::string bounds;
  std::string axis;
  std::string values;
};

// Ordered key=value report that is emitted both as text and as JSON.
class Report {
 public:
  void add(const std::string& key, double v) { items_.emplace_back(key, format_number(v), v); }
  void add(const std::string& key, std::uint64_t v) {
    items_.emplace_back(key, std::to_string(v), v);
  }
  void add(const std::string& key, bool v) {
    items_.emplace_back(key, v ? "true" : "false", v);
  }
  void add(const std::string& key, const std::string& v) { items_.emplace_back(key, v, v); }
  void add(const std::string& key, std::optional<double> v, const std::string& absent) {
    if (v) {
      add(key, *v);
    } else {
      items_.emplace_back(key, absent, nullptr);
    }
  }

  std::string text() const {
    std::string out;
    for (const auto& [key, text, json] : items_) {
      out += key + "=" + text + "\n";
    }
    return out;
  }

  std::string json() const {
    ordered_json doc = ordered_json::object();
    for (const auto& [key, text, value] : items_) {
      doc[key] = value;
    }
    return doc.dump(2) + "\n";
  }

 private:
  std::vector<std::tuple<std::string, std::string, ordered_json>> items_;
};

RunConfig resolve(const Flags& flags) {
  RunConfig cfg = load_config(flags.config);
  if (flags.seed) {
    cfg.sim.seed = *flags.seed;
  }
  if (flags.paths) {
    cfg.paths = *flags.paths;
  }
  if (flags.out) {
    cfg.output_dir = *flags.out;
  }
  if (flags.threads) {
    cfg.threads = *flags.threads;
  }
  cfg.validate();
  return cfg;
}

bool is_malthusian(const GrowthLaw& law) {
  return std::holds_alternative<ConstantRate>(law.variant());
}

int cmd_validate(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  const GrowthLaw law = cfg.growth_law();
  const Policy policy = cfg.policy();
  const NoiseSpec noise = cfg.noise();

  Report report;
  report.add("kind", std::string(law.kind()));
  report.add("k_plus", policy.k_plus());
  report.add("k_minus", policy.k_minus());
  report.add("sigma", noise.sigma());

  const H1Report h1 = check_h1(law, cfg.resolution);
  const bool h1_exempt = is_malthusian(law);
  report.add("h1", h1.holds ? std::string("ok") : h1_exempt ? "exempt" : "failed");
  report.add("carrying_capacity", h1.k, "none");

  const H2Report h2 = check_h2(law, noise, policy, cfg.resolution);
  report.add("h2", std::string(h2.holds ? "ok" : "failed"));
  report.add("k0_max", h2.k0_max, "none");

  const RateBounds bounds = rate_bounds(law, policy.k_plus(), cfg.resolution);
  report.add("alpha", bounds.alpha);
  report.add("beta", bounds.beta);
  report.add("b_script", bounds.b_script);
  report.add("half_variance", noise.half_variance());

  std::optional<double> det_length;
  std::optional<double> det_lo;
  std::optional<double> det_hi;
  try {
    det_length = det_closure_length(law, policy);
  } catch (const std::domain_error&) {
  }
  if (bounds.beta > 0.0) {
    const LengthBounds lb = det_length_bounds(policy, bounds);
    det_lo = lb.lo;
    det_hi = lb.hi;
  }
  report.add("det_closure_length", det_length, "n/a");
  report.add("det_bound_lo", det_lo, "n/a");
  report.add("det_bound_hi", det_hi, bounds.beta > 0.0 ? "unbounded" : "n/a");

  if (bounds.beta > noise.half_variance()) {
    const ExpectationBounds eb = closure_expectation_bounds(bounds, noise, policy);
    report.add("expectation_lo", eb.lo);
    report.add("expectation_hi", eb.hi.value, "unbounded");
  } else {
    report.add("expectation_lo", std::optional<double>{}, "n/a");
    report.add("expectation_hi", std::optional<double>{}, "n/a");
  }

  const bool ok = (h1.holds || h1_exempt) && h2.holds;
  report.add("verdict", std::string(ok ? "ok" : "hypothesis_failed"));
  out << report.text();
  return ok ? kOk : kHypothesisFailed;
}

int cmd_simulate(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  const GrowthLaw law = cfg.growth_law();
  const Policy policy = cfg.policy();
  const NoiseSpec noise = cfg.noise();
  const std::size_t count = flags.paths.value_or(1);
  if (count < 1) {
    throw ConfigError("--paths", "must be >= 1");
  }
  const fs::path dir(cfg.output_dir);
  const std::size_t files = cfg.csv ? std::min(count, kMaxTrajectoryFiles) : 0;

  auto file_name = [](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "path_%04zu.csv", i);
    return std::string(buf);
  };

  std::vector<std::string> closure_rows(count);
  for_each_path(count, cfg.threads, [&](std::size_t i) {
    const PathOptions options{i < files, std::nullopt};
    const PathResult r = simulate_path(law, policy, noise, cfg.sim, cfg.initial_abundance(), i,
                                       options);
    if (i < files) {
      write_file(dir / file_name(i), trajectory_csv(r.trajectory.samples));
    }
    closure_rows[i] = closures_csv_rows(i, r.closures);
  });

  std::string closures = closures_csv_header();
  for (const auto& rows : closure_rows) {
    closures += rows;
  }
  write_file(dir / "closures.csv", closures);

  const std::string canonical = serialize_config(cfg);
  write_file(dir / "config.ini", canonical);

  ordered_json manifest = ordered_json::object();
  manifest["command"] = "simulate";
  manifest["seed"] = cfg.sim.seed;
  manifest["paths"] = count;
  manifest["initial_abundance"] = cfg.initial_abundance();
  manifest["rng"] = "mt19937_64 per path, seeded with splitmix64(seed ^ splitmix64(path_id))";
  manifest["config_file"] = "config.ini";
  manifest["replay"] = "pulsequota simulate --config config.ini --paths " + std::to_string(count) +
                       " --out DIR";
  ordered_json written = ordered_json::array();
  for (std::size_t i = 0; i < files; ++i) {
    written.push_back({{"path_id", i}, {"file", file_name(i)}, {"stream_seed",
                                                                 derive_seed(cfg.sim.seed, i)}});
  }
  manifest["trajectories"] = std::move(written);
  manifest["closures"] = "closures.csv";
  manifest["config"] = canonical;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "paths=" << count << "\n";
  out << "trajectory_files=" << files << "\n";
  out << "output_dir=" << dir.string() << "\n";
  return kOk;
}

int cmd_closures(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  EnsembleOptions options;
  options.threads = cfg.threads;
  options.resolution = cfg.resolution;
  if (!flags.bounds.empty()) {
    options.bounds = load_bounds_override(flags.bounds);
  }
  const EnsembleSummary summary =
      run_ensemble(cfg.growth_law(), cfg.policy(), cfg.noise(), cfg.sim, cfg.initial_abundance(),
                   cfg.paths, options);

  const fs::path dir(cfg.output_dir);
  const std::string text = summary_text(summary, cfg.sim);
  write_file(dir / "summary.txt", text);
  write_file(dir / "summary.json", summary_json(summary, cfg.sim));
  out << text;
  return summary.bound_violated() ? kBoundViolated : kOk;
}

int cmd_deterministic(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  const GrowthLaw law = cfg.growth_law();
  const Policy policy = cfg.policy();
  const double n0 = cfg.initial_abundance();

  const double length = det_closure_length(law, policy);
  const double quadrature = closure_length_quadrature(law, policy);
  const RateBounds bounds = rate_bounds(law, policy.k_plus(), cfg.resolution);
  const LengthBounds lb = det_length_bounds(policy, bounds);
  const DetTrajectory traj = det_trajectory(law, policy, n0, cfg.sim.dt, cfg.sim.t_max);

  // Period table: the first interval starts at n0, the rest at K-.
  std::string events = "k,t,length,from_reset\n";
  double previous = 0.0;
  for (std::size_t k = 0; k < traj.events.size(); ++k) {
    const double t = traj.events[k];
    const bool from_reset = k > 0 || n0 == policy.k_minus() || n0 >= policy.k_plus();
    events += std::to_string(k) + ',' + format_number(t) + ',' + format_number(t - previous) +
              ',' + (from_reset ? '1' : '0') + '\n';
    previous = t;
  }

  Report report;
  report.add("closure_length", length);
  report.add("closure_length_quadrature", quadrature);
  report.add("bound_lo", lb.lo);
  report.add("bound_hi", lb.hi, "unbounded");
  report.add("pulses", static_cast<std::uint64_t>(traj.events.size()));
  if (traj.events.size() >= 2) {
    const double span = traj.events.back() - traj.events.front();
    report.add("mean_period", span / static_cast<double>(traj.events.size() - 1));
  } else {
    report.add("mean_period", std::optional<double>{}, "n/a");
  }

  const fs::path dir(cfg.output_dir);
  if (cfg.csv) {
    write_file(dir / "deterministic.csv", trajectory_csv(traj.samples));
    write_file(dir / "events.csv", events);
  }
  write_file(dir / "deterministic.txt", report.text());
  write_file(dir / "deterministic.json", report.json());
  out << report.text();
  return kOk;
}

int cmd_average(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  const LongRunAverage avg =
      long_run_average_no_harvest(cfg.growth_law(), cfg.noise(), cfg.sim, cfg.initial_abundance(),
                                  cfg.burn_in_fraction, cfg.replicates, cfg.threads);
  Report report;
  report.add("seed", cfg.sim.seed);
  report.add("dt", cfg.sim.dt);
  report.add("t_max", cfg.sim.t_max);
  report.add("burn_in_fraction", cfg.burn_in_fraction);
  report.add("replicates", static_cast<std::uint64_t>(avg.replicates));
  report.add("average", avg.average);
  report.add("std_error", avg.std_error);
  report.add("target", avg.target);
  report.add("relative_error", (avg.average - avg.target) / avg.target);
  report.add("clamp_activations", avg.clamp_activations);

  const fs::path dir(cfg.output_dir);
  write_file(dir / "average.txt", report.text());
  write_file(dir / "average.json", report.json());
  out << report.text();
  return kOk;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto v = parse_number(item);
    if (!v) {
      throw ConfigError("--values", "not a number: '" + item + "'");
    }
    values.push_back(*v);
  }
  if (values.empty()) {
    throw ConfigError("--values", "empty list");
  }
  return values;
}

int cmd_sweep(const Flags& flags, std::ostream& out) {
  const RunConfig cfg = resolve(flags);
  const auto axis = parse_sweep_axis(flags.axis);
  if (!axis) {
    throw ConfigError("--axis", "unknown axis '" + flags.axis + "' (sigma, q, k_plus, dt, paths)");
  }
  const std::vector<double> values = parse_values(flags.values);

  const EnsembleSpec base{cfg.growth_law(), cfg.policy(),          cfg.noise(),
                          cfg.sim,          cfg.initial_abundance(), cfg.paths};
  EnsembleOptions options;
  options.threads = cfg.threads;
  options.resolution = cfg.resolution;
  const std::vector<EnsembleSummary> runs = sweep(base, *axis, values, options);

  const fs::path dir(cfg.output_dir);
  const std::string table = sweep_csv(*axis, values, runs);
  write_file(dir / "sweep.csv", table);
  write_file(dir / "sweep.json", sweep_json(*axis, values, runs, cfg.sim));
  out << table;
  for (const auto& s : runs) {
    if (s.bound_violated()) {
      return kBoundViolated;
    }
  }
  return kOk;
}

}  // namespace

BoundsOverride load_bounds_override(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("--bounds", "cannot open " + path.string());
  }
  std::optional<double> lo;
  std::optional<double> hi;
  bool hi_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    const auto eq = line.find('=');
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw ConfigError(where, "expected key = value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    strip(key);
    strip(value);
    if (key == "bound_lo") {
      lo = parse_number(value);
      if (!lo) {
        throw ConfigError(where, "bound_lo is not a number");
      }
    } else if (key == "bound_hi") {
      hi_seen = true;
      if (value != "unbounded") {
        hi = parse_number(value);
        if (!hi) {
          throw ConfigError(where, "bound_hi must be a number or 'unbounded'");
        }
      }
    } else {
      throw ConfigError(where, "unknown key '" + key + "'");
    }
  }
  if (!lo) {
    throw ConfigError("--bounds", "bound_lo missing in " + path.string());
  }
  if (!hi_seen) {
    throw ConfigError("--bounds", "bound_hi missing in " + path.string());
  }
  return BoundsOverride{*lo, hi};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulse-quota fishery simulator: impulsive SDE closures and their bounds"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Run configuration (INI)")->required();
    sub->add_option("--seed", flags.seed, "Master seed (overrides sim.seed)");
    sub->add_option("--out", flags.out, "Output directory (overrides io.output_dir)");
    sub->add_option("--threads", flags.threads, "Worker threads, 0 = all cores");
  };
  auto* validate = app.add_subcommand("validate", "Check H1/H2 and print the bound table");
  common(validate);
  auto* simulate = app.add_subcommand("simulate", "Write trajectory CSVs and a replay manifest");
  common(simulate);
  simulate->add_option("--paths", flags.paths, "Number of paths (default 1)");
  auto* closures = app.add_subcommand("closures", "Monte Carlo mean closure length vs bounds");
  common(closures);
  closures->add_option("--paths", flags.paths, "Number of paths (overrides ensemble.paths)");
  closures->add_option("--bounds", flags.bounds, "Hand-entered bounds file");
  auto* deterministic = app.add_subcommand("deterministic", "Noise-free pulse model");
  common(deterministic);
  auto* average = app.add_subcommand("average", "Long-run average of the unharvested model");
  common(average);
  auto* sweep_cmd = app.add_subcommand("sweep", "One ensemble per value along an axis");
  common(sweep_cmd);
  sweep_cmd->add_option("--paths", flags.paths, "Paths per ensemble");
  sweep_cmd->add_option("--axis", flags.axis, "sigma | q | k_plus | dt | paths")->required();
  sweep_cmd->add_option("--values", flags.values, "Comma-separated values (fractions allowed)")
      ->required();

  std::vector<const char*> argv{"pulsequota"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (validate->parsed()) {
      return cmd_validate(flags, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(flags, out);
    }
    if (closures->parsed()) {
      return cmd_closures(flags, out);
    }
    if (deterministic->parsed()) {
      return cmd_deterministic(flags, out);
    }
    if (average->parsed()) {
      return cmd_average(flags, out);
    }
    return cmd_sweep(flags, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "hypothesis failure: " << e.what() << "\n";
    return kHypothesisFailed;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace pulsequota::cli
