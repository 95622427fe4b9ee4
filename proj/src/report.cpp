#include "pulsequota/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "pulsequota/config.hpp"
#include "pulsequota/rng.hpp"

namespace pulsequota {

namespace {

using ordered_json = nlohmann::ordered_json;

// (key, text value, json value) for every summary field, in emission order.
struct Field {
  std::string key;
  std::string text;
  ordered_json json;
};

std::string text_of(std::optional<double> v, std::string_view absent) {
  return v ? format_number(*v) : std::string(absent);
}

std::string text_of(std::optional<bool> v) {
  if (!v) {
    return "n/a";
  }
  return *v ? "true" : "false";
}

ordered_json json_of(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }
ordered_json json_of(std::optional<bool> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::vector<Field> summary_fields(const EnsembleSummary& s) {
  auto num = [](std::string key, double v) { return Field{std::move(key), format_number(v), v}; };
  auto count = [](std::string key, std::uint64_t v) {
    return Field{std::move(key), std::to_string(v), v};
  };
  auto flag = [](std::string key, bool v) {
    return Field{std::move(key), v ? "true" : "false", v};
  };
  return {
      count("paths", s.paths),
      count("closures_observed", s.closures_observed),
      count("censored", s.censored),
      count("excluded_initial", s.excluded_initial),
      num("mean_length", s.mean_length),
      num("std_error", s.std_error),
      num("ci95_lo", s.ci95_lo),
      num("ci95_hi", s.ci95_hi),
      Field{"bound_lo", text_of(s.bound_lo, "n/a"), json_of(s.bound_lo)},
      Field{"bound_hi", text_of(s.bound_hi, "unbounded"), json_of(s.bound_hi)},
      Field{"lo_satisfied", text_of(s.lo_satisfied), json_of(s.lo_satisfied)},
      Field{"hi_satisfied", text_of(s.hi_satisfied), json_of(s.hi_satisfied)},
      num("envelope_violation_rate", s.envelope_violation_rate),
      count("envelope_steps", s.envelope_steps),
      count("clamp_activations", s.clamp_activations),
      num("yield_rate", s.yield_rate),
      flag("h2_holds", s.h2_holds),
      flag("inconclusive", s.inconclusive),
  };
}

ordered_json summary_object(const EnsembleSummary& s) {
  ordered_json doc = ordered_json::object();
  for (auto& f : summary_fields(s)) {
    doc[f.key] = std::move(f.json);
  }
  return doc;
}

}  // namespace

std::string summary_text(const EnsembleSummary& summary, const SimConfig& sim) {
  std::ostringstream out;
  out << "seed=" << sim.seed << "\n";
  out << "dt=" << format_number(sim.dt) << "\n";
  out << "t_max=" << format_number(sim.t_max) << "\n";
  out << "crossing_mode=" << to_string(sim.crossing_mode) << "\n";
  for (const auto& f : summary_fields(summary)) {
    out << f.key << "=" << f.text << "\n";
  }
  return out.str();
}

std::string summary_json(const EnsembleSummary& summary, const SimConfig& sim) {
  ordered_json doc = ordered_json::object();
  doc["seed"] = sim.seed;
  doc["dt"] = sim.dt;
  doc["t_max"] = sim.t_max;
  doc["crossing_mode"] = std::string(to_string(sim.crossing_mode));
  doc.update(summary_object(summary));
  return doc.dump(2) + "\n";
}

std::string trajectory_csv(std::span<const Sample> samples) {
  std::string out = "t,n,event\n";
  out.reserve(samples.size() * 24 + out.size());
  for (const Sample& s : samples) {
    out += format_number(s.t);
    out += ',';
    out += format_number(s.n);
    out += s.event ? ",1\n" : ",0\n";
  }
  return out;
}

std::string closures_csv_header() { return "path_id,k,open_time,length,censored,from_reset\n"; }

std::string closures_csv_rows(std::uint64_t path_id, std::span<const ClosureRecord> closures) {
  std::string out;
  for (const ClosureRecord& c : closures) {
    out += std::to_string(path_id) + ',' + std::to_string(c.k) + ',' + format_number(c.open_time) +
           ',' + format_number(c.length) + ',' + (c.censored ? '1' : '0') + ',' +
           (c.from_reset ? '1' : '0') + '\n';
  }
  return out;
}

std::string sweep_csv(SweepAxis axis, std::span<const double> values,
                      std::span<const EnsembleSummary> summaries) {
  if (values.size() != summaries.size()) {
    throw std::invalid_argument("sweep_csv: one summary per value expected");
  }
  std::ostringstream out;
  out << to_string(axis);
  if (!summaries.empty()) {
    for (const auto& f : summary_fields(summaries.front())) {
      out << ',' << f.key;
    }
  }
  out << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_number(values[i]);
    for (const auto& f : summary_fields(summaries[i])) {
      out << ',' << f.text;
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_json(SweepAxis axis, std::span<const double> values,
                       std::span<const EnsembleSummary> summaries, const SimConfig& base) {
  if (values.size() != summaries.size()) {
    throw std::invalid_argument("sweep_json: one summary per value expected");
  }
  ordered_json doc = ordered_json::object();
  doc["axis"] = std::string(to_string(axis));
  doc["base_seed"] = base.seed;
  ordered_json runs = ordered_json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    ordered_json run = ordered_json::object();
    run["value"] = values[i];
    run["seed"] = sweep_seed(base.seed, i);
    run.update(summary_object(summaries[i]));
    runs.push_back(std::move(run));
  }
  doc["runs"] = std::move(runs);
  return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " +
                               ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

}  // namespace pulsequota
