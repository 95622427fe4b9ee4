#include "pulsequota/config.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace pulsequota {

namespace {

namespace pt = boost::property_tree;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_plain(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"growth", {"kind", "r0", "K", "mu", "nu", "r", "table", "resolution"}},
      {"policy", {"k_plus", "q"}},
      {"noise", {"sigma"}},
      {"sim", {"dt", "t_max", "seed", "crossing_mode", "record_stride", "clamp_floor", "n0"}},
      {"ensemble", {"paths", "replicates", "burn_in_fraction", "threads"}},
      {"io", {"output_dir", "csv"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) {
      return std::nullopt;
    }
    const auto value = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!value) {
      return std::nullopt;
    }
    return std::string(trim(*value));
  }

  std::optional<double> number(const std::string& section, const std::string& key,
                               bool required) const {
    const auto text = raw(section, key);
    if (!text) {
      if (required) {
        throw ConfigError(section + "." + key, "required key missing");
      }
      return std::nullopt;
    }
    const auto value = parse_number(*text);
    if (!value) {
      throw ConfigError(section + "." + key, "not a number: '" + *text + "'");
    }
    return value;
  }

  std::optional<std::uint64_t> integer(const std::string& section, const std::string& key) const {
    const auto text = raw(section, key);
    if (!text) {
      return std::nullopt;
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
    if (ec != std::errc() || ptr != text->data() + text->size() || text->empty()) {
      throw ConfigError(section + "." + key, "not a non-negative integer: '" + *text + "'");
    }
    return value;
  }

  std::optional<bool> boolean(const std::string& section, const std::string& key) const {
    const auto text = raw(section, key);
    if (!text) {
      return std::nullopt;
    }
    if (*text == "true" || *text == "on" || *text == "1") {
      return true;
    }
    if (*text == "false" || *text == "off" || *text == "0") {
      return false;
    }
    throw ConfigError(section + "." + key, "not a boolean: '" + *text + "'");
  }

 private:
  const pt::ptree& tree_;
};

std::vector<std::pair<double, double>> load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("growth.table", "cannot open rate table " + path.string());
  }
  std::vector<std::pair<double, double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') {
      continue;
    }
    const auto comma = view.find(',');
    const auto x = comma == std::string_view::npos ? std::nullopt : parse_plain(view.substr(0, comma));
    const auto y = comma == std::string_view::npos ? std::nullopt : parse_plain(view.substr(comma + 1));
    if (!x || !y) {
      if (points.empty() && line_no == 1) {
        continue;  // header row
      }
      throw ConfigError("growth.table",
                        path.string() + " line " + std::to_string(line_no) + ": expected 'abundance,rate'");
    }
    points.emplace_back(*x, *y);
  }
  return points;
}

template <class F>
void wrap(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where, e.what());
  }
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return parse_plain(text);
  }
  const auto num = parse_plain(text.substr(0, slash));
  const auto den = parse_plain(text.substr(slash + 1));
  if (!num || !den || *den == 0.0) {
    return std::nullopt;
  }
  return *num / *den;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

GrowthLaw RunConfig::growth_law() const {
  if (kind == "logistic") {
    return GrowthLaw::logistic(r0, k, mu, nu);
  }
  if (kind == "constant") {
    return GrowthLaw::constant(r);
  }
  if (kind == "table") {
    std::filesystem::path path(table);
    if (path.is_relative()) {
      path = base_dir / path;
    }
    return GrowthLaw::table(load_table(path));
  }
  throw ConfigError("growth.kind", "unknown kind '" + kind + "'");
}

void RunConfig::validate() const {
  std::optional<GrowthLaw> law;
  wrap("growth", [&] { law.emplace(growth_law()); });
  if (resolution < 2) {
    throw ConfigError("growth.resolution", "must be >= 2");
  }
  std::optional<Policy> pol;
  wrap("policy", [&] { pol.emplace(policy()); });
  wrap("policy.k_plus", [&] { check_policy_against(*law, *pol); });
  wrap("noise.sigma", [&] { (void)noise(); });
  wrap("sim", [&] { sim.validate(); });
  if (n0 && (!(*n0 > 0.0) || *n0 > k_plus)) {
    throw ConfigError("sim.n0", "must lie in (0, k_plus]");
  }
  if (paths < 1) {
    throw ConfigError("ensemble.paths", "must be >= 1");
  }
  if (replicates < 1) {
    throw ConfigError("ensemble.replicates", "must be >= 1");
  }
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw ConfigError("ensemble.burn_in_fraction", "must lie in [0, 1)");
  }
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }

  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(section, "key outside of a [section]");
    }
    const auto known = keys.find(section);
    if (known == keys.end()) {
      throw ConfigError("[" + section + "]", "unknown section");
    }
    for (const auto& [key, value] : body) {
      if (!known->second.contains(key)) {
        throw ConfigError(section + "." + key, "unknown key");
      }
    }
  }

  const Reader read(tree);
  RunConfig cfg;
  cfg.base_dir = base_dir;

  cfg.kind = read.raw("growth", "kind").value_or("");
  if (cfg.kind.empty()) {
    throw ConfigError("growth.kind", "required key missing");
  }
  std::set<std::string> used = {"kind", "resolution"};
  if (cfg.kind == "logistic") {
    cfg.r0 = *read.number("growth", "r0", true);
    cfg.k = *read.number("growth", "K", true);
    cfg.mu = read.number("growth", "mu", false).value_or(1.0);
    cfg.nu = read.number("growth", "nu", false).value_or(1.0);
    used.insert({"r0", "K", "mu", "nu"});
  } else if (cfg.kind == "constant") {
    cfg.r = *read.number("growth", "r", true);
    used.insert("r");
  } else if (cfg.kind == "table") {
    cfg.table = read.raw("growth", "table").value_or("");
    if (cfg.table.empty()) {
      throw ConfigError("growth.table", "required key missing");
    }
    used.insert("table");
  } else {
    throw ConfigError("growth.kind", "unknown kind '" + cfg.kind + "' (logistic, constant, table)");
  }
  for (const auto& [key, value] : tree.get_child("growth")) {
    if (!used.contains(key)) {
      throw ConfigError("growth." + key, "not used by kind " + cfg.kind);
    }
  }
  if (const auto v = read.integer("growth", "resolution")) {
    cfg.resolution = static_cast<std::size_t>(*v);
  }

  cfg.k_plus = *read.number("policy", "k_plus", true);
  cfg.q = *read.number("policy", "q", true);
  cfg.sigma = *read.number("noise", "sigma", true);

  cfg.sim.dt = *read.number("sim", "dt", true);
  cfg.sim.t_max = *read.number("sim", "t_max", true);
  if (const auto v = read.integer("sim", "seed")) {
    cfg.sim.seed = *v;
  }
  if (const auto mode = read.raw("sim", "crossing_mode")) {
    const auto parsed = parse_crossing_mode(*mode);
    if (!parsed) {
      throw ConfigError("sim.crossing_mode",
                        "unknown mode '" + *mode + "' (grid, interpolate, bridge)");
    }
    cfg.sim.crossing_mode = *parsed;
  }
  if (const auto v = read.integer("sim", "record_stride")) {
    cfg.sim.record_stride = static_cast<std::size_t>(*v);
  }
  cfg.sim.clamp_floor = read.number("sim", "clamp_floor", false);
  cfg.n0 = read.number("sim", "n0", false);

  if (const auto v = read.integer("ensemble", "paths")) {
    cfg.paths = static_cast<std::size_t>(*v);
  }
  if (const auto v = read.integer("ensemble", "replicates")) {
    cfg.replicates = static_cast<std::size_t>(*v);
  }
  if (const auto v = read.number("ensemble", "burn_in_fraction", false)) {
    cfg.burn_in_fraction = *v;
  }
  if (const auto v = read.integer("ensemble", "threads")) {
    cfg.threads = static_cast<unsigned>(*v);
  }

  if (const auto v = read.raw("io", "output_dir")) {
    cfg.output_dir = *v;
  }
  if (const auto v = read.boolean("io", "csv")) {
    cfg.csv = *v;
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("", "cannot open config file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[growth]\n";
  out << "kind = " << c.kind << "\n";
  if (c.kind == "logistic") {
    out << "r0 = " << format_number(c.r0) << "\n";
    out << "K = " << format_number(c.k) << "\n";
    out << "mu = " << format_number(c.mu) << "\n";
    out << "nu = " << format_number(c.nu) << "\n";
  } else if (c.kind == "constant") {
    out << "r = " << format_number(c.r) << "\n";
  } else {
    out << "table = " << c.table << "\n";
  }
  out << "resolution = " << c.resolution << "\n";

  out << "\n[policy]\n";
  out << "k_plus = " << format_number(c.k_plus) << "\n";
  out << "q = " << format_number(c.q) << "\n";

  out << "\n[noise]\n";
  out << "sigma = " << format_number(c.sigma) << "\n";

  out << "\n[sim]\n";
  out << "dt = " << format_number(c.sim.dt) << "\n";
  out << "t_max = " << format_number(c.sim.t_max) << "\n";
  out << "seed = " << c.sim.seed << "\n";
  out << "crossing_mode = " << to_string(c.sim.crossing_mode) << "\n";
  out << "record_stride = " << c.sim.record_stride << "\n";
  if (c.sim.clamp_floor) {
    out << "clamp_floor = " << format_number(*c.sim.clamp_floor) << "\n";
  }
  if (c.n0) {
    out << "n0 = " << format_number(*c.n0) << "\n";
  }

  out << "\n[ensemble]\n";
  out << "paths = " << c.paths << "\n";
  out << "replicates = " << c.replicates << "\n";
  out << "burn_in_fraction = " << format_number(c.burn_in_fraction) << "\n";
  out << "threads = " << c.threads << "\n";

  out << "\n[io]\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "csv = " << (c.csv ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace pulsequota
