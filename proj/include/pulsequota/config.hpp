#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pulsequota/rates.hpp"
#include "pulsequota/sde.hpp"

namespace pulsequota {

/// Malformed or invalid run configuration. `where` names the offending
/// `section.key` or input line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

/// Parsed run configuration. Sections and keys:
///
///   [growth]   kind = logistic | constant | table
///              r0, K, mu, nu      (logistic; mu, nu default 1)
///              r                  (constant)
///              table              (table: CSV of abundance,rate; relative to the config)
///              resolution         (extremum grid, default 4096)
///   [policy]   k_plus, q
///   [noise]    sigma
///   [sim]      dt, t_max, seed, crossing_mode, record_stride, clamp_floor, n0
///   [ensemble] paths, replicates, burn_in_fraction, threads
///   [io]       output_dir, csv
///
/// Numbers may be written as decimals or as simple fractions such as 1/9.
struct RunConfig {
  std::string kind = "logistic";
  double r0 = 0.0;
  double k = 0.0;
  double mu = 1.0;
  double nu = 1.0;
  double r = 0.0;
  std::string table;
  std::size_t resolution = kDefaultResolution;

  double k_plus = 0.0;
  double q = 0.0;

  double sigma = 0.0;

  SimConfig sim;
  std::optional<double> n0;

  std::size_t paths = 1000;
  std::size_t replicates = 1;
  double burn_in_fraction = 0.1;
  unsigned threads = 0;

  std::string output_dir = "out";
  bool csv = true;

  std::filesystem::path base_dir;  // resolves a relative table path; not serialized

  GrowthLaw growth_law() const;
  Policy policy() const { return Policy(k_plus, q); }
  NoiseSpec noise() const { return NoiseSpec(sigma); }
  /// sim.n0 when given, else K-.
  double initial_abundance() const { return n0.value_or(k_plus - q); }

  /// Re-validates every module invariant; throws ConfigError.
  void validate() const;
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form: fixed section and key order, shortest round-trip numbers.
std::string serialize_config(const RunConfig& config);

/// Decimal or `a/b` fraction.
std::optional<double> parse_number(std::string_view text);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

}  // namespace pulsequota
