#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulsequota/montecarlo.hpp"
#include "pulsequota/sde.hpp"
#include "pulsequota/trajectory.hpp"

namespace pulsequota {

/// Ensemble summary as a flat `key=value` block, one field per line, in a
/// fixed order. The run's seed, dt and t_max lead the block.
std::string summary_text(const EnsembleSummary& summary, const SimConfig& sim);

/// The same fields as a JSON document.
std::string summary_json(const EnsembleSummary& summary, const SimConfig& sim);

/// `t,n,event` rows, shortest round-trip numbers.
std::string trajectory_csv(std::span<const Sample> samples);

/// One row per closure: `path_id,k,open_time,length,censored,from_reset`.
std::string closures_csv_header();
std::string closures_csv_rows(std::uint64_t path_id, std::span<const ClosureRecord> closures);

/// One row per sweep value followed by the summary fields.
std::string sweep_csv(SweepAxis axis, std::span<const double> values,
                      std::span<const EnsembleSummary> summaries);
std::string sweep_json(SweepAxis axis, std::span<const double> values,
                       std::span<const EnsembleSummary> summaries, const SimConfig& base);

/// Writes `contents` to `path`, creating parent directories. Throws
/// std::runtime_error when the file cannot be written.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pulsequota
