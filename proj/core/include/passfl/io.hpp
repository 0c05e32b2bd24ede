#pragma once

#include <filesystem>
#include <map>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "passfl/bound.hpp"
#include "passfl/driver.hpp"
#include "passfl/flsim.hpp"

namespace passfl {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

struct PositionRow {
  std::string slot;  // "shared" or the device index owning the slot
  int antenna = 0;
  double x_m = 0.0;
  bool operator==(const PositionRow&) const = default;
};

struct TrainRow {
  int round = 0;
  double loss = 0.0;
  double gap = 0.0;
  double metric = 0.0;
  double tau_t_s = 0.0;
  double cum_latency_s = 0.0;
  int scheduled_count = 0;
  bool operator==(const TrainRow&) const = default;
};

struct BoundRow {
  int round = 0;
  double a_t = 0.0;
  double envelope = 0.0;
  bool operator==(const BoundRow&) const = default;
};

std::vector<PositionRow> position_rows(const RoundOutcome& out);
/// Rounds 1..T; the initial state is not a data row.
std::vector<TrainRow> train_rows(const TrainingLog& log);
std::vector<BoundRow> bound_rows(const BoundTrace& trace);

void write_positions_csv(const std::filesystem::path& path, std::span<const PositionRow> rows);
void write_pareto_csv(const std::filesystem::path& path, std::span<const ParetoPoint> rows);
void write_train_csv(const std::filesystem::path& path, std::span<const TrainRow> rows);
void write_bound_csv(const std::filesystem::path& path, std::span<const BoundRow> rows);

/// Readers check the header and throw ConfigError on malformed input.
std::vector<PositionRow> read_positions_csv(const std::filesystem::path& path);
std::vector<ParetoPoint> read_pareto_csv(const std::filesystem::path& path);
std::vector<TrainRow> read_train_csv(const std::filesystem::path& path);
std::vector<BoundRow> read_bound_csv(const std::filesystem::path& path);

/// Round outcome as indented JSON, including per-device decisions and the
/// outer-loop trace.
std::string round_json(const RoundOutcome& out, const Scenario& s);
void write_round_json(const std::filesystem::path& path, const RoundOutcome& out,
                      const Scenario& s);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string version;
  std::string status = "ok";
  std::string message;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_s;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

/// Library version string.
std::string_view version();

}  // namespace passfl
