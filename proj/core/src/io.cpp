#include "passfl/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "passfl/errors.hpp"

namespace passfl {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw ConfigError("cannot write " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Data rows of a CSV whose first line must equal `header`.
std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ConfigError(path.string() + ": expected header '" + header + "'");
  const auto width = split(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != width)
      throw ConfigError(path.string() + ": row " + std::to_string(rows.size() + 1) +
                        " has the wrong number of columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

double to_double(const std::string& cell) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0') throw ConfigError("not a number: '" + cell + "'");
  return v;
}

int to_int(const std::string& cell) {
  char* end = nullptr;
  const long v = std::strtol(cell.c_str(), &end, 10);
  if (cell.empty() || *end != '\0') throw ConfigError("not an integer: '" + cell + "'");
  return static_cast<int>(v);
}

json doubles(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<PositionRow> position_rows(const RoundOutcome& out) {
  std::vector<PositionRow> rows;
  if (out.ideal_links) return rows;
  if (out.per_user_positions.empty()) {
    for (std::size_t n = 0; n < out.shared_positions.size(); ++n)
      rows.push_back({"shared", static_cast<int>(n), out.shared_positions[n]});
    return rows;
  }
  for (const auto& [k, x] : out.per_user_positions)
    for (std::size_t n = 0; n < x.size(); ++n)
      rows.push_back({std::to_string(k), static_cast<int>(n), x[n]});
  return rows;
}

std::vector<TrainRow> train_rows(const TrainingLog& log) {
  std::vector<TrainRow> rows;
  for (std::size_t t = 1; t < log.rounds.size(); ++t) {
    const auto& r = log.rounds[t];
    rows.push_back({r.round, r.loss, r.gap, r.metric, r.tau_t, r.cum_latency, r.scheduled});
  }
  return rows;
}

std::vector<BoundRow> bound_rows(const BoundTrace& trace) {
  std::vector<BoundRow> rows;
  for (std::size_t t = 0; t < trace.increments.size(); ++t)
    rows.push_back({static_cast<int>(t + 1), trace.increments[t], trace.envelope[t + 1]});
  return rows;
}

void write_positions_csv(const std::filesystem::path& path, std::span<const PositionRow> rows) {
  std::string text = "slot_or_shared,antenna_index,x_m\n";
  for (const auto& r : rows)
    text += r.slot + "," + std::to_string(r.antenna) + "," + format_double(r.x_m) + "\n";
  write_text(path, text);
}

void write_pareto_csv(const std::filesystem::path& path, std::span<const ParetoPoint> rows) {
  std::string text = "lambda,tau_t_s,f_learn_samples,dominated\n";
  for (const auto& p : rows)
    text += format_double(p.lambda) + "," + format_double(p.tau_t) + "," +
            format_double(p.f_learn) + "," + (p.dominated ? "1" : "0") + "\n";
  write_text(path, text);
}

void write_train_csv(const std::filesystem::path& path, std::span<const TrainRow> rows) {
  std::string text = "round,loss,gap,metric,tau_t_s,cum_latency_s,scheduled_count\n";
  for (const auto& r : rows)
    text += std::to_string(r.round) + "," + format_double(r.loss) + "," + format_double(r.gap) +
            "," + format_double(r.metric) + "," + format_double(r.tau_t_s) + "," +
            format_double(r.cum_latency_s) + "," + std::to_string(r.scheduled_count) + "\n";
  write_text(path, text);
}

void write_bound_csv(const std::filesystem::path& path, std::span<const BoundRow> rows) {
  std::string text = "round,A_t,envelope\n";
  for (const auto& r : rows)
    text += std::to_string(r.round) + "," + format_double(r.a_t) + "," +
            format_double(r.envelope) + "\n";
  write_text(path, text);
}

std::vector<PositionRow> read_positions_csv(const std::filesystem::path& path) {
  std::vector<PositionRow> rows;
  for (const auto& c : read_table(path, "slot_or_shared,antenna_index,x_m"))
    rows.push_back({c[0], to_int(c[1]), to_double(c[2])});
  return rows;
}

std::vector<ParetoPoint> read_pareto_csv(const std::filesystem::path& path) {
  std::vector<ParetoPoint> rows;
  for (const auto& c : read_table(path, "lambda,tau_t_s,f_learn_samples,dominated"))
    rows.push_back({to_double(c[0]), to_double(c[1]), to_double(c[2]), to_int(c[3]) != 0});
  return rows;
}

std::vector<TrainRow> read_train_csv(const std::filesystem::path& path) {
  std::vector<TrainRow> rows;
  for (const auto& c :
       read_table(path, "round,loss,gap,metric,tau_t_s,cum_latency_s,scheduled_count"))
    rows.push_back({to_int(c[0]), to_double(c[1]), to_double(c[2]), to_double(c[3]),
                    to_double(c[4]), to_double(c[5]), to_int(c[6])});
  return rows;
}

std::vector<BoundRow> read_bound_csv(const std::filesystem::path& path) {
  std::vector<BoundRow> rows;
  for (const auto& c : read_table(path, "round,A_t,envelope"))
    rows.push_back({to_int(c[0]), to_double(c[1]), to_double(c[2])});
  return rows;
}

std::string round_json(const RoundOutcome& out, const Scenario& s) {
  json devices = json::array();
  for (std::size_t k = 0; k < out.mask.size(); ++k) {
    devices.push_back({{"index", k},
                       {"scheduled", out.mask[k]},
                       {"data_size_samples", s.devices[k].data_size_samples},
                       {"tau_cm_s", out.allocation.tau_cm[k]},
                       {"e_cm_j", out.allocation.e_cm[k]},
                       {"power_w", out.powers[k]},
                       {"frequency_hz", out.frequencies[k]},
                       {"gain", out.gains[k]},
                       {"rate_bps", out.rates[k]}});
  }
  json placements = json::object();
  if (!out.ideal_links) {
    if (out.per_user_positions.empty()) {
      placements["shared"] = doubles(out.shared_positions);
    } else {
      json slots = json::object();
      for (const auto& [k, x] : out.per_user_positions) slots[std::to_string(k)] = doubles(x);
      placements["per_user"] = slots;
    }
  }
  json trace = json::array();
  for (const auto& r : out.trace) {
    trace.push_back({{"iteration", r.iteration},
                     {"after_times", r.after_times},
                     {"after_schedule", r.after_schedule},
                     {"feasible", r.feasible},
                     {"scheduled", r.scheduled},
                     {"times_checked", r.times_checked},
                     {"times_monotone", r.times_monotone},
                     {"schedule_monotone", r.schedule_monotone}});
  }
  json j = {{"pipeline", std::string(to_string(out.pipeline))},
            {"mode", std::string(to_string(out.mode))},
            {"lambda", out.lambda},
            {"ideal_links", out.ideal_links},
            {"objective", out.objective},
            {"tau_t_s", out.tau_t},
            {"tau_cm_total_s", out.tau_cm_total},
            {"tau_cp_s", out.tau_cp},
            {"f_learn_samples", out.f_learn},
            {"scheduled_count", out.scheduled_count()},
            {"mask", out.mask},
            {"devices", devices},
            {"placements", placements},
            {"best_iteration", out.best_iteration},
            {"monotonicity_violations", out.monotonicity_violations},
            {"trace", trace}};
  return j.dump(2) + "\n";
}

void write_round_json(const std::filesystem::path& path, const RoundOutcome& out,
                      const Scenario& s) {
  write_text(path, round_json(out, s));
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json timings = json::object();
  for (const auto& [name, secs] : m.timings_s) timings[name] = secs;
  const json j = {{"command", m.command},
                  {"config_path", m.config_path},
                  {"seed", m.seed},
                  {"output_dir", m.output_dir},
                  {"version", m.version},
                  {"status", m.status},
                  {"message", m.message},
                  {"outputs", m.outputs},
                  {"timings_s", timings}};
  write_text(path, j.dump(2) + "\n");
}

std::string_view version() { return PASSFL_VERSION; }

}  // namespace passfl
