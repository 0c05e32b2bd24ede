#include "passfl/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "passfl/errors.hpp"

namespace passfl {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + "expected an object");
  }

  std::string key_path(std::string_view key) const { return path_ + std::string(key); }

  bool has(const char* key) {
    known_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) {
    known_.insert(key);
    return j_.at(key);
  }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(key_path(key) + ": must be finite");
  }

  void number(const char* key, std::optional<double>& out) {
    if (!has(key)) return;
    double v = 0.0;
    number(key, v);
    out = v;
  }

  template <typename Int>
  void integer(const char* key, Int& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key) + ": expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned()) throw ConfigError(key_path(key) + ": must be >= 0");
      out = v.get<Int>();
    } else {
      const auto raw = v.get<std::int64_t>();
      if (raw < std::numeric_limits<Int>::min() || raw > std::numeric_limits<Int>::max())
        throw ConfigError(key_path(key) + ": out of range");
      out = static_cast<Int>(raw);
    }
  }

  void text(const char* key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
    out = v.get<std::string>();
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!known_.count(item.key())) throw ConfigError(key_path(item.key()) + ": unknown key");
  }

 private:
  std::string label() const { return path_.empty() ? "config: " : path_.substr(0, path_.size() - 1) + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

// Re-throws a ConfigError from `fn` prefixed with the key it belongs to.
template <typename Fn>
void keyed(const std::string& key, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

DeviceProfile parse_device(const json& j, const std::string& path, const ScenarioTemplate& t) {
  Section sec(j, path);
  DeviceProfile d;
  d.cycles_per_sample = t.cycles_per_sample;
  d.e_max_j = t.e_max_j;
  d.p_max_w = t.p_max_w;
  d.f_max_hz = t.f_max_hz;
  if (!sec.has("x_m") || !sec.has("y_m") || !sec.has("data_size_samples"))
    throw ConfigError(path + "x_m, y_m, data_size_samples: required");
  sec.number("x_m", d.x_m);
  sec.number("y_m", d.y_m);
  sec.integer("data_size_samples", d.data_size_samples);
  sec.number("cycles_per_sample", d.cycles_per_sample);
  sec.number("e_max_j", d.e_max_j);
  sec.number("p_max_w", d.p_max_w);
  sec.number("f_max_hz", d.f_max_hz);
  sec.finish();
  return d;
}

void parse_scenario(const json& j, RunConfig& cfg) {
  Section sec(j, "scenario.");
  auto& t = cfg.scenario;
  sec.integer("num_devices", cfg.num_devices);
  sec.number("area_x_m", t.area_x_m);
  sec.number("area_y_m", t.area_y_m);
  sec.number("pa_height_m", t.pa_height_m);
  sec.integer("num_pas", t.num_pas);
  sec.number("upload_bits", t.upload_bits);
  sec.number("kappa_eff", t.kappa_eff);
  sec.number("min_spacing_m", t.min_spacing_m);
  sec.integer("data_size_min", t.data_size_min);
  sec.integer("data_size_max", t.data_size_max);
  sec.number("cycles_per_sample", t.cycles_per_sample);
  sec.number("e_max_j", t.e_max_j);
  sec.number("p_max_w", t.p_max_w);
  sec.number("f_max_hz", t.f_max_hz);
  if (sec.has("radio")) {
    Section radio(sec.at("radio"), "scenario.radio.");
    radio.number("carrier_freq_hz", t.radio.carrier_freq_hz);
    radio.number("bandwidth_hz", t.radio.bandwidth_hz);
    radio.number("noise_psd_dbm_per_hz", t.radio.noise_psd_dbm_per_hz);
    radio.number("n_eff", t.radio.n_eff);
    radio.finish();
  }
  if (sec.has("devices")) {
    const json& list = sec.at("devices");
    if (!list.is_array() || list.empty())
      throw ConfigError("scenario.devices: expected a non-empty array");
    std::vector<DeviceProfile> devices;
    for (std::size_t i = 0; i < list.size(); ++i)
      devices.push_back(parse_device(list[i], "scenario.devices[" + std::to_string(i) + "].", t));
    cfg.devices = std::move(devices);
  }
  sec.finish();
}

void parse_optimizer(const json& j, RunConfig& cfg) {
  Section sec(j, "optimizer.");
  auto& o = cfg.optimizer;
  sec.number("lambda", cfg.lambda);
  if (sec.has("lambda_grid")) {
    const json& g = sec.at("lambda_grid");
    if (!g.is_array()) throw ConfigError("optimizer.lambda_grid: expected an array");
    cfg.lambda_grid.clear();
    for (const auto& v : g) {
      if (!v.is_number()) throw ConfigError("optimizer.lambda_grid: expected numbers");
      cfg.lambda_grid.push_back(v.get<double>());
    }
    if (cfg.lambda_grid.empty()) throw ConfigError("optimizer.lambda_grid: empty grid");
  }
  std::string mode;
  sec.text("mode", mode);
  if (!mode.empty()) keyed("optimizer.mode", [&] { o.mode = parse_placement_mode(mode); });
  sec.integer("grid_points", o.grid_points);
  sec.integer("max_outer", o.max_outer);
  sec.number("outer_tol", o.outer_tol);
  sec.integer("max_sweeps", o.max_sweeps);
  if (sec.has("initial_positions")) {
    const json& g = sec.at("initial_positions");
    if (!g.is_array()) throw ConfigError("optimizer.initial_positions: expected an array");
    std::vector<double> x;
    for (const auto& v : g) {
      if (!v.is_number()) throw ConfigError("optimizer.initial_positions: expected numbers");
      x.push_back(v.get<double>());
    }
    o.initial_positions = std::move(x);
  }
  sec.finish();
}

void parse_training(const json& j, RunConfig& cfg) {
  Section sec(j, "training.");
  auto& tr = cfg.training;
  std::string name;
  sec.text("task", name);
  if (!name.empty()) keyed("training.task", [&] { tr.task.kind = parse_task_kind(name); });
  name.clear();
  sec.text("pipeline", name);
  if (!name.empty()) keyed("training.pipeline", [&] { tr.pipeline = parse_pipeline(name); });
  sec.integer("rounds", tr.rounds);
  sec.integer("local_steps", tr.local_steps);
  sec.integer("batch_size", tr.batch_size);
  sec.integer("feature_dim", tr.task.feature_dim);
  sec.integer("num_classes", tr.task.num_classes);
  sec.integer("train_samples", tr.task.train_samples);
  sec.integer("test_samples", tr.task.test_samples);
  sec.number("noise_std", tr.task.noise_std);
  sec.number("condition_span", tr.task.condition_span);
  sec.number("class_separation", tr.task.class_separation);
  sec.number("ridge", tr.task.ridge);
  sec.number("alpha", tr.task.alpha);
  sec.integer("label_bins", tr.label_bins);
  std::string path;
  sec.text("dataset", path);
  if (!path.empty()) tr.dataset = path;
  path.clear();
  sec.text("test_dataset", path);
  if (!path.empty()) tr.test_dataset = path;
  sec.finish();
}

void check(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(std::string(key) + ": " + message);
}

void validate_config(const RunConfig& cfg) {
  const auto& t = cfg.scenario;
  check(cfg.num_devices >= 1, "scenario.num_devices", "must be >= 1");
  check(t.area_x_m > 0.0, "scenario.area_x_m", "must be > 0");
  check(t.area_y_m > 0.0, "scenario.area_y_m", "must be > 0");
  check(t.pa_height_m > 0.0, "scenario.pa_height_m", "must be > 0");
  check(t.num_pas >= 1, "scenario.num_pas", "must be >= 1");
  check(t.upload_bits > 0.0, "scenario.upload_bits", "must be > 0");
  check(t.kappa_eff > 0.0, "scenario.kappa_eff", "must be > 0");
  check(!t.min_spacing_m || *t.min_spacing_m > 0.0, "scenario.min_spacing_m", "must be > 0");
  check(t.data_size_min >= 1, "scenario.data_size_min", "must be >= 1");
  check(t.data_size_max >= t.data_size_min, "scenario.data_size_max", "must be >= data_size_min");
  check(t.cycles_per_sample > 0.0, "scenario.cycles_per_sample", "must be > 0");
  check(t.e_max_j > 0.0, "scenario.e_max_j", "must be > 0");
  check(t.p_max_w > 0.0, "scenario.p_max_w", "must be > 0");
  check(t.f_max_hz > 0.0, "scenario.f_max_hz", "must be > 0");
  check(t.radio.carrier_freq_hz > 0.0, "scenario.radio.carrier_freq_hz", "must be > 0");
  check(t.radio.bandwidth_hz > 0.0, "scenario.radio.bandwidth_hz", "must be > 0");
  check(t.radio.n_eff >= 1.0, "scenario.radio.n_eff", "must be >= 1");

  check(cfg.lambda > 0.0 && cfg.lambda < 1.0, "optimizer.lambda", "lambda out of (0,1)");
  for (double l : cfg.lambda_grid)
    check(l > 0.0 && l < 1.0, "optimizer.lambda_grid", "lambda out of (0,1)");
  const auto& o = cfg.optimizer;
  check(o.grid_points >= 2, "optimizer.grid_points", "must be >= 2");
  check(o.max_outer >= 1, "optimizer.max_outer", "must be >= 1");
  check(o.outer_tol >= 0.0, "optimizer.outer_tol", "must be >= 0");
  check(o.max_sweeps >= 1, "optimizer.max_sweeps", "must be >= 1");

  const auto& tr = cfg.training;
  check(tr.rounds >= 0, "training.rounds", "must be >= 0");
  check(tr.local_steps >= 1, "training.local_steps", "must be >= 1");
  check(tr.batch_size >= 1, "training.batch_size", "must be >= 1");
  check(tr.label_bins >= 1, "training.label_bins", "must be >= 1");
  keyed("training", [&] { validate(tr.task); });
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON (") + e.what() + ")");
  }
  RunConfig cfg;
  Section root(j, "");
  root.integer("seed", cfg.seed);
  if (root.has("scenario")) parse_scenario(root.at("scenario"), cfg);
  if (root.has("optimizer")) parse_optimizer(root.at("optimizer"), cfg);
  if (root.has("training")) parse_training(root.at("training"), cfg);
  root.finish();
  validate_config(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Scenario build_scenario(const RunConfig& cfg) {
  Scenario s = cfg.devices ? make_scenario(cfg.scenario, *cfg.devices)
                           : generate_scenario(cfg.seed, cfg.num_devices, cfg.scenario);
  validate(s);
  return s;
}

std::string scenario_config_json(const RunConfig& cfg, const Scenario& s) {
  json radio = {{"carrier_freq_hz", s.radio.carrier_freq_hz()},
                {"bandwidth_hz", s.radio.bandwidth_hz()},
                {"noise_psd_dbm_per_hz", s.radio.noise_psd_dbm_per_hz()},
                {"n_eff", s.radio.n_eff()}};
  json devices = json::array();
  for (const auto& d : s.devices) {
    devices.push_back({{"x_m", d.x_m},
                       {"y_m", d.y_m},
                       {"data_size_samples", d.data_size_samples},
                       {"cycles_per_sample", d.cycles_per_sample},
                       {"e_max_j", d.e_max_j},
                       {"p_max_w", d.p_max_w},
                       {"f_max_hz", d.f_max_hz}});
  }
  json scenario = {{"area_x_m", s.area_x_m},
                   {"area_y_m", s.area_y_m},
                   {"pa_height_m", s.pa_height_m},
                   {"num_pas", s.num_pas},
                   {"upload_bits", s.upload_bits},
                   {"kappa_eff", s.kappa_eff},
                   {"min_spacing_m", s.min_spacing_m},
                   {"radio", radio},
                   {"devices", devices}};
  json out = {{"seed", cfg.seed}, {"scenario", scenario}};
  return out.dump(2) + "\n";
}

}  // namespace passfl
