// Acceptance suite. Usage: passfl_acceptance [criterion ...]; runs all
// twelve when no numbers are given. Prints one PASS/FAIL line per criterion
// and exits nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "passfl/bound.hpp"
#include "passfl/channel.hpp"
#include "passfl/driver.hpp"
#include "passfl/flsim.hpp"
#include "passfl/placement.hpp"
#include "passfl/random.hpp"
#include "passfl/scenario.hpp"
#include "passfl/solvers.hpp"

namespace fs = std::filesystem;
using namespace passfl;
using cd = std::complex<double>;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random sorted positions on [0, D_x] honouring the minimum spacing.
std::vector<double> random_positions(const Scenario& s, int n, Rng& rng) {
  const double slack = s.area_x_m - (n - 1) * s.min_spacing_m;
  std::vector<double> u(static_cast<std::size_t>(n));
  for (auto& v : u) v = rng.uniform(0.0, slack);
  std::sort(u.begin(), u.end());
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] += i * s.min_spacing_m;
  return u;
}

// |g^T h|^2 / eta from the free-space and guided channel vectors, in
// extended precision.
double gain_oracle(const DeviceProfile& dev, const std::vector<double>& x, const Scenario& s) {
  using ld = long double;
  using cl = std::complex<ld>;
  const ld pi = std::numbers::pi_v<ld>;
  const ld lambda = 299792458.0L / static_cast<ld>(s.radio.carrier_freq_hz());
  const ld lambda_g = lambda / static_cast<ld>(s.radio.n_eff());
  const ld eta = lambda * lambda / (16.0L * pi * pi);
  cl H = 0.0L;
  for (double xn : x) {
    const ld dx = static_cast<ld>(dev.x_m) - xn;
    const ld dist = std::sqrt(dx * dx + static_cast<ld>(dev.y_m) * dev.y_m +
                              static_cast<ld>(s.pa_height_m) * s.pa_height_m);
    const cl h = std::sqrt(eta) * std::exp(cl(0.0L, -2.0L * pi * dist / lambda)) / dist;
    const cl g = std::exp(cl(0.0L, -2.0L * pi * std::abs(static_cast<ld>(xn)) / lambda_g));
    H += g * h;
  }
  return static_cast<double>(std::norm(H) / eta);
}

double bits_in(double tau, double e, double gain, const Scenario& s) {
  const double snr = e / tau * s.radio.eta_m2() * gain / (s.num_pas * s.radio.noise_power_w());
  return tau * s.radio.bandwidth_hz() * std::log2(1.0 + snr);
}

Verdict criterion1() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    ScenarioTemplate t;
    t.num_pas = 1 + static_cast<int>(rng.below(8));
    const int K = 1 + static_cast<int>(rng.below(12));
    const Scenario s = generate_scenario(rng.next_u64(), K, t);
    const auto x = random_positions(s, s.num_pas, rng);
    for (const auto& dev : s.devices) {
      const double oracle = gain_oracle(dev, x, s);
      const double g = gain(dev, x, s);
      worst = std::max(worst, std::abs(g - oracle) / oracle);
    }
  }
  return {worst <= 1e-10, fmt("max relative error %.3e over 1000 pairs", worst)};
}

Verdict criterion2() {
  ScenarioTemplate t;
  t.num_pas = 1;
  DeviceProfile overhead;
  overhead.x_m = 7.0;
  overhead.data_size_samples = 100;
  DeviceProfile offset = overhead;
  offset.x_m = 11.0;  // 4 m along the waveguide, 3 m below it
  const Scenario s = make_scenario(t, {overhead, offset});
  const double g1 = gain(s.devices[0], std::vector<double>{7.0}, s);
  const double g2 = gain(s.devices[1], std::vector<double>{7.0}, s);
  const double e1 = std::abs(g1 - 1.0 / 9.0), e2 = std::abs(g2 - 0.04);
  return {e1 <= 1e-12 && e2 <= 1e-12,
          fmt("overhead G = %.15f (err %.1e), 3-4-5 G = %.15f (err %.1e)", g1, e1, g2, e2)};
}

Verdict criterion3() {
  Rng rng(303);
  ScenarioTemplate t;
  double worst_residual = 0.0, worst_match = 0.0;
  int below = 0;
  for (int i = 0; i < 100; ++i) {
    const Scenario s = generate_scenario(rng.next_u64(), 1, t);
    const auto x = random_positions(s, s.num_pas, rng);
    const double G = gain(s.devices[0], x, s);
    const double e = rng.uniform(1e-4, 0.05);
    const double root = upload_time(1.0, e, G, s);

    const double residual = bits_in(root, e, G, s) - s.upload_bits;
    if (residual < 0.0) ++below;
    worst_residual = std::max(worst_residual, std::abs(residual) / s.upload_bits);

    // log-spaced scan for the bracketing cell, then a fine linear scan
    double lo = 1e-9, hi = 1e3;
    for (int j = 0; j <= 1000; ++j) {
      const double tau = 1e-9 * std::pow(1e12, j / 1000.0);
      if (bits_in(tau, e, G, s) >= s.upload_bits) {
        hi = tau;
        break;
      }
      lo = tau;
    }
    double scan = hi;
    for (int j = 0; j <= 1000000; ++j) {
      const double tau = lo + (hi - lo) * j / 1e6;
      if (bits_in(tau, e, G, s) >= s.upload_bits) {
        scan = tau;
        break;
      }
    }
    worst_match = std::max(worst_match, std::abs(root - scan) / scan);
  }
  return {worst_residual <= 1e-9 && below == 0 && worst_match <= 1e-6,
          fmt("max residual %.3e D_b (%d below target), max root/scan mismatch %.3e",
              worst_residual, below, worst_match)};
}

Verdict criterion4() {
  Rng rng(404);
  ScenarioTemplate t;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int K = 1 + static_cast<int>(rng.below(10));
    const Scenario s = generate_scenario(rng.next_u64(), K, t);
    const double lambda = rng.uniform(0.3, 1.0 - 1e-6);
    std::vector<double> e(K), g(K);
    TimeAllocation times;
    times.tau_cm.resize(K);
    times.tau_cp = rng.uniform(0.05, 0.5);
    for (int k = 0; k < K; ++k) {
      g[k] = gain(s.devices[k], random_positions(s, s.num_pas, rng), s);
      e[k] = rng.uniform(1e-4, 0.05);
      times.tau_cm[k] = rng.uniform(1e-3, 1.0);
    }
    const ScheduleDecision d = solve_schedule(s, times, e, lambda, g);
    const double closed = scalarized_objective(s, d.relaxed, times, lambda);

    std::vector<double> ub(K);
    for (int k = 0; k < K; ++k) {
      const auto& dev = s.devices[k];
      const double w = dev.cycles_per_sample * static_cast<double>(dev.data_size_samples);
      const double rate_cap = bits_in(times.tau_cm[k], e[k], g[k], s) / s.upload_bits;
      const double energy_cap = (dev.e_max_j - e[k]) * times.tau_cp * times.tau_cp /
                                (s.kappa_eff * w * w * w);
      const double freq_cap = dev.f_max_hz * times.tau_cp / w;
      ub[k] = std::max(0.0, std::min({1.0, rate_cap, energy_cap, freq_cap}));
    }
    double best = INFINITY;
    for (unsigned v = 0; v < (1u << K); ++v) {
      double obj = lambda * times.tau_cp;
      for (int k = 0; k < K; ++k) {
        if (!(v >> k & 1u)) continue;
        const double size = static_cast<double>(s.devices[k].data_size_samples);
        obj += ub[k] * (lambda * (times.tau_cm[k] + size) - size);
      }
      best = std::min(best, obj);
    }
    worst = std::max(worst, std::abs(closed - best));
  }
  return {worst <= 1e-9, fmt("max objective gap %.3e over 100 instances", worst)};
}

Verdict criterion5() {
  Rng rng(505);
  ScenarioTemplate t;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int K = 1 + static_cast<int>(rng.below(12));
    const Scenario s = generate_scenario(rng.next_u64(), K, t);
    std::vector<double> mask(K), g(K);
    TimeAllocation times;
    times.tau_cm.resize(K);
    times.tau_cp = rng.uniform(0.1, 0.5);
    for (int k = 0; k < K; ++k) {
      mask[k] = rng.uniform() < 0.7 ? 1.0 : 0.0;
      g[k] = gain(s.devices[k], random_positions(s, s.num_pas, rng), s);
      times.tau_cm[k] = mask[k] > 0.0 ? rng.uniform(1e-3, 0.2) : 0.0;
    }
    const auto theta = uniform_theta(mask);
    const EnergyDecision d = solve_energies(s, mask, times, theta, g);

    for (int k = 0; k < K; ++k) {
      if (mask[k] <= 0.0) continue;
      const auto& dev = s.devices[k];
      const double w = dev.cycles_per_sample * static_cast<double>(dev.data_size_samples);
      const double ub = std::min(dev.p_max_w * times.tau_cm[k],
                                 dev.e_max_j - s.kappa_eff * w * w * w /
                                                   (times.tau_cp * times.tau_cp));
      if (ub <= 0.0) continue;
      double best_e = 0.0, best_val = -INFINITY;
      for (int j = 0; j <= 10000; ++j) {
        const double e = ub * j / 1e4;
        const double val = theta[k] * bits_in(times.tau_cm[k], e, g[k], s) / times.tau_cm[k];
        if (val > best_val) best_val = val, best_e = e;
      }
      const double got = theta[k] * bits_in(times.tau_cm[k], d.e_cm[k], g[k], s) / times.tau_cm[k];
      worst = std::max(worst, std::abs(got - best_val) / best_val);
      worst = std::max(worst, std::abs(d.e_cm[k] - best_e) / best_e);
    }
  }
  return {worst <= 1e-8, fmt("max relative deviation from grid optimum %.3e", worst)};
}

Verdict criterion6() {
  Rng rng(606);
  int runs = 0, non_monotone = 0;
  ScenarioTemplate t;
  for (int i = 0; i < 50; ++i) {
    t.num_pas = 1 + static_cast<int>(rng.below(6));
    const int K = 1 + static_cast<int>(rng.below(12));
    const Scenario s = generate_scenario(rng.next_u64(), K, t);
    const PlacementOptimizer opt(s, 2001);
    std::vector<double> w(K);
    for (auto& v : w) v = rng.uniform();
    const Placement start(random_positions(s, s.num_pas, rng), s);
    std::vector<double> own(K, 0.0);
    own[0] = 1.0;
    for (const auto& trace : {opt.gauss_seidel(start, w).trace,
                              opt.gauss_seidel(opt.uniform(), w).trace,
                              opt.gauss_seidel(start, own).trace}) {
      ++runs;
      for (std::size_t j = 1; j < trace.size(); ++j)
        if (trace[j] < trace[j - 1]) {
          ++non_monotone;
          break;
        }
    }
  }

  int global = 0, stable = 0, neither = 0;
  t.num_pas = 2;
  for (int seed = 0; seed < 50; ++seed) {
    const Scenario s = generate_scenario(7000 + seed, 2, t);
    const int L = 51;
    const PlacementOptimizer opt(s, L);
    Rng wr = Rng::derive(seed, 9);
    const std::vector<double> w = {wr.uniform(0.1, 1.0), wr.uniform(0.1, 1.0)};
    const auto res = opt.gauss_seidel(opt.uniform(), w);
    const double final_val = surrogate(res.placement.positions(), w, s);

    const auto& grid = opt.grid();
    double best = -INFINITY;
    for (int a = 0; a < L; ++a)
      for (int b = a + 1; b < L; ++b)
        if (grid.at(b) - grid.at(a) >= s.min_spacing_m)
          best = std::max(best, surrogate(std::vector<double>{grid.at(a), grid.at(b)}, w, s));
    if (final_val >= best - 1e-9) {
      ++global;
      continue;
    }
    bool is_stable = true;
    for (int n = 0; n < 2 && is_stable; ++n) {
      auto x = res.placement.positions();
      for (int l = 0; l < L; ++l) {
        auto y = x;
        y[static_cast<std::size_t>(n)] = grid.at(l);
        if (std::abs(y[0] - y[1]) < s.min_spacing_m) continue;
        if (surrogate(y, w, s) > final_val + 1e-12) {
          is_stable = false;
          break;
        }
      }
    }
    is_stable ? ++stable : ++neither;
  }
  return {non_monotone == 0 && neither == 0,
          fmt("%d/%d traces nondecreasing; N=2 exhaustive: %d global, %d 1-D stable, %d neither",
              runs - non_monotone, runs, global, stable, neither)};
}

struct FlRun {
  bool dominated = true;  // gap under envelope every round
  double worst_drift_ratio = 0.0;
};

FlRun fl_run(std::uint64_t seed, int theta, bool partial) {
  TaskSpec spec;
  const SyntheticTask task = make_task(spec, 12, seed);
  const int T = 40;
  Rng rng = Rng::derive(seed, 77);
  std::vector<std::vector<double>> masks;
  for (int r = 0; r < T; ++r) {
    std::vector<double> m(12, 1.0);
    if (partial) {
      for (auto& v : m) v = rng.uniform() < 0.6 ? 1.0 : 0.0;
      if (std::all_of(m.begin(), m.end(), [](double v) { return v == 0.0; })) m[0] = 1.0;
    }
    masks.push_back(m);
  }
  const std::vector<double> latency(T, 0.0);
  LocalParams lp;
  lp.local_steps = theta;
  lp.learn_rate = 1.0 / task.lipschitz();
  const TrainingLog log = train(task, masks, latency, lp, seed);

  std::vector<double> scheduled;
  for (int r = 1; r <= T; ++r) scheduled.push_back(log.rounds[r].scheduled_data);
  const LearnParams p = log.learn_params();
  const BoundTrace env = gap_envelope(log.rounds[0].gap, scheduled, p);
  FlRun out;
  for (int r = 1; r <= T; ++r) {
    if (log.rounds[r].gap > env.envelope[r]) out.dominated = false;
    const double bound = theta * theta * p.grad_bound * p.grad_bound /
                         (p.total_data * log.rounds[r].scheduled_data);
    out.worst_drift_ratio = std::max(out.worst_drift_ratio, log.rounds[r].drift_sq / bound);
  }
  return out;
}

std::vector<std::pair<std::string, FlRun>> fl_runs() {
  std::vector<std::pair<std::string, FlRun>> runs;
  for (int theta : {1, 5})
    for (bool partial : {false, true})
      for (std::uint64_t seed = 1; seed <= 20; ++seed)
        runs.emplace_back(fmt("theta=%d %s seed=%d", theta, partial ? "partial" : "full",
                              static_cast<int>(seed)),
                          fl_run(seed, theta, partial));
  return runs;
}

Verdict criterion7() {
  const auto runs = fl_runs();
  int ok = 0;
  for (const auto& [name, r] : runs) ok += r.dominated;
  return {ok == static_cast<int>(runs.size()),
          fmt("gap under envelope in %d/%zu runs (20 seeds x theta {1,5} x full/partial)", ok,
              runs.size())};
}

Verdict criterion8() {
  const auto runs = fl_runs();
  int ok = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, r] : runs) {
    ok += r.worst_drift_ratio <= 1.0;
    if (r.worst_drift_ratio > worst) worst = r.worst_drift_ratio, worst_name = name;
  }
  return {ok == static_cast<int>(runs.size()),
          fmt("drift within bound in %d/%zu runs; worst ratio %.3g (%s)", ok, runs.size(), worst,
              worst_name.c_str())};
}

bool strictly_monotone(const std::vector<ParetoPoint>& front) {
  for (std::size_t i = 1; i < front.size(); ++i)
    if (!(front[i].tau_t > front[i - 1].tau_t && front[i].f_learn < front[i - 1].f_learn))
      return false;
  return true;
}

// Compares latency where both fronts reach the same learning penalty.
struct MatchedFronts {
  int matched = 0;
  int no_worse = 0;
};

MatchedFronts compare_matched(const std::vector<ParetoPoint>& hi, const std::vector<ParetoPoint>& lo,
                              double total_data) {
  MatchedFronts m;
  for (const auto& p : lo) {
    if (p.f_learn >= total_data) continue;  // empty schedule: zero latency on both
    for (const auto& q : hi) {
      if (q.f_learn != p.f_learn) continue;
      ++m.matched;
      m.no_worse += q.tau_t <= p.tau_t * (1.0 + 1e-12);
    }
  }
  return m;
}

Verdict criterion9() {
  const auto grid = default_lambda_grid();
  int monotone = 0, improved = 0, fronts = 0, matched = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioTemplate lo_t, hi_t;
    lo_t.p_max_w = 0.05;
    hi_t.p_max_w = 0.5;
    const Scenario base = generate_scenario(seed, 12, ScenarioTemplate{});
    const auto base_front = retained_front(pareto_sweep(base, grid));
    const auto lo = retained_front(pareto_sweep(generate_scenario(seed, 12, lo_t), grid));
    const auto hi = retained_front(pareto_sweep(generate_scenario(seed, 12, hi_t), grid));
    for (const auto* f : {&base_front, &lo, &hi}) {
      ++fronts;
      monotone += strictly_monotone(*f);
    }
    const auto m = compare_matched(hi, lo, static_cast<double>(base.total_data()));
    matched += m.matched;
    improved += m.matched > 0 && m.no_worse == m.matched;
  }
  return {monotone == fronts && improved >= 18,
          fmt("%d/%d retained fronts strictly monotone; P=0.5 W no worse than P=0.05 W at every "
              "matched F_learn in %d/20 seeds (%d matched points)",
              monotone, fronts, improved, matched)};
}

Verdict criterion10() {
  int vs_uniform = 0, vs_conventional = 0, audited = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Scenario s = generate_scenario(seed, 12, ScenarioTemplate{});
    const RoundOutcome fed = optimize_round(s, 0.5);
    const RoundOutcome uni = baseline_round(s, 0.5, Pipeline::kPassUniform);
    const RoundOutcome conv = baseline_round(s, 0.5, Pipeline::kConventional);
    audited += audit(fed, s).empty() && audit(uni, s).empty() && audit(conv, s).empty();
    vs_uniform += fed.tau_t <= uni.tau_t;
    vs_conventional += fed.tau_t <= conv.tau_t;
  }
  return {vs_uniform == 100 && vs_conventional >= 95 && audited == 100,
          fmt("FedPASS <= PASS-Uniform in %d/100, <= Conventional in %d/100, %d/100 audited clean",
              vs_uniform, vs_conventional, audited)};
}

Verdict criterion11() {
  const std::vector<int> counts = {1, 2, 4, 8, 16};
  std::vector<double> mean(counts.size(), 0.0);
  int clean = 0, total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    ScenarioTemplate t;
    t.num_pas = counts[i];
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Scenario s = generate_scenario(seed, 12, t);
      const RoundOutcome r = optimize_round(s, 0.5);
      ++total;
      clean += audit(r, s).empty();
      mean[i] += r.tau_t / 20.0;
    }
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < mean.size(); ++i) nonincreasing &= mean[i] <= mean[i - 1];
  return {nonincreasing && clean == total,
          fmt("mean tau_t over N = 1,2,4,8,16: %.4f %.4f %.4f %.4f %.4f s; %d/%d audited clean",
              mean[0], mean[1], mean[2], mean[3], mean[4], clean, total)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict criterion12() {
  const fs::path root = fs::temp_directory_path() / "passfl_acceptance_12";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"seed": 42, "training": {"rounds": 8, "task": "softmax"}})";
  auto run = [&](const std::string& cmd, const std::string& out) {
    const std::string line = std::string("\"") + PASSFL_CLI_PATH + "\" " + cmd + " --config \"" +
                             cfg.string() + "\" --seed 7 --out \"" + (root / out).string() +
                             "\" > /dev/null 2>&1";
    return std::system(line.c_str());
  };
  int failures = 0;
  for (const char* out : {"opt_a", "opt_b"}) failures += run("optimize", out) != 0;
  for (const char* out : {"train_a", "train_b"}) failures += run("train", out) != 0;
  int identical = 0, compared = 0;
  for (const auto& [a, b, file] :
       std::vector<std::tuple<std::string, std::string, std::string>>{
           {"opt_a", "opt_b", "round.json"},
           {"opt_a", "opt_b", "positions.csv"},
           {"train_a", "train_b", "train.csv"},
           {"train_a", "train_b", "bound.csv"}}) {
    ++compared;
    const std::string x = slurp(root / a / file), y = slurp(root / b / file);
    identical += !x.empty() && x == y;
  }
  return {failures == 0 && identical == compared,
          fmt("%d/%d output files byte-identical across repeated runs, %d failed invocations",
              identical, compared, failures)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime limit
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "channel oracle equivalence", 5.0, criterion1},
      {2, "gain geometry spot checks", 0.0, criterion2},
      {3, "delay sub-problem tightness and grid oracle", 30.0, criterion3},
      {4, "scheduling LP exactness", 0.0, criterion4},
      {5, "energy sub-problem exactness", 0.0, criterion5},
      {6, "placement monotonicity and local optimality", 0.0, criterion6},
      {7, "gap envelope dominance on quadratic FL", 120.0, criterion7},
      {8, "local drift bound", 0.0, criterion8},
      {9, "Pareto structure and power shift", 0.0, criterion9},
      {10, "baseline dominance", 0.0, criterion10},
      {11, "antenna-count saturation", 0.0, criterion11},
      {12, "end-to-end determinism", 0.0, criterion12},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      v.pass = false;
      v.detail += fmt("; runtime %.2f s exceeds %.0f s", secs, c.budget_s);
    }
    std::printf("%s criterion %2d  %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
