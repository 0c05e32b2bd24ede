#include "passfl/flsim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "passfl/bound.hpp"
#include "passfl/errors.hpp"
#include "passfl/parallel.hpp"

namespace passfl {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Mixture {
  MatrixXd means;  // classes x dim
  VectorXd scales;
  VectorXd weights;
  VectorXd offsets;
};

Mixture draw_mixture(const TaskSpec& spec, Rng& rng) {
  Mixture m;
  const int d = spec.feature_dim, c = spec.num_classes;
  m.means.resize(c, d);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < d; ++j) m.means(i, j) = spec.class_separation * rng.normal();
  m.scales.resize(d);
  for (int j = 0; j < d; ++j)
    m.scales(j) = d == 1 ? 1.0 : std::pow(spec.condition_span, -static_cast<double>(j) / (d - 1));
  m.weights.resize(d);
  for (int j = 0; j < d; ++j) m.weights(j) = rng.normal();
  m.offsets.resize(c);
  for (int i = 0; i < c; ++i) m.offsets(i) = rng.normal();
  return m;
}

Dataset draw_samples(const TaskSpec& spec, const Mixture& m, int n, Rng& rng) {
  Dataset ds;
  ds.num_classes = spec.num_classes;
  ds.features.resize(n, spec.feature_dim);
  ds.targets.resize(n);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.num_classes)));
    ds.labels[static_cast<std::size_t>(i)] = label;
    for (int j = 0; j < spec.feature_dim; ++j)
      ds.features(i, j) = (rng.normal() + m.means(label, j)) * m.scales(j);
    if (spec.kind == TaskKind::kQuadratic) {
      ds.targets(i) = ds.features.row(i).dot(m.weights) + m.offsets(label) +
                      spec.noise_std * rng.normal();
    } else {
      ds.targets(i) = static_cast<double>(label);
    }
  }
  return ds;
}

void check_shards(const std::vector<std::vector<std::size_t>>& shards, std::size_t n) {
  std::vector<char> seen(n, 0);
  std::size_t count = 0;
  for (const auto& shard : shards) {
    if (shard.empty()) throw DomainError("partition: empty shard");
    for (std::size_t i : shard) {
      if (i >= n || seen[i]) throw DomainError("partition: shards overlap or exceed the dataset");
      seen[i] = 1;
      ++count;
    }
  }
  if (count != n) throw DomainError("partition: shards do not cover the dataset");
}

VectorXd softmax_row(const Eigen::RowVectorXd& logits) {
  const double top = logits.maxCoeff();
  VectorXd p = (logits.array() - top).exp().transpose();
  return p / p.sum();
}

}  // namespace

std::string_view to_string(TaskKind k) {
  return k == TaskKind::kQuadratic ? "quadratic" : "softmax";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "quadratic") return TaskKind::kQuadratic;
  if (name == "softmax") return TaskKind::kSoftmax;
  throw ConfigError("unknown task kind '" + std::string(name) + "'");
}

void validate(const TaskSpec& spec) {
  if (spec.feature_dim < 1) throw ConfigError("feature_dim must be >= 1");
  if (spec.num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (spec.kind == TaskKind::kSoftmax && spec.num_classes < 2)
    throw ConfigError("softmax tasks need at least two classes");
  if (spec.train_samples < 1) throw ConfigError("train_samples must be >= 1");
  if (spec.test_samples < 1) throw ConfigError("test_samples must be >= 1");
  if (!(spec.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(spec.condition_span >= 1.0)) throw ConfigError("condition_span must be >= 1");
  if (!(spec.class_separation >= 0.0)) throw ConfigError("class_separation must be >= 0");
  if (!(spec.ridge > 0.0)) throw ConfigError("ridge must be > 0");
  if (!(spec.alpha > 0.0)) throw ConfigError("alpha must be > 0");
}

SyntheticTask::SyntheticTask(TaskKind kind, Dataset train, Dataset test,
                             std::vector<std::vector<std::size_t>> shards, double ridge)
    : kind_(kind),
      train_(std::move(train)),
      test_(std::move(test)),
      shards_(std::move(shards)),
      ridge_(ridge) {
  const auto n = train_.size();
  if (n == 0) throw DomainError("task: empty training set");
  if (test_.features.cols() != train_.features.cols())
    throw DomainError("task: train and test feature counts differ");
  check_shards(shards_, n);
  const MatrixXd& x = train_.features;
  const MatrixXd gram = x.transpose() * x / static_cast<double>(n);

  if (kind_ == TaskKind::kQuadratic) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    lipschitz_ = eig.eigenvalues().maxCoeff();
    pl_delta_ = eig.eigenvalues().minCoeff();
    if (!(pl_delta_ > 1e-12 * lipschitz_)) throw DomainError("task: rank-deficient design");
    optimum_ = gram.ldlt().solve(x.transpose() * train_.targets / static_cast<double>(n));
  } else {
    if (!(ridge_ > 0.0)) throw DomainError("task: softmax ridge must be > 0");
    for (int i = 0; i < train_.targets.size(); ++i) {
      const double y = train_.targets(i);
      if (y < 0.0 || y >= train_.num_classes || y != std::floor(y))
        throw DomainError("task: softmax label out of range");
    }
    // power iteration on the Gram matrix
    VectorXd v = VectorXd::Ones(gram.rows()).normalized();
    double top = 0.0;
    for (int it = 0; it < 500; ++it) {
      const VectorXd next = gram * v;
      const double norm = next.norm();
      if (norm == 0.0) break;
      const VectorXd unit = next / norm;
      const bool settled = std::abs(norm - top) <= 1e-14 * norm;
      top = norm;
      v = unit;
      if (settled) break;
    }
    lipschitz_ = 0.5 * top + ridge_;
    pl_delta_ = ridge_;
    optimum_ = VectorXd::Zero(model_size());
    for (int it = 0; it < 20000; ++it) {
      const VectorXd g = gradient(optimum_);
      if (g.norm() < 1e-12) break;
      optimum_ -= g / lipschitz_;
    }
  }
  optimal_loss_ = loss(optimum_);
}

std::vector<std::int64_t> SyntheticTask::shard_sizes() const {
  std::vector<std::int64_t> sizes(shards_.size());
  for (std::size_t k = 0; k < sizes.size(); ++k)
    sizes[k] = static_cast<std::int64_t>(shards_[k].size());
  return sizes;
}

int SyntheticTask::model_size() const {
  const auto d = static_cast<int>(train_.features.cols());
  return kind_ == TaskKind::kQuadratic ? d : d * train_.num_classes;
}

double SyntheticTask::sample_loss(const VectorXd& w, std::size_t i) const {
  const auto row = train_.features.row(static_cast<Eigen::Index>(i));
  if (kind_ == TaskKind::kQuadratic) {
    const double r = row.dot(w) - train_.targets(static_cast<Eigen::Index>(i));
    return 0.5 * r * r;
  }
  const auto d = train_.features.cols();
  const Eigen::Map<const MatrixXd> W(w.data(), d, train_.num_classes);
  const Eigen::RowVectorXd logits = row * W;
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  const auto y = static_cast<Eigen::Index>(train_.targets(static_cast<Eigen::Index>(i)));
  return lse - logits(y) + 0.5 * ridge_ * w.squaredNorm();
}

double SyntheticTask::loss(const VectorXd& w) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < train_.size(); ++i) sum += sample_loss(w, i);
  return sum / static_cast<double>(train_.size());
}

double SyntheticTask::loss(const VectorXd& w, std::span<const std::size_t> idx) const {
  double sum = 0.0;
  for (std::size_t i : idx) sum += sample_loss(w, i);
  return sum / static_cast<double>(idx.size());
}

VectorXd SyntheticTask::sample_gradient(const VectorXd& w, std::size_t i) const {
  const auto row = train_.features.row(static_cast<Eigen::Index>(i));
  if (kind_ == TaskKind::kQuadratic) {
    const double r = row.dot(w) - train_.targets(static_cast<Eigen::Index>(i));
    return r * row.transpose();
  }
  const auto d = train_.features.cols();
  const Eigen::Map<const MatrixXd> W(w.data(), d, train_.num_classes);
  VectorXd p = softmax_row(row * W);
  p(static_cast<Eigen::Index>(train_.targets(static_cast<Eigen::Index>(i)))) -= 1.0;
  MatrixXd g = row.transpose() * p.transpose();
  return Eigen::Map<const VectorXd>(g.data(), g.size()) + ridge_ * w;
}

VectorXd SyntheticTask::gradient(const VectorXd& w, std::span<const std::size_t> idx) const {
  VectorXd g = VectorXd::Zero(model_size());
  if (kind_ == TaskKind::kQuadratic) {
    for (std::size_t i : idx) {
      const auto row = train_.features.row(static_cast<Eigen::Index>(i));
      g += (row.dot(w) - train_.targets(static_cast<Eigen::Index>(i))) * row.transpose();
    }
    return g / static_cast<double>(idx.size());
  }
  const auto d = train_.features.cols();
  const Eigen::Map<const MatrixXd> W(w.data(), d, train_.num_classes);
  MatrixXd G = MatrixXd::Zero(d, train_.num_classes);
  for (std::size_t i : idx) {
    const auto row = train_.features.row(static_cast<Eigen::Index>(i));
    VectorXd p = softmax_row(row * W);
    p(static_cast<Eigen::Index>(train_.targets(static_cast<Eigen::Index>(i)))) -= 1.0;
    G.noalias() += row.transpose() * p.transpose();
  }
  G /= static_cast<double>(idx.size());
  return Eigen::Map<const VectorXd>(G.data(), G.size()) + ridge_ * w;
}

VectorXd SyntheticTask::gradient(const VectorXd& w) const {
  std::vector<std::size_t> all(train_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return gradient(w, all);
}

double SyntheticTask::max_sample_gradient_norm(const VectorXd& w) const {
  double top = 0.0;
  for (std::size_t i = 0; i < train_.size(); ++i) top = std::max(top, sample_gradient(w, i).norm());
  return top;
}

double SyntheticTask::test_metric(const VectorXd& w) const {
  const auto n = test_.features.rows();
  if (n == 0) return 0.0;
  if (kind_ == TaskKind::kQuadratic)
    return (test_.features * w - test_.targets).squaredNorm() / static_cast<double>(n);
  const auto d = test_.features.cols();
  const Eigen::Map<const MatrixXd> W(w.data(), d, test_.num_classes);
  const MatrixXd logits = test_.features * W;
  int hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    if (static_cast<double>(best) == test_.targets(i)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

TaskData make_datasets(const TaskSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng = Rng::derive(seed, 10);
  const Mixture m = draw_mixture(spec, rng);
  TaskData out;
  out.train = draw_samples(spec, m, spec.train_samples, rng);
  out.test = draw_samples(spec, m, spec.test_samples, rng);
  return out;
}

SyntheticTask make_task(const TaskSpec& spec, int num_devices, std::uint64_t seed) {
  TaskData data = make_datasets(spec, seed);
  auto shards = partition_dirichlet(data.train.labels, data.train.num_classes, num_devices,
                                    spec.alpha, seed);
  return SyntheticTask(spec.kind, std::move(data.train), std::move(data.test), std::move(shards),
                       spec.ridge);
}

Dataset load_csv_dataset(const std::filesystem::path& path, TaskKind kind, int bins) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dataset: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw ConfigError("dataset: non-numeric value on line " + std::to_string(line_no));
    }
    if (row.size() < 2) throw ConfigError("dataset: need features and a label on line " +
                                          std::to_string(line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError("dataset: ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("dataset: no samples in " + path.string());

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Dataset ds;
  ds.features.resize(n, d);
  ds.targets.resize(n);
  ds.labels.resize(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) ds.features(i, j) = r[static_cast<std::size_t>(j)];
    ds.targets(i) = r.back();
  }
  if (kind == TaskKind::kSoftmax) {
    int top = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = ds.targets(i);
      if (y < 0.0 || y != std::floor(y))
        throw ConfigError("dataset: label on row " + std::to_string(i + 1) +
                          " is not a non-negative integer");
      ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
      top = std::max(top, static_cast<int>(y));
    }
    ds.num_classes = top + 1;
  } else {
    if (bins < 1) throw ConfigError("dataset: bins must be >= 1");
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ds.targets(static_cast<Eigen::Index>(a)) < ds.targets(static_cast<Eigen::Index>(b));
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
      ds.labels[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(bins) / order.size());
    ds.num_classes = bins;
  }
  return ds;
}

std::vector<std::vector<std::size_t>> partition_dirichlet(std::span<const int> labels,
                                                          int num_classes, int num_devices,
                                                          double alpha, std::uint64_t seed) {
  if (num_devices < 1) throw ConfigError("partition: need at least one device");
  if (static_cast<std::size_t>(num_devices) > labels.size())
    throw ConfigError("partition: more devices than samples");
  if (!(alpha > 0.0)) throw ConfigError("partition: alpha must be > 0");
  const auto K = static_cast<std::size_t>(num_devices);
  Rng rng = Rng::derive(seed, 3);
  std::vector<std::vector<std::size_t>> shards(K);
  const std::vector<double> conc(K, alpha);
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    if (idx.empty()) continue;
    rng.shuffle(idx);
    const std::vector<double> p = rng.dirichlet(conc);
    double cum = 0.0;
    std::size_t begin = 0;
    for (std::size_t k = 0; k < K; ++k) {
      cum += p[k];
      std::size_t end = k + 1 == K ? idx.size()
                                   : std::min(idx.size(), static_cast<std::size_t>(std::floor(
                                                              cum * static_cast<double>(idx.size()))));
      end = std::max(end, begin);
      shards[k].insert(shards[k].end(), idx.begin() + static_cast<std::ptrdiff_t>(begin),
                       idx.begin() + static_cast<std::ptrdiff_t>(end));
      begin = end;
    }
  }
  for (auto& shard : shards) {
    if (!shard.empty()) continue;
    auto largest = std::max_element(shards.begin(), shards.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    const auto pick = static_cast<std::ptrdiff_t>(rng.below(largest->size()));
    shard.push_back(*(largest->begin() + pick));
    largest->erase(largest->begin() + pick);
  }
  for (auto& shard : shards) std::sort(shard.begin(), shard.end());
  return shards;
}

VectorXd local_update(const SyntheticTask& task, const VectorXd& model, int device,
                      const LocalParams& params, Rng& rng, std::vector<VectorXd>* iterates) {
  const auto& shard = task.shards().at(static_cast<std::size_t>(device));
  VectorXd w = model;
  std::vector<std::size_t> batch;
  for (int j = 0; j < params.local_steps; ++j) {
    if (iterates) iterates->push_back(w);
    const bool full = task.kind() == TaskKind::kQuadratic ||
                      shard.size() <= static_cast<std::size_t>(params.batch_size);
    if (full) {
      w -= params.learn_rate * task.gradient(w, shard);
    } else {
      batch.resize(static_cast<std::size_t>(params.batch_size));
      for (auto& b : batch) b = shard[rng.below(shard.size())];
      w -= params.learn_rate * task.gradient(w, batch);
    }
  }
  return w;
}

VectorXd aggregate(std::span<const VectorXd> models, std::span<const double> mask,
                   std::span<const double> data_sizes, const VectorXd& previous) {
  if (models.size() != mask.size() || mask.size() != data_sizes.size())
    throw DomainError("aggregate: length mismatch");
  double total = 0.0;
  VectorXd sum = VectorXd::Zero(previous.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (mask[k] == 0.0) continue;
    sum += mask[k] * data_sizes[k] * models[k];
    total += mask[k] * data_sizes[k];
  }
  if (!(total > 0.0)) return previous;
  return sum / total;
}

LearnParams TrainingLog::learn_params() const {
  LearnParams p;
  p.lipschitz = lipschitz;
  p.pl_delta = pl_delta;
  p.local_steps = local_steps;
  p.grad_bound = eps_hat;
  p.total_data = total_data;
  return p;
}

TrainingLog train(const SyntheticTask& task, std::span<const std::vector<double>> masks,
                  std::span<const double> latencies, const LocalParams& params,
                  std::uint64_t seed) {
  if (masks.size() != latencies.size()) throw DomainError("train: masks and latencies differ");
  if (params.local_steps < 0) throw ConfigError("local_steps must be >= 0");
  if (!(params.learn_rate > 0.0)) throw ConfigError("learn_rate must be > 0");
  if (params.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  const auto K = static_cast<std::size_t>(task.num_devices());
  std::vector<double> sizes(K);
  for (std::size_t k = 0; k < K; ++k) sizes[k] = static_cast<double>(task.shards()[k].size());

  TrainingLog log;
  log.lipschitz = task.lipschitz();
  log.pl_delta = task.pl_delta();
  log.local_steps = params.local_steps;
  log.total_data = static_cast<double>(task.train().size());

  VectorXd w = VectorXd::Zero(task.model_size());
  log.eps_hat = task.max_sample_gradient_norm(w);
  RoundRecord init;
  init.loss = task.loss(w);
  init.gap = init.loss - task.optimal_loss();
  init.metric = task.test_metric(w);
  init.mask.assign(K, 0);
  log.rounds.push_back(init);

  double cum = 0.0;
  for (std::size_t t = 0; t < masks.size(); ++t) {
    const auto& mask = masks[t];
    if (mask.size() != K) throw DomainError("train: mask length differs from device count");
    RoundRecord rec;
    rec.round = static_cast<int>(t + 1);
    rec.mask.resize(K);
    for (std::size_t k = 0; k < K; ++k) rec.mask[k] = mask[k] > 0.0 ? 1 : 0;
    rec.scheduled = static_cast<int>(std::count(rec.mask.begin(), rec.mask.end(), 1));
    for (std::size_t k = 0; k < K; ++k) rec.scheduled_data += mask[k] * sizes[k];

    std::vector<VectorXd> local_at_start(K, VectorXd::Zero(w.size()));
    std::vector<VectorXd> models(K, w);
    std::vector<VectorXd> drift(K, VectorXd::Zero(w.size()));
    std::vector<double> eps(K, 0.0);
    parallel_for(K, [&](std::size_t k) {
      if (mask[k] <= 0.0) return;
      const auto& shard = task.shards()[k];
      local_at_start[k] = task.gradient(w, shard);
      Rng rng = Rng::derive(seed, (static_cast<std::uint64_t>(t) << 20) + k);
      std::vector<VectorXd> iterates;
      models[k] = local_update(task, w, static_cast<int>(k), params, rng, &iterates);
      for (const auto& it : iterates) {
        drift[k] += task.gradient(it, shard) - local_at_start[k];
        eps[k] = std::max(eps[k], task.max_sample_gradient_norm(it));
      }
      if (params.local_steps > 0) drift[k] /= static_cast<double>(params.local_steps);
      eps[k] = std::max(eps[k], task.max_sample_gradient_norm(models[k]));
    });

    if (rec.scheduled_data > 0.0) {
      std::vector<VectorXd> locals;
      std::vector<double> used_mask, used_sizes;
      VectorXd d = VectorXd::Zero(w.size());
      for (std::size_t k = 0; k < K; ++k) {
        if (mask[k] <= 0.0) continue;
        locals.push_back(local_at_start[k]);
        used_mask.push_back(mask[k]);
        used_sizes.push_back(sizes[k]);
        d += mask[k] * sizes[k] * drift[k];
      }
      rec.aggregation_error = aggregation_error(task.gradient(w), locals, used_mask, used_sizes);
      d /= rec.scheduled_data;
      rec.drift_sq = d.squaredNorm();
    }
    for (double e : eps) log.eps_hat = std::max(log.eps_hat, e);

    w = aggregate(models, mask, sizes, w);
    log.eps_hat = std::max(log.eps_hat, task.max_sample_gradient_norm(w));
    cum += latencies[t];
    rec.tau_t = latencies[t];
    rec.cum_latency = cum;
    rec.loss = task.loss(w);
    rec.gap = rec.loss - task.optimal_loss();
    rec.metric = task.test_metric(w);
    log.rounds.push_back(std::move(rec));
  }
  return log;
}

Scenario with_task_data(const Scenario& scenario, const SyntheticTask& task) {
  if (scenario.num_devices() != task.num_devices())
    throw ConfigError("scenario and task disagree on the device count");
  Scenario s = scenario;
  const auto sizes = task.shard_sizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) s.devices[k].data_size_samples = sizes[k];
  return s;
}

TrainingLog run_federated(const Scenario& scenario, const SyntheticTask& task, int rounds,
                          const FederatedSettings& settings) {
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  const Scenario s = with_task_data(scenario, task);
  const RoundOutcome outcome =
      run_pipeline(s, settings.lambda, settings.pipeline, settings.optimizer);
  const std::vector<std::vector<double>> masks(static_cast<std::size_t>(rounds),
                                               outcome.allocation.mask);
  const std::vector<double> latencies(static_cast<std::size_t>(rounds), outcome.tau_t);
  LocalParams local;
  local.local_steps = settings.local_steps;
  local.batch_size = settings.batch_size;
  local.learn_rate = 1.0 / task.lipschitz();
  return train(task, masks, latencies, local, settings.seed);
}

}  // namespace passfl
