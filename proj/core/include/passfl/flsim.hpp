#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "passfl/driver.hpp"
#include "passfl/random.hpp"
#include "passfl/scenario.hpp"

namespace passfl {

enum class TaskKind {
  kQuadratic,  // least squares; every smoothness and PL constant is exact
  kSoftmax,    // ridge-regularized multinomial logistic regression
};

std::string_view to_string(TaskKind k);
/// Accepts quadratic | softmax.
TaskKind parse_task_kind(std::string_view name);

struct Dataset {
  Eigen::MatrixXd features;  // one row per sample
  Eigen::VectorXd targets;   // regression target, or class index for softmax
  std::vector<int> labels;   // classes used for the non-IID partition
  int num_classes = 1;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
};

struct TaskSpec {
  TaskKind kind = TaskKind::kQuadratic;
  int feature_dim = 5;
  int num_classes = 4;
  int train_samples = 600;
  int test_samples = 200;
  double noise_std = 0.1;
  /// Feature scales decay geometrically from 1 to 1 / condition_span, so
  /// the quadratic Hessian has condition number near condition_span^2.
  double condition_span = 10.0;
  double class_separation = 2.0;
  double ridge = 1e-2;  // softmax only
  double alpha = 0.35;  // Dirichlet concentration
};

void validate(const TaskSpec& spec);

/// Training data split over devices plus the constants of the global loss
///   F(w) = (1 / |D|) sum_i f_i(w),
/// with f_i = (x_i^T w - y_i)^2 / 2 for quadratic tasks and cross-entropy
/// plus (ridge / 2) ||w||^2 for softmax tasks.
class SyntheticTask {
 public:
  SyntheticTask(TaskKind kind, Dataset train, Dataset test,
                std::vector<std::vector<std::size_t>> shards, double ridge = 1e-2);

  TaskKind kind() const { return kind_; }
  const Dataset& train() const { return train_; }
  const Dataset& test() const { return test_; }
  const std::vector<std::vector<std::size_t>>& shards() const { return shards_; }
  int num_devices() const { return static_cast<int>(shards_.size()); }
  std::vector<std::int64_t> shard_sizes() const;
  int model_size() const;
  double ridge() const { return ridge_; }

  /// Quadratic: largest Hessian eigenvalue. Softmax: power-iteration
  /// estimate of max eig(X^T X / n) / 2 + ridge.
  double lipschitz() const { return lipschitz_; }
  /// Quadratic: smallest Hessian eigenvalue. Softmax: the ridge.
  double pl_delta() const { return pl_delta_; }
  /// Exact minimizer (quadratic) or a long centralized descent run (softmax).
  const Eigen::VectorXd& optimum() const { return optimum_; }
  double optimal_loss() const { return optimal_loss_; }

  double loss(const Eigen::VectorXd& w) const;
  double loss(const Eigen::VectorXd& w, std::span<const std::size_t> idx) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w, std::span<const std::size_t> idx) const;
  Eigen::VectorXd sample_gradient(const Eigen::VectorXd& w, std::size_t i) const;
  /// max_i ||grad f_i(w)|| over the training set.
  double max_sample_gradient_norm(const Eigen::VectorXd& w) const;
  /// Test mean squared error (quadratic) or test accuracy (softmax).
  double test_metric(const Eigen::VectorXd& w) const;

 private:
  double sample_loss(const Eigen::VectorXd& w, std::size_t i) const;

  TaskKind kind_;
  Dataset train_, test_;
  std::vector<std::vector<std::size_t>> shards_;
  double ridge_;
  double lipschitz_ = 0.0;
  double pl_delta_ = 0.0;
  Eigen::VectorXd optimum_;
  double optimal_loss_ = 0.0;
};

struct TaskData {
  Dataset train;
  Dataset test;
};

/// Train and test samples from one Gaussian mixture with a component per
/// class. Deterministic in (spec, seed).
TaskData make_datasets(const TaskSpec& spec, std::uint64_t seed);

/// Draws train and test sets and splits the training set over devices.
SyntheticTask make_task(const TaskSpec& spec, int num_devices, std::uint64_t seed);

/// Numeric CSV, one sample per row, last column the label. Softmax labels
/// must be non-negative integers; quadratic targets are binned into
/// `bins` quantile classes for partitioning. A non-numeric first row is
/// treated as a header.
Dataset load_csv_dataset(const std::filesystem::path& path, TaskKind kind, int bins = 4);

/// Per class, proportions over the K devices from Dirichlet(alpha 1_K).
/// Empty shards take one random sample from the largest shard. Throws
/// ConfigError when K exceeds the sample count or alpha <= 0.
std::vector<std::vector<std::size_t>> partition_dirichlet(std::span<const int> labels,
                                                          int num_classes, int num_devices,
                                                          double alpha, std::uint64_t seed);

struct LocalParams {
  int local_steps = 5;
  double learn_rate = 0.1;
  int batch_size = 32;  // softmax mini-batches; quadratic steps use the full shard
};

/// Runs local_steps steps from `model` on device k's shard. Optional
/// outputs receive each visited iterate (before its step).
Eigen::VectorXd local_update(const SyntheticTask& task, const Eigen::VectorXd& model, int device,
                             const LocalParams& params, Rng& rng,
                             std::vector<Eigen::VectorXd>* iterates = nullptr);

/// sum_k s_k |D_k| w_k / D(s); returns `previous` when nothing is scheduled.
Eigen::VectorXd aggregate(std::span<const Eigen::VectorXd> models, std::span<const double> mask,
                          std::span<const double> data_sizes, const Eigen::VectorXd& previous);

struct RoundRecord {
  int round = 0;
  double loss = 0.0;
  double gap = 0.0;
  double metric = 0.0;
  double tau_t = 0.0;
  double cum_latency = 0.0;
  std::vector<int> mask;
  int scheduled = 0;
  double scheduled_data = 0.0;
  double aggregation_error = 0.0;  // ||e_{t-1}||
  double drift_sq = 0.0;           // ||d_{t-1}||^2
};

struct TrainingLog {
  std::vector<RoundRecord> rounds;  // rounds[0] is the initial model
  double eps_hat = 0.0;             // largest sample-gradient norm seen
  double lipschitz = 0.0;
  double pl_delta = 0.0;
  int local_steps = 0;
  double total_data = 0.0;

  /// Bound constants with the empirical gradient bound.
  LearnParams learn_params() const;
};

/// Federated training with explicit per-round masks and latencies.
/// Local updates start from the zero model.
TrainingLog train(const SyntheticTask& task, std::span<const std::vector<double>> masks,
                  std::span<const double> latencies, const LocalParams& params,
                  std::uint64_t seed);

struct FederatedSettings {
  int local_steps = 5;
  int batch_size = 32;
  double lambda = 0.5;
  Pipeline pipeline = Pipeline::kFedPass;
  OptimizerSettings optimizer;
  std::uint64_t seed = 0;
};

/// Device data sizes are taken from the task's shards; the static scenario
/// gives the same schedule every round, so it is solved once. Learning rate
/// 1 / lipschitz().
TrainingLog run_federated(const Scenario& scenario, const SyntheticTask& task, int rounds,
                          const FederatedSettings& settings);

/// Scenario with data sizes replaced by the task's shard sizes.
Scenario with_task_data(const Scenario& scenario, const SyntheticTask& task);

}  // namespace passfl
