#pragma once

// Outer-loop learning of network initializations: Reptile meta-training,
// strain-energy identity pretraining and validation-based checkpoint choice.

#include "metato/network.hpp"
#include "metato/pipeline.hpp"
#include "metato/taskgen.hpp"

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace metato::meta {

enum class OuterRule {
  adam,   // Adam step with -delta as the gradient
  plain,  // theta += outer_lr * delta
};

struct MetaConfig {
  int iterations = 200;
  int batch_size = 5;
  int inner_steps = 10;
  double inner_lr = 1e-4;
  double outer_lr = 1e-6;
  OuterRule outer_rule = OuterRule::adam;
  int validation_interval = 20;
  int validation_steps = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct Checkpoint {
  int iteration = 0;
  nn::NetworkParameters params;
  double validation_loss = std::numeric_limits<double>::quiet_NaN();
};

struct LogRow {
  int iteration = 0;
  double inner_loss = 0.0;  // mean final inner loss over successful adaptations
  double validation_loss = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

struct MetaResult {
  std::vector<Checkpoint> checkpoints;
  std::vector<LogRow> log;
  std::size_t best = 0;  // index into checkpoints with the lowest validation loss
  int failed_adaptations = 0;
  nn::NetworkParameters final_params;
};

struct AdaptResult {
  nn::NetworkParameters params;
  double final_loss = 0.0;  // loss evaluated at the last inner step
};

// `steps` Adam updates from params on one task with a fresh optimizer state.
AdaptResult adapt(const taskgen::Task& task, nn::NetworkParameters params, int steps, double lr,
                  const optim::OptimizerSettings& settings);

// Batch order for `iterations` meta-iterations: the dataset is shuffled once
// per epoch and consumed in consecutive batches.
std::vector<std::vector<std::size_t>> epoch_schedule(std::size_t dataset_size, int iterations, int batch_size,
                                                     std::uint64_t seed);

using CheckpointCallback = std::function<void(const Checkpoint&, const LogRow&)>;

MetaResult reptile_train(std::span<const taskgen::Task> train, std::span<const taskgen::Task> validation,
                         const MetaConfig& cfg, nn::NetworkParameters init, const optim::OptimizerSettings& settings,
                         const CheckpointCallback& on_checkpoint = {});

// Mean loss over tasks after `steps` adaptation updates of a copy of params.
double evaluate_validation(const nn::NetworkParameters& params, std::span<const taskgen::Task> tasks, int steps,
                           double lr, const optim::OptimizerSettings& settings, int jobs = 1);

struct PretrainConfig {
  int epochs = 100;
  double lr = 1e-5;
  std::uint64_t seed = 0;
};

// Mean over tasks and elements of (f(x, E) - E)^2.
double identity_mse(const nn::NetworkParameters& params, std::span<const taskgen::Task> tasks);

// Trains the network to reproduce its strain-energy input: one full-batch Adam
// step per task, tasks shuffled each epoch. epoch_losses receives the mean
// per-task loss seen during each epoch.
nn::NetworkParameters pretrain_identity(std::span<const taskgen::Task> tasks, const PretrainConfig& cfg,
                                        nn::NetworkParameters init, std::vector<double>* epoch_losses = nullptr);

}  // namespace metato::meta
