#include "metato/meta.hpp"

#include "metato/parallel.hpp"
#include "metato/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>

namespace metato::meta {

AdaptResult adapt(const taskgen::Task& task, nn::NetworkParameters params, int steps, double lr,
                  const optim::OptimizerSettings& settings) {
  AdaptResult out;
  out.final_loss = std::numeric_limits<double>::quiet_NaN();
  if (steps > 0) {
    optim::NeuralObjective objective(task, params.config, settings);
    auto adam = optim::AdamState::fresh(params.values.size());
    for (int s = 0; s < steps; ++s) {
      auto ev = objective.evaluate(params, true);
      out.final_loss = ev.loss;
      optim::adam_step(adam, params.values, ev.gradient, lr);
    }
  }
  out.params = std::move(params);
  return out;
}

std::vector<std::vector<std::size_t>> epoch_schedule(std::size_t dataset_size, int iterations, int batch_size,
                                                     std::uint64_t seed) {
  if (dataset_size == 0) throw std::invalid_argument("empty meta-training set");
  if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  std::vector<std::vector<std::size_t>> schedule;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::uint64_t epoch = 0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::size_t> batch;
    for (int b = 0; b < batch_size; ++b) {
      if (cursor == order.size()) {
        order.resize(dataset_size);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(seed, "meta-epoch", epoch++);
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    schedule.push_back(std::move(batch));
  }
  return schedule;
}

double evaluate_validation(const nn::NetworkParameters& params, std::span<const taskgen::Task> tasks, int steps,
                           double lr, const optim::OptimizerSettings& settings, int jobs) {
  if (tasks.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> losses(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    auto adapted = adapt(tasks[i], params, steps, lr, settings);
    optim::NeuralObjective objective(tasks[i], adapted.params.config, settings);
    losses[i] = objective.evaluate(adapted.params, false).loss;
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

MetaResult reptile_train(std::span<const taskgen::Task> train, std::span<const taskgen::Task> validation,
                         const MetaConfig& cfg, nn::NetworkParameters init, const optim::OptimizerSettings& settings,
                         const CheckpointCallback& on_checkpoint) {
  if (cfg.iterations < 0 || cfg.inner_steps < 0) throw std::invalid_argument("negative meta schedule");
  init.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto schedule = epoch_schedule(train.size(), cfg.iterations, cfg.batch_size, cfg.seed);
  const Eigen::Index m = init.values.size();

  MetaResult result;
  nn::NetworkParameters theta = std::move(init);
  auto outer = optim::AdamState::fresh(m);

  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto& batch = schedule[static_cast<std::size_t>(it - 1)];
    std::vector<std::optional<AdaptResult>> adapted(batch.size());
    parallel_for(batch.size(), cfg.jobs, [&](std::size_t b) {
      try {
        adapted[b] = adapt(train[batch[b]], theta, cfg.inner_steps, cfg.inner_lr, settings);
      } catch (const std::exception&) {
        // FE singularities and non-finite losses drop the task from the batch
      }
    });

    // mean adapted parameters, accumulated relative to the first success so
    // that identical adaptations average exactly
    const Eigen::VectorXd* anchor = nullptr;
    Eigen::VectorXd spread = Eigen::VectorXd::Zero(m);
    int ok = 0;
    double inner_loss = 0.0;
    for (const auto& a : adapted) {
      if (!a) {
        ++result.failed_adaptations;
        continue;
      }
      if (!anchor)
        anchor = &a->params.values;
      else
        spread += a->params.values - *anchor;
      inner_loss += a->final_loss;
      ++ok;
    }

    LogRow row;
    row.iteration = it;
    row.inner_loss = ok > 0 ? inner_loss / ok : std::numeric_limits<double>::quiet_NaN();
    if (ok > 0) {
      const Eigen::VectorXd mean = *anchor + spread / ok;
      if (cfg.outer_rule == OuterRule::adam) {
        const Eigen::VectorXd surrogate = theta.values - mean;  // -delta
        optim::adam_step(outer, theta.values, surrogate, cfg.outer_lr);
      } else {
        // lerp is exact at both ends and when the endpoints coincide
        const double eps = cfg.outer_lr;
        theta.values = theta.values.binaryExpr(mean, [eps](double a, double b) { return std::lerp(a, b, eps); });
      }
    }
    theta.provenance = nn::Provenance::meta_learned;

    const bool checkpoint =
        it == cfg.iterations || (cfg.validation_interval > 0 && it % cfg.validation_interval == 0);
    if (checkpoint) {
      Checkpoint cp;
      cp.iteration = it;
      cp.params = theta;
      cp.validation_loss =
          evaluate_validation(theta, validation, cfg.validation_steps, cfg.inner_lr, settings, cfg.jobs);
      row.validation_loss = cp.validation_loss;
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (on_checkpoint) on_checkpoint(cp, row);
      result.checkpoints.push_back(std::move(cp));
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(row);
  }

  result.best = 0;
  for (std::size_t i = 1; i < result.checkpoints.size(); ++i) {
    const double v = result.checkpoints[i].validation_loss;
    const double best = result.checkpoints[result.best].validation_loss;
    if (std::isnan(best) || v < best) result.best = i;
  }
  if (!result.checkpoints.empty() && std::isnan(result.checkpoints[result.best].validation_loss))
    result.best = result.checkpoints.size() - 1;
  result.final_params = std::move(theta);
  return result;
}

double identity_mse(const nn::NetworkParameters& params, std::span<const taskgen::Task> tasks) {
  if (!params.config.conditioned()) throw std::invalid_argument("identity pretraining needs a conditioned network");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& t : tasks) {
    const auto features = nn::make_features(t.disc.normalized_centroids(), &t.energy);
    const Eigen::VectorXd r = nn::forward(params, features) - t.energy;
    total += r.squaredNorm();
    count += static_cast<std::size_t>(r.size());
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

nn::NetworkParameters pretrain_identity(std::span<const taskgen::Task> tasks, const PretrainConfig& cfg,
                                        nn::NetworkParameters params, std::vector<double>* epoch_losses) {
  if (!params.config.conditioned()) throw std::invalid_argument("identity pretraining needs a conditioned network");
  if (tasks.empty()) throw std::invalid_argument("empty pretraining set");
  std::vector<Eigen::MatrixXd> features;
  features.reserve(tasks.size());
  for (const auto& t : tasks) features.push_back(nn::make_features(t.disc.normalized_centroids(), &t.energy));

  auto adam = optim::AdamState::fresh(params.values.size());
  std::vector<std::size_t> order(tasks.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(cfg.seed, "pretrain-epoch", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t i : order) {
      nn::Tape tape;
      const Eigen::VectorXd r = nn::forward(params, features[i], &tape) - tasks[i].energy;
      const double n = static_cast<double>(r.size());
      const double loss = r.squaredNorm() / n;
      if (!std::isfinite(loss)) throw optim::NonFiniteError("non-finite pretraining loss");
      epoch_loss += loss;
      const Eigen::VectorXd cot = (2.0 / n) * r;
      const Eigen::VectorXd grad = nn::backward(params, features[i], {cot.data(), static_cast<std::size_t>(cot.size())}, &tape);
      optim::adam_step(adam, params.values, grad, cfg.lr);
    }
    if (epoch_losses) epoch_losses->push_back(epoch_loss / static_cast<double>(tasks.size()));
  }
  params.provenance = nn::Provenance::pretrained;
  return params;
}

}  // namespace metato::meta
