#pragma once

// Per-task optimizers: the neural pipeline (network -> density filter ->
// volume projection -> FE) driven by Adam, and the conventional density
// pipeline (design variables -> density filter -> FE) driven by MMA. Both
// report compliance normalized by the task's uniform-design reference.

#include "metato/fem.hpp"
#include "metato/filters.hpp"
#include "metato/mma.hpp"
#include "metato/network.hpp"
#include "metato/optim.hpp"
#include "metato/taskgen.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace metato::optim {

struct OptimizerSettings {
  double lr = 1e-4;
  StoppingRule stop;
  double filter_radius = 0.0;  // <= 0 selects filters::default_filter_radius
  double amplification = filters::kAmplification;
  MmaSettings mma;
  fem::MaterialModel material;
};

enum class StopReason { criterion, budget };

std::string to_string(StopReason r);

struct RunRecord {
  std::vector<double> trace;         // normalized compliance per iteration
  std::vector<double> volume_trace;  // mean physical density per iteration
  int iterations = 0;
  StopReason reason = StopReason::budget;
  double c_cont = 0.0;    // compliance of the final continuous design
  double c_thresh = 0.0;  // compliance after volume-preserving thresholding
  double wall_seconds = 0.0;
  Eigen::VectorXd design;  // final continuous physical design
  Eigen::VectorXd binary;  // thresholded design
};

// Loss and gradient of one task as a function of network parameters. Owns the
// task's FE model and filter; not thread-safe.
class NeuralObjective {
 public:
  NeuralObjective(const taskgen::Task& task, const nn::NetworkConfig& net, const OptimizerSettings& settings);

  struct Evaluation {
    double loss = 0.0;
    double compliance = 0.0;
    Eigen::VectorXd rho;  // projected design
    Eigen::VectorXd gradient;  // empty unless requested
  };

  Evaluation evaluate(const nn::NetworkParameters& params, bool with_gradient);

  // Projected design of the network without an FE solve.
  Eigen::VectorXd design(const nn::NetworkParameters& params) const;

  const Eigen::MatrixXd& features() const { return features_; }
  const taskgen::Task& task() const { return *task_; }
  fem::FeModel& fe() { return fe_; }
  const filters::DensityFilter& filter() const { return filter_; }

 private:
  const taskgen::Task* task_;
  OptimizerSettings settings_;
  Eigen::MatrixXd features_;
  fem::FeModel fe_;
  filters::DensityFilter filter_;
};

// Adam on the network parameters until the stopping rule fires or the budget
// runs out; then one extra solve of the thresholded design.
std::pair<RunRecord, nn::NetworkParameters> neural_optimize(const taskgen::Task& task, nn::NetworkParameters params,
                                                            const OptimizerSettings& settings);

// MMA on element design variables from `init` (uniform vstar when empty),
// with the volume constraint mean(filtered) <= vstar.
RunRecord standard_optimize(const taskgen::Task& task, const OptimizerSettings& settings,
                            const std::optional<Eigen::VectorXd>& init = std::nullopt);

// Initial design a network proposes for a task, for seeding standard_optimize.
Eigen::VectorXd network_initial_design(const taskgen::Task& task, const nn::NetworkParameters& params,
                                       const OptimizerSettings& settings);

}  // namespace metato::optim
