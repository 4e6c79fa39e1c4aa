#include "metato/pipeline.hpp"

#include <chrono>
#include <cmath>

namespace metato::optim {

std::string to_string(StopReason r) { return r == StopReason::criterion ? "criterion" : "budget"; }

namespace {

double radius_for(const fem::Discretization& disc, const OptimizerSettings& s) {
  return s.filter_radius > 0.0 ? s.filter_radius : filters::default_filter_radius(disc);
}

Eigen::MatrixXd task_features(const taskgen::Task& task, const nn::NetworkConfig& net) {
  const Eigen::MatrixXd coords = task.disc.normalized_centroids();
  return nn::make_features(coords, net.conditioned() ? &task.energy : nullptr);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(RunRecord& rec, fem::FeModel& fe, const taskgen::Task& task, double last_compliance) {
  rec.iterations = static_cast<int>(rec.trace.size());
  rec.c_cont = last_compliance;
  rec.binary = filters::threshold_volume_preserving(filters::view(rec.design), task.vstar);
  rec.c_thresh = fe.solve(filters::view(rec.binary)).compliance;
}

}  // namespace

NeuralObjective::NeuralObjective(const taskgen::Task& task, const nn::NetworkConfig& net,
                                 const OptimizerSettings& settings)
    : task_(&task),
      settings_(settings),
      features_(task_features(task, net)),
      fe_(task.disc, task.bc, settings.material),
      filter_(task.disc, radius_for(task.disc, settings)) {
  if (!(task.c_ref > 0.0)) throw std::invalid_argument("task is not annotated with a reference compliance");
}

Eigen::VectorXd NeuralObjective::design(const nn::NetworkParameters& params) const {
  const Eigen::VectorXd raw = nn::forward(params, features_);
  const Eigen::VectorXd filtered = filter_.apply(filters::view(raw));
  return filters::sigmoid_volume_project(filters::view(filtered), task_->vstar, settings_.amplification).rho;
}

NeuralObjective::Evaluation NeuralObjective::evaluate(const nn::NetworkParameters& params, bool with_gradient) {
  nn::Tape tape;
  const Eigen::VectorXd raw = nn::forward(params, features_, with_gradient ? &tape : nullptr);
  const Eigen::VectorXd filtered = filter_.apply(filters::view(raw));
  auto proj = filters::sigmoid_volume_project(filters::view(filtered), task_->vstar, settings_.amplification);
  const auto state = fe_.solve(filters::view(proj.rho));

  Evaluation ev;
  ev.compliance = state.compliance;
  ev.loss = state.compliance / task_->c_ref;
  if (!std::isfinite(ev.loss)) throw NonFiniteError("non-finite loss");
  if (with_gradient) {
    Eigen::VectorXd dl = fem::compliance_sensitivities(state, filters::view(proj.rho), settings_.material) / task_->c_ref;
    const Eigen::VectorXd d_filtered = filters::project_backward(filters::view(proj.rho), filters::view(dl),
                                                                 settings_.amplification);
    const Eigen::VectorXd d_raw = filter_.apply_transpose(filters::view(d_filtered));
    ev.gradient = nn::backward(params, features_, filters::view(d_raw), &tape);
  }
  ev.rho = std::move(proj.rho);
  return ev;
}

std::pair<RunRecord, nn::NetworkParameters> neural_optimize(const taskgen::Task& task, nn::NetworkParameters params,
                                                            const OptimizerSettings& settings) {
  Stopwatch clock;
  NeuralObjective objective(task, params.config, settings);
  AdamState adam = AdamState::fresh(params.values.size());
  RunRecord rec;
  double compliance = 0.0;
  for (int it = 1; it <= settings.stop.max_iters; ++it) {
    auto ev = objective.evaluate(params, true);
    rec.trace.push_back(ev.loss);
    rec.volume_trace.push_back(ev.rho.mean());
    compliance = ev.compliance;
    rec.design = std::move(ev.rho);
    if (stopping_check(rec.trace, settings.stop.eps, settings.stop.min_iters)) {
      rec.reason = StopReason::criterion;
      break;
    }
    if (it == settings.stop.max_iters) break;
    adam_step(adam, params.values, ev.gradient, settings.lr);
  }
  finish(rec, objective.fe(), task, compliance);
  rec.wall_seconds = clock.seconds();
  return {std::move(rec), std::move(params)};
}

Eigen::VectorXd network_initial_design(const taskgen::Task& task, const nn::NetworkParameters& params,
                                       const OptimizerSettings& settings) {
  NeuralObjective objective(task, params.config, settings);
  return objective.design(params);
}

RunRecord standard_optimize(const taskgen::Task& task, const OptimizerSettings& settings,
                            const std::optional<Eigen::VectorXd>& init) {
  Stopwatch clock;
  const int n = task.disc.num_elements();
  Eigen::VectorXd x0 = init ? *init : Eigen::VectorXd::Constant(n, task.vstar);
  if (x0.size() != n) throw std::invalid_argument("initial design length does not match mesh");
  if ((x0.array() < 0.0).any() || (x0.array() > 1.0).any()) throw std::invalid_argument("initial design outside [0, 1]");
  if (!(task.c_ref > 0.0)) throw std::invalid_argument("task is not annotated with a reference compliance");

  fem::FeModel fe(task.disc, task.bc, settings.material);
  const filters::DensityFilter filter(task.disc, radius_for(task.disc, settings));
  MmaState mma(std::move(x0), settings.mma);
  // volume constraint mean(filtered)/vstar - 1 <= 0; its gradient is constant
  const Eigen::VectorXd dg = filter.apply_transpose(
      filters::view(Eigen::VectorXd::Constant(n, 1.0 / (n * task.vstar))));

  RunRecord rec;
  double compliance = 0.0;
  for (int it = 1; it <= settings.stop.max_iters; ++it) {
    Eigen::VectorXd physical = filter.apply(filters::view(mma.x)).cwiseMax(0.0).cwiseMin(1.0);
    const auto state = fe.solve(filters::view(physical));
    const double loss = state.compliance / task.c_ref;
    if (!std::isfinite(loss)) throw NonFiniteError("non-finite loss");
    rec.trace.push_back(loss);
    rec.volume_trace.push_back(physical.mean());
    compliance = state.compliance;
    const double g = physical.mean() / task.vstar - 1.0;
    if (stopping_check(rec.trace, settings.stop.eps, settings.stop.min_iters)) {
      rec.reason = StopReason::criterion;
      rec.design = std::move(physical);
      break;
    }
    rec.design = physical;
    if (it == settings.stop.max_iters) break;
    const Eigen::VectorXd dc = fem::compliance_sensitivities(state, filters::view(physical), settings.material);
    const Eigen::VectorXd df = filter.apply_transpose(filters::view(dc)) / task.c_ref;
    mma_step(mma, loss, df, g, dg);
  }
  finish(rec, fe, task, compliance);
  rec.wall_seconds = clock.seconds();
  return rec;
}

}  // namespace metato::optim
