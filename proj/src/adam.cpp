#include "metato/optim.hpp"

#include <cmath>

namespace metato::optim {

AdamState AdamState::fresh(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (static_cast<Eigen::Index>(grad.size()) != n) throw std::invalid_argument("gradient size mismatch");
  if (state.m.size() == 0 && state.t == 0) state = AdamState::fresh(n);
  if (state.m.size() != n || state.v.size() != n) throw std::invalid_argument("Adam state size mismatch");
  Eigen::Map<const Eigen::VectorXd> g(grad.data(), n);
  if (!g.allFinite()) throw NonFiniteError("non-finite gradient");
  Eigen::Map<Eigen::VectorXd> p(params.data(), n);

  ++state.t;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * g;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * g.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  p.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

bool stopping_check(std::span<const double> trace, double eps, int min_iters) {
  if (trace.size() < 2 || static_cast<long>(trace.size()) < min_iters) return false;
  const double prev = trace[trace.size() - 2];
  const double cur = trace.back();
  return std::abs(cur - prev) < eps * (1.0 + std::abs(prev));
}

}  // namespace metato::optim
