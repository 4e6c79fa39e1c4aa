#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>

namespace metato::optim {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState fresh(Eigen::Index n);
};

// Bias-corrected Adam update of params in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr);

inline void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  adam_step(state, {params.data(), static_cast<std::size_t>(params.size())},
            {grad.data(), static_cast<std::size_t>(grad.size())}, lr);
}

struct StoppingRule {
  double eps = 1e-5;
  int min_iters = 10;
  int max_iters = 200;
};

// True once the trace holds at least min_iters losses and the last pair
// satisfies |L_t - L_{t-1}| < eps (1 + |L_{t-1}|).
bool stopping_check(std::span<const double> trace, double eps = 1e-5, int min_iters = 10);

}  // namespace metato::optim
