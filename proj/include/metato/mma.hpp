#pragma once

// Method of moving asymptotes for problems with box constraints and a single
// inequality constraint g(x) <= 0. The convex subproblem's dual is one
// dimensional and is solved by bisection on the multiplier.

#include <Eigen/Dense>

#include <stdexcept>

namespace metato::optim {

struct MmaSettings {
  double move = 0.2;
  double asyinit = 0.5;
  double asyincr = 1.2;
  double asydecr = 0.7;
  double xmin = 0.0;
  double xmax = 1.0;
};

struct MmaState {
  Eigen::VectorXd x;
  Eigen::VectorXd xold1;
  Eigen::VectorXd xold2;
  Eigen::VectorXd low;
  Eigen::VectorXd upp;
  int iter = 0;
  MmaSettings settings;

  MmaState(Eigen::VectorXd x0, MmaSettings s = {});
};

// One MMA update of state.x given the objective and constraint values and
// gradients at state.x. When no point inside the move limits satisfies the
// approximated constraint, the step minimizes the violation instead.
void mma_step(MmaState& state, double f0, const Eigen::VectorXd& df0dx, double g, const Eigen::VectorXd& dgdx);

}  // namespace metato::optim
