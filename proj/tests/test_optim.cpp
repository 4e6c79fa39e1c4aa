#include "metato/mma.hpp"
#include "metato/optim.hpp"
#include "metato/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace metato;
using namespace metato::optim;

TEST_CASE("adam first step") {
  auto s = AdamState::fresh(4);
  Eigen::VectorXd p(4), g(4);
  p << 1, 2, 3, 4;
  g << 0.5, -3e-3, 1e4, -7;
  const Eigen::VectorXd before = p;
  adam_step(s, p, g, 1e-2);
  for (int i = 0; i < 4; ++i) {
    const double step = before[i] - p[i];
    CHECK(std::copysign(1.0, step) == std::copysign(1.0, g[i]));
    CHECK(std::abs(step) <= 1e-2);
    CHECK(std::abs(step) >= 0.999e-2);
  }
  CHECK(s.t == 1);

  auto z = AdamState::fresh(3);
  Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 0.25);
  adam_step(z, q, Eigen::VectorXd::Zero(3), 1.0);
  CHECK(q == Eigen::VectorXd::Constant(3, 0.25));

  auto a = AdamState::fresh(4), b = AdamState::fresh(4);
  Eigen::VectorXd pa = before, pb = before;
  for (int k = 0; k < 5; ++k) {
    adam_step(a, pa, g * (k + 1), 1e-3);
    adam_step(b, pb, g * (k + 1), 1e-3);
  }
  CHECK(pa == pb);
}

TEST_CASE("adam rejects non-finite gradients") {
  auto s = AdamState::fresh(2);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd g(2);
  g << 1, std::nan("");
  CHECK_THROWS_AS(adam_step(s, p, g, 1e-3), NonFiniteError);
}

TEST_CASE("stopping rule") {
  const std::vector<double> flat(11, 0.7);
  CHECK(stopping_check(flat));
  const std::vector<double> nine(9, 0.7);
  CHECK_FALSE(stopping_check(nine));
  const std::vector<double> ten(10, 0.7);
  CHECK(stopping_check(ten));
  const std::vector<double> early{1.0, 0.5};
  CHECK_FALSE(stopping_check(early));

  auto trace = [](double prev, double last) {
    std::vector<double> t(9, 5.0);
    t.push_back(prev);
    t.push_back(last);
    return t;
  };
  // threshold eps (1 + |prev|): 2e-5 at prev = 1
  CHECK(stopping_check(trace(1.0, 1.0 + 1.5e-5)));
  CHECK_FALSE(stopping_check(trace(1.0, 1.0 + 2.5e-5)));
  CHECK(stopping_check(trace(1.0, 1.0 - 1.99e-5)));
  // at prev = 0 the threshold is exactly eps; equality does not stop
  CHECK_FALSE(stopping_check(trace(0.0, 1e-5)));
  CHECK(stopping_check(trace(0.0, 0.99e-5)));
  CHECK_FALSE(stopping_check(trace(0.0, -1e-5)));
}

TEST_CASE("mma converges on a one dimensional toy") {
  MmaState s(Eigen::VectorXd::Constant(1, 0.9));
  int it = 0;
  for (; it < 50; ++it) {
    const double x = s.x[0];
    Eigen::VectorXd df(1), dg(1);
    df << 2 * (x - 0.3);
    dg << 1.0;
    mma_step(s, (x - 0.3) * (x - 0.3), df, x - 0.5, dg);
    if (std::abs(s.x[0] - 0.3) < 1e-5 && std::abs(s.x[0] - s.xold1[0]) < 1e-6) break;
  }
  CHECK(std::abs(s.x[0] - 0.3) < 1e-4);
  CHECK(it < 50);
}

TEST_CASE("mma respects the box and the move limit") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::VectorXd x0(30);
  for (auto& v : x0) v = u(rng);
  MmaState s(x0);
  for (int it = 0; it < 10; ++it) {
    Eigen::VectorXd df(30), dg = Eigen::VectorXd::Constant(30, 1.0 / 30);
    for (auto& v : df) v = -u(rng);
    const Eigen::VectorXd prev = s.x;
    mma_step(s, 1.0, df, s.x.mean() - 0.4, dg);
    CHECK(s.x.minCoeff() >= 0.0);
    CHECK(s.x.maxCoeff() <= 1.0);
    CHECK((s.x - prev).cwiseAbs().maxCoeff() <= 0.2 + 1e-12);
  }
}

TEST_CASE("mma stays at an interior stationary point") {
  MmaState s(Eigen::VectorXd::Constant(5, 0.3));
  for (int it = 0; it < 3; ++it) {
    const Eigen::VectorXd prev = s.x;
    mma_step(s, 0.0, Eigen::VectorXd::Zero(5) + 2 * (s.x.array() - 0.3).matrix(), s.x.mean() - 0.5,
             Eigen::VectorXd::Constant(5, 0.2));
    CHECK((s.x - prev).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("constant network output gives unit first loss") {
  const auto task = support::cantilever(12, 8, 0.35);
  nn::NetworkParameters p = nn::init_standard({3, 8, 2, 30.0}, 1);
  p.values.setZero();
  p.values[p.values.size() - 1] = 0.8;
  OptimizerSettings st;
  NeuralObjective obj(task, p.config, st);
  const auto ev = obj.evaluate(p, true);
  CHECK(std::abs(ev.loss - 1.0) < 1e-6);
  CHECK(std::abs(ev.rho.mean() - 0.35) < 1e-6);
}

TEST_CASE("end-to-end gradient matches finite differences") {
  const auto task = support::cantilever(6, 6, 0.4);
  const auto p = nn::init_standard({3, 8, 2, 30.0}, 5);
  OptimizerSettings st;
  st.filter_radius = 1.6;
  NeuralObjective obj(task, p.config, st);
  const auto ev = obj.evaluate(p, true);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<Eigen::Index> pick(0, p.values.size() - 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const Eigen::Index i = pick(rng);
    auto pp = p, pm = p;
    pp.values[i] += h;
    pm.values[i] -= h;
    const double fd = (obj.evaluate(pp, false).loss - obj.evaluate(pm, false).loss) / (2 * h);
    worst = std::max(worst, std::abs(fd - ev.gradient[i]) / std::max(std::abs(ev.gradient[i]), 1e-4));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("neural optimization budget stop and bookkeeping") {
  const auto task = support::cantilever(10, 10, 0.3);
  OptimizerSettings st;
  st.stop.eps = 0.0;
  st.stop.max_iters = 15;
  const auto [rec, params] = neural_optimize(task, nn::init_standard({3, 16, 2, 30.0}, 2), st);
  CHECK(rec.reason == StopReason::budget);
  CHECK(rec.iterations == 15);
  CHECK(rec.trace.size() == 15);
  CHECK(rec.volume_trace.size() == 15);
  for (double v : rec.volume_trace) CHECK(std::abs(v - 0.3) < 1e-6);
  CHECK(rec.binary.sum() == 30);
  CHECK(rec.c_cont > 0.0);
  CHECK(rec.c_thresh > 0.0);
  CHECK(to_string(rec.reason) == "budget");
}

TEST_CASE("neural optimization makes progress") {
  const auto task = support::cantilever(20, 10, 0.4);
  OptimizerSettings st;
  st.lr = 1e-3;
  st.stop.eps = 0.0;
  st.stop.max_iters = 50;
  const auto [rec, params] = neural_optimize(task, nn::init_standard({3, 32, 2, 30.0}, 4), st);
  CHECK(*std::min_element(rec.trace.begin(), rec.trace.end()) < rec.trace.front());
  CHECK(rec.trace.back() < rec.trace.front());
}

TEST_CASE("neural optimization stops between the bounds") {
  const auto task = support::cantilever(12, 12, 0.3);
  const auto [rec, params] = neural_optimize(task, nn::init_standard({3, 16, 2, 30.0}, 9), {});
  CHECK(rec.iterations >= 10);
  CHECK(rec.iterations <= 200);
  if (rec.reason == StopReason::criterion) CHECK(stopping_check(rec.trace));
}

TEST_CASE("mma pipeline keeps every iterate feasible") {
  const auto task = support::cantilever(24, 12, 0.4);
  OptimizerSettings st;
  st.filter_radius = 1.5;
  const auto rec = standard_optimize(task, st);
  CHECK(rec.volume_trace.size() == static_cast<std::size_t>(rec.iterations));
  for (double v : rec.volume_trace) CHECK(v <= 0.4 + 1e-6);
  CHECK(rec.trace.front() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rec.trace.back() < 0.8);
  CHECK(rec.binary.sum() == std::round(0.4 * 288));

  const auto again = standard_optimize(task, st);
  CHECK(again.trace == rec.trace);
  CHECK(again.c_thresh == rec.c_thresh);
}

TEST_CASE("mma pipeline accepts a network initial design") {
  const auto task = support::cantilever(16, 8, 0.3);
  const auto p = nn::init_standard({3, 16, 2, 30.0}, 3);
  OptimizerSettings st;
  const Eigen::VectorXd init = network_initial_design(task, p, st);
  CHECK(init.size() == 128);
  CHECK(std::abs(init.mean() - 0.3) < 1e-6);
  const auto rec = standard_optimize(task, st, init);
  CHECK(rec.iterations >= 10);
  for (double v : rec.volume_trace) CHECK(v <= 0.3 + 1e-6);
  CHECK(standard_optimize(task, st, init).trace == rec.trace);
}
