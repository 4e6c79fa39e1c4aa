#include "metato/mma.hpp"

#include <cmath>

namespace metato::optim {

MmaState::MmaState(Eigen::VectorXd x0, MmaSettings s) : x(std::move(x0)), settings(s) {
  if ((x.array() < settings.xmin).any() || (x.array() > settings.xmax).any())
    throw std::invalid_argument("MMA start point outside the box");
  xold1 = x;
  xold2 = x;
  low = x.array() - settings.asyinit * (settings.xmax - settings.xmin);
  upp = x.array() + settings.asyinit * (settings.xmax - settings.xmin);
}

namespace {

struct Subproblem {
  Eigen::ArrayXd low, upp, alpha, beta;
  Eigen::ArrayXd p0, q0, p1, q1;
  double r1 = 0.0;

  Eigen::ArrayXd argmin(double lambda) const {
    const Eigen::ArrayXd sp = (p0 + lambda * p1).sqrt();
    const Eigen::ArrayXd sq = (q0 + lambda * q1).sqrt();
    return ((sp * low + sq * upp) / (sp + sq)).max(alpha).min(beta);
  }

  double constraint(const Eigen::ArrayXd& x) const { return r1 + (p1 / (upp - x) + q1 / (x - low)).sum(); }
};

}  // namespace

void mma_step(MmaState& s, double /*f0*/, const Eigen::VectorXd& df0dx, double g, const Eigen::VectorXd& dgdx) {
  const auto n = s.x.size();
  if (df0dx.size() != n || dgdx.size() != n) throw std::invalid_argument("MMA gradient size mismatch");
  if (!df0dx.allFinite() || !dgdx.allFinite() || !std::isfinite(g)) throw std::invalid_argument("non-finite MMA input");
  const MmaSettings& cfg = s.settings;
  const double range = cfg.xmax - cfg.xmin;
  const Eigen::ArrayXd x = s.x.array();

  // asymptotes
  if (s.iter < 2) {
    s.low = x - cfg.asyinit * range;
    s.upp = x + cfg.asyinit * range;
  } else {
    const Eigen::ArrayXd zz = (x - s.xold1.array()) * (s.xold1.array() - s.xold2.array());
    Eigen::ArrayXd gamma = Eigen::ArrayXd::Ones(n);
    gamma = (zz > 0.0).select(cfg.asyincr, (zz < 0.0).select(cfg.asydecr, gamma));
    Eigen::ArrayXd low = x - gamma * (s.xold1.array() - s.low.array());
    Eigen::ArrayXd upp = x + gamma * (s.upp.array() - s.xold1.array());
    low = low.max(x - 10.0 * range).min(x - 0.01 * range);
    upp = upp.min(x + 10.0 * range).max(x + 0.01 * range);
    s.low = low;
    s.upp = upp;
  }

  Subproblem sub;
  sub.low = s.low.array();
  sub.upp = s.upp.array();
  sub.alpha = (sub.low + 0.1 * (x - sub.low)).max(x - cfg.move * range).max(cfg.xmin);
  sub.beta = (sub.upp - 0.1 * (sub.upp - x)).min(x + cfg.move * range).min(cfg.xmax);

  const double reg = 1e-5 / range;
  const Eigen::ArrayXd ux2 = (sub.upp - x).square();
  const Eigen::ArrayXd xl2 = (x - sub.low).square();
  const Eigen::ArrayXd d0p = df0dx.array().max(0.0), d0m = (-df0dx.array()).max(0.0);
  const Eigen::ArrayXd d1p = dgdx.array().max(0.0), d1m = (-dgdx.array()).max(0.0);
  sub.p0 = ux2 * (1.001 * d0p + 0.001 * d0m + reg);
  sub.q0 = xl2 * (0.001 * d0p + 1.001 * d0m + reg);
  sub.p1 = ux2 * (1.001 * d1p + 0.001 * d1m + reg);
  sub.q1 = xl2 * (0.001 * d1p + 1.001 * d1m + reg);
  sub.r1 = g - (sub.p1 / (sub.upp - x) + sub.q1 / (x - sub.low)).sum();

  Eigen::ArrayXd xnew = sub.argmin(0.0);
  if (sub.constraint(xnew) > 0.0) {
    // smallest reachable constraint value over the move box
    const Eigen::ArrayXd sp = sub.p1.sqrt(), sq = sub.q1.sqrt();
    const Eigen::ArrayXd xc = ((sp * sub.low + sq * sub.upp) / (sp + sq)).max(sub.alpha).min(sub.beta);
    // an infeasible start cannot reach the constraint in one move; head
    // straight for the least violation
    if (sub.constraint(xc) > 0.0) {
      s.xold2 = s.xold1;
      s.xold1 = s.x;
      s.x = xc.matrix();
      ++s.iter;
      return;
    }
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (sub.constraint(sub.argmin(hi)) > 0.0 && doublings < 200) {
      lo = hi;
      hi *= 2.0;
      ++doublings;
    }
    if (doublings == 200) {
      xnew = xc;
    } else {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sub.constraint(sub.argmin(mid)) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      xnew = sub.argmin(hi);
    }
  }

  s.xold2 = s.xold1;
  s.xold1 = s.x;
  s.x = xnew.matrix();
  ++s.iter;
}

}  // namespace metato::optim
