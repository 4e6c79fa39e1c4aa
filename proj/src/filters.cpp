#include "metato/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace metato::filters {

double default_filter_radius(const fem::Discretization& disc) { return disc.nelx / 32.0; }

DensityFilter::DensityFilter(const fem::Discretization& disc, double radius) : radius_(radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("filter radius must be positive");
  const int n = disc.num_elements();
  const int reach = static_cast<int>(std::ceil(radius)) - 1;
  std::vector<Eigen::Triplet<double>> trips;
  for (int ex = 0; ex < disc.nelx; ++ex) {
    for (int ey = 0; ey < disc.nely; ++ey) {
      const int e = disc.element(ex, ey);
      const std::size_t first = trips.size();
      double total = 0.0;
      for (int kx = std::max(ex - reach, 0); kx <= std::min(ex + reach, disc.nelx - 1); ++kx) {
        for (int ky = std::max(ey - reach, 0); ky <= std::min(ey + reach, disc.nely - 1); ++ky) {
          const double w = radius - std::hypot(ex - kx, ey - ky);
          if (w <= 0.0) continue;
          trips.emplace_back(e, disc.element(kx, ky), w);
          total += w;
        }
      }
      for (std::size_t t = first; t < trips.size(); ++t)
        trips[t] = Eigen::Triplet<double>(trips[t].row(), trips[t].col(), trips[t].value() / total);
    }
  }
  h_.resize(n, n);
  h_.setFromTriplets(trips.begin(), trips.end());
  h_.makeCompressed();
}

Eigen::VectorXd DensityFilter::apply(std::span<const double> rho) const {
  if (static_cast<Eigen::Index>(rho.size()) != h_.cols()) throw std::invalid_argument("filter input size mismatch");
  Eigen::Map<const Eigen::VectorXd> x(rho.data(), static_cast<Eigen::Index>(rho.size()));
  return h_ * x;
}

Eigen::VectorXd DensityFilter::apply_transpose(std::span<const double> cotangent) const {
  if (static_cast<Eigen::Index>(cotangent.size()) != h_.rows())
    throw std::invalid_argument("filter cotangent size mismatch");
  Eigen::Map<const Eigen::VectorXd> g(cotangent.data(), static_cast<Eigen::Index>(cotangent.size()));
  return h_.transpose() * g;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

double projected_mean(std::span<const double> rho_bar, double a, double b) {
  double sum = 0.0;
  for (double r : rho_bar) sum += sigmoid(a * r - b);
  return sum / static_cast<double>(rho_bar.size());
}

}  // namespace

Projection sigmoid_volume_project(std::span<const double> rho_bar, double vstar, double amplification,
                                  double tolerance) {
  if (!(vstar > 0.0 && vstar < 1.0)) throw std::invalid_argument("volume fraction must lie in (0, 1)");
  if (rho_bar.empty()) throw std::invalid_argument("empty density field");
  const auto [lo_it, hi_it] = std::minmax_element(rho_bar.begin(), rho_bar.end());
  const double lo_val = *lo_it;
  const double hi_val = *hi_it;
  if (!std::isfinite(lo_val) || !std::isfinite(hi_val)) throw BisectionError("non-finite projection input");

  const double a = amplification;
  Projection out;
  out.rho.resize(static_cast<Eigen::Index>(rho_bar.size()));
  if (lo_val == hi_val) {
    out.shift = a * lo_val - std::log(vstar / (1.0 - vstar));
    out.rho.setConstant(vstar);
    return out;
  }

  // mean(sigmoid(a x - b)) decreases in b
  double lo = a * lo_val - 40.0;
  double hi = a * hi_val + 40.0;
  for (int expand = 0; projected_mean(rho_bar, a, lo) < vstar; ++expand) {
    if (expand == 60) throw BisectionError("cannot bracket shift from below");
    lo -= (hi - lo);
  }
  for (int expand = 0; projected_mean(rho_bar, a, hi) > vstar; ++expand) {
    if (expand == 60) throw BisectionError("cannot bracket shift from above");
    hi += (hi - lo);
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double vol = projected_mean(rho_bar, a, mid);
    if (std::abs(vol - vstar) <= tolerance) break;
    if (vol > vstar)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  // Newton polish on the bracketed root: d mean / d b = -mean(s)
  double b = mid;
  for (int it = 0; it < 4; ++it) {
    double vol = 0.0, slope = 0.0;
    for (double x : rho_bar) {
      const double r = sigmoid(a * x - b);
      vol += r;
      slope += r * (1.0 - r);
    }
    const double n = static_cast<double>(rho_bar.size());
    if (!(slope > 0.0)) break;
    const double next = b + (vol / n - vstar) / (slope / n);
    if (!(next >= lo && next <= hi) || next == b) break;
    b = next;
  }
  out.shift = b;
  for (std::size_t i = 0; i < rho_bar.size(); ++i) out.rho[static_cast<Eigen::Index>(i)] = sigmoid(a * rho_bar[i] - b);
  const double vol = out.rho.mean();
  if (!(std::abs(vol - vstar) <= std::max(tolerance, 1e-6)))
    throw BisectionError("bisection stalled at volume " + std::to_string(vol));
  return out;
}

Eigen::VectorXd project_backward(std::span<const double> rho_tilde, std::span<const double> cotangent,
                                 double amplification) {
  const auto n = static_cast<Eigen::Index>(rho_tilde.size());
  if (static_cast<Eigen::Index>(cotangent.size()) != n) throw std::invalid_argument("cotangent size mismatch");
  Eigen::Map<const Eigen::VectorXd> r(rho_tilde.data(), n);
  Eigen::Map<const Eigen::VectorXd> c(cotangent.data(), n);
  const Eigen::VectorXd s = r.array() * (1.0 - r.array());
  const double s_sum = s.sum();
  const double weighted = s_sum > 0.0 ? c.dot(s) / s_sum : 0.0;
  return amplification * (s.array() * (c.array() - weighted)).matrix();
}

Eigen::VectorXd preprocess_strain_energy(std::span<const double> e_raw) {
  if (e_raw.empty()) throw DegenerateFieldError("empty strain energy field");
  Eigen::VectorXd logs(static_cast<Eigen::Index>(e_raw.size()));
  for (std::size_t i = 0; i < e_raw.size(); ++i) {
    if (std::isnan(e_raw[i])) throw DegenerateFieldError("NaN strain energy");
    logs[static_cast<Eigen::Index>(i)] = std::log(std::max(e_raw[i], 1e-300));
  }
  const double lo = logs.minCoeff();
  const double hi = logs.maxCoeff();
  if (!std::isfinite(hi) || hi - lo < 1e-12) throw DegenerateFieldError("strain energy field is constant");
  Eigen::VectorXd out = (2.0 * (logs.array() - lo) / (hi - lo) - 1.0).matrix();
  // pin the endpoints against rounding
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (logs[i] == lo) out[i] = -1.0;
    if (logs[i] == hi) out[i] = 1.0;
  }
  return out;
}

Eigen::VectorXd threshold_volume_preserving(std::span<const double> rho, double vstar) {
  const std::size_t n = rho.size();
  const auto k = static_cast<std::size_t>(std::llround(vstar * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return rho[i] > rho[j]; });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < std::min(k, n); ++i) out[static_cast<Eigen::Index>(order[i])] = 1.0;
  return out;
}

}  // namespace metato::filters
