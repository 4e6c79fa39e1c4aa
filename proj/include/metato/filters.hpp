#pragma once

// Maps between raw network outputs, physical densities and the conditioning
// input: cone density filter, volume-pinned sigmoid projection, strain-energy
// log-normalization and volume-preserving thresholding. Every differentiable
// map comes with its reverse-mode counterpart.

#include "metato/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <span>
#include <stdexcept>

namespace metato::filters {

// Filter radius used when none is given: 1/32 of the domain width, in elements.
double default_filter_radius(const fem::Discretization& disc);

// Normalized cone-weight filter, precomputed once per discretization. The
// operator is immutable after construction and safe to share across threads.
class DensityFilter {
 public:
  DensityFilter(const fem::Discretization& disc, double radius);

  Eigen::VectorXd apply(std::span<const double> rho) const;
  Eigen::VectorXd apply_transpose(std::span<const double> cotangent) const;

  double radius() const { return radius_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return h_; }

 private:
  double radius_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> h_;
};

class BisectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kAmplification = 10.0;
inline constexpr double kVolumeTolerance = 1e-10;

struct Projection {
  Eigen::VectorXd rho;  // projected densities, each in (0, 1)
  double shift = 0.0;
};

// rho_i = sigmoid(a * rho_bar_i - b) with b chosen by bisection so that
// mean(rho) equals vstar.
Projection sigmoid_volume_project(std::span<const double> rho_bar, double vstar,
                                  double amplification = kAmplification, double tolerance = kVolumeTolerance);

// Cotangent pulled back through the projection, including the implicit
// dependence of the shift on every input. rho_tilde is the projected output.
Eigen::VectorXd project_backward(std::span<const double> rho_tilde, std::span<const double> cotangent,
                                 double amplification = kAmplification);

class DegenerateFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 2 (log e - min log e) / (max log e - min log e) - 1. Entries below 1e-300
// are clamped before the log.
Eigen::VectorXd preprocess_strain_energy(std::span<const double> e_raw);

// Exactly round(vstar * N) ones on the largest values; ties go to the lower
// element index.
Eigen::VectorXd threshold_volume_preserving(std::span<const double> rho, double vstar);

inline std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace metato::filters
