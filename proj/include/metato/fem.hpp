#pragma once

// Plane-stress linear elasticity on regular grids of unit square bilinear
// elements with modified SIMP interpolation.
//
// Numbering follows the classic educational SIMP codes: elements and nodes
// run column-major, node rows counted from the top edge downwards, and each
// node carries an (x, y) DOF pair with y pointing up.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace metato::fem {

struct Discretization {
  int nelx = 0;
  int nely = 0;

  int num_elements() const { return nelx * nely; }
  int num_nodes() const { return (nelx + 1) * (nely + 1); }
  int num_dofs() const { return 2 * num_nodes(); }

  // ix in [0, nelx], iy in [0, nely] counted from the top edge.
  int node(int ix, int iy) const { return iy + ix * (nely + 1); }
  int element(int ex, int ey) const { return ey + ex * nely; }

  // DOFs ordered lower-left, lower-right, upper-right, upper-left.
  std::array<int, 8> element_dofs(int e) const;

  // Physical node position (x right, y up), unit element edge.
  std::pair<double, double> node_position(int node) const;

  // 2 x N element centroids mapped so that the domain bounding box is [-1, 1]^2.
  Eigen::MatrixXd normalized_centroids() const;

  bool operator==(const Discretization&) const = default;
};

struct MaterialModel {
  double e0 = 1.0;
  double emin = 1e-9;
  double nu = 0.3;
  double penal = 3.0;

  double modulus(double rho) const;
  double modulus_derivative(double rho) const;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundaryConditions {
  std::vector<int> fixed_dofs;                // sorted, unique
  std::vector<std::pair<int, double>> loads;  // sorted by DOF, unique DOFs

  // Sorts and deduplicates fixed DOFs; sums loads that hit the same DOF and
  // drops exact zeros.
  static BoundaryConditions make(std::vector<int> fixed, const std::vector<std::pair<int, double>>& loads);

  // Adds a point load of given magnitude and angle (radians from +x, counter-
  // clockwise) at a node.
  static void add_point_load(std::vector<std::pair<int, double>>& loads, int node, double magnitude, double angle);

  Eigen::VectorXd load_vector(int num_dofs) const;

  // Throws std::invalid_argument on out-of-range indices, missing supports or
  // an all-zero load.
  void validate(const Discretization& disc) const;

  bool operator==(const BoundaryConditions&) const = default;
};

struct FieldState {
  Eigen::VectorXd u;
  double compliance = 0.0;
  Eigen::VectorXd energies;  // u_e^T k_e(rho_e) u_e per element; sums to compliance
};

using ElementMatrix = Eigen::Matrix<double, 8, 8>;

// Stiffness of a unit square element with unit Young's modulus.
ElementMatrix element_stiffness(double nu);

enum class SolverKind { automatic, cholesky, conjugate_gradient };

// Largest element count solved with sparse Cholesky under SolverKind::automatic.
inline constexpr int kDirectSolverMaxElements = 64 * 64;

// Assembled problem for one (discretization, boundary conditions, material)
// triple. Holds the reduced sparsity pattern and the symbolic factorization,
// so repeated solves only redo the numeric part. Not thread-safe; give each
// task its own model.
class FeModel {
 public:
  FeModel(const Discretization& disc, BoundaryConditions bc, MaterialModel mat = {},
          SolverKind solver = SolverKind::automatic);
  ~FeModel();
  FeModel(FeModel&&) noexcept;
  FeModel& operator=(FeModel&&) noexcept;

  FieldState solve(std::span<const double> rho);

  const Discretization& discretization() const { return disc_; }
  const BoundaryConditions& boundary_conditions() const { return bc_; }
  const MaterialModel& material() const { return mat_; }
  SolverKind solver() const { return solver_; }
  int num_free_dofs() const { return static_cast<int>(free_dofs_.size()); }

  // Reduced stiffness matrix from the most recent solve.
  const Eigen::SparseMatrix<double>& reduced_stiffness() const { return k_; }
  const Eigen::VectorXd& reduced_load() const { return f_reduced_; }
  const std::vector<int>& free_dofs() const { return free_dofs_; }

 private:
  struct Factorization;

  void assemble(std::span<const double> rho);

  Discretization disc_;
  BoundaryConditions bc_;
  MaterialModel mat_;
  SolverKind solver_;
  ElementMatrix ke_;
  std::vector<int> free_dofs_;
  std::vector<int> reduced_index_;  // full DOF -> reduced index or -1
  std::vector<int> scatter_;        // element-local (e, i, j) -> value slot or -1
  Eigen::SparseMatrix<double> k_;
  Eigen::VectorXd f_full_;
  Eigen::VectorXd f_reduced_;
  std::unique_ptr<Factorization> factor_;
};

// One-shot solve; builds a throwaway FeModel.
FieldState assemble_solve(const Discretization& disc, const BoundaryConditions& bc, const MaterialModel& mat,
                          std::span<const double> rho);

// dc/drho_e from the self-adjoint sensitivity. state must come from a solve
// at the same rho.
Eigen::VectorXd compliance_sensitivities(const FieldState& state, std::span<const double> rho,
                                         const MaterialModel& mat);

}  // namespace metato::fem
