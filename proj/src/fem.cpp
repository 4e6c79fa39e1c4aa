#include "metato/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace metato::fem {

std::array<int, 8> Discretization::element_dofs(int e) const {
  const int ex = e / nely;
  const int ey = e % nely;
  const int n1 = (nely + 1) * ex + ey;
  const int n2 = (nely + 1) * (ex + 1) + ey;
  return {2 * n1 + 2, 2 * n1 + 3, 2 * n2 + 2, 2 * n2 + 3, 2 * n2, 2 * n2 + 1, 2 * n1, 2 * n1 + 1};
}

std::pair<double, double> Discretization::node_position(int n) const {
  const int ix = n / (nely + 1);
  const int iy = n % (nely + 1);
  return {static_cast<double>(ix), static_cast<double>(nely - iy)};
}

Eigen::MatrixXd Discretization::normalized_centroids() const {
  Eigen::MatrixXd c(2, num_elements());
  for (int ex = 0; ex < nelx; ++ex) {
    for (int ey = 0; ey < nely; ++ey) {
      const int e = element(ex, ey);
      c(0, e) = 2.0 * (ex + 0.5) / nelx - 1.0;
      c(1, e) = 1.0 - 2.0 * (ey + 0.5) / nely;
    }
  }
  return c;
}

double MaterialModel::modulus(double rho) const { return emin + std::pow(rho, penal) * (e0 - emin); }

double MaterialModel::modulus_derivative(double rho) const {
  return penal * std::pow(rho, penal - 1.0) * (e0 - emin);
}

BoundaryConditions BoundaryConditions::make(std::vector<int> fixed, const std::vector<std::pair<int, double>>& loads) {
  BoundaryConditions bc;
  std::sort(fixed.begin(), fixed.end());
  fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
  bc.fixed_dofs = std::move(fixed);
  std::map<int, double> merged;
  for (const auto& [dof, value] : loads) merged[dof] += value;
  for (const auto& [dof, value] : merged)
    if (value != 0.0) bc.loads.emplace_back(dof, value);
  return bc;
}

void BoundaryConditions::add_point_load(std::vector<std::pair<int, double>>& loads, int node, double magnitude,
                                        double angle) {
  loads.emplace_back(2 * node, magnitude * std::cos(angle));
  loads.emplace_back(2 * node + 1, magnitude * std::sin(angle));
}

Eigen::VectorXd BoundaryConditions::load_vector(int num_dofs) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(num_dofs);
  for (const auto& [dof, value] : loads) f[dof] += value;
  return f;
}

void BoundaryConditions::validate(const Discretization& disc) const {
  const int ndof = disc.num_dofs();
  if (fixed_dofs.empty()) throw std::invalid_argument("no fixed DOFs");
  for (int d : fixed_dofs)
    if (d < 0 || d >= ndof) throw std::invalid_argument("fixed DOF out of range: " + std::to_string(d));
  bool any = false;
  for (const auto& [dof, value] : loads) {
    if (dof < 0 || dof >= ndof) throw std::invalid_argument("load DOF out of range: " + std::to_string(dof));
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite load");
    any = any || value != 0.0;
  }
  if (!any) throw std::invalid_argument("load vector is zero");
}

ElementMatrix element_stiffness(double nu) {
  const double k[8] = {0.5 - nu / 6.0,         0.125 + nu / 8.0, -0.25 - nu / 12.0, -0.125 + 3.0 * nu / 8.0,
                       -0.25 + nu / 12.0,      -0.125 - nu / 8.0, nu / 6.0,         0.125 - 3.0 * nu / 8.0};
  static constexpr int pattern[8][8] = {{0, 1, 2, 3, 4, 5, 6, 7}, {1, 0, 7, 6, 5, 4, 3, 2},
                                        {2, 7, 0, 5, 6, 3, 4, 1}, {3, 6, 5, 0, 7, 2, 1, 4},
                                        {4, 5, 6, 7, 0, 1, 2, 3}, {5, 4, 3, 2, 1, 0, 7, 6},
                                        {6, 3, 4, 1, 2, 7, 0, 5}, {7, 2, 1, 4, 3, 6, 5, 0}};
  ElementMatrix ke;
  const double scale = 1.0 / (1.0 - nu * nu);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) ke(i, j) = scale * k[pattern[i][j]];
  return ke;
}

namespace {

// True when the supports leave a rigid-body mode free. On a connected grid
// with strictly positive moduli the null space of K is exactly the three
// planar rigid modes, so this decides singularity of the reduced system.
bool has_mechanism(const Discretization& disc, const std::vector<int>& fixed) {
  if (fixed.empty()) return true;
  const double cx = 0.5 * disc.nelx;
  const double cy = 0.5 * disc.nely;
  Eigen::MatrixXd modes(static_cast<Eigen::Index>(fixed.size()), 3);
  for (std::size_t r = 0; r < fixed.size(); ++r) {
    const int dof = fixed[r];
    const auto [x, y] = disc.node_position(dof / 2);
    if (dof % 2 == 0)
      modes.row(static_cast<Eigen::Index>(r)) << 1.0, 0.0, -(y - cy);
    else
      modes.row(static_cast<Eigen::Index>(r)) << 0.0, 1.0, x - cx;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(modes);
  const auto& s = svd.singularValues();
  return s.size() < 3 || s(2) <= 1e-9 * s(0);
}

}  // namespace

struct FeModel::Factorization {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool analyzed = false;
};

FeModel::FeModel(const Discretization& disc, BoundaryConditions bc, MaterialModel mat, SolverKind solver)
    : disc_(disc), bc_(std::move(bc)), mat_(mat), solver_(solver), factor_(std::make_unique<Factorization>()) {
  if (disc_.nelx <= 0 || disc_.nely <= 0) throw std::invalid_argument("empty discretization");
  if (bc_.fixed_dofs.empty()) throw SingularSystemError("no fixed DOFs: structure is floating");
  bc_.validate(disc_);
  if (has_mechanism(disc_, bc_.fixed_dofs))
    throw SingularSystemError("supports leave a rigid-body mode unconstrained");
  if (solver_ == SolverKind::automatic)
    solver_ = disc_.num_elements() <= kDirectSolverMaxElements ? SolverKind::cholesky : SolverKind::conjugate_gradient;

  ke_ = element_stiffness(mat_.nu);
  const int ndof = disc_.num_dofs();
  reduced_index_.assign(ndof, 0);
  for (int d : bc_.fixed_dofs) reduced_index_[d] = -1;
  for (int d = 0; d < ndof; ++d) {
    if (reduced_index_[d] >= 0) {
      reduced_index_[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(d);
    }
  }
  const int nfree = num_free_dofs();
  if (nfree == 0) throw SingularSystemError("every DOF is fixed");

  const int nel = disc_.num_elements();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nel) * 64);
  for (int e = 0; e < nel; ++e) {
    const auto dofs = disc_.element_dofs(e);
    for (int i = 0; i < 8; ++i) {
      const int ri = reduced_index_[dofs[i]];
      if (ri < 0) continue;
      for (int j = 0; j < 8; ++j) {
        const int rj = reduced_index_[dofs[j]];
        if (rj >= 0) trips.emplace_back(ri, rj, 1.0);
      }
    }
  }
  k_.resize(nfree, nfree);
  k_.setFromTriplets(trips.begin(), trips.end());
  k_.makeCompressed();

  scatter_.assign(static_cast<std::size_t>(nel) * 64, -1);
  const int* outer = k_.outerIndexPtr();
  const int* inner = k_.innerIndexPtr();
  for (int e = 0; e < nel; ++e) {
    const auto dofs = disc_.element_dofs(e);
    for (int i = 0; i < 8; ++i) {
      const int ri = reduced_index_[dofs[i]];
      if (ri < 0) continue;
      for (int j = 0; j < 8; ++j) {
        const int rj = reduced_index_[dofs[j]];
        if (rj < 0) continue;
        // column-major storage: column rj holds row ri
        const int* begin = inner + outer[rj];
        const int* end = inner + outer[rj + 1];
        const int* hit = std::lower_bound(begin, end, ri);
        scatter_[static_cast<std::size_t>(e) * 64 + i * 8 + j] = static_cast<int>(hit - inner);
      }
    }
  }

  f_full_ = bc_.load_vector(ndof);
  f_reduced_.resize(nfree);
  for (int r = 0; r < nfree; ++r) f_reduced_[r] = f_full_[free_dofs_[r]];
}

FeModel::~FeModel() = default;
FeModel::FeModel(FeModel&&) noexcept = default;
FeModel& FeModel::operator=(FeModel&&) noexcept = default;

void FeModel::assemble(std::span<const double> rho) {
  double* values = k_.valuePtr();
  std::fill(values, values + k_.nonZeros(), 0.0);
  const int nel = disc_.num_elements();
  for (int e = 0; e < nel; ++e) {
    const double modulus = mat_.modulus(rho[e]);
    const int* slots = scatter_.data() + static_cast<std::size_t>(e) * 64;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const int s = slots[i * 8 + j];
        if (s >= 0) values[s] += modulus * ke_(i, j);
      }
  }
}

FieldState FeModel::solve(std::span<const double> rho) {
  const int nel = disc_.num_elements();
  if (static_cast<int>(rho.size()) != nel) throw std::invalid_argument("density length does not match mesh");
  for (double r : rho)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("density outside [0, 1]");

  assemble(rho);
  Eigen::VectorXd ur;
  if (solver_ == SolverKind::cholesky) {
    auto& ldlt = factor_->ldlt;
    if (!factor_->analyzed) {
      ldlt.analyzePattern(k_);
      factor_->analyzed = true;
    }
    ldlt.factorize(k_);
    if (ldlt.info() != Eigen::Success) throw SingularSystemError("Cholesky factorization failed");
    const auto& d = ldlt.vectorD();
    if (!(d.minCoeff() > 0.0)) throw SingularSystemError("reduced stiffness matrix is not positive definite");
    ur = ldlt.solve(f_reduced_);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-8);
    cg.setMaxIterations(10 * num_free_dofs());
    cg.compute(k_);
    ur = cg.solve(f_reduced_);
    if (cg.info() != Eigen::Success)
      throw SolverDivergedError("conjugate gradient did not converge in " + std::to_string(cg.iterations()) +
                                " iterations");
  }
  if (!ur.allFinite()) throw SingularSystemError("non-finite displacement");

  FieldState state;
  state.u = Eigen::VectorXd::Zero(disc_.num_dofs());
  for (int r = 0; r < num_free_dofs(); ++r) state.u[free_dofs_[r]] = ur[r];
  state.compliance = f_full_.dot(state.u);
  state.energies.resize(nel);
  Eigen::Matrix<double, 8, 1> ue;
  for (int e = 0; e < nel; ++e) {
    const auto dofs = disc_.element_dofs(e);
    for (int i = 0; i < 8; ++i) ue[i] = state.u[dofs[i]];
    state.energies[e] = mat_.modulus(rho[e]) * ue.dot(ke_ * ue);
  }
  return state;
}

FieldState assemble_solve(const Discretization& disc, const BoundaryConditions& bc, const MaterialModel& mat,
                          std::span<const double> rho) {
  FeModel model(disc, bc, mat);
  return model.solve(rho);
}

Eigen::VectorXd compliance_sensitivities(const FieldState& state, std::span<const double> rho,
                                         const MaterialModel& mat) {
  const auto n = static_cast<Eigen::Index>(rho.size());
  if (state.energies.size() != n) throw std::invalid_argument("state and density sizes differ");
  Eigen::VectorXd dc(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    // energies hold E_e * (u_e^T k0 u_e)
    const double unit_energy = state.energies[e] / mat.modulus(rho[e]);
    dc[e] = -mat.modulus_derivative(rho[e]) * unit_energy;
  }
  return dc;
}

}  // namespace metato::fem
