#pragma once

// Hand-built tasks shared by several suites.

#include "metato/taskgen.hpp"

#include <stdexcept>

namespace support {

// Left edge clamped, unit downward load at the lower-right corner.
inline metato::taskgen::Task cantilever(int nelx, int nely, double vstar, std::uint64_t id = 1) {
  using namespace metato;
  taskgen::Task t;
  t.id = id;
  t.regime = taskgen::Regime::in_dist;
  t.disc = {nelx, nely};
  std::vector<int> fixed;
  for (int iy = 0; iy <= nely; ++iy) {
    fixed.push_back(2 * t.disc.node(0, iy));
    fixed.push_back(2 * t.disc.node(0, iy) + 1);
  }
  t.bc = fem::BoundaryConditions::make(fixed, {{2 * t.disc.node(nelx, nely) + 1, -1.0}});
  t.vstar = vstar;
  auto v = taskgen::validate_annotate(t);
  if (!v.task) throw std::runtime_error("cantilever rejected");
  return *v.task;
}

// Half MBB beam: symmetry rollers on the left edge, roller at the lower
// right corner, unit downward load at the upper left corner.
inline metato::taskgen::Task half_mbb(int nelx, int nely, double vstar) {
  using namespace metato;
  taskgen::Task t;
  t.id = 2;
  t.regime = taskgen::Regime::in_dist;
  t.disc = {nelx, nely};
  std::vector<int> fixed;
  for (int iy = 0; iy <= nely; ++iy) fixed.push_back(2 * t.disc.node(0, iy));
  fixed.push_back(2 * t.disc.node(nelx, nely) + 1);
  t.bc = fem::BoundaryConditions::make(fixed, {{2 * t.disc.node(0, 0) + 1, -1.0}});
  t.vstar = vstar;
  auto v = taskgen::validate_annotate(t);
  if (!v.task) throw std::runtime_error("mbb rejected");
  return *v.task;
}

}  // namespace support
