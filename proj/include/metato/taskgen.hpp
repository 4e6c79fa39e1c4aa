#pragma once

// Pseudorandom compliance-minimization tasks: generation, validation against
// one FE analysis of the uniform design, and dataset assembly.

#include "metato/fem.hpp"
#include "metato/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace metato::taskgen {

enum class Regime : std::uint8_t { train = 0, validation = 1, in_dist = 2, out_of_dist = 3, cross_res = 4 };

std::string to_string(Regime r);
Regime parse_regime(const std::string& s);  // throws std::invalid_argument

struct Task {
  std::uint64_t id = 0;
  Regime regime = Regime::train;
  fem::Discretization disc;
  fem::BoundaryConditions bc;
  double vstar = 0.0;
  Eigen::VectorXd energy;  // log-normalized uniform-design strain energy, in [-1, 1]
  double c_ref = 0.0;      // compliance of the uniform design at vstar
};

// 1-3 unit point loads at uniformly random angles on nodes drawn with boundary
// nodes weighted 4x; 1-4 boundary support nodes with both DOFs fixed; vstar
// uniform in [0.1, 0.5]. The result is not yet annotated.
Task generate_point_task(Rng& rng, const fem::Discretization& disc);

// Supports over a random boundary segment; unit total load at a uniformly
// random angle spread equally across the nodes of a random horizontal or
// vertical node line. Segment lengths span 10-50% of the domain side.
Task generate_line_task(Rng& rng, const fem::Discretization& disc);

enum class Rejection : std::uint8_t {
  none = 0,
  invalid_bc = 1,
  singular = 2,
  non_finite = 3,
  excessive_compliance = 4,
  degenerate_energy = 5,
};
inline constexpr std::size_t kRejectionKinds = 6;

std::string to_string(Rejection r);

inline constexpr double kMaxReferenceCompliance = 1e8;

struct Validation {
  std::optional<Task> task;
  Rejection reason = Rejection::none;
};

// Solves the uniform design at vstar; on success stores the preprocessed
// energy and c_ref.
Validation validate_annotate(Task candidate, const fem::MaterialModel& mat = {});

class GenerationStallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetManifest {
  std::uint32_t version = 1;
  Regime regime = Regime::train;
  std::uint64_t seed = 0;
  fem::Discretization disc;
  std::uint64_t count = 0;
  std::uint64_t candidates = 0;
  std::array<std::uint64_t, kRejectionKinds> rejections{};
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Task> tasks;

  const Task& by_id(std::uint64_t id) const;
};

// Id of candidate `index` in a (regime, seed) stream.
std::uint64_t task_id(Regime regime, std::uint64_t seed, std::uint64_t index);

// Draws candidates in index order until n validated tasks are collected.
// Point tasks for train, validation, in-dist and cross-res; line tasks for
// out-of-dist. Throws GenerationStallError when fewer than 1% of 1,000
// consecutive candidates validate.
Dataset build_dataset(Regime regime, std::size_t n, std::uint64_t seed, const fem::Discretization& disc,
                      int jobs = 1);

}  // namespace metato::taskgen
