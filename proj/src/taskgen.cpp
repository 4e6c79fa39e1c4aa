#include "metato/taskgen.hpp"

#include "metato/filters.hpp"
#include "metato/parallel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace metato::taskgen {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::train: return "train";
    case Regime::validation: return "validation";
    case Regime::in_dist: return "in-dist";
    case Regime::out_of_dist: return "out-of-dist";
    case Regime::cross_res: return "cross-res";
  }
  return "unknown";
}

Regime parse_regime(const std::string& s) {
  for (auto r : {Regime::train, Regime::validation, Regime::in_dist, Regime::out_of_dist, Regime::cross_res})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

std::string to_string(Rejection r) {
  switch (r) {
    case Rejection::none: return "none";
    case Rejection::invalid_bc: return "invalid-bc";
    case Rejection::singular: return "singular";
    case Rejection::non_finite: return "non-finite";
    case Rejection::excessive_compliance: return "excessive-compliance";
    case Rejection::degenerate_energy: return "degenerate-energy";
  }
  return "unknown";
}

const Task& Dataset::by_id(std::uint64_t id) const {
  for (const auto& t : tasks)
    if (t.id == id) return t;
  throw std::out_of_range("no task with id " + std::to_string(id));
}

namespace {

std::vector<int> boundary_nodes(const fem::Discretization& d) {
  std::vector<int> nodes;
  for (int ix = 0; ix <= d.nelx; ++ix)
    for (int iy = 0; iy <= d.nely; ++iy)
      if (ix == 0 || iy == 0 || ix == d.nelx || iy == d.nely) nodes.push_back(d.node(ix, iy));
  return nodes;
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform_angle(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng); }

double uniform_vstar(Rng& rng) { return std::uniform_real_distribution<double>(0.1, 0.5)(rng); }

// Segment length in elements, 10-50% of `side`, at least one element.
int segment_length(Rng& rng, int side) {
  const int lo = std::max(1, static_cast<int>(std::ceil(0.1 * side)));
  const int hi = std::max(lo, static_cast<int>(std::floor(0.5 * side)));
  return uniform_int(rng, lo, hi);
}

}  // namespace

Task generate_point_task(Rng& rng, const fem::Discretization& disc) {
  Task t;
  t.disc = disc;
  std::vector<double> weights(static_cast<std::size_t>(disc.num_nodes()), 1.0);
  for (int n : boundary_nodes(disc)) weights[static_cast<std::size_t>(n)] = 4.0;
  std::discrete_distribution<int> pick_node(weights.begin(), weights.end());

  std::vector<std::pair<int, double>> loads;
  const int nloads = uniform_int(rng, 1, 3);
  for (int i = 0; i < nloads; ++i) {
    const int node = pick_node(rng);
    fem::BoundaryConditions::add_point_load(loads, node, 1.0, uniform_angle(rng));
  }

  const auto boundary = boundary_nodes(disc);
  std::vector<int> fixed;
  const int nsupports = uniform_int(rng, 1, 4);
  for (int i = 0; i < nsupports; ++i) {
    const int node = boundary[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(boundary.size()) - 1))];
    fixed.push_back(2 * node);
    fixed.push_back(2 * node + 1);
  }
  t.bc = fem::BoundaryConditions::make(std::move(fixed), loads);
  t.vstar = uniform_vstar(rng);
  return t;
}

Task generate_line_task(Rng& rng, const fem::Discretization& disc) {
  Task t;
  t.disc = disc;

  // supports: a segment on one of the four sides
  std::vector<int> fixed;
  const int side = uniform_int(rng, 0, 3);  // 0 left, 1 right, 2 top, 3 bottom
  const bool vertical_side = side < 2;
  const int span = vertical_side ? disc.nely : disc.nelx;
  const int len = segment_length(rng, span);
  const int start = uniform_int(rng, 0, span - len);
  for (int k = start; k <= start + len; ++k) {
    int node;
    if (vertical_side)
      node = disc.node(side == 0 ? 0 : disc.nelx, k);
    else
      node = disc.node(k, side == 2 ? 0 : disc.nely);
    fixed.push_back(2 * node);
    fixed.push_back(2 * node + 1);
  }

  // load: a horizontal or vertical node line anywhere in the domain
  const bool vertical_load = uniform_int(rng, 0, 1) == 1;
  const int load_span = vertical_load ? disc.nely : disc.nelx;
  const int load_len = segment_length(rng, load_span);
  const int load_start = uniform_int(rng, 0, load_span - load_len);
  const int line = uniform_int(rng, 0, vertical_load ? disc.nelx : disc.nely);
  const double angle = uniform_angle(rng);
  const double share = 1.0 / (load_len + 1);
  std::vector<std::pair<int, double>> loads;
  for (int k = load_start; k <= load_start + load_len; ++k) {
    const int node = vertical_load ? disc.node(line, k) : disc.node(k, line);
    fem::BoundaryConditions::add_point_load(loads, node, share, angle);
  }
  t.bc = fem::BoundaryConditions::make(std::move(fixed), loads);
  t.vstar = uniform_vstar(rng);
  return t;
}

Validation validate_annotate(Task candidate, const fem::MaterialModel& mat) {
  Validation out;
  if (candidate.bc.fixed_dofs.empty()) {
    out.reason = Rejection::singular;  // nothing holds the body in place
    return out;
  }
  try {
    candidate.bc.validate(candidate.disc);
  } catch (const std::invalid_argument&) {
    out.reason = Rejection::invalid_bc;
    return out;
  }
  fem::FieldState state;
  try {
    fem::FeModel model(candidate.disc, candidate.bc, mat);
    const std::vector<double> uniform(static_cast<std::size_t>(candidate.disc.num_elements()), candidate.vstar);
    state = model.solve(uniform);
  } catch (const fem::SingularSystemError&) {
    out.reason = Rejection::singular;
    return out;
  } catch (const fem::SolverDivergedError&) {
    out.reason = Rejection::singular;
    return out;
  }
  if (!std::isfinite(state.compliance) || !state.energies.allFinite()) {
    out.reason = Rejection::non_finite;
    return out;
  }
  if (state.compliance > kMaxReferenceCompliance) {
    out.reason = Rejection::excessive_compliance;
    return out;
  }
  if (!(state.compliance > 0.0)) {
    out.reason = Rejection::degenerate_energy;
    return out;
  }
  try {
    candidate.energy = filters::preprocess_strain_energy(filters::view(state.energies));
  } catch (const filters::DegenerateFieldError&) {
    out.reason = Rejection::degenerate_energy;
    return out;
  }
  candidate.c_ref = state.compliance;
  out.task = std::move(candidate);
  return out;
}

std::uint64_t task_id(Regime regime, std::uint64_t seed, std::uint64_t index) {
  return substream_seed(seed, "task-id:" + to_string(regime), index);
}

Dataset build_dataset(Regime regime, std::size_t n, std::uint64_t seed, const fem::Discretization& disc, int jobs) {
  Dataset ds;
  ds.manifest.regime = regime;
  ds.manifest.seed = seed;
  ds.manifest.disc = disc;
  const std::string stream = "taskgen:" + to_string(regime);

  constexpr std::size_t kWindow = 1000;
  std::vector<bool> window;  // acceptance flags of recent candidates
  std::uint64_t next = 0;
  const std::size_t block = static_cast<std::size_t>(std::max(1, jobs)) * 8;
  while (ds.tasks.size() < n) {
    std::vector<Validation> results(block);
    parallel_for(block, jobs, [&](std::size_t i) {
      Rng rng = make_rng(seed, stream, next + i);
      Task t = regime == Regime::out_of_dist ? generate_line_task(rng, disc) : generate_point_task(rng, disc);
      t.id = task_id(regime, seed, next + i);
      t.regime = regime;
      results[i] = validate_annotate(std::move(t));
    });
    for (std::size_t i = 0; i < block && ds.tasks.size() < n; ++i) {
      ++ds.manifest.candidates;
      auto& r = results[i];
      ds.manifest.rejections[static_cast<std::size_t>(r.reason)] += r.task ? 0 : 1;
      window.push_back(r.task.has_value());
      if (r.task) ds.tasks.push_back(std::move(*r.task));
      if (window.size() >= kWindow) {
        const auto accepted = std::count(window.end() - kWindow, window.end(), true);
        if (accepted * 100 < static_cast<long>(kWindow))
          throw GenerationStallError("fewer than 1% of the last 1000 candidates validated");
      }
    }
    next += block;
  }
  ds.manifest.count = ds.tasks.size();
  return ds;
}

}  // namespace metato::taskgen
