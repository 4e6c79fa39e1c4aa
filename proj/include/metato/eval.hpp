#pragma once

// Benchmark harness: results tables, Dolan-More performance profiles,
// thresholding statistics and the on-disk formats of run records and
// density fields.

#include "metato/network.hpp"
#include "metato/pipeline.hpp"
#include "metato/taskgen.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace metato::eval {

struct ResultRow {
  std::uint64_t task_id = 0;
  std::string method;
  int iterations = 0;
  std::string stop_reason;  // "criterion", "budget" or "failed"
  double c_cont = 0.0;
  double c_thresh = 0.0;

  bool failed() const { return stop_reason == "failed"; }
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  std::vector<std::string> methods() const;        // first-appearance order
  std::vector<std::uint64_t> task_ids() const;     // first-appearance order
  const ResultRow* find(std::uint64_t task_id, const std::string& method) const;
  // every method has a row for every task, and no pair appears twice
  void check_rectangular() const;
};

class EmptyTableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CSV: "# results v1" then a column header line then one row per pair.
std::string results_header();
std::string format_row(const ResultRow& row);
std::string results_to_csv(const ResultsTable& table);
ResultsTable results_from_csv(const std::string& text);
ResultsTable load_results(const std::filesystem::path& path);
void save_results(const std::filesystem::path& path, const ResultsTable& table);

enum class Metric { iterations, c_cont, c_thresh };
std::string to_string(Metric m);
Metric parse_metric(const std::string& s);
double metric_value(const ResultRow& row, Metric m);

struct ProfileCurve {
  std::string method;
  Metric metric = Metric::iterations;
  std::vector<double> taus;       // sorted finite ratios where the curve steps
  std::vector<double> fractions;  // curve value from taus[i] up to taus[i + 1]
  std::size_t num_tasks = 0;

  // fraction of tasks with ratio <= tau
  double at(double tau) const;
};

// One curve per method in table order. Failed runs get an infinite ratio.
std::vector<ProfileCurve> performance_profile(const ResultsTable& table, Metric metric);

std::string profile_to_csv(const std::vector<ProfileCurve>& curves);

struct ThresholdStats {
  std::string method;
  double mean_percent = 0.0;  // negative means thresholding lowered compliance
  int included = 0;
  int excluded = 0;  // |change| above the cutoff
  int failed = 0;
};

constexpr double kThresholdCutoffPercent = 50.0;

std::vector<ThresholdStats> threshold_stats(const ResultsTable& table);

enum class MethodKind { neural, mma };

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::neural;
  // neural: the initialization (required). mma: optional network whose
  // initial design seeds the optimizer; uniform V* when absent.
  std::optional<nn::NetworkParameters> params;
  // overrides params with a per-task initialization when set
  std::function<nn::NetworkParameters(const taskgen::Task&)> initializer;
};

struct BenchmarkOptions {
  optim::OptimizerSettings settings;
  int jobs = 1;
  std::filesystem::path results_path;  // empty disables persistence
  std::function<void(const ResultRow&, double wall_seconds)> on_result;
};

struct BenchmarkOutcome {
  ResultsTable table;
  int computed = 0;  // pairs run in this call
  int skipped = 0;   // pairs already present in results_path
};

ResultRow run_pair(const taskgen::Task& task, const MethodSpec& method, const optim::OptimizerSettings& settings,
                   double* wall_seconds = nullptr);

// Runs every (task, method) pair not yet present in results_path, appending
// rows as they finish, then rewrites the file in dataset x method order.
BenchmarkOutcome run_benchmark(const std::vector<taskgen::Task>& tasks, const std::vector<MethodSpec>& methods,
                               const BenchmarkOptions& opts);

// Run record CSV: per-iteration normalized losses plus a summary row.
std::string run_record_to_csv(std::uint64_t task_id, const std::string& method, const optim::RunRecord& rec);

// Density field text file: "# density v1", "nelx,nely", then one value per
// element in element order.
struct DensityField {
  int nelx = 0;
  int nely = 0;
  std::vector<double> values;
};

std::string density_to_text(const DensityField& field);
DensityField density_from_text(const std::string& text);

// Binary PGM, one pixel per element, 0 solid and 255 void, image row 0 at the
// top of the mesh.
std::string render_pgm(const DensityField& field);

}  // namespace metato::eval
