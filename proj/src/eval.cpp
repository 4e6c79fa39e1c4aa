#include "metato/eval.hpp"

#include "metato/binary_io.hpp"
#include "metato/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

namespace metato::eval {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("bad number '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// complete lines only; a trailing fragment without a newline is ignored
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) break;
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = pos + 1;
  }
  return out;
}

constexpr const char* kResultsVersion = "# results v1";
constexpr const char* kResultsColumns = "task_id,method,iterations,stop_reason,c_cont,c_thresh";

}  // namespace

std::vector<std::string> ResultsTable::methods() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  return out;
}

std::vector<std::uint64_t> ResultsTable::task_ids() const {
  std::vector<std::uint64_t> out;
  std::set<std::uint64_t> seen;
  for (const auto& r : rows)
    if (seen.insert(r.task_id).second) out.push_back(r.task_id);
  return out;
}

const ResultRow* ResultsTable::find(std::uint64_t task_id, const std::string& method) const {
  for (const auto& r : rows)
    if (r.task_id == task_id && r.method == method) return &r;
  return nullptr;
}

void ResultsTable::check_rectangular() const {
  const auto ms = methods();
  const auto ts = task_ids();
  std::set<std::pair<std::uint64_t, std::string>> pairs;
  for (const auto& r : rows)
    if (!pairs.insert({r.task_id, r.method}).second)
      throw std::invalid_argument("duplicate row for task " + std::to_string(r.task_id) + " method " + r.method);
  if (pairs.size() != ms.size() * ts.size()) throw std::invalid_argument("results table is not rectangular");
}

std::string results_header() { return std::string(kResultsVersion) + "\n" + kResultsColumns + "\n"; }

std::string format_row(const ResultRow& r) {
  if (r.method.find_first_of(",\n") != std::string::npos)
    throw std::invalid_argument("method name may not contain commas or newlines");
  std::string s = std::to_string(r.task_id) + "," + r.method + "," + std::to_string(r.iterations) + "," +
                  r.stop_reason + "," + fmt(r.c_cont) + "," + fmt(r.c_thresh) + "\n";
  return s;
}

std::string results_to_csv(const ResultsTable& table) {
  std::string out = results_header();
  for (const auto& r : table.rows) out += format_row(r);
  return out;
}

ResultsTable results_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != kResultsVersion || lines[1] != kResultsColumns)
    throw FormatError("not a results v1 table");
  ResultsTable table;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    if (f.size() != 6) throw FormatError("results row " + std::to_string(i + 1) + " has " + std::to_string(f.size()) + " fields");
    ResultRow r;
    r.task_id = parse_int<std::uint64_t>(f[0]);
    r.method = std::string(f[1]);
    r.iterations = parse_int<int>(f[2]);
    r.stop_reason = std::string(f[3]);
    if (r.stop_reason != "criterion" && r.stop_reason != "budget" && r.stop_reason != "failed")
      throw FormatError("unknown stop reason '" + r.stop_reason + "'");
    r.c_cont = parse_double(f[4]);
    r.c_thresh = parse_double(f[5]);
    table.rows.push_back(std::move(r));
  }
  return table;
}

ResultsTable load_results(const std::filesystem::path& path) { return results_from_csv(read_file(path)); }

void save_results(const std::filesystem::path& path, const ResultsTable& table) {
  write_file(path, results_to_csv(table));
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::iterations: return "iterations";
    case Metric::c_cont: return "c_cont";
    case Metric::c_thresh: return "c_thresh";
  }
  return "unknown";
}

Metric parse_metric(const std::string& s) {
  for (auto m : {Metric::iterations, Metric::c_cont, Metric::c_thresh})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

double metric_value(const ResultRow& row, Metric m) {
  switch (m) {
    case Metric::iterations: return row.iterations;
    case Metric::c_cont: return row.c_cont;
    case Metric::c_thresh: return row.c_thresh;
  }
  return 0.0;
}

double ProfileCurve::at(double tau) const {
  const auto it = std::upper_bound(taus.begin(), taus.end(), tau);
  if (it == taus.begin()) return 0.0;
  return fractions[static_cast<std::size_t>(it - taus.begin()) - 1];
}

std::vector<ProfileCurve> performance_profile(const ResultsTable& table, Metric metric) {
  if (table.rows.empty()) throw EmptyTableError("performance profile of an empty table");
  table.check_rectangular();
  const auto methods = table.methods();
  const auto tasks = table.task_ids();
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> ratios(methods.size());
  for (auto id : tasks) {
    std::vector<double> values(methods.size(), inf);
    double best = inf;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto* row = table.find(id, methods[m]);
      if (row->failed()) continue;
      const double v = metric_value(*row, metric);
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("non-positive " + to_string(metric) + " for task " + std::to_string(id));
      values[m] = v;
      best = std::min(best, v);
    }
    for (std::size_t m = 0; m < methods.size(); ++m)
      ratios[m].push_back(std::isfinite(values[m]) ? values[m] / best : inf);
  }

  std::vector<ProfileCurve> curves;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    ProfileCurve c;
    c.method = methods[m];
    c.metric = metric;
    c.num_tasks = tasks.size();
    auto r = ratios[m];
    std::sort(r.begin(), r.end());
    for (std::size_t i = 0; i < r.size() && std::isfinite(r[i]); ++i) {
      // the curve value at a breakpoint includes every ratio equal to it
      if (i + 1 < r.size() && r[i + 1] == r[i]) continue;
      c.taus.push_back(r[i]);
      c.fractions.push_back(static_cast<double>(i + 1) / static_cast<double>(tasks.size()));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::string profile_to_csv(const std::vector<ProfileCurve>& curves) {
  std::string out = "# profile v1\nmethod,metric,tau,fraction\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.taus.size(); ++i)
      out += c.method + "," + to_string(c.metric) + "," + fmt(c.taus[i]) + "," + fmt(c.fractions[i]) + "\n";
  return out;
}

std::vector<ThresholdStats> threshold_stats(const ResultsTable& table) {
  std::vector<ThresholdStats> out;
  for (const auto& method : table.methods()) {
    ThresholdStats s;
    s.method = method;
    double sum = 0.0;
    for (const auto& r : table.rows) {
      if (r.method != method) continue;
      if (r.failed()) {
        ++s.failed;
        continue;
      }
      const double change = 100.0 * (r.c_thresh - r.c_cont) / r.c_cont;
      if (std::abs(change) > kThresholdCutoffPercent) {
        ++s.excluded;
        continue;
      }
      sum += change;
      ++s.included;
    }
    s.mean_percent = s.included ? sum / s.included : 0.0;
    out.push_back(s);
  }
  return out;
}

ResultRow run_pair(const taskgen::Task& task, const MethodSpec& method, const optim::OptimizerSettings& settings,
                   double* wall_seconds) {
  ResultRow row;
  row.task_id = task.id;
  row.method = method.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    optim::RunRecord rec;
    std::optional<nn::NetworkParameters> params = method.params;
    if (method.initializer) params = method.initializer(task);
    if (method.kind == MethodKind::neural) {
      if (!params) throw std::invalid_argument("neural method '" + method.name + "' has no parameters");
      rec = optim::neural_optimize(task, std::move(*params), settings).first;
    } else {
      std::optional<Eigen::VectorXd> init;
      if (params) init = optim::network_initial_design(task, *params, settings);
      rec = optim::standard_optimize(task, settings, init);
    }
    row.iterations = rec.iterations;
    row.stop_reason = optim::to_string(rec.reason);
    row.c_cont = rec.c_cont;
    row.c_thresh = rec.c_thresh;
  } catch (const std::exception&) {
    row.iterations = 0;
    row.stop_reason = "failed";
    row.c_cont = std::numeric_limits<double>::quiet_NaN();
    row.c_thresh = std::numeric_limits<double>::quiet_NaN();
  }
  if (wall_seconds)
    *wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

BenchmarkOutcome run_benchmark(const std::vector<taskgen::Task>& tasks, const std::vector<MethodSpec>& methods,
                               const BenchmarkOptions& opts) {
  std::map<std::pair<std::uint64_t, std::string>, ResultRow> done;
  const bool persist = !opts.results_path.empty();
  if (persist && std::filesystem::exists(opts.results_path)) {
    for (auto& r : load_results(opts.results_path).rows) done[{r.task_id, r.method}] = std::move(r);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pending;
  BenchmarkOutcome outcome;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (done.count({tasks[t].id, methods[m].name}))
        ++outcome.skipped;
      else
        pending.push_back({t, m});
    }

  std::ofstream appender;
  if (persist && !pending.empty()) {
    // rewrite what survived so a truncated tail row is dropped before appending
    ResultsTable kept;
    for (const auto& [key, row] : done) kept.rows.push_back(row);
    save_results(opts.results_path, kept);
    appender.open(opts.results_path, std::ios::app | std::ios::binary);
    if (!appender) throw std::runtime_error("cannot append to " + opts.results_path.string());
  }

  std::mutex lock;
  parallel_for(pending.size(), opts.jobs, [&](std::size_t i) {
    const auto [t, m] = pending[i];
    double wall = 0.0;
    ResultRow row = run_pair(tasks[t], methods[m], opts.settings, &wall);
    std::lock_guard<std::mutex> guard(lock);
    if (appender.is_open()) {
      appender << format_row(row);
      appender.flush();
    }
    if (opts.on_result) opts.on_result(row, wall);
    done[{row.task_id, row.method}] = std::move(row);
  });
  outcome.computed = static_cast<int>(pending.size());
  if (appender.is_open()) appender.close();

  for (const auto& task : tasks)
    for (const auto& method : methods) outcome.table.rows.push_back(done.at({task.id, method.name}));
  if (persist) save_results(opts.results_path, outcome.table);
  return outcome;
}

std::string run_record_to_csv(std::uint64_t task_id, const std::string& method, const optim::RunRecord& rec) {
  std::string out = "# runrecord v1\n";
  out += "task_id," + std::to_string(task_id) + "\nmethod," + method + "\n";
  out += "iteration,loss\n";
  for (std::size_t i = 0; i < rec.trace.size(); ++i) out += std::to_string(i + 1) + "," + fmt(rec.trace[i]) + "\n";
  out += "summary,iterations,stop_reason,c_cont,c_thresh\n";
  out += "summary," + std::to_string(rec.iterations) + "," + optim::to_string(rec.reason) + "," + fmt(rec.c_cont) +
         "," + fmt(rec.c_thresh) + "\n";
  return out;
}

std::string density_to_text(const DensityField& field) {
  if (static_cast<long>(field.values.size()) != static_cast<long>(field.nelx) * field.nely)
    throw std::invalid_argument("density size does not match mesh");
  std::string out = "# density v1\n" + std::to_string(field.nelx) + "," + std::to_string(field.nely) + "\n";
  for (double v : field.values) out += fmt(v) + "\n";
  return out;
}

DensityField density_from_text(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.size() < 2 || lines[0] != "# density v1") throw FormatError("not a density v1 file");
  const auto dims = split(lines[1], ',');
  if (dims.size() != 2) throw FormatError("bad density dimensions line");
  DensityField f;
  f.nelx = parse_int<int>(dims[0]);
  f.nely = parse_int<int>(dims[1]);
  if (f.nelx <= 0 || f.nely <= 0) throw FormatError("non-positive density dimensions");
  const std::size_t n = static_cast<std::size_t>(f.nelx) * static_cast<std::size_t>(f.nely);
  if (lines.size() != n + 2) throw FormatError("density file has wrong number of values");
  f.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = parse_double(lines[i + 2]);
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError("density value outside [0, 1]");
    f.values.push_back(v);
  }
  return f;
}

std::string render_pgm(const DensityField& field) {
  const fem::Discretization disc{field.nelx, field.nely};
  if (static_cast<int>(field.values.size()) != disc.num_elements())
    throw std::invalid_argument("density size does not match mesh");
  std::string out = "P5\n" + std::to_string(field.nelx) + " " + std::to_string(field.nely) + "\n255\n";
  for (int ey = 0; ey < field.nely; ++ey)
    for (int ex = 0; ex < field.nelx; ++ex) {
      const double rho = std::clamp(field.values[static_cast<std::size_t>(disc.element(ex, ey))], 0.0, 1.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - rho)))));
    }
  return out;
}

}  // namespace metato::eval
