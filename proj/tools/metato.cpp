// metato: task generation, meta-training, pretraining, optimization,
// benchmarking, profiles and rendering.
//
// Exit codes: 0 success, 2 configuration or input error, 3 task generation
// stalled, 4 runtime failure.

#include "metato/binary_io.hpp"
#include "metato/checkpoint.hpp"
#include "metato/config.hpp"
#include "metato/dataset.hpp"
#include "metato/eval.hpp"
#include "metato/meta.hpp"
#include "metato/parallel.hpp"
#include "metato/rng.hpp"
#include "metato/taskgen.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace metato;
using nn::load_checkpoint;
using nn::save_checkpoint;
using taskgen::load_dataset;
using taskgen::save_dataset;
using taskgen::dataset_to_json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutDirEnv = "METATO_OUT_DIR";

// command arguments that end up in the manifest, in insertion order
using Args = std::vector<std::pair<std::string, std::string>>;

std::string arg(const Args& args, const std::string& key, const std::string& fallback = "") {
  for (const auto& [k, v] : args)
    if (k == key) return v;
  return fallback;
}

bool has_arg(const Args& args, const std::string& key) {
  for (const auto& [k, v] : args)
    if (k == key) return true;
  return false;
}

std::string input_path(const std::string& p) {
  if (!fs::exists(p)) throw ConfigError("no such file: " + p);
  return fs::absolute(p).lexically_normal().string();
}

std::string manifest_text(const std::string& command, const Args& args, const RunConfig& cfg) {
  std::string out = "# metato manifest v1\ncommand = " + command + "\nversion = " + kVersion + "\n";
  for (const auto& [k, v] : args) out += "arg." + k + " = " + v + "\n";
  std::istringstream lines(serialize_config(cfg));
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("out_dir ", 0) != 0) out += line + "\n";
  return out;
}

void write_manifest(const fs::path& path, const std::string& command, const Args& args, const RunConfig& cfg) {
  write_file(path, manifest_text(command, args, cfg));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const taskgen::Task& select_task(const taskgen::Dataset& ds, const std::string& key) {
  std::uint64_t v = 0;
  try {
    std::size_t used = 0;
    v = std::stoull(key, &used);
    if (used != key.size()) throw std::invalid_argument(key);
  } catch (const std::exception&) {
    throw ConfigError("task id must be an unsigned integer: " + key);
  }
  for (const auto& t : ds.tasks)
    if (t.id == v) return t;
  // small values address tasks by position
  if (v < ds.tasks.size()) return ds.tasks[v];
  throw ConfigError("no task with id or index " + key);
}

nn::NetworkParameters standard_params(const RunConfig& cfg, std::uint64_t stream_index) {
  auto p = nn::init_standard(cfg.network(cfg.omega_standard), substream_seed(cfg.seed, "standard-init", stream_index));
  return p;
}

int cmd_gen_tasks(const RunConfig& cfg, const Args& args, int jobs) {
  const auto regime = taskgen::parse_regime(arg(args, "regime"));
  const long n = std::stol(arg(args, "n"));
  if (n <= 0) throw ConfigError("--n must be positive");
  const auto disc = regime == taskgen::Regime::cross_res ? cfg.fine_mesh() : cfg.mesh();
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = taskgen::build_dataset(regime, static_cast<std::size_t>(n), cfg.seed, disc, jobs);
  const fs::path out = fs::path(cfg.out_dir) / (taskgen::to_string(regime) + ".tasks");
  save_dataset(out, ds);
  if (arg(args, "json") == "true") write_file(fs::path(out).replace_extension(".json"), dataset_to_json(ds));
  write_manifest(fs::path(out) += ".manifest", "gen-tasks", args, cfg);
  std::cout << "wrote " << ds.tasks.size() << " tasks to " << out.string() << " (" << ds.manifest.candidates
            << " candidates, " << seconds_since(t0) << " s)\n";
  for (std::size_t k = 1; k < taskgen::kRejectionKinds; ++k)
    if (ds.manifest.rejections[k])
      std::cout << "  rejected " << taskgen::to_string(static_cast<taskgen::Rejection>(k)) << ": "
                << ds.manifest.rejections[k] << "\n";
  return 0;
}

int cmd_meta_train(const RunConfig& cfg, const Args& args, int jobs) {
  const auto train = load_dataset(arg(args, "train"));
  taskgen::Dataset validation;
  if (has_arg(args, "validation")) validation = load_dataset(arg(args, "validation"));
  auto mc = cfg.meta_config();
  mc.jobs = jobs;
  const auto init = nn::init_standard(cfg.network(cfg.omega_meta), substream_seed(cfg.seed, "meta-init", 0));
  const fs::path dir = fs::path(cfg.out_dir) / "meta";
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  auto result = meta::reptile_train(
      train.tasks, validation.tasks, mc, init, cfg.optimizer(), [&](const meta::Checkpoint& cp, const meta::LogRow& row) {
        char name[32];
        std::snprintf(name, sizeof name, "ckpt-%06d.ckpt", cp.iteration);
        save_checkpoint(dir / name, cp.params);
        std::cout << "iteration " << cp.iteration << " inner " << row.inner_loss << " validation "
                  << cp.validation_loss << " (" << row.wall_seconds << " s)\n";
      });
  std::string log = "# metalog v1\niteration,inner_loss,validation_loss\n";
  for (const auto& r : result.log) log += std::to_string(r.iteration) + "," + fmt(r.inner_loss) + "," + fmt(r.validation_loss) + "\n";
  write_file(dir / "log.csv", log);
  save_checkpoint(dir / "final.ckpt", result.final_params);
  if (!result.checkpoints.empty()) {
    const auto& best = result.checkpoints[result.best];
    save_checkpoint(dir / "best.ckpt", best.params);
    std::cout << "best checkpoint: iteration " << best.iteration << " validation " << best.validation_loss << "\n";
  } else {
    save_checkpoint(dir / "best.ckpt", result.final_params);
  }
  write_manifest(dir / "meta-train.manifest", "meta-train", args, cfg);
  std::cout << "failed adaptations: " << result.failed_adaptations << ", " << seconds_since(t0) << " s\n";
  return 0;
}

int cmd_pretrain(const RunConfig& cfg, const Args& args, int) {
  if (!cfg.conditioned) throw ConfigError("identity pretraining needs net.conditioned = true");
  const auto train = load_dataset(arg(args, "train"));
  const auto init = nn::init_standard(cfg.network(cfg.omega_meta), substream_seed(cfg.seed, "pretrain-init", 0));
  const fs::path dir = fs::path(cfg.out_dir) / "pretrain";
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> losses;
  const auto params = meta::pretrain_identity(train.tasks, cfg.pretrain_config(), init, &losses);
  save_checkpoint(dir / "pretrained.ckpt", params);
  std::string log = "# pretrainlog v1\nepoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) log += std::to_string(e + 1) + "," + fmt(losses[e]) + "\n";
  if (has_arg(args, "holdout")) {
    const auto holdout = load_dataset(arg(args, "holdout"));
    const double mse = meta::identity_mse(params, holdout.tasks);
    log += "holdout," + fmt(mse) + "\n";
    std::cout << "held-out identity MSE " << mse << "\n";
  }
  write_file(dir / "log.csv", log);
  write_manifest(dir / "pretrain.manifest", "pretrain", args, cfg);
  std::cout << "pretrained " << losses.size() << " epochs in " << seconds_since(t0) << " s\n";
  return 0;
}

// "standard", or a checkpoint path
std::optional<nn::NetworkParameters> resolve_init(const RunConfig& cfg, const std::string& init, std::uint64_t task_id,
                                                  bool allow_none) {
  if (init == "standard") return standard_params(cfg, task_id);
  if (init == "uniform") {
    if (!allow_none) throw ConfigError("--init uniform only applies to --method mma");
    return std::nullopt;
  }
  return load_checkpoint(init);
}

int cmd_optimize(const RunConfig& cfg, const Args& args, int) {
  const auto ds = load_dataset(arg(args, "task-file"));
  const auto& task = select_task(ds, arg(args, "task-id"));
  const std::string method = arg(args, "method", "neural");
  if (method != "neural" && method != "mma") throw ConfigError("--method must be neural or mma");
  const std::string init = arg(args, "init", method == "mma" ? "uniform" : "standard");
  auto params = resolve_init(cfg, init, task.id, method == "mma");
  const auto settings = cfg.optimizer();

  optim::RunRecord rec;
  if (method == "neural") {
    rec = optim::neural_optimize(task, std::move(*params), settings).first;
  } else {
    std::optional<Eigen::VectorXd> x0;
    if (params) x0 = optim::network_initial_design(task, *params, settings);
    rec = optim::standard_optimize(task, settings, x0);
  }
  const std::string label = method + "-" + (init == "standard" || init == "uniform" ? init : fs::path(init).stem().string());
  const fs::path dir = fs::path(cfg.out_dir) / "optimize" / std::to_string(task.id);
  write_file(dir / (label + ".csv"), eval::run_record_to_csv(task.id, label, rec));
  const auto to_field = [&](const Eigen::VectorXd& v) {
    return eval::DensityField{task.disc.nelx, task.disc.nely, std::vector<double>(v.data(), v.data() + v.size())};
  };
  write_file(dir / (label + ".density"), eval::density_to_text(to_field(rec.design)));
  write_file(dir / (label + "-binary.density"), eval::density_to_text(to_field(rec.binary)));
  write_manifest(dir / (label + ".manifest"), "optimize", args, cfg);
  std::cout << "task " << task.id << " " << label << ": " << rec.iterations << " iterations ("
            << optim::to_string(rec.reason) << "), c_cont " << rec.c_cont << ", c_thresh " << rec.c_thresh << ", "
            << rec.wall_seconds << " s\n";
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_bench(const RunConfig& cfg, const Args& args, int jobs) {
  const auto ds = load_dataset(arg(args, "tasks"));
  std::optional<nn::NetworkParameters> meta_params, pre_params;
  if (has_arg(args, "meta")) meta_params = load_checkpoint(arg(args, "meta"));
  if (has_arg(args, "pretrained")) pre_params = load_checkpoint(arg(args, "pretrained"));

  std::string default_methods = "standard";
  if (meta_params) default_methods += ",meta";
  if (pre_params) default_methods += ",pretrained";
  default_methods += ",mma";
  if (meta_params) default_methods += ",mma-meta";

  std::vector<eval::MethodSpec> methods;
  for (const auto& name : split_list(arg(args, "methods", default_methods))) {
    eval::MethodSpec m;
    m.name = name;
    if (name == "standard") {
      m.initializer = [&cfg](const taskgen::Task& t) { return standard_params(cfg, t.id); };
    } else if (name == "meta" || name == "pretrained") {
      auto& p = name == "meta" ? meta_params : pre_params;
      if (!p) throw ConfigError("method " + name + " needs --" + name);
      m.params = p;
    } else if (name == "mma") {
      m.kind = eval::MethodKind::mma;
    } else if (name == "mma-meta") {
      if (!meta_params) throw ConfigError("method mma-meta needs --meta");
      m.kind = eval::MethodKind::mma;
      m.params = meta_params;
    } else {
      throw ConfigError("unknown method '" + name + "'");
    }
    methods.push_back(std::move(m));
  }

  const fs::path dir = fs::path(cfg.out_dir) / "bench";
  eval::BenchmarkOptions opts;
  opts.settings = cfg.optimizer();
  opts.jobs = jobs;
  opts.results_path = dir / "results.csv";
  opts.on_result = [](const eval::ResultRow& r, double wall) {
    std::cout << r.task_id << " " << r.method << " " << r.iterations << " " << r.stop_reason << " (" << wall
              << " s)\n";
  };
  const auto outcome = eval::run_benchmark(ds.tasks, methods, opts);

  std::string stats = "# threshold v1\nmethod,mean_percent,included,excluded,failed\n";
  for (const auto& s : eval::threshold_stats(outcome.table))
    stats += s.method + "," + fmt(s.mean_percent) + "," + std::to_string(s.included) + "," +
             std::to_string(s.excluded) + "," + std::to_string(s.failed) + "\n";
  write_file(dir / "threshold.csv", stats);
  write_manifest(dir / "bench.manifest", "bench", args, cfg);
  std::cout << outcome.computed << " pairs computed, " << outcome.skipped << " reused\n";
  return 0;
}

int cmd_profile(const RunConfig& cfg, const Args& args, int) {
  const auto table = eval::load_results(arg(args, "results"));
  const auto metric = eval::parse_metric(arg(args, "metric", "iterations"));
  const auto curves = eval::performance_profile(table, metric);
  const fs::path out = fs::path(cfg.out_dir) / ("profile-" + eval::to_string(metric) + ".csv");
  write_file(out, eval::profile_to_csv(curves));
  write_manifest(fs::path(out) += ".manifest", "profile", args, cfg);
  for (const auto& c : curves) std::cout << c.method << ": wins " << c.at(1.0) << ", at 1.5 " << c.at(1.5) << "\n";
  return 0;
}

int cmd_render(const RunConfig& cfg, const Args& args, int) {
  const fs::path in = arg(args, "input");
  const auto field = eval::density_from_text(read_file(in));
  const fs::path out = fs::path(cfg.out_dir) / (in.stem().string() + ".pgm");
  write_file(out, eval::render_pgm(field));
  write_manifest(fs::path(out) += ".manifest", "render", args, cfg);
  std::cout << "wrote " << out.string() << " (" << field.nelx << "x" << field.nely << ")\n";
  return 0;
}

int dispatch(const std::string& command, const RunConfig& cfg, const Args& args, int jobs) {
  cfg.validate();
  if (command == "gen-tasks") return cmd_gen_tasks(cfg, args, jobs);
  if (command == "meta-train") return cmd_meta_train(cfg, args, jobs);
  if (command == "pretrain") return cmd_pretrain(cfg, args, jobs);
  if (command == "optimize") return cmd_optimize(cfg, args, jobs);
  if (command == "bench") return cmd_bench(cfg, args, jobs);
  if (command == "profile") return cmd_profile(cfg, args, jobs);
  if (command == "render") return cmd_render(cfg, args, jobs);
  throw ConfigError("unknown command '" + command + "'");
}

struct Replay {
  std::string command;
  Args args;
  RunConfig cfg;
};

Replay parse_manifest(const std::string& text) {
  Replay r;
  std::string config_text;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (line.empty() || line[0] == '#') continue;
    if (eq == std::string::npos) throw ConfigError("bad manifest line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "command")
      r.command = value;
    else if (key == "version")
      continue;
    else if (key.rfind("arg.", 0) == 0)
      r.args.emplace_back(key.substr(4), value);
    else
      config_text += line + "\n";
  }
  if (r.command.empty()) throw ConfigError("manifest has no command");
  r.cfg = parse_config(config_text);
  return r;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "override one config key, key=value (repeatable)");
  sub->add_option("--out", c.out, "output directory (overrides " + std::string(kOutDirEnv) + " and out_dir)");
  sub->add_option("--seed", c.seed, "root seed");
  sub->add_option("--jobs", c.jobs, "worker threads (default: available cores)");
}

RunConfig resolve_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned initializations for neural topology optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  Args args;
  std::string s_regime, s_train, s_validation, s_holdout, s_task_file, s_task_id, s_init, s_method, s_tasks, s_meta,
      s_pretrained, s_methods, s_results, s_metric, s_input, s_manifest;
  long n_tasks = 0;
  bool json = false;

  auto* gen = app.add_subcommand("gen-tasks", "generate a validated task dataset");
  gen->add_option("--regime", s_regime, "train | validation | in-dist | out-of-dist | cross-res")->required();
  gen->add_option("--n", n_tasks, "number of tasks")->required();
  gen->add_flag("--json", json, "also write a JSON export");

  auto* mt = app.add_subcommand("meta-train", "Reptile meta-training");
  mt->add_option("--train", s_train, "training tasks")->required()->check(CLI::ExistingFile);
  mt->add_option("--validation", s_validation, "validation tasks for checkpoint selection")->check(CLI::ExistingFile);

  auto* pt = app.add_subcommand("pretrain", "strain-energy identity pretraining");
  pt->add_option("--train", s_train, "training tasks")->required()->check(CLI::ExistingFile);
  pt->add_option("--holdout", s_holdout, "held-out tasks for the final MSE")->check(CLI::ExistingFile);

  auto* opt = app.add_subcommand("optimize", "optimize one task");
  opt->add_option("--task-file", s_task_file, "dataset")->required()->check(CLI::ExistingFile);
  opt->add_option("--task-id", s_task_id, "task id, or position in the dataset")->required();
  opt->add_option("--method", s_method, "neural | mma")->default_val("neural");
  opt->add_option("--init", s_init, "standard | uniform (mma) | checkpoint path");

  auto* bench = app.add_subcommand("bench", "benchmark methods over a dataset (resumable)");
  bench->add_option("--tasks", s_tasks, "test tasks")->required()->check(CLI::ExistingFile);
  bench->add_option("--meta", s_meta, "meta-learned checkpoint")->check(CLI::ExistingFile);
  bench->add_option("--pretrained", s_pretrained, "pretrained checkpoint")->check(CLI::ExistingFile);
  bench->add_option("--methods", s_methods, "comma list of standard,meta,pretrained,mma,mma-meta");

  auto* prof = app.add_subcommand("profile", "performance profile of a results table");
  prof->add_option("results", s_results, "results CSV")->required()->check(CLI::ExistingFile);
  prof->add_option("--metric", s_metric, "iterations | c_cont | c_thresh")->default_val("iterations");

  auto* render = app.add_subcommand("render", "render a density file as a PGM image");
  render->add_option("input", s_input, "density file")->required()->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", s_manifest, "manifest file")->required()->check(CLI::ExistingFile);

  for (auto* sub : {gen, mt, pt, opt, bench, prof, render, replay}) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const int jobs = common.jobs > 0 ? common.jobs : default_jobs();
    if (replay->parsed()) {
      auto r = parse_manifest(read_file(s_manifest));
      if (const char* env = std::getenv(kOutDirEnv); env && *env) r.cfg.out_dir = env;
      if (!common.out.empty()) r.cfg.out_dir = common.out;
      return dispatch(r.command, r.cfg, r.args, jobs);
    }

    const RunConfig cfg = resolve_config(common);
    std::string command;
    if (gen->parsed()) {
      command = "gen-tasks";
      args = {{"regime", s_regime}, {"n", std::to_string(n_tasks)}, {"json", json ? "true" : "false"}};
    } else if (mt->parsed()) {
      command = "meta-train";
      args = {{"train", input_path(s_train)}};
      if (!s_validation.empty()) args.emplace_back("validation", input_path(s_validation));
    } else if (pt->parsed()) {
      command = "pretrain";
      args = {{"train", input_path(s_train)}};
      if (!s_holdout.empty()) args.emplace_back("holdout", input_path(s_holdout));
    } else if (opt->parsed()) {
      command = "optimize";
      args = {{"task-file", input_path(s_task_file)}, {"task-id", s_task_id}, {"method", s_method}};
      if (!s_init.empty())
        args.emplace_back("init", s_init == "standard" || s_init == "uniform" ? s_init : input_path(s_init));
    } else if (bench->parsed()) {
      command = "bench";
      args = {{"tasks", input_path(s_tasks)}};
      if (!s_meta.empty()) args.emplace_back("meta", input_path(s_meta));
      if (!s_pretrained.empty()) args.emplace_back("pretrained", input_path(s_pretrained));
      if (!s_methods.empty()) args.emplace_back("methods", s_methods);
    } else if (prof->parsed()) {
      command = "profile";
      args = {{"results", input_path(s_results)}, {"metric", s_metric}};
    } else if (render->parsed()) {
      command = "render";
      args = {{"input", input_path(s_input)}};
    }
    return dispatch(command, cfg, args, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const taskgen::GenerationStallError& e) {
    std::cerr << "task generation stalled: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
