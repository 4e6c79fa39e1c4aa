#include "metato/config.hpp"

#include "metato/binary_io.hpp"
#include "metato/rng.hpp"

#include <charconv>
#include <cmath>

namespace metato {

std::vector<RunConfig::Field> RunConfig::fields() {
  return {
      {"seed", &seed},
      {"mesh.nelx", &nelx},
      {"mesh.nely", &nely},
      {"mesh.fine_nelx", &fine_nelx},
      {"mesh.fine_nely", &fine_nely},
      {"net.conditioned", &conditioned},
      {"net.width", &width},
      {"net.hidden_layers", &hidden_layers},
      {"net.omega_meta", &omega_meta},
      {"net.omega_standard", &omega_standard},
      {"meta.iterations", &meta_iterations},
      {"meta.batch", &meta_batch},
      {"meta.inner_steps", &inner_steps},
      {"meta.inner_lr", &inner_lr},
      {"meta.outer_lr", &outer_lr},
      {"meta.validation_interval", &validation_interval},
      {"meta.validation_steps", &validation_steps},
      {"pretrain.epochs", &pretrain_epochs},
      {"pretrain.lr", &pretrain_lr},
      {"optim.lr", &lr},
      {"optim.stop_eps", &stop_eps},
      {"optim.min_iters", &min_iters},
      {"optim.max_iters", &max_iters},
      {"optim.filter_radius", &filter_radius},
      {"optim.amplification", &amplification},
      {"mma.move", &mma_move},
      {"mma.asyinit", &mma_asyinit},
      {"mma.asyincr", &mma_asyincr},
      {"mma.asydecr", &mma_asydecr},
      {"out_dir", &out_dir},
  };
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

struct Assign {
  const std::string& key;
  const std::string& value;
  void operator()(std::uint64_t* p) const { *p = parse_number<std::uint64_t>(key, value); }
  void operator()(int* p) const { *p = parse_number<int>(key, value); }
  void operator()(double* p) const {
    *p = parse_number<double>(key, value);
    if (!std::isfinite(*p)) throw ConfigError("non-finite value for " + key);
  }
  void operator()(bool* p) const {
    if (value == "true")
      *p = true;
    else if (value == "false")
      *p = false;
    else
      throw ConfigError("expected true or false for " + key);
  }
  void operator()(std::string* p) const { *p = value; }
};

struct Show {
  std::string operator()(std::uint64_t* p) const { return std::to_string(*p); }
  std::string operator()(int* p) const { return std::to_string(*p); }
  std::string operator()(double* p) const { return format_double(*p); }
  std::string operator()(bool* p) const { return *p ? "true" : "false"; }
  std::string operator()(std::string* p) const { return *p; }
};

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (auto& f : fields())
    if (key == f.key) {
      std::visit(Assign{key, value}, f.slot);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::get(const std::string& key) const {
  for (auto& f : const_cast<RunConfig*>(this)->fields())
    if (key == f.key) return std::visit(Show{}, f.slot);
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(nelx > 0 && nely > 0 && fine_nelx > 0 && fine_nely > 0, "mesh dimensions must be positive");
  require(width > 0 && hidden_layers >= 0, "network shape must be positive");
  require(omega_meta > 0 && omega_standard > 0, "omega must be positive");
  require(meta_iterations >= 0 && meta_batch > 0 && inner_steps >= 0, "bad meta schedule");
  require(inner_lr > 0 && outer_lr > 0 && pretrain_lr > 0 && lr > 0, "learning rates must be positive");
  require(validation_interval >= 0 && validation_steps >= 0, "bad validation schedule");
  require(pretrain_epochs >= 0, "bad pretraining epochs");
  require(stop_eps > 0 && min_iters >= 1 && max_iters >= min_iters, "bad stopping rule");
  require(amplification > 0, "amplification must be positive");
  require(mma_move > 0 && mma_asyinit > 0 && mma_asyincr >= 1 && mma_asydecr > 0 && mma_asydecr <= 1,
          "bad MMA settings");
  require(!out_dir.empty(), "out_dir is empty");
}

nn::NetworkConfig RunConfig::network(double omega) const {
  nn::NetworkConfig c;
  c.input_dim = conditioned ? 3 : 2;
  c.width = width;
  c.hidden_layers = hidden_layers;
  c.omega0 = omega;
  return c;
}

meta::MetaConfig RunConfig::meta_config() const {
  meta::MetaConfig c;
  c.iterations = meta_iterations;
  c.batch_size = meta_batch;
  c.inner_steps = inner_steps;
  c.inner_lr = inner_lr;
  c.outer_lr = outer_lr;
  c.validation_interval = validation_interval;
  c.validation_steps = validation_steps;
  c.seed = substream_seed(seed, "meta", 0);
  return c;
}

meta::PretrainConfig RunConfig::pretrain_config() const {
  meta::PretrainConfig c;
  c.epochs = pretrain_epochs;
  c.lr = pretrain_lr;
  c.seed = substream_seed(seed, "pretrain", 0);
  return c;
}

optim::OptimizerSettings RunConfig::optimizer() const {
  optim::OptimizerSettings s;
  s.lr = lr;
  s.stop.eps = stop_eps;
  s.stop.min_iters = min_iters;
  s.stop.max_iters = max_iters;
  s.filter_radius = filter_radius;
  s.amplification = amplification;
  s.mma.move = mma_move;
  s.mma.asyinit = mma_asyinit;
  s.mma.asyincr = mma_asyincr;
  s.mma.asydecr = mma_asydecr;
  return s;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::size_t start = 0;
  int lineno = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++lineno;
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  RunConfig copy = cfg;
  for (auto& f : copy.fields()) out += std::string(f.key) + " = " + std::visit(Show{}, f.slot) + "\n";
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(e.what());
  }
}

}  // namespace metato
