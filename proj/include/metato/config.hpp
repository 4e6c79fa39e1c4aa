#pragma once

// Run configuration for the command-line tool. Plain text, one `key = value`
// per line, `#` starts a comment. Unknown keys are an error.

#include "metato/meta.hpp"
#include "metato/network.hpp"
#include "metato/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace metato {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 0;

  int nelx = 20;
  int nely = 20;
  int fine_nelx = 80;
  int fine_nely = 80;

  bool conditioned = true;
  int width = 256;
  int hidden_layers = 4;
  double omega_meta = nn::kOmegaMeta;
  double omega_standard = nn::kOmegaStandard;

  int meta_iterations = 200;
  int meta_batch = 5;
  int inner_steps = 10;
  double inner_lr = 1e-4;
  double outer_lr = 1e-6;
  int validation_interval = 20;
  int validation_steps = 10;

  int pretrain_epochs = 100;
  double pretrain_lr = 1e-5;

  double lr = 1e-4;
  double stop_eps = 1e-5;
  int min_iters = 10;
  int max_iters = 200;
  double filter_radius = 0.0;  // <= 0 picks the mesh default
  double amplification = 10.0;
  double mma_move = 0.2;
  double mma_asyinit = 0.5;
  double mma_asyincr = 1.2;
  double mma_asydecr = 0.7;

  std::string out_dir = "out";

  using Slot = std::variant<std::uint64_t*, int*, double*, bool*, std::string*>;
  struct Field {
    const char* key;
    Slot slot;
  };
  std::vector<Field> fields();

  // Assigns one key from its textual value.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  void validate() const;

  nn::NetworkConfig network(double omega) const;
  meta::MetaConfig meta_config() const;
  meta::PretrainConfig pretrain_config() const;
  optim::OptimizerSettings optimizer() const;
  fem::Discretization mesh() const { return {nelx, nely}; }
  fem::Discretization fine_mesh() const { return {fine_nelx, fine_nely}; }

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace metato
