#pragma once

// SIREN coordinate network with identity-skip residual blocks.
//
//   h0  = sin(w0 (W0 z + b0))                     z = (x, y[, E])
//   h  <- h + sin(w0 (W2 sin(w0 (W1 h + b1)) + b2))   per residual block
//   out = W_out h + b_out
//
// Hidden layers are paired into residual blocks; an odd trailing layer forms
// a single-layer block h <- h + sin(w0 (W h + b)). Each input row is evaluated
// independently, so the map does not care which mesh the rows came from.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace metato::nn {

struct NetworkConfig {
  int input_dim = 3;      // 3 with strain-energy conditioning, 2 without
  int width = 256;
  int hidden_layers = 4;  // width x width layers after the input layer
  double omega0 = 60.0;

  bool conditioned() const { return input_dim == 3; }
  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

inline constexpr double kOmegaMeta = 60.0;
inline constexpr double kOmegaStandard = 30.0;

struct LayerShape {
  int rows = 0;  // fan-out
  int cols = 0;  // fan-in
  std::size_t weight_offset = 0;  // column-major rows x cols block
  std::size_t bias_offset = 0;
};

// Input layer, hidden layers, output layer, in storage order.
std::vector<LayerShape> layer_layout(const NetworkConfig& cfg);

std::size_t count_params(const NetworkConfig& cfg);

enum class Provenance : std::uint8_t { standard_init = 0, meta_learned = 1, pretrained = 2 };

std::string to_string(Provenance p);

struct NetworkParameters {
  NetworkConfig config;
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::standard_init;
  Eigen::VectorXd values;

  // Throws std::invalid_argument when the vector length or values are invalid.
  void validate() const;
};

// First layer U(-1/fan_in, 1/fan_in); later layers U(-sqrt(6/fan_in)/w0, +...);
// zero biases.
NetworkParameters init_standard(const NetworkConfig& cfg, std::uint64_t seed);

class ShapeMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Stacks normalized coordinates (2 x N) and an optional energy row into the
// input_dim x N feature matrix the network consumes.
Eigen::MatrixXd make_features(const Eigen::MatrixXd& coords, const Eigen::VectorXd* energy);

// Activations recorded during a forward pass, consumed by backward. Empty when
// the batch is too large to keep in memory; backward then recomputes.
struct Tape {
  struct Chunk {
    Eigen::Index begin = 0;
    Eigen::Index size = 0;
    std::vector<Eigen::MatrixXd> hidden;  // block inputs plus final hidden state
    std::vector<Eigen::MatrixXd> inner;   // first-layer outputs of two-layer blocks
    std::vector<Eigen::MatrixXd> cosines; // cos(w0 z) for every sine layer
  };
  std::vector<Chunk> chunks;
};

Eigen::VectorXd forward(const NetworkParameters& params, const Eigen::MatrixXd& features, Tape* tape = nullptr);

// Gradient of <cotangent, forward(params, features)> with respect to params.
Eigen::VectorXd backward(const NetworkParameters& params, const Eigen::MatrixXd& features,
                         std::span<const double> cotangent, const Tape* tape = nullptr);

}  // namespace metato::nn
