#include "metato/network.hpp"

#include "metato/rng.hpp"
#include "sincos.hpp"

#include <cmath>
#include <random>

namespace metato::nn {

namespace {

constexpr Eigen::Index kChunkRows = 2048;
constexpr Eigen::Index kMaxTapedRows = 16384;

using MatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;

struct Block {
  int first = 0;  // layer index of the first sine layer in the block
  int layers = 0; // 1 or 2
};

std::vector<Block> residual_blocks(const NetworkConfig& cfg) {
  std::vector<Block> blocks;
  for (int l = 0; l < cfg.hidden_layers; l += 2) blocks.push_back({1 + l, std::min(2, cfg.hidden_layers - l)});
  return blocks;
}

MatMap weights(const NetworkParameters& p, const LayerShape& s) {
  return MatMap(p.values.data() + s.weight_offset, s.rows, s.cols);
}

VecMap bias(const NetworkParameters& p, const LayerShape& s) { return VecMap(p.values.data() + s.bias_offset, s.rows); }

// z = W x + b, then sin(w0 z) in place; cos(w0 z) into *cosine when requested.
Eigen::MatrixXd sine_layer(const NetworkParameters& p, const LayerShape& s, const Eigen::Ref<const Eigen::MatrixXd>& x,
                           Eigen::MatrixXd* cosine) {
  Eigen::MatrixXd z(s.rows, x.cols());
  z.noalias() = weights(p, s) * x;
  z.colwise() += bias(p, s);
  if (cosine) cosine->resize(s.rows, x.cols());
  detail::scaled_sincos(z.data(), p.config.omega0, z.data(), cosine ? cosine->data() : nullptr,
                        static_cast<std::size_t>(z.size()));
  return z;
}

// Forward over one chunk of rows; fills the tape chunk when given.
Eigen::RowVectorXd forward_chunk(const NetworkParameters& p, const std::vector<LayerShape>& layout,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x, Tape::Chunk* tape) {
  const auto blocks = residual_blocks(p.config);
  auto next_cos = [&]() -> Eigen::MatrixXd* {
    if (!tape) return nullptr;
    tape->cosines.emplace_back();
    return &tape->cosines.back();
  };
  Eigen::MatrixXd h = sine_layer(p, layout[0], x, next_cos());
  for (const Block& b : blocks) {
    if (tape) tape->hidden.push_back(h);
    Eigen::MatrixXd a = sine_layer(p, layout[b.first], h, next_cos());
    if (b.layers == 2) {
      Eigen::MatrixXd out = sine_layer(p, layout[b.first + 1], a, next_cos());
      if (tape) tape->inner.push_back(std::move(a));
      h += out;
    } else {
      h += a;
    }
  }
  const LayerShape& last = layout.back();
  Eigen::RowVectorXd y = weights(p, last) * h;
  y.array() += p.values[static_cast<Eigen::Index>(last.bias_offset)];
  if (tape) tape->hidden.push_back(std::move(h));
  return y;
}

void backward_chunk(const NetworkParameters& p, const std::vector<LayerShape>& layout,
                    const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::RowVectorXd>& cot,
                    const Tape::Chunk& tape, Eigen::VectorXd& grad) {
  const auto blocks = residual_blocks(p.config);
  const double w0 = p.config.omega0;
  auto gw = [&](const LayerShape& s) { return Eigen::Map<Eigen::MatrixXd>(grad.data() + s.weight_offset, s.rows, s.cols); };
  auto gb = [&](const LayerShape& s) { return Eigen::Map<Eigen::VectorXd>(grad.data() + s.bias_offset, s.rows); };

  const LayerShape& out = layout.back();
  const Eigen::MatrixXd& h_final = tape.hidden.back();
  gw(out).noalias() += cot * h_final.transpose();
  grad[static_cast<Eigen::Index>(out.bias_offset)] += cot.sum();
  Eigen::MatrixXd dh = weights(p, out).transpose() * cot;

  std::size_t cos_index = tape.cosines.size();
  std::size_t inner_index = tape.inner.size();
  Eigen::MatrixXd dz;
  for (auto b = blocks.rbegin(); b != blocks.rend(); ++b) {
    const std::size_t bi = static_cast<std::size_t>(std::distance(b, blocks.rend()) - 1);
    const Eigen::MatrixXd& h_in = tape.hidden[bi];
    const LayerShape& l1 = layout[b->first];
    if (b->layers == 2) {
      const LayerShape& l2 = layout[b->first + 1];
      const Eigen::MatrixXd& a = tape.inner[--inner_index];
      dz = w0 * dh.cwiseProduct(tape.cosines[--cos_index]);
      gw(l2).noalias() += dz * a.transpose();
      gb(l2) += dz.rowwise().sum();
      Eigen::MatrixXd da = weights(p, l2).transpose() * dz;
      dz = w0 * da.cwiseProduct(tape.cosines[--cos_index]);
    } else {
      dz = w0 * dh.cwiseProduct(tape.cosines[--cos_index]);
    }
    gw(l1).noalias() += dz * h_in.transpose();
    gb(l1) += dz.rowwise().sum();
    dh.noalias() += weights(p, l1).transpose() * dz;
  }
  dz = w0 * dh.cwiseProduct(tape.cosines[--cos_index]);
  gw(layout[0]).noalias() += dz * x.transpose();
  gb(layout[0]) += dz.rowwise().sum();
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_dim != 2 && input_dim != 3) throw std::invalid_argument("input_dim must be 2 or 3");
  if (width <= 0) throw std::invalid_argument("width must be positive");
  if (hidden_layers < 0) throw std::invalid_argument("hidden_layers must be non-negative");
  if (!(omega0 > 0.0)) throw std::invalid_argument("omega0 must be positive");
}

std::vector<LayerShape> layer_layout(const NetworkConfig& cfg) {
  std::vector<LayerShape> layout;
  std::size_t offset = 0;
  auto add = [&](int rows, int cols) {
    LayerShape s{rows, cols, offset, offset + static_cast<std::size_t>(rows) * cols};
    offset = s.bias_offset + rows;
    layout.push_back(s);
  };
  add(cfg.width, cfg.input_dim);
  for (int l = 0; l < cfg.hidden_layers; ++l) add(cfg.width, cfg.width);
  add(1, cfg.width);
  return layout;
}

std::size_t count_params(const NetworkConfig& cfg) {
  const auto layout = layer_layout(cfg);
  return layout.back().bias_offset + static_cast<std::size_t>(layout.back().rows);
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::standard_init: return "standard-init";
    case Provenance::meta_learned: return "meta-learned";
    case Provenance::pretrained: return "pretrained";
  }
  return "unknown";
}

void NetworkParameters::validate() const {
  config.validate();
  if (static_cast<std::size_t>(values.size()) != count_params(config))
    throw std::invalid_argument("parameter vector length does not match layout");
  if (!values.allFinite()) throw std::invalid_argument("non-finite network parameter");
}

NetworkParameters init_standard(const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  NetworkParameters p;
  p.config = cfg;
  p.seed = seed;
  p.provenance = Provenance::standard_init;
  p.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count_params(cfg)));
  Rng rng(substream_seed(seed, "init"));
  const auto layout = layer_layout(cfg);
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const LayerShape& s = layout[l];
    const double bound = l == 0 ? 1.0 / s.cols : std::sqrt(6.0 / s.cols) / cfg.omega0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < static_cast<std::size_t>(s.rows) * s.cols; ++i)
      p.values[static_cast<Eigen::Index>(s.weight_offset + i)] = dist(rng);
  }
  return p;
}

Eigen::MatrixXd make_features(const Eigen::MatrixXd& coords, const Eigen::VectorXd* energy) {
  if (coords.rows() != 2) throw ShapeMismatchError("coordinates must be 2 x N");
  if (!energy) return coords;
  if (energy->size() != coords.cols()) throw ShapeMismatchError("energy length does not match coordinates");
  Eigen::MatrixXd f(3, coords.cols());
  f.topRows(2) = coords;
  f.row(2) = energy->transpose();
  return f;
}

Eigen::VectorXd forward(const NetworkParameters& params, const Eigen::MatrixXd& features, Tape* tape) {
  if (features.rows() != params.config.input_dim)
    throw ShapeMismatchError("feature rows " + std::to_string(features.rows()) + " != network input width " +
                             std::to_string(params.config.input_dim));
  if (static_cast<std::size_t>(params.values.size()) != count_params(params.config))
    throw ShapeMismatchError("parameter vector does not match network layout");
  const auto layout = layer_layout(params.config);
  const Eigen::Index n = features.cols();
  Eigen::VectorXd y(n);
  const bool record = tape && n <= kMaxTapedRows;
  if (tape) tape->chunks.clear();
  for (Eigen::Index begin = 0; begin < n; begin += kChunkRows) {
    const Eigen::Index size = std::min(kChunkRows, n - begin);
    Tape::Chunk* chunk = nullptr;
    if (record) {
      tape->chunks.emplace_back();
      chunk = &tape->chunks.back();
      chunk->begin = begin;
      chunk->size = size;
    }
    y.segment(begin, size) = forward_chunk(params, layout, features.middleCols(begin, size), chunk).transpose();
  }
  return y;
}

Eigen::VectorXd backward(const NetworkParameters& params, const Eigen::MatrixXd& features,
                         std::span<const double> cotangent, const Tape* tape) {
  if (features.rows() != params.config.input_dim) throw ShapeMismatchError("feature rows do not match network");
  if (static_cast<Eigen::Index>(cotangent.size()) != features.cols())
    throw ShapeMismatchError("cotangent length does not match batch");
  const auto layout = layer_layout(params.config);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.values.size());
  const Eigen::Index n = features.cols();
  Eigen::Map<const Eigen::RowVectorXd> cot(cotangent.data(), n);
  const bool taped = tape && !tape->chunks.empty();
  std::size_t c = 0;
  for (Eigen::Index begin = 0; begin < n; begin += kChunkRows, ++c) {
    const Eigen::Index size = std::min(kChunkRows, n - begin);
    const auto x = features.middleCols(begin, size);
    if (taped) {
      backward_chunk(params, layout, x, cot.segment(begin, size), tape->chunks.at(c), grad);
    } else {
      Tape::Chunk chunk;
      forward_chunk(params, layout, x, &chunk);
      backward_chunk(params, layout, x, cot.segment(begin, size), chunk, grad);
    }
  }
  return grad;
}

}  // namespace metato::nn
