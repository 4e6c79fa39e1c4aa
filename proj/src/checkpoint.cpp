#include "metato/checkpoint.hpp"

#include "metato/binary_io.hpp"

namespace metato::nn {

namespace {
constexpr std::string_view kMagic = "MNTOCKPT";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string encode_checkpoint(const NetworkParameters& params) {
  params.validate();
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(params.config.input_dim));
  w.u32(static_cast<std::uint32_t>(params.config.width));
  w.u32(static_cast<std::uint32_t>(params.config.hidden_layers));
  w.f64(params.config.omega0);
  w.u64(params.seed);
  w.u8(static_cast<std::uint8_t>(params.provenance));
  w.u64(static_cast<std::uint64_t>(params.values.size()));
  w.f64s({params.values.data(), static_cast<std::size_t>(params.values.size())});
  w.seal();
  return w.data();
}

NetworkParameters decode_checkpoint(std::string_view bytes) {
  ByteReader r(verify_sealed(bytes));
  if (r.bytes(kMagic.size()) != kMagic) throw FormatError("not a network checkpoint");
  if (const auto v = r.u32(); v != kVersion) throw FormatError("unsupported checkpoint version " + std::to_string(v));
  NetworkParameters p;
  p.config.input_dim = static_cast<int>(r.u32());
  p.config.width = static_cast<int>(r.u32());
  p.config.hidden_layers = static_cast<int>(r.u32());
  p.config.omega0 = r.f64();
  p.seed = r.u64();
  const auto prov = r.u8();
  if (prov > 2) throw FormatError("unknown provenance tag");
  p.provenance = static_cast<Provenance>(prov);
  const auto count = r.u64();
  if (count != r.remaining() / 8 || r.remaining() % 8 != 0) throw FormatError("parameter count does not match payload");
  p.values.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) p.values[static_cast<Eigen::Index>(i)] = r.f64();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParameters& params) {
  write_file(path, encode_checkpoint(params));
}

NetworkParameters load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace metato::nn
