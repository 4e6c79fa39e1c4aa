#pragma once

#include "metato/network.hpp"

#include <filesystem>
#include <string>

namespace metato::nn {

// Binary checkpoint, little-endian:
//   "MNTOCKPT" | u32 version | u32 input_dim | u32 width | u32 hidden_layers |
//   f64 omega0 | u64 seed | u8 provenance | u64 count | count x f64 | u32 crc32
std::string encode_checkpoint(const NetworkParameters& params);
NetworkParameters decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const NetworkParameters& params);
NetworkParameters load_checkpoint(const std::filesystem::path& path);

}  // namespace metato::nn
