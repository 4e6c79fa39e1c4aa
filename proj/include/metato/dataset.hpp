#pragma once

#include "metato/taskgen.hpp"

#include <filesystem>
#include <string>

namespace metato::taskgen {

// Portable binary dataset, little-endian, CRC-32 sealed:
//   header  "MNTOTASK" | u32 version | u8 regime | u64 seed | u32 nelx | u32 nely |
//           u64 count | u64 candidates | 6 x u64 rejection counts
//   record  u64 id | f64 vstar | f64 c_ref | u32 nfixed | nfixed x u32 dof |
//           u32 nloads | nloads x (u32 dof, f64 value) | u64 n | n x f64 energy
std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);

void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

// Lossless JSON rendering for inspection; doubles are printed round-trip exact.
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

}  // namespace metato::taskgen
