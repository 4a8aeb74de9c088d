#pragma once

#include <filesystem>
#include <iosfwd>

#include "simbias/network.hpp"

namespace simbias {

/// Binary weight file, all fields little-endian:
///
///   "SBNW" | version u32 (=1) | layer count u32 (= L+1) | dims u32[L+2] (n_0 .. n_{L+1})
///   | weight matrices, row-major f64 | bias vectors f64 | CRC32 u32 of all preceding bytes
///
/// The file carries no activation or variance metadata; `loaded_config`
/// supplies those (its input_dim and hidden_widths are overwritten).
inline constexpr std::uint32_t kWeightFileVersion = 1;

void write_weights(std::ostream& out, const DeepNet& net);
void write_weights(const std::filesystem::path& path, const DeepNet& net);

/// Throws FormatError on bad magic, unsupported version, truncation or CRC mismatch.
DeepNet read_weights(std::istream& in, NetworkConfig loaded_config = NetworkConfig{});
DeepNet read_weights(const std::filesystem::path& path, NetworkConfig loaded_config = NetworkConfig{});

}  // namespace simbias
