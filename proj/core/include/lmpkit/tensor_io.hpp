#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lmpkit/tensor.hpp"

namespace lmpkit {

/// LMPT1 container: 8-byte magic "LMPTENS1", u32 LE rank, rank x u32 LE
/// dims, then row-major f32 LE values. Values are narrowed to float on
/// write; everything else in the library stays in double.
inline constexpr char kTensorMagic[8] = {'L', 'M', 'P', 'T', 'E', 'N', 'S', '1'};

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace lmpkit
