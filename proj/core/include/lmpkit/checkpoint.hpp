#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lmpkit/model.hpp"

namespace lmpkit {

struct Checkpoint {
    ToyModel primary;
    std::optional<ToyModel> replica;
    std::size_t epoch = 0;
    std::uint64_t seed = 0;
    std::string config_json;  ///< resolved configuration echoed at save time
};

/// Directory layout: manifest.json plus one LMPT1 file per parameter,
/// named <net>.<parameter>.lmpt. Parameters round-trip through float32.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

std::string arch_to_json(const ModelArch& arch);
ModelArch arch_from_json(const std::string& json);

}  // namespace lmpkit
