#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lmpkit/geometry.hpp"
#include "lmpkit/tensor.hpp"

namespace lmpkit {

inline constexpr std::size_t kGlyphSize = 5;

/// A fixed binary stamp, kGlyphSize x kGlyphSize, row-major.
struct Glyph {
    const char* name;
    std::uint32_t bits;  ///< bit (r*5 + c) set when the pixel is on

    bool on(std::size_t r, std::size_t c) const { return (bits >> (r * kGlyphSize + c)) & 1u; }
};

/// Class-identifying stamps, in the order they are assigned to classes.
std::span<const Glyph> unique_glyph_library();
/// Class-independent distractor stamps.
std::span<const Glyph> repeated_glyph_library();

struct SceneSpec {
    std::size_t height = 32;
    std::size_t width = 32;
    std::size_t num_classes = 4;
    std::size_t unique_patterns_per_class = 2;
    std::size_t num_unique_per_image = 2;
    std::size_t num_repeated_distractors = 3;
    std::size_t num_repeated_glyphs = 2;
    double noise_sigma = 0.05;
    double min_separation = 8.0;
    std::size_t max_attempts = 200;

    void validate() const;
};

struct SyntheticScene {
    Tensor image;                         ///< [1,h,w]
    std::size_t label = 0;
    std::vector<PixelPoint> keypoints;    ///< centers of the planted unique glyphs
    std::vector<std::size_t> glyph_ids;   ///< unique-library index per keypoint
    std::vector<PixelPoint> distractors;  ///< centers of repeated glyphs
    std::vector<std::size_t> distractor_ids;
};

/// Index into unique_glyph_library() of the j-th pattern owned by a class.
std::size_t class_glyph(const SceneSpec& spec, std::size_t class_id, std::size_t j);

/// Deterministic in (spec, class_id, seed). Throws PlacementError if no
/// layout satisfying min_separation is found within max_attempts.
SyntheticScene generate_scene(const SceneSpec& spec, std::size_t class_id, std::uint64_t seed);

struct DatasetSpec {
    SceneSpec scene;
    std::size_t train_per_class = 500;
    std::size_t test_per_class = 100;
    std::uint64_t seed = 0;
};

struct Dataset {
    std::vector<SyntheticScene> train;
    std::vector<SyntheticScene> test;
};

/// Stratified (classes interleaved) splits; every scene gets its own seed
/// derived from (seed, split, index), so splits never share a seed.
Dataset generate_dataset(const DatasetSpec& spec);

/// Counter-based seed derivation (splitmix64 finalizer over the mixed inputs).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter);

/// Writes images/<split>_NNNNN.lmpt and <split>.json (manifest array of
/// {path, label, keypoints}) under `dir`.
void write_split(const std::filesystem::path& dir, const std::string& split,
                 std::span<const SyntheticScene> scenes);

std::vector<SyntheticScene> read_split(const std::filesystem::path& manifest);

}  // namespace lmpkit
