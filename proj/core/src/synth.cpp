#include "lmpkit/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lmpkit/tensor_io.hpp"

namespace lmpkit {

namespace {

constexpr std::uint32_t stamp(std::string_view rows) {
    std::uint32_t bits = 0;
    std::size_t i = 0;
    for (char ch : rows) {
        if (ch == '#') bits |= 1u << i;
        if (ch == '#' || ch == '.') ++i;
    }
    return bits;
}

constexpr std::array<Glyph, 10> kUnique{{
    {"cross", stamp("..#.. ..#.. ##### ..#.. ..#..")},
    {"saltire", stamp("#...# .#.#. ..#.. .#.#. #...#")},
    {"corner", stamp("#.... #.... #.... #.... #####")},
    {"tee", stamp("##### ..#.. ..#.. ..#.. ..#..")},
    {"ring", stamp(".###. #...# #...# #...# .###.")},
    {"diamond", stamp("..#.. .#.#. #...# .#.#. ..#..")},
    {"ladder", stamp("#...# #...# ##### #...# #...#")},
    {"zigzag", stamp("##### ...#. ..#.. .#... #####")},
    {"arrow", stamp("..#.. .###. #.#.# ..#.. ..#..")},
    {"cup", stamp("#...# #...# #...# #...# .###.")},
}};

constexpr std::array<Glyph, 3> kRepeated{{
    {"block", stamp("..... .###. .###. .###. .....")},
    {"bars", stamp("##### ..... ##### ..... #####")},
    {"dots", stamp("#.#.# ..... #.#.# ..... #.#.#")},
}};

constexpr std::uint64_t kTrainStream = 0x7472;
constexpr std::uint64_t kTestStream = 0x7465;

void stamp_glyph(Tensor& image, const Glyph& g, std::size_t center_r, std::size_t center_c) {
    const std::size_t half = kGlyphSize / 2;
    for (std::size_t r = 0; r < kGlyphSize; ++r) {
        for (std::size_t c = 0; c < kGlyphSize; ++c) {
            if (g.on(r, c)) image.at(0, center_r - half + r, center_c - half + c) = 1.0;
        }
    }
}

}  // namespace

std::span<const Glyph> unique_glyph_library() { return kUnique; }
std::span<const Glyph> repeated_glyph_library() { return kRepeated; }

void SceneSpec::validate() const {
    if (num_classes < 1) throw ValueError("scene: num_classes must be >= 1");
    if (num_classes * unique_patterns_per_class > kUnique.size()) {
        throw ValueError("scene: the glyph library holds " + std::to_string(kUnique.size()) +
                         " unique patterns, " + std::to_string(num_classes * unique_patterns_per_class) +
                         " requested");
    }
    if (num_unique_per_image < 1 || num_unique_per_image > unique_patterns_per_class) {
        throw ValueError("scene: num_unique_per_image must lie in [1, unique_patterns_per_class]");
    }
    if (num_repeated_distractors > 0 && (num_repeated_glyphs < 1 || num_repeated_glyphs > kRepeated.size())) {
        throw ValueError("scene: num_repeated_glyphs must lie in [1, " + std::to_string(kRepeated.size()) + "]");
    }
    if (height < kGlyphSize || width < kGlyphSize) throw ValueError("scene: image smaller than a glyph");
    if (noise_sigma < 0.0) throw ValueError("scene: noise_sigma must be >= 0");
    if (min_separation < 0.0) throw ValueError("scene: min_separation must be >= 0");
    if (max_attempts < 1) throw ValueError("scene: max_attempts must be >= 1");
}

std::size_t class_glyph(const SceneSpec& spec, std::size_t class_id, std::size_t j) {
    return class_id * spec.unique_patterns_per_class + j;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ stream) ^ counter);
}

SyntheticScene generate_scene(const SceneSpec& spec, std::size_t class_id, std::uint64_t seed) {
    spec.validate();
    if (class_id >= spec.num_classes) throw LabelError("class id out of range");
    std::mt19937_64 rng(seed);

    // Which of the class's patterns appear (all of them unless the image holds fewer).
    std::vector<std::size_t> owned(spec.unique_patterns_per_class);
    for (std::size_t j = 0; j < owned.size(); ++j) owned[j] = class_glyph(spec, class_id, j);
    std::shuffle(owned.begin(), owned.end(), rng);
    owned.resize(spec.num_unique_per_image);
    std::sort(owned.begin(), owned.end());

    std::vector<std::size_t> distractor_ids(spec.num_repeated_distractors);
    std::uniform_int_distribution<std::size_t> pick_rep(0, std::max<std::size_t>(spec.num_repeated_glyphs, 1) - 1);
    for (auto& id : distractor_ids) id = pick_rep(rng);

    const std::size_t half = kGlyphSize / 2;
    std::uniform_int_distribution<std::size_t> pick_r(half, spec.height - 1 - half);
    std::uniform_int_distribution<std::size_t> pick_c(half, spec.width - 1 - half);
    const std::size_t total = owned.size() + distractor_ids.size();

    std::vector<PixelPoint> centers;
    for (std::size_t attempt = 0; attempt < spec.max_attempts && centers.size() < total; ++attempt) {
        centers.clear();
        for (std::size_t tries = 0; tries < 64 && centers.size() < total; ++tries) {
            const PixelPoint p{static_cast<double>(pick_r(rng)), static_cast<double>(pick_c(rng))};
            bool ok = true;
            for (const auto& q : centers) ok = ok && pixel_distance(p, q) >= spec.min_separation;
            if (ok) centers.push_back(p);
        }
    }
    if (centers.size() < total) {
        throw PlacementError("could not place " + std::to_string(total) + " patterns " +
                             std::to_string(spec.min_separation) + " px apart in a " +
                             std::to_string(spec.height) + "x" + std::to_string(spec.width) + " image");
    }

    SyntheticScene scene;
    scene.label = class_id;
    scene.image = Tensor({1, spec.height, spec.width});
    for (std::size_t i = 0; i < total; ++i) {
        const auto r = static_cast<std::size_t>(centers[i].row);
        const auto c = static_cast<std::size_t>(centers[i].col);
        if (i < owned.size()) {
            stamp_glyph(scene.image, kUnique[owned[i]], r, c);
            scene.keypoints.push_back(centers[i]);
            scene.glyph_ids.push_back(owned[i]);
        } else {
            const std::size_t id = distractor_ids[i - owned.size()];
            stamp_glyph(scene.image, kRepeated[id], r, c);
            scene.distractors.push_back(centers[i]);
            scene.distractor_ids.push_back(id);
        }
    }
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (double& v : scene.image.data()) v += noise(rng);
    }
    return scene;
}

Dataset generate_dataset(const DatasetSpec& spec) {
    spec.scene.validate();
    Dataset ds;
    auto fill = [&](std::vector<SyntheticScene>& out, std::size_t per_class, std::uint64_t stream) {
        const std::size_t n = per_class * spec.scene.num_classes;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(generate_scene(spec.scene, i % spec.scene.num_classes, derive_seed(spec.seed, stream, i)));
        }
    };
    fill(ds.train, spec.train_per_class, kTrainStream);
    fill(ds.test, spec.test_per_class, kTestStream);
    return ds;
}

void write_split(const std::filesystem::path& dir, const std::string& split,
                 std::span<const SyntheticScene> scenes) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "images");
    nlohmann::json manifest = nlohmann::json::array();
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%05zu.lmpt", split.c_str(), i);
        const fs::path rel = fs::path("images") / name;
        save_tensor(dir / rel, scenes[i].image);
        nlohmann::json kps = nlohmann::json::array();
        for (const auto& k : scenes[i].keypoints) kps.push_back({k.row, k.col});
        manifest.push_back({{"path", rel.generic_string()}, {"label", scenes[i].label}, {"keypoints", kps}});
    }
    std::ofstream os(dir / (split + ".json"));
    if (!os) throw IoError("cannot write manifest in " + dir.string());
    os << manifest.dump(1) << '\n';
}

std::vector<SyntheticScene> read_split(const std::filesystem::path& manifest_path) {
    std::ifstream is(manifest_path);
    if (!is) throw IoError("cannot open manifest " + manifest_path.string());
    nlohmann::json manifest;
    try {
        is >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!manifest.is_array()) throw IoError("manifest must be a JSON array");
    std::vector<SyntheticScene> scenes;
    const auto base = manifest_path.parent_path();
    for (const auto& entry : manifest) {
        SyntheticScene s;
        try {
            s.image = load_tensor(base / entry.at("path").get<std::string>());
            s.label = entry.at("label").get<std::size_t>();
            for (const auto& kp : entry.at("keypoints")) {
                s.keypoints.push_back({kp.at(0).get<double>(), kp.at(1).get<double>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed manifest entry in " + manifest_path.string() + ": " + e.what());
        }
        scenes.push_back(std::move(s));
    }
    return scenes;
}

}  // namespace lmpkit
