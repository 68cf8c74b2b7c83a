#include "experiment_config.hpp"

#include <fstream>
#include <set>

#include "lmpkit/errors.hpp"
#include "lmpkit/maskout.hpp"

namespace lmpkit::app {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// Reads known keys out of one JSON object and complains about the rest.
class Section {
public:
    Section(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {
        if (!j_.is_object()) throw ConfigError(ptr_.empty() ? "/" : ptr_, "expected an object");
    }

    std::string at(const char* key) const { return ptr_ + "/" + escape_token(key); }

    const json* find(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() || it->is_null() ? nullptr : &*it;
    }

    void get(const char* key, std::uint64_t& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(at(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }
    void get(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(at(key), "expected a number");
            out = v->get<double>();
        }
    }
    void get(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
            out = v->get<bool>();
        }
    }
    void get(const char* key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(at(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    template <typename Parse, typename T>
    void get_enum(const char* key, T& out, Parse parse) {
        std::string s;
        get(key, s);
        if (s.empty()) return;
        try {
            out = parse(s);
        } catch (const Error& e) {
            throw ConfigError(at(key), e.what());
        }
    }

    Section child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        static const json empty = json::object();
        return Section(it == j_.end() || it->is_null() ? empty : *it, at(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(ptr_ + "/" + escape_token(key), "unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string ptr_;
    std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& pointer, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(pointer, e.what());
    }
}

}  // namespace

ModelArch ExperimentConfig::arch() const {
    ModelArch a = ModelArch::toy_default(dataset.scene.num_classes, train.pooling);
    a.input_height = dataset.scene.height;
    a.input_width = dataset.scene.width;
    return a;
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig cfg;
    Section root(doc, "");

    {
        Section s = root.child("dataset");
        SceneSpec& sc = cfg.dataset.scene;
        s.get("height", sc.height);
        s.get("width", sc.width);
        s.get("num_classes", sc.num_classes);
        s.get("unique_patterns_per_class", sc.unique_patterns_per_class);
        s.get("num_unique_per_image", sc.num_unique_per_image);
        s.get("num_repeated_distractors", sc.num_repeated_distractors);
        s.get("num_repeated_glyphs", sc.num_repeated_glyphs);
        s.get("noise_sigma", sc.noise_sigma);
        s.get("min_separation", sc.min_separation);
        s.get("max_attempts", sc.max_attempts);
        s.get("train_per_class", cfg.dataset.train_per_class);
        s.get("test_per_class", cfg.dataset.test_per_class);
        s.get("seed", cfg.dataset.seed);
        s.finish();
        checked("/dataset", [&] { sc.validate(); });
    }
    {
        Section s = root.child("train");
        TrainConfig& t = cfg.train;
        s.get("epochs", t.epochs);
        s.get("batch_size", t.batch_size);
        s.get("learning_rate", t.learning_rate);
        s.get("momentum", t.momentum);
        s.get_enum("pooling", t.pooling.kind, parse_pooling_kind);
        s.get("epsilon", t.pooling.epsilon);
        if (t.pooling.kind != PoolingKind::LeakyMax) t.pooling.epsilon = 0.0;
        s.get("seed", t.seed);
        s.get("enable_maskout", t.enable_maskout);
        s.get("maskout_start_epoch", t.maskout_start_epoch);
        s.get_enum("mask_shape", t.keypoints.mask_shape, parse_mask_shape);
        s.get("mask_radius", t.keypoints.mask_radius);
        s.get("threads", t.threads);
        s.finish();
        if (t.keypoints.mask_radius < 0) throw ConfigError(s.at("mask_radius"), "mask_radius must be >= 0");
    }
    {
        Section s = root.child("selection");
        SelectionConfig& sel = cfg.train.keypoints.selection;
        const bool has_count = s.find("keep_count") != nullptr;
        const bool has_fraction = s.find("keep_fraction") != nullptr;
        std::size_t count = 0;
        double fraction = 0;
        s.get("keep_count", count);
        s.get("keep_fraction", fraction);
        s.finish();
        if (has_count && has_fraction) throw ConfigError("/selection", "set keep_count or keep_fraction, not both");
        if (has_count) sel = SelectionConfig::count(count);
        else if (has_fraction) sel = SelectionConfig::fraction(fraction);
        checked("/selection", [&] { sel.validate(); });
    }
    {
        Section s = root.child("clustering");
        ClusteringConfig& c = cfg.train.keypoints.clustering;
        s.get("k", c.k);
        s.get("n", c.n);
        s.get("thr", c.thr);
        s.get("dist_floor", c.dist_floor);
        s.get_enum("metric", c.metric, parse_distance_metric);
        s.finish();
        checked("/clustering", [&] { c.validate(); });
    }
    {
        Section s = root.child("pck");
        s.get("alpha", cfg.pck.alpha);
        s.get_enum("match_mode", cfg.pck.match_mode, parse_match_mode);
        s.finish();
        checked("/pck", [&] { cfg.pck.validate(); });
    }
    root.get("output_dir", cfg.output_dir);
    root.finish();
    checked("/train", [&] { cfg.train.validate(); });
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    const SceneSpec& sc = cfg.dataset.scene;
    const TrainConfig& t = cfg.train;
    const SelectionConfig& sel = t.keypoints.selection;
    const ClusteringConfig& c = t.keypoints.clustering;
    json j;
    j["dataset"] = {{"height", sc.height},
                    {"width", sc.width},
                    {"num_classes", sc.num_classes},
                    {"unique_patterns_per_class", sc.unique_patterns_per_class},
                    {"num_unique_per_image", sc.num_unique_per_image},
                    {"num_repeated_distractors", sc.num_repeated_distractors},
                    {"num_repeated_glyphs", sc.num_repeated_glyphs},
                    {"noise_sigma", sc.noise_sigma},
                    {"min_separation", sc.min_separation},
                    {"max_attempts", sc.max_attempts},
                    {"train_per_class", cfg.dataset.train_per_class},
                    {"test_per_class", cfg.dataset.test_per_class},
                    {"seed", cfg.dataset.seed}};
    j["train"] = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"learning_rate", t.learning_rate},
                  {"momentum", t.momentum},
                  {"pooling", to_string(t.pooling.kind)},
                  {"epsilon", t.pooling.epsilon},
                  {"seed", t.seed},
                  {"enable_maskout", t.enable_maskout},
                  {"maskout_start_epoch", t.maskout_start_epoch},
                  {"mask_shape", to_string(t.keypoints.mask_shape)},
                  {"mask_radius", t.keypoints.mask_radius},
                  {"threads", t.threads}};
    j["selection"] = {{"keep_count", sel.keep_count ? json(*sel.keep_count) : json(nullptr)},
                      {"keep_fraction", sel.keep_fraction ? json(*sel.keep_fraction) : json(nullptr)}};
    j["clustering"] = {{"k", c.k}, {"n", c.n}, {"thr", c.thr}, {"dist_floor", c.dist_floor},
                       {"metric", to_string(c.metric)}};
    j["pck"] = {{"alpha", cfg.pck.alpha}, {"match_mode", to_string(cfg.pck.match_mode)}};
    j["output_dir"] = cfg.output_dir;
    return j;
}

json load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON in " + path.string() + ": " + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("", "override '" + assignment + "' is not of the form key.path=value");
    }
    const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* node = &doc;
    std::string pointer;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError(pointer + "/", "empty key in override '" + assignment + "'");
        pointer += "/" + escape_token(key);
        if (!node->is_object()) throw ConfigError(pointer, "cannot descend into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig resolve_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = path.empty() ? json::object() : load_config_file(path);
    for (const auto& o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

}  // namespace lmpkit::app
