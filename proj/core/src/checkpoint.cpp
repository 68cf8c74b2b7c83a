#include "lmpkit/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lmpkit/tensor_io.hpp"

namespace lmpkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json arch_json(const ModelArch& a) {
    json convs = json::array();
    for (const auto& c : a.convs) {
        convs.push_back({{"in", c.in_channels}, {"out", c.out_channels}, {"kernel", c.kernel},
                         {"stride", c.stride}, {"pad", c.pad}});
    }
    return {{"input", {a.input_channels, a.input_height, a.input_width}},
            {"convs", convs},
            {"num_classes", a.num_classes},
            {"pooling", {{"kind", to_string(a.pooling.kind)}, {"epsilon", a.pooling.epsilon}}}};
}

ModelArch arch_parse(const json& j) {
    ModelArch a;
    const auto& in = j.at("input");
    a.input_channels = in.at(0).get<std::size_t>();
    a.input_height = in.at(1).get<std::size_t>();
    a.input_width = in.at(2).get<std::size_t>();
    for (const auto& c : j.at("convs")) {
        a.convs.push_back({c.at("in").get<std::size_t>(), c.at("out").get<std::size_t>(),
                           c.at("kernel").get<std::size_t>(), c.at("stride").get<std::size_t>(),
                           c.at("pad").get<std::size_t>()});
    }
    a.num_classes = j.at("num_classes").get<std::size_t>();
    a.pooling.kind = parse_pooling_kind(j.at("pooling").at("kind").get<std::string>());
    a.pooling.epsilon = j.at("pooling").at("epsilon").get<double>();
    a.validate();
    return a;
}

json save_net(const fs::path& dir, const std::string& net, const ToyModel& model) {
    json layers = json::object();
    for (const auto& p : model.parameters()) {
        const std::string file = net + "." + p.name + ".lmpt";
        save_tensor(dir / file, p.tensor.value);
        layers[p.name] = file;
    }
    return {{"arch", arch_json(model.arch())}, {"layers", layers}};
}

ToyModel load_net(const fs::path& dir, const json& j) {
    ToyModel model(arch_parse(j.at("arch")), 0);
    const auto& layers = j.at("layers");
    for (auto& p : model.parameters()) {
        if (!layers.contains(p.name)) throw IoError("checkpoint lacks parameter " + p.name);
        Tensor t = load_tensor(dir / layers.at(p.name).get<std::string>());
        if (t.shape() != p.tensor.value.shape()) {
            throw IoError("checkpoint parameter " + p.name + " has shape " + shape_to_string(t.shape()) +
                          ", expected " + shape_to_string(p.tensor.value.shape()));
        }
        p.tensor = GradPair(std::move(t));
    }
    return model;
}

}  // namespace

std::string arch_to_json(const ModelArch& arch) { return arch_json(arch).dump(); }

ModelArch arch_from_json(const std::string& text) { return arch_parse(json::parse(text)); }

void save_checkpoint(const fs::path& dir, const Checkpoint& ckpt) {
    fs::create_directories(dir);
    json manifest{{"format", "lmpkit-checkpoint-1"},
                  {"epoch", ckpt.epoch},
                  {"seed", ckpt.seed},
                  {"primary", save_net(dir, "primary", ckpt.primary)}};
    if (ckpt.replica) manifest["replica"] = save_net(dir, "replica", *ckpt.replica);
    manifest["config"] = ckpt.config_json.empty() ? json::object() : json::parse(ckpt.config_json);
    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write " + (dir / "manifest.json").string());
    os << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const fs::path& dir) {
    const fs::path path = dir / "manifest.json";
    std::ifstream is(path);
    if (!is) throw IoError("missing checkpoint manifest " + path.string());
    try {
        json manifest;
        is >> manifest;
        Checkpoint ckpt{load_net(dir, manifest.at("primary")), std::nullopt, manifest.at("epoch").get<std::size_t>(),
                        manifest.at("seed").get<std::uint64_t>(), manifest.value("config", json::object()).dump()};
        if (manifest.contains("replica")) ckpt.replica = load_net(dir, manifest.at("replica"));
        return ckpt;
    } catch (const json::exception& e) {
        throw IoError("malformed checkpoint " + path.string() + ": " + e.what());
    }
}

}  // namespace lmpkit
