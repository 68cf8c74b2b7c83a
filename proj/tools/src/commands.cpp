#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "lmpkit/checkpoint.hpp"
#include "lmpkit/errors.hpp"
#include "lmpkit/flops.hpp"
#include "lmpkit/keypoints.hpp"
#include "lmpkit/parallel.hpp"

namespace lmpkit::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBaselineStream = 0x72616e64;

ExperimentConfig load(const CommonArgs& args) { return resolve_config(args.config, args.overrides); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path.string());
    os << text;
    if (!os) throw IoError("write failed for " + path.string());
}

void write_resolved(const ExperimentConfig& cfg) {
    write_text(fs::path(cfg.output_dir) / "config.resolved.json", to_json(cfg).dump(2) + "\n");
}

// Splits from --data when given, otherwise regenerated from the config.
Dataset dataset_for(const CommonArgs& args, const ExperimentConfig& cfg, bool need_train) {
    if (args.data.empty()) {
        DatasetSpec spec = cfg.dataset;
        if (!need_train) spec.train_per_class = 0;
        return generate_dataset(spec);
    }
    Dataset d;
    if (need_train) d.train = read_split(args.data / "train.json");
    d.test = read_split(args.data / "test.json");
    return d;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json point_list(const std::vector<PixelPoint>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back({p.row, p.col});
    return a;
}

}  // namespace

std::string pooldemo_table() {
    const std::vector<std::pair<std::string, std::vector<double>>> inputs = {{"dense", {1, 1, 1, 1}},
                                                                             {"sparse", {1, 0, 0, 0}}};
    std::ostringstream os;
    os << "kernel, input, output\n";
    for (const PoolingKernel& k : {PoolingKernel::average(), PoolingKernel::max(), PoolingKernel::leaky_max(0.1)}) {
        for (const auto& [name, v] : inputs) {
            const double out = pool_forward(Tensor({1, 1, 2, 2}, v), k).out[0];
            os << k.label() << ", " << name << ", " << fmt(out) << "\n";
        }
    }
    return os.str();
}

std::string pck_csv_header(std::size_t k) {
    std::string h = "kind_or_thr,match_mode";
    for (std::size_t i = 1; i <= k; ++i) h += ",kp" + std::to_string(i);
    return h + ",avg\n";
}

std::string pck_csv_row(const std::string& label, MatchMode mode, const PckReport& r) {
    std::string row = label + "," + to_string(mode);
    for (double a : r.per_keypoint_acc) row += "," + fmt(a);
    return row + "," + fmt(r.average) + "\n";
}

std::string entropy_csv_header() { return "pooling,mean_entropy,std_entropy,n_images\n"; }

std::string entropy_csv_row(const std::string& pooling, const EntropySummary& s) {
    return pooling + "," + fmt(s.mean) + "," + fmt(s.stddev) + "," + std::to_string(s.count) + "\n";
}

void cmd_gen(const CommonArgs& args, const fs::path& out_arg, std::ostream& os) {
    const ExperimentConfig cfg = load(args);
    const fs::path out = out_arg.empty() ? fs::path(cfg.output_dir) / "data" : out_arg;
    const Dataset d = generate_dataset(cfg.dataset);
    write_split(out, "train", d.train);
    write_split(out, "test", d.test);
    write_resolved(cfg);
    os << json{{"command", "gen"}, {"dir", out.string()}, {"train", d.train.size()}, {"test", d.test.size()}}.dump()
       << "\n";
}

void cmd_train(const CommonArgs& args, std::ostream& os) {
    const ExperimentConfig cfg = load(args);
    write_resolved(cfg);
    const Dataset d = dataset_for(args, cfg, true);
    const TrainResult r = train(cfg.train, cfg.arch(), d.train, d.test);
    const fs::path out(cfg.output_dir);
    write_text(out / "history.csv", history_csv(r.history));
    save_checkpoint(out / "checkpoint", {r.primary, r.replica, cfg.train.epochs, cfg.train.seed, to_json(cfg).dump()});
    json summary{{"command", "train"}, {"history", (out / "history.csv").string()},
                 {"checkpoint", (out / "checkpoint").string()}};
    for (const auto& h : r.history) {
        if (h.epoch == cfg.train.epochs) summary[h.net + "_" + h.split + "_acc"] = h.acc;
    }
    os << summary.dump() << "\n";
}

void cmd_eval(const CommonArgs& args, const fs::path& checkpoint_arg, std::ostream& os) {
    const ExperimentConfig cfg = load(args);
    write_resolved(cfg);
    const fs::path out(cfg.output_dir);
    const Checkpoint ck = load_checkpoint(checkpoint_arg.empty() ? out / "checkpoint" : checkpoint_arg);
    const Dataset d = dataset_for(args, cfg, false);
    const KeypointConfig& kp = cfg.train.keypoints;
    const std::size_t k = kp.clustering.k;
    const ToyModel* replica = ck.replica ? &*ck.replica : nullptr;

    std::vector<KeypointPrediction> preds(d.test.size());
    parallel_for(d.test.size(), cfg.train.threads ? cfg.train.threads : default_worker_count(), [&](std::size_t i) {
        preds[i] = predict_keypoints(ck.primary, replica, d.test[i].image, kp);
    });

    std::vector<std::vector<PixelPoint>> pred_px, gt_px, random_px;
    std::vector<ImageSize> sizes;
    std::mt19937_64 rng(derive_seed(cfg.dataset.seed, kBaselineStream, 0));
    json per_image = json::array();
    for (std::size_t i = 0; i < d.test.size(); ++i) {
        const auto& s = d.test[i];
        const std::size_t h = s.image.dim(1), w = s.image.dim(2);
        std::uniform_real_distribution<double> ur(0.0, static_cast<double>(h - 1)), uc(0.0, static_cast<double>(w - 1));
        std::vector<PixelPoint> rnd(k);
        for (auto& p : rnd) p = {ur(rng), uc(rng)};
        pred_px.push_back(preds[i].pixels);
        gt_px.push_back(s.keypoints);
        random_px.push_back(std::move(rnd));
        sizes.push_back({h, w});
        json peaks = json::array();
        for (const auto& g : preds[i].grid.peaks) peaks.push_back({g.row, g.col});
        per_image.push_back({{"index", i},
                             {"label", s.label},
                             {"ground_truth", point_list(s.keypoints)},
                             {"keypoints", point_list(preds[i].pixels)},
                             {"grid_peaks", peaks},
                             {"selected_channels", preds[i].selected}});
    }

    const std::string label = ck.primary.arch().pooling.label() + "@thr=" + fmt(kp.clustering.thr);
    std::string csv = pck_csv_header(k);
    json report{{"command", "eval"}, {"num_images", d.test.size()}, {"k", k}, {"alpha", cfg.pck.alpha},
                {"replica", replica != nullptr}};
    for (MatchMode mode : {MatchMode::GtConsumed, MatchMode::GtReusable}) {
        const PckConfig pc{cfg.pck.alpha, mode};
        const PckReport model = greedy_pck(pred_px, gt_px, pc, sizes, k);
        const PckReport base = greedy_pck(random_px, gt_px, pc, sizes, k);
        csv += pck_csv_row(label, mode, model);
        csv += pck_csv_row("uniform_random", mode, base);
        report["avg_" + to_string(mode)] = model.average;
        report["random_avg_" + to_string(mode)] = base.average;
    }
    if (d.test.empty()) report["warning"] = "test split is empty; every accuracy is reported as 0";
    write_text(out / "pck.csv", csv);
    write_text(out / "keypoints.json", per_image.dump(1) + "\n");
    write_text(out / "eval.json", report.dump(2) + "\n");
    os << report.dump() << "\n";
}

void cmd_entropy(const CommonArgs& args, const std::vector<fs::path>& checkpoints, std::ostream& os) {
    const ExperimentConfig cfg = load(args);
    write_resolved(cfg);
    if (checkpoints.empty()) throw ConfigError("", "entropy needs at least one --checkpoint");
    const Dataset d = dataset_for(args, cfg, false);
    std::string csv = entropy_csv_header();
    for (const auto& path : checkpoints) {
        const Checkpoint ck = load_checkpoint(path);
        std::vector<double> values(d.test.size());
        std::vector<char> valid(d.test.size(), 0);
        parallel_for(d.test.size(), cfg.train.threads ? cfg.train.threads : default_worker_count(),
                     [&](std::size_t i) {
                         try {
                             values[i] = feature_entropy(ck.primary.features(d.test[i].image));
                             valid[i] = 1;
                         } catch (const EmptyActivation&) {
                         }
                     });
        std::vector<double> kept;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (valid[i]) kept.push_back(values[i]);
        csv += entropy_csv_row(ck.primary.arch().pooling.label(), summarize(kept));
    }
    write_text(fs::path(cfg.output_dir) / "entropy.csv", csv);
    os << csv;
}

void cmd_pooldemo(std::ostream& os) { os << pooldemo_table(); }

void cmd_flops(const CommonArgs& args, const fs::path& checkpoint, std::ostream& os) {
    const ExperimentConfig cfg = load(args);
    const ModelArch arch = checkpoint.empty() ? cfg.arch() : load_checkpoint(checkpoint).primary.arch();
    const FlopReport r = count_flops(arch);
    json layers = json::array();
    for (const auto& l : r.layers) layers.push_back({{"name", l.name}, {"multiply_adds", l.multiply_adds}});
    const json j{{"layers", layers},
                 {"pooling_multiply_adds", r.pooling_multiply_adds},
                 {"total_multiply_adds", r.total_multiply_adds},
                 {"pooling_overhead_fraction", r.pooling_overhead_fraction}};
    write_text(fs::path(cfg.output_dir) / "flops.json", j.dump(2) + "\n");
    os << j.dump(2) << "\n";
}

}  // namespace lmpkit::app
