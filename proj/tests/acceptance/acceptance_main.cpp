// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Usage: lmpkit_acceptance [--out DIR] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grad_suite.hpp"
#include "lmpkit/clustering.hpp"
#include "lmpkit/errors.hpp"
#include "lmpkit/flops.hpp"
#include "lmpkit/geometry.hpp"
#include "lmpkit/keypoints.hpp"
#include "lmpkit/metrics.hpp"
#include "lmpkit/parallel.hpp"
#include "lmpkit/pooling.hpp"
#include "lmpkit/synth.hpp"
#include "lmpkit/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lmpkit;

namespace {

constexpr std::uint64_t kSeeds[] = {0, 1, 2};
constexpr double kPoolingTol = 1e-12;
constexpr double kEntropyGap = 0.05;
constexpr double kPckOverRandom = 0.30;
constexpr double kPckOverAvg = 0.10;
constexpr double kMinAccuracy = 0.90;
constexpr double kPoolingFlopShare = 0.01;
constexpr int kGradInstances = 50;
constexpr int kClusterSamples = 1000;
constexpr int kSeparationInputs = 10000;
constexpr double kFastBudgetSeconds = 60.0;
constexpr std::uint64_t kRandomStream = 0x72616e64;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// ---- 1 ----------------------------------------------------------------

Verdict pooling_exactness() {
    const Tensor dense({1, 1, 2, 2}, {1, 1, 1, 1});
    const Tensor sparse({1, 1, 2, 2}, {1, 0, 0, 0});
    struct Case {
        const Tensor* x;
        PoolingKernel k;
        double want;
    };
    const Case cases[] = {
        {&dense, PoolingKernel::average(), 1.0},   {&dense, PoolingKernel::max(), 1.0},
        {&dense, PoolingKernel::leaky_max(0.1), 0.7}, {&sparse, PoolingKernel::average(), 0.25},
        {&sparse, PoolingKernel::max(), 1.0},      {&sparse, PoolingKernel::leaky_max(0.1), 1.0},
    };
    double worst = 0.0;
    for (const auto& c : cases) worst = std::max(worst, std::abs(pool_forward(*c.x, c.k).out.data()[0] - c.want));
    return {worst <= kPoolingTol, fmt("max |err| %.3g over 6 cases", worst)};
}

// ---- 2 ----------------------------------------------------------------

Verdict gradient_suite() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::vector<std::pair<std::string, std::function<double()>>> layers = {
        {"conv", [&] { return grad_suite::conv_instance(rng); }},
        {"conv_bias", [&] { return grad_suite::bias_instance(rng); }},
        {"linear", [&] { return grad_suite::linear_instance(rng); }},
        {"relu", [&] { return grad_suite::relu_instance(rng); }},
        {"softmax_xent", [&] { return grad_suite::softmax_xent_instance(rng); }},
        {"avg", [&] { return grad_suite::pooling_instance(rng, PoolingKernel::average()); }},
        {"max", [&] { return grad_suite::pooling_instance(rng, PoolingKernel::max()); }},
        {"lmp", [&] { return grad_suite::pooling_instance(rng, PoolingKernel::leaky_max(0.1)); }},
    };
    bool ok = true;
    std::string detail;
    for (auto& [name, run] : layers) {
        double worst = 0.0;
        for (int i = 0; i < kGradInstances; ++i) worst = std::max(worst, run());
        ok = ok && worst < grad_suite::kTolerance;
        detail += fmt("%s %.1e; ", name.c_str(), worst);
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < kFastBudgetSeconds;
    return {ok, fmt("%d instances/layer, worst rel err: ", kGradInstances) + detail + fmt("%.1fs", secs)};
}

// ---- 5, 6 -------------------------------------------------------------

Tensor spike_tensor(std::size_t h, std::size_t w, const std::vector<int>& cells) {
    Tensor x({cells.size(), h, w});
    for (std::size_t ch = 0; ch < cells.size(); ++ch)
        if (cells[ch] >= 0) x.slab(ch)[static_cast<std::size_t>(cells[ch])] = 1.0;
    return x;
}

bool agrees_with_oracle(const Tensor& x, const ClusteringConfig& cfg) {
    std::vector<std::vector<double>> ch;
    for (std::size_t c = 0; c < x.dim(0); ++c) ch.emplace_back(x.slab(c).begin(), x.slab(c).end());
    const auto want = oracle::algorithm1(ch, x.dim(1), x.dim(2), cfg.k, cfg.n, cfg.thr, cfg.dist_floor);
    const ClusteringOutput got = cluster(x, cfg);
    if (got.size() != want.peaks.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i)
        if (got.peaks[i].row != want.peaks[i].first || got.peaks[i].col != want.peaks[i].second) return false;
    return true;
}

Verdict clustering_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr int cells = 36;
    std::size_t cases = 0, mismatches = 0;
    const ClusteringConfig def;
    auto check = [&](const std::vector<int>& at, const ClusteringConfig& cfg) {
        ++cases;
        if (!agrees_with_oracle(spike_tensor(6, 6, at), cfg)) ++mismatches;
    };
    // Exhaustive: every placement for c = 1..4, including empty channels (-1).
    for (int a = -1; a < cells; ++a) {
        check({a}, def);
        for (int b = -1; b < cells; ++b) {
            check({a, b}, def);
            for (int c = -1; c < cells; ++c) {
                check({a, b, c}, def);
                for (int d = -1; d < cells; ++d) check({a, b, c, d}, def);
            }
        }
    }
    // c = 5, 6 with every channel on one of a few shared cells.
    const int anchors[] = {0, 7, 14, 21, 35};
    for (std::size_t c = 5; c <= 6; ++c) {
        std::vector<int> idx(c, 0);
        for (;;) {
            std::vector<int> at(c);
            for (std::size_t i = 0; i < c; ++i) at[i] = anchors[idx[i]];
            check(at, def);
            std::size_t i = 0;
            while (i < c && ++idx[i] == 5) idx[i++] = 0;
            if (i == c) break;
        }
    }
    // Sampled: random c <= 6 and random k, n, thr.
    std::mt19937_64 rng(55);
    for (int t = 0; t < kClusterSamples; ++t) {
        std::vector<int> at(1 + rng() % 6);
        for (auto& a : at) a = rng() % 8 == 0 ? -1 : int(rng() % cells);
        ClusteringConfig cfg;
        cfg.k = 1 + rng() % 6;
        cfg.n = 1 + rng() % 5;
        cfg.thr = 0.5 + double(rng() % 9) * 0.5;
        check(at, cfg);
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < kFastBudgetSeconds,
            fmt("%zu cases, %zu mismatches in peaks/k', %.1fs", cases, mismatches, secs)};
}

Verdict separation() {
    std::mt19937_64 rng(66);
    std::size_t violations = 0, pairs = 0;
    for (int t = 0; t < kSeparationInputs; ++t) {
        const std::size_t h = 4 + rng() % 9, w = 4 + rng() % 9;
        std::vector<int> at(1 + rng() % 32);
        for (auto& a : at) a = rng() % 10 == 0 ? -1 : int(rng() % (h * w));
        ClusteringConfig cfg;
        cfg.k = 1 + rng() % 8;
        cfg.thr = 0.5 + double(rng() % 10) * 0.5;
        cfg.metric = static_cast<DistanceMetric>(rng() % 3);
        const ClusteringOutput out = cluster(spike_tensor(h, w, at), cfg);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < i; ++j, ++pairs)
                if (grid_distance(out.peaks[i], out.peaks[j], cfg.metric) < cfg.thr) ++violations;
    }
    return {violations == 0, fmt("%d inputs, %zu peak pairs, %zu violations", kSeparationInputs, pairs, violations)};
}

// ---- 8 ----------------------------------------------------------------

Verdict flops() {
    const FlopReport r = count_flops(ModelArch::toy_default());
    // conv 16*1*9*32*32, 32*16*9*16*16, 32*32*9*8*8; pool 32*8*8; fc 32*4
    const std::map<std::string, std::uint64_t> want_layers = {{"pool", 2048}, {"fc", 128}};
    const std::vector<std::uint64_t> want_conv = {147456, 1179648, 589824};
    const std::uint64_t want_total = 147456 + 1179648 + 589824 + 2048 + 128;
    bool ok = r.total_multiply_adds == want_total && r.pooling_multiply_adds == 2048 &&
              r.layers.size() == want_conv.size() + 2;
    for (std::size_t i = 0; ok && i < want_conv.size(); ++i) ok = r.layers[i].multiply_adds == want_conv[i];
    for (const auto& l : r.layers)
        if (auto it = want_layers.find(l.name); it != want_layers.end()) ok = ok && l.multiply_adds == it->second;
    ok = ok && r.pooling_overhead_fraction < kPoolingFlopShare;
    return {ok, fmt("total %llu (want %llu), pooling share %.4f%%", (unsigned long long)r.total_multiply_adds,
                    (unsigned long long)want_total, 100.0 * r.pooling_overhead_fraction)};
}

// ---- 3, 4, 7, 9 -------------------------------------------------------

struct SeedRun {
    std::map<std::string, double> entropy;  // by pooling label
    double pck_lmp = 0, pck_avg = 0, pck_random = 0;
    std::map<std::string, double> accuracy;
};

std::string csv_num(double v) { return fmt("%.10g", v); }

std::string pck_row(const std::string& label, const PckReport& r) {
    std::string s = label;
    for (double a : r.per_keypoint_acc) s += "," + csv_num(a);
    return s + "," + csv_num(r.average) + "\n";
}

TrainConfig train_config(std::uint64_t seed, PoolingKernel kernel, bool maskout, std::size_t k) {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.pooling = kernel;
    cfg.enable_maskout = maskout;
    cfg.keypoints.clustering.k = k;
    return cfg;
}

PckReport pipeline_pck(const TrainResult& res, const Dataset& data, const KeypointConfig& kp,
                       const PckConfig& pc, std::size_t k) {
    std::vector<std::vector<PixelPoint>> preds(data.test.size()), gts;
    std::vector<ImageSize> sizes;
    const ToyModel* replica = res.replica ? &*res.replica : nullptr;
    parallel_for(data.test.size(), default_worker_count(), [&](std::size_t i) {
        preds[i] = predict_keypoints(res.primary, replica, data.test[i].image, kp).pixels;
    });
    for (const auto& s : data.test) {
        gts.push_back(s.keypoints);
        sizes.push_back({s.image.dim(1), s.image.dim(2)});
    }
    return greedy_pck(preds, gts, pc, sizes, k);
}

PckReport random_pck(const Dataset& data, std::uint64_t seed, const PckConfig& pc, std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, kRandomStream, 0));
    std::vector<std::vector<PixelPoint>> preds, gts;
    std::vector<ImageSize> sizes;
    for (const auto& s : data.test) {
        const std::size_t h = s.image.dim(1), w = s.image.dim(2);
        std::uniform_real_distribution<double> ur(0.0, double(h - 1)), uc(0.0, double(w - 1));
        std::vector<PixelPoint> p(k);
        for (auto& q : p) q = {ur(rng), uc(rng)};
        preds.push_back(std::move(p));
        gts.push_back(s.keypoints);
        sizes.push_back({h, w});
    }
    return greedy_pck(preds, gts, pc, sizes, k);
}

// Trains avg / max / lmp for one seed and writes entropy.csv and pck.csv
// into `dir`.
SeedRun run_seed(std::uint64_t seed, const fs::path& dir) {
    fs::create_directories(dir);
    DatasetSpec ds;
    ds.seed = seed;
    const Dataset data = generate_dataset(ds);
    const std::size_t k = ds.scene.num_unique_per_image + 1;
    const PckConfig pc{0.1, MatchMode::GtConsumed};
    const ModelArch base = ModelArch::toy_default(ds.scene.num_classes);

    SeedRun out;
    std::string ent_csv = "pooling,mean_entropy,std_entropy,n_images\n";
    std::string pck_csv = "kind_or_thr,match_mode";
    for (std::size_t i = 1; i <= k; ++i) pck_csv += ",kp" + std::to_string(i);
    pck_csv += ",avg\n";

    // Mask-out only feeds the replica; the primary (and so its entropy) is
    // the same network either way, so max skips it.
    for (const auto& [kernel, maskout] : {std::pair{PoolingKernel::average(), true},
                                          std::pair{PoolingKernel::max(), false},
                                          std::pair{PoolingKernel::leaky_max(0.1), true}}) {
        const TrainConfig cfg = train_config(seed, kernel, maskout, k);
        ModelArch arch = base;
        arch.pooling = kernel;
        const auto t0 = std::chrono::steady_clock::now();
        const TrainResult res = train(cfg, arch, data.train, data.test);
        std::vector<double> ent;
        for (const auto& s : data.test) {
            try {
                ent.push_back(feature_entropy(res.primary.features(s.image)));
            } catch (const EmptyActivation&) {
            }
        }
        const EntropySummary e = summarize(ent);
        const std::string label = kernel.label();
        out.entropy[label] = ent.empty() ? NAN : e.mean;
        ent_csv += label + "," + csv_num(e.mean) + "," + csv_num(e.stddev) + "," + std::to_string(e.count) + "\n";
        out.accuracy[label] = evaluate(res.primary, data.test).acc;
        if (maskout) {
            const PckReport r = pipeline_pck(res, data, cfg.keypoints, pc, k);
            pck_csv += pck_row(label + "@thr=" + csv_num(cfg.keypoints.clustering.thr) + ",gt_consumed", r);
            (kernel.kind == PoolingKind::Average ? out.pck_avg : out.pck_lmp) = r.average;
        }
        std::printf("  seed %llu %-14s %.0fs  entropy %.4f (n=%zu)  test acc %.3f\n", (unsigned long long)seed,
                    label.c_str(), seconds_since(t0), e.mean, e.count, out.accuracy[label]);
        std::fflush(stdout);
    }
    const PckReport rnd = random_pck(data, seed, pc, k);
    out.pck_random = rnd.average;
    pck_csv += pck_row("uniform_random,gt_consumed", rnd);
    write_file(dir / "entropy.csv", ent_csv);
    write_file(dir / "pck.csv", pck_csv);
    return out;
}

double median3(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

Verdict entropy_ordering(const std::vector<SeedRun>& runs) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const double a = runs[i].entropy.at(PoolingKernel::average().label());
        const double m = runs[i].entropy.at(PoolingKernel::max().label());
        const double l = runs[i].entropy.at(PoolingKernel::leaky_max(0.1).label());
        const bool seed_ok = (m - l) > kEntropyGap && (a - m) > kEntropyGap;
        ok = ok && seed_ok;
        detail += fmt("seed %llu: lmp %.3f max %.3f avg %.3f%s; ", (unsigned long long)kSeeds[i], l, m, a,
                      seed_ok ? "" : " (order violated)");
    }
    return {ok, detail + fmt("need lmp < max < avg, gaps > %.2f nats on every seed", kEntropyGap)};
}

Verdict keypoint_alignment(const std::vector<SeedRun>& runs) {
    std::vector<double> over_rnd, over_avg, lmp;
    for (const auto& r : runs) {
        over_rnd.push_back(r.pck_lmp - r.pck_random);
        over_avg.push_back(r.pck_lmp - r.pck_avg);
        lmp.push_back(r.pck_lmp);
    }
    const double a = median3(over_rnd), b = median3(over_avg);
    std::string per;
    for (const auto& r : runs) per += fmt("[lmp %.3f avg %.3f rnd %.3f] ", r.pck_lmp, r.pck_avg, r.pck_random);
    return {a >= kPckOverRandom && b >= kPckOverAvg,
            per + fmt("median gain over random %.1f pts, over avg %.1f pts", 100 * a, 100 * b)};
}

Verdict epsilon_table(const SeedRun& seed0, const fs::path& dir) {
    // Same dataset and seed as the seed-0 runs; only lmp(0.01) is new.
    DatasetSpec ds;
    ds.seed = kSeeds[0];
    const Dataset data = generate_dataset(ds);
    const PoolingKernel small = PoolingKernel::leaky_max(0.01);
    ModelArch arch = ModelArch::toy_default(ds.scene.num_classes, small);
    const TrainResult res = train(train_config(kSeeds[0], small, false, ds.scene.num_unique_per_image + 1), arch,
                                  data.train, data.test);
    const double acc_small = evaluate(res.primary, data.test).acc;
    const double accs[] = {seed0.accuracy.at(PoolingKernel::average().label()),
                           seed0.accuracy.at(PoolingKernel::max().label()),
                           seed0.accuracy.at(PoolingKernel::leaky_max(0.1).label()), acc_small};
    std::string csv = "AVG,MAX,LMP(eps=0.1),LMP(eps=0.01)\n";
    bool ok = true;
    for (std::size_t i = 0; i < 4; ++i) {
        csv += fmt(i ? ",%.1f" : "%.1f", 100.0 * accs[i]);
        ok = ok && accs[i] > kMinAccuracy;
    }
    csv += "\n";
    write_file(dir / "accuracy_table.csv", csv);
    return {ok, fmt("test acc avg %.1f%% max %.1f%% lmp(0.1) %.1f%% lmp(0.01) %.1f%%, written to accuracy_table.csv",
                    100 * accs[0], 100 * accs[1], 100 * accs[2], 100 * accs[3])};
}

Verdict determinism(const fs::path& first, const fs::path& second) {
    std::size_t compared = 0, differ = 0;
    for (std::uint64_t seed : kSeeds) {
        run_seed(seed, second / ("seed" + std::to_string(seed)));
        for (const char* name : {"entropy.csv", "pck.csv"}) {
            const fs::path rel = fs::path("seed" + std::to_string(seed)) / name;
            ++compared;
            const std::string a = read_file(first / rel);
            if (a.empty() || a != read_file(second / rel)) ++differ;
        }
    }
    return {differ == 0, fmt("%zu CSVs compared byte-for-byte, %zu differ", compared, differ)};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out = "acceptance_out";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) {
            out = argv[++i];
        } else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) only.insert(std::stoi(tok));
        } else {
            std::fprintf(stderr, "usage: %s [--out DIR] [--only 1,2,...]\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(out);
    const auto wanted = [&](int c) { return only.empty() || only.count(c); };

    std::map<int, Verdict> verdicts;
    const char* names[] = {"", "pooling toy examples", "gradient suite", "entropy ordering",
                           "keypoint alignment (PCK)", "clustering oracle equivalence", "separation invariant",
                           "epsilon sensitivity table", "FLOP accounting", "determinism"};
    auto report = [&](int c, Verdict v) {
        std::printf("criterion %d %-30s %s  %s\n", c, names[c], v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        verdicts[c] = std::move(v);
    };

    if (wanted(1)) report(1, pooling_exactness());
    if (wanted(2)) report(2, gradient_suite());
    if (wanted(5)) report(5, clustering_oracle());
    if (wanted(6)) report(6, separation());
    if (wanted(8)) report(8, flops());

    if (wanted(3) || wanted(4) || wanted(7) || wanted(9)) {
        std::vector<SeedRun> runs;
        for (std::uint64_t seed : kSeeds) runs.push_back(run_seed(seed, out / "run1" / ("seed" + std::to_string(seed))));
        if (wanted(3)) report(3, entropy_ordering(runs));
        if (wanted(4)) report(4, keypoint_alignment(runs));
        if (wanted(7)) report(7, epsilon_table(runs.front(), out));
        if (wanted(9)) report(9, determinism(out / "run1", out / "run2"));
    }

    std::printf("\n");
    int failed = 0;
    for (const auto& [c, v] : verdicts) {
        std::printf("criterion %d: %s\n", c, v.pass ? "PASS" : "FAIL");
        failed += !v.pass;
    }
    return failed ? 1 : 0;
}
