#include "lmpkit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "lmpkit/parallel.hpp"

namespace lmpkit {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kOrderStream = 0x6f726472;

struct SampleResult {
    double loss = 0.0;
    bool correct = false;
    std::vector<Tensor> grads;
    Tensor features;  ///< [c,fh,fw], kept only when requested
};

SampleResult sample_step(const ToyModel& model, const Tensor& image, std::size_t label, double scale,
                         bool keep_features) {
    const ForwardPass pass = model.forward(as_batch(image));
    const std::size_t labels[] = {label};
    const SoftmaxXent xent = softmax_xent_fwd(pass.logits, labels);
    Tensor grad_logits = softmax_xent_bwd(xent, labels);
    for (double& g : grad_logits.data()) g *= scale;

    SampleResult r;
    r.loss = xent.loss;
    r.correct = argmax(pass.logits.data()) == label;
    r.grads = model.backward(pass, grad_logits);
    if (keep_features) r.features = pass.features.slice(0);
    return r;
}

class Sgd {
public:
    Sgd(const ToyModel& model, double lr, double momentum) : lr_(lr), momentum_(momentum) {
        for (const auto& p : model.parameters()) velocity_.emplace_back(p.tensor.value.shape());
    }

    void step(ToyModel& model, const std::vector<Tensor>& grads) {
        auto& params = model.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto value = params[i].tensor.value.data();
            auto v = velocity_[i].data();
            const auto g = grads[i].data();
            for (std::size_t j = 0; j < value.size(); ++j) {
                v[j] = momentum_ * v[j] + g[j];
                value[j] -= lr_ * v[j];
            }
            params[i].tensor.grad = grads[i];
        }
    }

private:
    double lr_;
    double momentum_;
    std::vector<Tensor> velocity_;
};

// One optimisation step over `batch`; returns (loss sum, correct count)
// and optionally the per-sample final features.
struct BatchOutcome {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::vector<Tensor> features;
};

BatchOutcome batch_step(ToyModel& model, Sgd& opt, std::span<const Tensor* const> images,
                        std::span<const std::size_t> labels, bool keep_features, std::size_t workers,
                        std::size_t& step_counter) {
    const std::size_t b = images.size();
    std::vector<SampleResult> results(b);
    const double scale = 1.0 / static_cast<double>(b);
    parallel_for(b, workers, [&](std::size_t i) {
        results[i] = sample_step(model, *images[i], labels[i], scale, keep_features);
    });

    BatchOutcome out;
    std::vector<Tensor> grads = std::move(results[0].grads);
    for (std::size_t i = 0; i < b; ++i) {
        out.loss_sum += results[i].loss;
        out.correct += results[i].correct ? 1 : 0;
        if (i > 0) {
            for (std::size_t p = 0; p < grads.size(); ++p) {
                auto dst = grads[p].data();
                const auto src = results[i].grads[p].data();
                for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
            }
        }
        if (keep_features) out.features.push_back(std::move(results[i].features));
    }
    ++step_counter;
    if (!std::isfinite(out.loss_sum)) {
        throw TrainingDiverged(step_counter, "loss became non-finite at step " + std::to_string(step_counter));
    }
    opt.step(model, grads);
    if (!model.all_parameters_finite()) {
        throw TrainingDiverged(step_counter, "parameters became non-finite at step " + std::to_string(step_counter));
    }
    return out;
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ValueError("train: epochs must be >= 1");
    if (batch_size < 1) throw ValueError("train: batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValueError("train: learning_rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValueError("train: momentum must lie in [0, 1)");
    if (maskout_start_epoch < 1) throw ValueError("train: maskout_start_epoch is 1-based");
    pooling.validate();
    keypoints.selection.validate();
    keypoints.clustering.validate();
}

TrainResult train(const TrainConfig& cfg, const ModelArch& arch_in, std::span<const SyntheticScene> train_set,
                  std::span<const SyntheticScene> test_set) {
    cfg.validate();
    if (train_set.empty()) throw ValueError("train: empty training set");
    ModelArch arch = arch_in;
    arch.pooling = cfg.pooling;
    const std::size_t workers = cfg.threads ? cfg.threads : default_worker_count();

    TrainResult result{ToyModel(arch, derive_seed(cfg.seed, kInitStream, 0)), std::nullopt, {}};
    if (cfg.enable_maskout) result.replica.emplace(arch, derive_seed(cfg.seed, kInitStream, 1));

    Sgd primary_opt(result.primary, cfg.learning_rate, cfg.momentum);
    std::optional<Sgd> replica_opt;
    if (result.replica) replica_opt.emplace(*result.replica, cfg.learning_rate, cfg.momentum);

    std::vector<std::size_t> order(train_set.size());
    std::size_t step = 0, replica_step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(cfg.seed, kOrderStream, epoch));
        std::shuffle(order.begin(), order.end(), rng);

        const bool replica_active = result.replica && epoch >= cfg.maskout_start_epoch;
        double loss = 0.0, replica_loss = 0.0;
        std::size_t correct = 0, replica_correct = 0, replica_seen = 0;

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const Tensor*> images;
            std::vector<std::size_t> labels;
            for (std::size_t i = start; i < end; ++i) {
                images.push_back(&train_set[order[i]].image);
                labels.push_back(train_set[order[i]].label);
            }
            BatchOutcome out = batch_step(result.primary, primary_opt, images, labels, replica_active, workers, step);
            loss += out.loss_sum;
            correct += out.correct;

            if (replica_active) {
                // Masks come from the primary's pre-update features of this batch.
                std::vector<Tensor> masked(images.size());
                parallel_for(images.size(), workers, [&](std::size_t i) {
                    const ClusteringOutput first =
                        keypoint_branch(out.features[i], cfg.keypoints.selection, cfg.keypoints.clustering);
                    const auto mask = attention_mask(arch, first, cfg.keypoints);
                    masked[i] = mask ? apply_mask(*images[i], *mask) : *images[i];
                });
                std::vector<const Tensor*> masked_ptrs;
                for (const auto& m : masked) masked_ptrs.push_back(&m);
                const BatchOutcome r =
                    batch_step(*result.replica, *replica_opt, masked_ptrs, labels, false, workers, replica_step);
                replica_loss += r.loss_sum;
                replica_correct += r.correct;
                replica_seen += images.size();
            }
        }

        const double n = static_cast<double>(order.size());
        result.history.push_back({epoch, "train", loss / n, static_cast<double>(correct) / n, "primary"});
        if (!test_set.empty()) {
            const EvalResult e = evaluate(result.primary, test_set, nullptr, nullptr, workers);
            result.history.push_back({epoch, "test", e.loss, e.acc, "primary"});
        }
        if (replica_active) {
            const double m = static_cast<double>(replica_seen);
            result.history.push_back({epoch, "train", replica_loss / m, static_cast<double>(replica_correct) / m, "replica"});
            if (!test_set.empty()) {
                const EvalResult e = evaluate(*result.replica, test_set, &result.primary, &cfg.keypoints, workers);
                result.history.push_back({epoch, "test", e.loss, e.acc, "replica"});
            }
        }
    }
    return result;
}

EvalResult evaluate(const ToyModel& model, std::span<const SyntheticScene> scenes, const ToyModel* masker,
                    const KeypointConfig* kp, std::size_t threads) {
    EvalResult r;
    r.count = scenes.size();
    if (scenes.empty()) return r;
    std::vector<double> losses(scenes.size());
    std::vector<char> hits(scenes.size());
    parallel_for(scenes.size(), threads ? threads : default_worker_count(), [&](std::size_t i) {
        Tensor image = scenes[i].image;
        if (masker != nullptr && kp != nullptr) {
            const ClusteringOutput first =
                keypoint_branch(masker->features(image), kp->selection, kp->clustering);
            if (const auto mask = attention_mask(masker->arch(), first, *kp)) image = apply_mask(image, *mask);
        }
        const ForwardPass pass = model.forward(as_batch(image));
        const std::size_t labels[] = {scenes[i].label};
        losses[i] = softmax_xent_fwd(pass.logits, labels).loss;
        hits[i] = argmax(pass.logits.data()) == scenes[i].label;
    });
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        r.loss += losses[i];
        r.acc += hits[i] ? 1.0 : 0.0;
    }
    r.loss /= static_cast<double>(scenes.size());
    r.acc /= static_cast<double>(scenes.size());
    return r;
}

std::string history_csv(std::span<const EpochRecord> history) {
    std::ostringstream os;
    os << "epoch,split,loss,acc,net\n";
    char buf[128];
    for (const auto& h : history) {
        std::snprintf(buf, sizeof buf, "%zu,%s,%.9g,%.9g,%s\n", h.epoch, h.split.c_str(), h.loss, h.acc, h.net.c_str());
        os << buf;
    }
    return os.str();
}

}  // namespace lmpkit
