#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmpkit/keypoints.hpp"
#include "lmpkit/model.hpp"
#include "lmpkit/synth.hpp"

namespace lmpkit {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    PoolingKernel pooling = PoolingKernel::leaky_max(0.1);
    std::uint64_t seed = 0;
    bool enable_maskout = false;
    /// 1-based epoch at which the replica starts training.
    std::size_t maskout_start_epoch = 2;
    KeypointConfig keypoints;
    /// 0 = default_worker_count()
    std::size_t threads = 0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  ///< 1-based
    std::string split;      ///< "train" or "test"
    double loss = 0.0;
    double acc = 0.0;
    std::string net;        ///< "primary" or "replica"
};

struct TrainResult {
    ToyModel primary;
    std::optional<ToyModel> replica;
    std::vector<EpochRecord> history;
};

/// SGD with momentum on mean cross-entropy. Fully determined by
/// (cfg, arch, data): sample order, initial weights and the replica's
/// masks all derive from cfg.seed, and per-sample gradients are summed in
/// a fixed order regardless of the worker count.
TrainResult train(const TrainConfig& cfg, const ModelArch& arch, std::span<const SyntheticScene> train_set,
                  std::span<const SyntheticScene> test_set = {});

struct EvalResult {
    double loss = 0.0;
    double acc = 0.0;
    std::size_t count = 0;
};

/// Mean loss / accuracy of `model` on `scenes`, optionally masking each
/// image around `masker`'s first keypoint (replica evaluation).
EvalResult evaluate(const ToyModel& model, std::span<const SyntheticScene> scenes,
                    const ToyModel* masker = nullptr, const KeypointConfig* kp = nullptr,
                    std::size_t threads = 0);

/// "epoch,split,loss,acc,net" with one row per record.
std::string history_csv(std::span<const EpochRecord> history);

}  // namespace lmpkit
