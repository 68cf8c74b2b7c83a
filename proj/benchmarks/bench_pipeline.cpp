#include <benchmark/benchmark.h>

#include "lmpkit/clustering.hpp"
#include "lmpkit/keypoints.hpp"
#include "lmpkit/model.hpp"
#include "lmpkit/ops.hpp"
#include "lmpkit/synth.hpp"

namespace {

void BM_ModelStep(benchmark::State& state) {
    const lmpkit::ToyModel model(lmpkit::ModelArch::toy_default(), 7);
    const auto scene = lmpkit::generate_scene({}, 1, 11);
    const std::size_t labels[] = {scene.label};
    for (auto _ : state) {
        const auto pass = model.forward(lmpkit::as_batch(scene.image));
        const auto xent = lmpkit::softmax_xent_fwd(pass.logits, labels);
        benchmark::DoNotOptimize(model.backward(pass, lmpkit::softmax_xent_bwd(xent, labels)));
    }
}
BENCHMARK(BM_ModelStep);

void BM_PredictKeypoints(benchmark::State& state) {
    const lmpkit::ToyModel model(lmpkit::ModelArch::toy_default(), 7);
    const lmpkit::ToyModel replica(lmpkit::ModelArch::toy_default(), 8);
    const auto scene = lmpkit::generate_scene({}, 2, 12);
    const lmpkit::KeypointConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::predict_keypoints(model, &replica, scene.image, cfg));
}
BENCHMARK(BM_PredictKeypoints);

void BM_Cluster(benchmark::State& state) {
    const lmpkit::ToyModel model(lmpkit::ModelArch::toy_default(), 7);
    const auto scene = lmpkit::generate_scene({}, 3, 13);
    const auto x = lmpkit::binarize_proposals(model.features(scene.image));
    const lmpkit::ClusteringConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::cluster(x, cfg));
}
BENCHMARK(BM_Cluster);

void BM_GenerateScene(benchmark::State& state) {
    const lmpkit::SceneSpec spec;
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(lmpkit::generate_scene(spec, seed % 4, seed++));
}
BENCHMARK(BM_GenerateScene);

}  // namespace
