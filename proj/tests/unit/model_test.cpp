#include <gtest/gtest.h>

#include <random>

#include "lmpkit/errors.hpp"
#include "lmpkit/keypoints.hpp"
#include "lmpkit/model.hpp"
#include "lmpkit/synth.hpp"
#include "oracles.hpp"

using namespace lmpkit;

namespace {

ModelArch small_arch(PoolingKernel pooling) {
    ModelArch a;
    a.input_height = a.input_width = 6;
    a.convs = {{1, 2, 3, 1, 1}, {2, 3, 3, 2, 1}};
    a.num_classes = 3;
    a.pooling = pooling;
    return a;
}

double loss_of(const ToyModel& m, const Tensor& x, std::size_t label) {
    const std::size_t labels[] = {label};
    return softmax_xent_fwd(m.forward(x).logits, labels).loss;
}

// Far from every ReLU kink and pooling tie.
bool well_conditioned(const ForwardPass& pass) {
    for (const auto& z : pass.pre_relu)
        for (double v : z.data())
            if (std::abs(v) < 1e-3) return false;
    const auto& f = pass.features;
    const std::size_t hw = f.dim(2) * f.dim(3);
    for (std::size_t row = 0; row < f.dim(0) * f.dim(1); ++row) {
        std::vector<double> v(f.data().begin() + row * hw, f.data().begin() + (row + 1) * hw);
        std::sort(v.rbegin(), v.rend());
        if (v[0] - v[1] < 1e-3) return false;
    }
    return true;
}

}  // namespace

TEST(Model, DefaultShapes) {
    const ModelArch arch = ModelArch::toy_default();
    EXPECT_EQ(arch.feature_shape(), (Shape{32, 8, 8}));
    const GridToPixel map = arch.grid_map();
    EXPECT_EQ(map.stride, 4.0);
    EXPECT_EQ(map.offset, 0.0);
    const ToyModel m(arch, 1);
    std::mt19937_64 rng(1);
    const ForwardPass p = m.forward(oracle::random_tensor({2, 1, 32, 32}, rng));
    EXPECT_EQ(p.features.shape(), (Shape{2, 32, 8, 8}));
    EXPECT_EQ(p.logits.shape(), (Shape{2, 4}));
    EXPECT_EQ(m.parameters().size(), 8u);
    EXPECT_EQ(m.parameter("fc.weight").tensor.value.shape(), (Shape{4, 32}));
    EXPECT_THROW(m.parameter("conv9.weight"), ValueError);
    EXPECT_THROW(m.forward(Tensor({1, 1, 16, 16})), SizeError);
}

// Receptive-field centres: a delta at pixel 4i+offset should be seen most
// strongly by grid cell i once every kernel is a centred delta.
TEST(Model, GridMapFollowsReceptiveFields) {
    ToyModel m(ModelArch::toy_default(), 3);
    for (auto& p : m.parameters()) p.tensor.value.fill(0.0);
    for (std::size_t i = 0; i < 3; ++i) m.parameter("conv" + std::to_string(i) + ".weight").tensor.value.at(0, 0, 1, 1) = 1.0;
    const GridToPixel map = m.arch().grid_map();
    for (int cell : {0, 3, 7}) {
        Tensor img({1, 32, 32});
        const PixelPoint px = map({cell, cell});
        img.at(0, std::size_t(px.row), std::size_t(px.col)) = 1.0;
        const Tensor f = m.features(img);
        EXPECT_EQ(f.at(0, cell, cell), 1.0);
    }
}

TEST(Model, EndToEndFiniteDifferences) {
    std::mt19937_64 rng(17);
    for (const PoolingKernel k : {PoolingKernel::average(), PoolingKernel::max(), PoolingKernel::leaky_max(0.1)}) {
        int checked = 0;
        for (std::uint64_t seed = 0; checked < 3 && seed < 200; ++seed) {
            ToyModel m(small_arch(k), seed);
            for (std::size_t i = 1; i < m.parameters().size(); i += 2)
                for (double& v : m.parameters()[i].tensor.value.data()) v = 0.1 * double(rng() % 7);
            const Tensor x = oracle::random_tensor({1, 1, 6, 6}, rng);
            const ForwardPass pass = m.forward(x);
            if (!well_conditioned(pass)) continue;
            ++checked;
            const std::size_t label = rng() % 3, labels[] = {label};
            const Tensor gl = softmax_xent_bwd(softmax_xent_fwd(pass.logits, labels), labels);
            const auto grads = m.backward(pass, gl);
            for (std::size_t i = 0; i < grads.size(); ++i) {
                auto num = oracle::numeric_gradient(m.parameters()[i].tensor.value,
                                                    [&] { return loss_of(m, x, label); });
                EXPECT_LT(oracle::relative_error(grads[i].data(), num), 1e-6) << m.parameters()[i].name;
            }
        }
        EXPECT_EQ(checked, 3);
    }
}

TEST(Model, LeakyMaxFeatureGradientSigns) {
    std::mt19937_64 rng(5);
    const ToyModel m(ModelArch::toy_default(4, PoolingKernel::leaky_max(0.1)), 9);
    const ForwardPass pass = m.forward(oracle::random_tensor({1, 1, 32, 32}, rng, 0.0, 1.0));
    const std::size_t labels[] = {2};
    const Tensor g = m.feature_gradient(pass, softmax_xent_bwd(softmax_xent_fwd(pass.logits, labels), labels));
    const std::size_t hw = 64;
    int nonzero = 0;
    for (std::size_t ch = 0; ch < 32; ++ch) {
        const std::size_t top = pass.pooled.ctx.argmax_index[ch];
        const double gtop = g[ch * hw + top];
        if (gtop == 0.0) continue;
        ++nonzero;
        for (std::size_t i = 0; i < hw; ++i) {
            if (i == top) continue;
            EXPECT_LT(g[ch * hw + i] * gtop, 0.0);
            EXPECT_NEAR(g[ch * hw + i], -0.1 * gtop, 1e-15);
        }
    }
    EXPECT_GT(nonzero, 0);
}

TEST(Keypoints, ZeroWeightsGiveNoKeypoints) {
    ToyModel m(ModelArch::toy_default(), 1);
    for (auto& p : m.parameters()) p.tensor.value.fill(0.0);
    const SyntheticScene s = generate_scene(SceneSpec{}, 0, 1);
    EXPECT_TRUE(predict_keypoints(m, nullptr, s.image, KeypointConfig{}).pixels.empty());
    EXPECT_TRUE(predict_keypoints(m, &m, s.image, KeypointConfig{}).pixels.empty());
}

// Matched filter on a 3x3 window of the stamp followed by box-sum layers:
// only that window's centre survives the first ReLU.
TEST(Keypoints, HandSetFilterFindsTheGlyph) {
    SceneSpec spec;
    spec.noise_sigma = 0;
    spec.unique_patterns_per_class = 1;
    spec.num_unique_per_image = 1;
    spec.num_repeated_distractors = 0;
    ToyModel m(ModelArch::toy_default(), 1);
    for (auto& p : m.parameters()) p.tensor.value.fill(0.0);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t cls = seed % 4;
        const SyntheticScene s = generate_scene(spec, cls, seed);
        const Glyph& g = unique_glyph_library()[class_glyph(spec, cls, 0)];
        // The densest 3x3 window of the stamp, preferring the centre one.
        int best_dr = 0, best_dc = 0, best_on = -1;
        for (int dr : {0, -1, 1})
            for (int dc : {0, -1, 1}) {
                int n = 0;
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) n += g.on(r + 1 + dr, c + 1 + dc);
                if (n > best_on + 1) {
                    best_on = n;
                    best_dr = dr;
                    best_dc = dc;
                }
            }
        Tensor& k0 = m.parameter("conv0.weight").tensor.value;
        double on = 0;
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                const bool bit = g.on(r + 1 + best_dr, c + 1 + best_dc);
                k0.at(0, 0, r, c) = bit ? 1.0 : -1.0;
                on += bit;
            }
        m.parameter("conv0.bias").tensor.value[0] = 0.5 - on;
        for (const char* name : {"conv1.weight", "conv2.weight"}) {
            Tensor& k = m.parameter(name).tensor.value;
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < 3; ++c) k.at(0, 0, r, c) = 1.0;
        }
        const KeypointPrediction p = predict_keypoints(m, nullptr, s.image, KeypointConfig{});
        ASSERT_FALSE(p.pixels.empty());
        // within one grid cell of the stamp centre
        EXPECT_LE(std::abs(p.pixels[0].row - s.keypoints[0].row), 4.0) << "seed " << seed;
        EXPECT_LE(std::abs(p.pixels[0].col - s.keypoints[0].col), 4.0) << "seed " << seed;
    }
}

TEST(Keypoints, OutputNeverExceedsK) {
    std::mt19937_64 rng(3);
    const ToyModel a(ModelArch::toy_default(), 1), b(ModelArch::toy_default(), 2);
    for (std::size_t k = 1; k <= 6; ++k) {
        KeypointConfig cfg;
        cfg.clustering.k = k;
        cfg.selection = SelectionConfig::fraction(1.0);
        const Tensor img = oracle::random_tensor({1, 32, 32}, rng, 0.0, 1.0);
        EXPECT_LE(predict_keypoints(a, nullptr, img, cfg).pixels.size(), k);
        EXPECT_LE(predict_keypoints(a, &b, img, cfg).pixels.size(), k);
    }
}

TEST(Keypoints, MaskCoversFirstPrediction) {
    ClusteringOutput out;
    out.peaks = {{2, 7}};
    const auto mask = attention_mask(ModelArch::toy_default(), out, KeypointConfig{});
    ASSERT_TRUE(mask.has_value());
    EXPECT_EQ(mask->at(8, 28), 0.0);
    EXPECT_EQ(mask->at(4, 24), 0.0);
    EXPECT_EQ(mask->at(3, 28), 1.0);
    EXPECT_FALSE(attention_mask(ModelArch::toy_default(), ClusteringOutput{}, KeypointConfig{}).has_value());
}
