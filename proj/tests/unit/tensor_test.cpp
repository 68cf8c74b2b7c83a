#include <gtest/gtest.h>

#include <random>

#include "lmpkit/errors.hpp"
#include "lmpkit/tensor.hpp"
#include "oracles.hpp"

using namespace lmpkit;

TEST(Tensor, SizeMatchesShapeProduct) {
    Tensor t({2, 3, 4});
    EXPECT_EQ(t.size(), 24u);
    EXPECT_EQ(shape_product(t.shape()), t.size());
    EXPECT_EQ(shape_to_string(t.shape()), "[2,3,4]");
    EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), SizeError);
}

TEST(Tensor, RowMajorOffsets) {
    Tensor t({2, 3, 4});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = double(i);
    EXPECT_EQ(t.at(1, 2, 3), 23.0);
    EXPECT_EQ(t.at(0, 1, 0), 4.0);
    EXPECT_EQ(t.slab(1)[0], 12.0);
    EXPECT_EQ(t.slice(1).shape(), (Shape{3, 4}));
    EXPECT_ANY_THROW(t.at(2, 0, 0));
}

TEST(Tensor, ReshapeKeepsFlatData) {
    std::mt19937_64 rng(3);
    const Tensor t = oracle::random_tensor({2, 6}, rng);
    const Tensor r = reshape(t, {3, 4});
    EXPECT_EQ(r.shape(), (Shape{3, 4}));
    EXPECT_EQ(r.values(), t.values());
    EXPECT_THROW(reshape(t, {5, 2}), SizeError);
}

TEST(Tensor, ReshapeRoundTripProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t a = 1 + rng() % 5, b = 1 + rng() % 5, c = 1 + rng() % 5;
        const Tensor t = oracle::random_tensor({a, b, c}, rng);
        EXPECT_EQ(reshape(reshape(t, {a * b * c}), {a, b, c}), t);
        EXPECT_EQ(reshape(t, {c, a * b}).values(), t.values());
    }
}

TEST(Tensor, MatvecAgainstLoop) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t r = 1 + rng() % 7, c = 1 + rng() % 9;
        const Tensor m = oracle::random_tensor({r, c}, rng), v = oracle::random_tensor({c}, rng);
        const Tensor out = matvec(m, v);
        ASSERT_EQ(out.shape(), (Shape{r}));
        for (std::size_t i = 0; i < r; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < c; ++j) s += m.at(i, j) * v[j];
            EXPECT_NEAR(out[i], s, 1e-12);
        }
    }
    EXPECT_THROW(matvec(Tensor({2, 3}), Tensor({2})), SizeError);
}

TEST(Tensor, ArgmaxTiesGoToLowestIndex) {
    const std::vector<double> v{0.2, 0.9, 0.1, 0.9};
    EXPECT_EQ(argmax(v), 1u);
    EXPECT_EQ(max_value(v), 0.9);
}

TEST(Tensor, StackAddsLeadingAxis) {
    const std::vector<Tensor> items{Tensor::full({2}, 1.0), Tensor::full({2}, 2.0)};
    const Tensor s = stack(items);
    EXPECT_EQ(s.shape(), (Shape{2, 2}));
    EXPECT_EQ(s.at(1, 0), 2.0);
}

TEST(Tensor, FiniteCheck) {
    Tensor t = Tensor::full({3}, 1.0);
    EXPECT_TRUE(all_finite(t.data()));
    t[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_FALSE(all_finite(t.data()));
#ifndef NDEBUG
    EXPECT_THROW(check_finite(t, "test"), NonFiniteError);
#endif
}
