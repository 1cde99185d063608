#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "ideal/nn.hpp"
#include "test_support.hpp"

using namespace ideal;
using namespace ideal::nn;

TEST_CASE("forward of an all-zero model is uniform") {
    const std::size_t hidden[] = {4, 3};
    const auto model = Classifier::zeros(3, hidden, 5);
    const Vector x{0.3, -2.0, 7.0};
    const auto out = forward(model, x);
    for (std::size_t c = 0; c < 5; ++c) CHECK(out.probs[c] == doctest::Approx(0.2));
    CHECK(out.hidden == x);  // tap layer 0 exposes the raw input
}

TEST_CASE("single linear layer with logits (0, ln 3)") {
    DenseLayer layer(2, 2);
    layer.bias = {0.0, std::log(3.0)};
    const Classifier model({layer});
    const auto out = forward(model, Vector{1.0, -1.0});
    CHECK(out.probs[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(out.probs[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("forward rejects a wrong input dimension") {
    const std::size_t hidden[] = {4};
    const auto model = Classifier::zeros(3, hidden, 2);
    CHECK_THROWS_AS(forward(model, Vector{1.0, 2.0}), ShapeError);
}

TEST_CASE("classifier invariants are enforced") {
    CHECK_THROWS_AS(Classifier({DenseLayer(2, 3), DenseLayer(4, 2)}), ShapeError);
    CHECK_THROWS_AS(Classifier({DenseLayer(2, 3), DenseLayer(3, 2)}, 2), ShapeError);
    const Classifier ok({DenseLayer(2, 3), DenseLayer(3, 2)}, 1);
    CHECK(ok.representation_dim() == 3);
    CHECK(ok.class_count() == 2);
}

TEST_CASE("tap layer exposes the hidden activation") {
    Rng rng(3);
    const std::size_t hidden[] = {6, 5};
    const auto model = Classifier::random(4, hidden, 3, 2, rng);
    const Vector x{0.1, 0.7, -0.3, 0.2};
    const auto out = forward(model, x);
    CHECK(out.hidden.size() == 5);
    for (double h : out.hidden) CHECK(h >= 0.0);
    const auto direct = model.predict(x);
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.probs[c] == doctest::Approx(direct[c]).epsilon(1e-14));
}

TEST_CASE("forward output is a simplex for finite inputs of any scale") {
    Rng rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t hidden[] = {8, 8};
        const auto model = Classifier::random(5, hidden, 4, 0, rng);
        Vector x(5);
        const double scale = std::pow(10.0, trial % 7 - 2);
        for (double& v : x) v = scale * normal(rng);
        const auto out = forward(model, x);
        CHECK(is_simplex(out.probs.values()));
    }
}

TEST_CASE("kl_divergence hand-computed values") {
    const PredictionDist half({0.5, 0.5});
    CHECK(kl_divergence(half, half) == 0.0);
    CHECK(kl_divergence(PredictionDist({1.0, 0.0}), half) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(kl_divergence(PredictionDist({0.9, 0.1}), PredictionDist({0.1, 0.9})) ==
          doctest::Approx(0.9 * std::log(9.0) + 0.1 * std::log(1.0 / 9.0)).epsilon(1e-14));
    CHECK(kl_divergence(PredictionDist({0.9, 0.1}), PredictionDist({0.1, 0.9})) ==
          doctest::Approx(1.7578).epsilon(1e-4));
}

TEST_CASE("kl_divergence clamps zero entries of the second argument") {
    const double kl = kl_divergence(PredictionDist({0.5, 0.5}), PredictionDist({1.0, 0.0}));
    CHECK(std::isfinite(kl));
    CHECK(kl == doctest::Approx(0.5 * std::log(0.5) + 0.5 * std::log(0.5 / kProbabilityFloor)));
    CHECK_THROWS_AS(kl_divergence(PredictionDist({1.0}), PredictionDist({0.5, 0.5})), ShapeError);
}

TEST_CASE("kl_divergence is nonnegative and zero on identical inputs (10k trials)") {
    Rng rng(5);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t classes = 2 + static_cast<std::size_t>(trial % 6);
        const auto p = testing::random_simplex(classes, rng);
        const auto q = testing::random_simplex(classes, rng);
        REQUIRE(kl_divergence(p, q) >= 0.0);
        REQUIRE(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("grad_wrt_input is zero for a flat model at the KL minimum") {
    const std::size_t hidden[] = {3};
    const auto model = Classifier::zeros(2, hidden, 2);
    const Vector base{0.4, -0.1};
    const Vector offset{0.2, 0.3};
    const auto g = grad_wrt_input(model, base, PredictionDist::uniform(2), offset);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("grad_wrt_input matches central finite differences on 2-4-2 models") {
    Rng rng(2024);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto inst = testing::random_gradient_instance(2, 4, 2, rng);
        if (!inst) continue;
        const auto g = grad_wrt_input(inst->model, inst->base, inst->reference, inst->offset);
        const auto fd = testing::finite_difference_kl_gradient(inst->model, 0, inst->base, inst->reference,
                                                              inst->offset, 1e-4);
        REQUIRE(g.size() == 2);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(testing::relative_error(g[i], fd[i]) < 1e-4);
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("grad_wrt_representation works from an interior layer") {
    Rng rng(77);
    const std::size_t hidden[] = {6, 5};
    const auto model = Classifier::random(3, hidden, 3, 1, rng);
    const Vector base = model.representation(Vector{0.4, 0.9, 0.1});
    Vector offset(base.size(), 0.01);
    const auto ref = testing::random_simplex(3, rng);
    const auto g = grad_wrt_representation(model, 1, base, ref, offset);
    const auto fd = testing::finite_difference_kl_gradient(model, 1, base, ref, offset, 1e-5);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(testing::relative_error(g[i], fd[i]) < 1e-4);
}

TEST_CASE("grad_wrt_input is pure") {
    Rng rng(8);
    const std::size_t hidden[] = {4};
    const auto model = Classifier::random(2, hidden, 2, 0, rng);
    const Vector base{0.3, 0.6};
    const Vector offset{0.01, -0.02};
    const auto ref = PredictionDist({0.3, 0.7});
    const auto before = model.layers();
    const auto g1 = grad_wrt_input(model, base, ref, offset);
    const auto g2 = grad_wrt_input(model, base, ref, offset);
    CHECK(g1 == g2);
    for (std::size_t l = 0; l < before.size(); ++l) CHECK(model.layers()[l].weights == before[l].weights);
    CHECK_THROWS_AS(grad_wrt_input(model, Vector{1.0}, ref, Vector{1.0}), ShapeError);
}

namespace {

MixedExample labeled_example(Vector x, std::size_t cls, std::size_t classes) {
    MixedExample ex;
    ex.mixed = x;
    ex.first_input = x;
    ex.second_input = x;
    ex.target = PredictionDist::one_hot(classes, cls);
    return ex;
}

}  // namespace

TEST_CASE("train_step with learning rate 0 leaves parameters unchanged") {
    Rng rng(1);
    const std::size_t hidden[] = {4};
    auto model = Classifier::random(2, hidden, 2, 0, rng);
    const auto before = model.layers();
    TrainingBatch batch;
    batch.supervised.push_back(labeled_example({0.2, 0.8}, 1, 2));
    train_step(model, batch, {0.0, 1.0});
    for (std::size_t l = 0; l < before.size(); ++l) {
        CHECK(model.layers()[l].weights == before[l].weights);
        CHECK(model.layers()[l].bias == before[l].bias);
    }
}

TEST_CASE("train_step rejects an empty batch and a negative learning rate") {
    Rng rng(1);
    const std::size_t hidden[] = {4};
    auto model = Classifier::random(2, hidden, 2, 0, rng);
    CHECK_THROWS_AS(train_step(model, TrainingBatch{}, {0.1, 1.0}), UsageError);
    TrainingBatch batch;
    batch.supervised.push_back(labeled_example({0.2, 0.8}, 1, 2));
    CHECK_THROWS_AS(train_step(model, batch, {-0.1, 1.0}), UsageError);
}

TEST_CASE("train_step reports a non-finite loss as a numeric error") {
    Rng rng(1);
    const std::size_t hidden[] = {4};
    auto model = Classifier::random(2, hidden, 2, 0, rng);
    TrainingBatch batch;
    batch.supervised.push_back(labeled_example({std::nan(""), 0.8}, 1, 2));
    CHECK_THROWS_AS(train_step(model, batch, {0.1, 1.0}), NumericError);
}

TEST_CASE("repeated single-pair training decreases the loss over every 50-step window") {
    Rng rng(42);
    const std::size_t hidden[] = {4};
    auto model = Classifier::random(2, hidden, 2, 0, rng);
    TrainingBatch batch;
    batch.supervised.push_back(labeled_example({0.3, 0.9}, 0, 2));
    std::vector<double> losses;
    for (int step = 0; step < 200; ++step) losses.push_back(train_step(model, batch, {0.05, 1.0}));
    losses.push_back(training_loss(model, batch, 1.0));
    for (std::size_t t = 0; t + 50 < losses.size(); ++t) CHECK(losses[t + 50] < losses[t]);
}

TEST_CASE("labeled-only step equals an independent supervised cross-entropy step") {
    Rng rng(99);
    const std::size_t hidden[] = {4};
    for (int trial = 0; trial < 20; ++trial) {
        auto model = Classifier::random(2, hidden, 2, 0, rng);
        TrainingBatch batch;
        std::vector<std::pair<Vector, std::size_t>> pairs;
        for (int i = 0; i < 5; ++i) {
            Vector x = testing::random_vector(2, rng);
            const std::size_t cls = static_cast<std::size_t>(i % 2);
            pairs.emplace_back(x, cls);
            batch.supervised.push_back(labeled_example(x, cls, 2));
        }
        const auto expected = testing::supervised_step_oracle(model, pairs, 0.1);
        train_step(model, batch, {0.1, 0.0});
        for (std::size_t l = 0; l < expected.size(); ++l) {
            for (std::size_t i = 0; i < expected[l].weights.size(); ++i)
                CHECK(model.layers()[l].weights[i] == doctest::Approx(expected[l].weights[i]).epsilon(1e-12));
            for (std::size_t i = 0; i < expected[l].bias.size(); ++i)
                CHECK(model.layers()[l].bias[i] == doctest::Approx(expected[l].bias[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("training gradients match finite differences, including the consistency term") {
    Rng rng(123);
    const std::size_t hidden[] = {5};
    const auto model = Classifier::random(3, hidden, 3, 0, rng);
    TrainingBatch batch;
    for (int i = 0; i < 3; ++i) {
        MixedExample ex = labeled_example(testing::random_vector(3, rng), static_cast<std::size_t>(i), 3);
        batch.supervised.push_back(ex);
        ex.target = testing::random_simplex(3, rng);
        batch.consistency.push_back(ex);
    }
    const double lambda_u = 0.7;
    const auto grads = training_gradients(model, batch, lambda_u);
    const auto fd = testing::finite_difference_param_gradient(
        model, [&](const Classifier& m) { return training_loss(m, batch, lambda_u); }, 1e-6);
    for (std::size_t l = 0; l < grads.size(); ++l)
        for (std::size_t i = 0; i < grads[l].weights.size(); ++i)
            CHECK(testing::relative_error(grads[l].weights[i], fd[l].weights[i], 1e-6) < 1e-5);
}

TEST_CASE("interior tap: gradients flow through both mixing partners") {
    Rng rng(321);
    const std::size_t hidden[] = {5, 4};
    const auto model = Classifier::random(3, hidden, 2, 1, rng);
    const Vector a = testing::random_vector(3, rng);
    const Vector b = testing::random_vector(3, rng);
    const double lambda = 0.7;
    auto build = [&](const Classifier& m) {
        MixedExample ex;
        const Vector ha = m.representation(a);
        const Vector hb = m.representation(b);
        ex.mixed.resize(ha.size());
        for (std::size_t i = 0; i < ha.size(); ++i) ex.mixed[i] = lambda * ha[i] + (1 - lambda) * hb[i];
        ex.lambda = lambda;
        ex.first_input = a;
        ex.second_input = b;
        ex.target = PredictionDist({0.8, 0.2});
        TrainingBatch batch;
        batch.supervised.push_back(ex);
        return batch;
    };
    const auto grads = training_gradients(model, build(model), 1.0);
    const auto fd = testing::finite_difference_param_gradient(
        model, [&](const Classifier& m) { return training_loss(m, build(m), 1.0); }, 1e-6);
    for (std::size_t l = 0; l < grads.size(); ++l)
        for (std::size_t i = 0; i < grads[l].weights.size(); ++i)
            CHECK(testing::relative_error(grads[l].weights[i], fd[l].weights[i], 1e-6) < 1e-5);
}

TEST_CASE("train_step is bit-reproducible") {
    auto run_once = [] {
        Rng rng(7);
        const std::size_t hidden[] = {6, 6};
        auto model = Classifier::random(3, hidden, 3, 0, rng);
        TrainingBatch batch;
        for (int i = 0; i < 4; ++i) {
            MixedExample ex = labeled_example(testing::random_vector(3, rng), static_cast<std::size_t>(i % 3), 3);
            batch.supervised.push_back(ex);
            ex.target = testing::random_simplex(3, rng);
            batch.consistency.push_back(ex);
        }
        for (int s = 0; s < 10; ++s) train_step(model, batch, {0.05, 1.0});
        return model.layers();
    };
    const auto a = run_once();
    const auto b = run_once();
    for (std::size_t l = 0; l < a.size(); ++l) {
        REQUIRE(a[l].weights.size() == b[l].weights.size());
        CHECK(std::memcmp(a[l].weights.data(), b[l].weights.data(), a[l].weights.size() * sizeof(double)) == 0);
        CHECK(std::memcmp(a[l].bias.data(), b[l].bias.data(), a[l].bias.size() * sizeof(double)) == 0);
    }
}
