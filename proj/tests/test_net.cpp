#include "oracles.hpp"

#include <nsae/net.hpp>

#include <catch_amalgamated.hpp>

#include <vector>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using nsae::ErrorCode;

namespace {

std::vector<std::size_t> sizes(std::initializer_list<std::size_t> s)
{
    return s;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const nsae::Error& e) {
        return e.code();
    }
    FAIL("expected nsae::Error");
    return ErrorCode::IoFailure;
}

std::vector<double> random_vec(std::size_t dim, std::uint64_t seed)
{
    return oracle::random_vectors(1, dim, seed)[0];
}

double relative_error(double a, double b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale < 1e-10 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace

TEST_CASE("init_autoencoder", "[net]")
{
    const auto a = nsae::init_autoencoder(sizes({4, 2, 4}), 7);
    const auto b = nsae::init_autoencoder(sizes({4, 2, 4}), 7);
    CHECK(a == b);
    CHECK_FALSE(a == nsae::init_autoencoder(sizes({4, 2, 4}), 8));

    const auto p = nsae::init_autoencoder(sizes({4, 3, 2, 3, 4}), 1);
    REQUIRE(p.layers.size() == 4);
    const std::pair<std::size_t, std::size_t> shapes[] = {{3, 4}, {2, 3}, {3, 2}, {4, 3}};
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(p.layers[l].fan_out == shapes[l].first);
        CHECK(p.layers[l].fan_in == shapes[l].second);
        CHECK(p.layers[l].weights.size() == shapes[l].first * shapes[l].second);
        CHECK(p.layers[l].bias == std::vector<double>(shapes[l].first, 0.0));
        const double s = std::sqrt(6.0 / static_cast<double>(shapes[l].first + shapes[l].second));
        for (double w : p.layers[l].weights)
            CHECK(std::abs(w) <= s);
        CHECK(p.layers[l].activation ==
              (l == 3 ? nsae::Activation::Linear : nsae::Activation::ReLU));
    }
    CHECK(p.bottleneck_index == 2);
    CHECK(p.bottleneck_dim() == 2);

    CHECK(code_of([] { nsae::init_autoencoder(sizes({4, 2, 5}), 1); }) ==
          ErrorCode::AsymmetricArchitecture);
    CHECK(code_of([] { nsae::init_autoencoder(sizes({4, 0, 4}), 1); }) == ErrorCode::BadLayerSize);
    CHECK(code_of([] { nsae::init_autoencoder(sizes({4, 4}), 1); }) == ErrorCode::BadLayerSize);
}

TEST_CASE("forward", "[net]")
{
    SECTION("zero parameters give a zero reconstruction")
    {
        auto p = nsae::init_autoencoder(sizes({5, 3, 5}), 2);
        for (auto& l : p.layers)
            std::fill(l.weights.begin(), l.weights.end(), 0.0);
        const auto out = nsae::forward(p, random_vec(5, 1));
        CHECK(out.reconstruction == std::vector<double>(5, 0.0));
        CHECK(out.bottleneck == std::vector<double>(3, 0.0));
    }
    SECTION("linear identity layers reproduce the input")
    {
        auto p = nsae::init_autoencoder(sizes({3, 3, 3}), 2);
        for (auto& l : p.layers) {
            l.activation = nsae::Activation::Linear;
            std::fill(l.weights.begin(), l.weights.end(), 0.0);
            for (std::size_t i = 0; i < 3; ++i)
                l.weight(i, i) = 1.0;
        }
        const auto x = random_vec(3, 9);
        const auto out = nsae::forward(p, x);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK_THAT(out.reconstruction[i], WithinAbs(x[i], 1e-9));
    }
    SECTION("matches the scalar oracle")
    {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto p = nsae::init_autoencoder(sizes({8, 4, 2, 4, 8}), seed);
            const auto x = random_vec(8, seed + 100);
            const auto out = nsae::forward(p, x);
            const auto ref = oracle::forward(p, x);
            for (std::size_t i = 0; i < 8; ++i)
                CHECK_THAT(out.reconstruction[i], WithinAbs(ref.back()[i], 1e-9));
            for (std::size_t i = 0; i < 2; ++i)
                CHECK_THAT(out.bottleneck[i], WithinAbs(ref[2][i], 1e-9));
            // Deterministic down to the bit.
            CHECK(nsae::forward(p, x).reconstruction == out.reconstruction);
        }
    }
    SECTION("dimension mismatch")
    {
        const auto p = nsae::init_autoencoder(sizes({4, 2, 4}), 1);
        CHECK(code_of([&] { nsae::forward(p, std::vector<double>(3, 1.0)); }) ==
              ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("mse_loss", "[net]")
{
    const std::vector<double> v{0.3, -1.2, 4.0};
    CHECK(nsae::mse_loss(v, v) == 0.0);
    CHECK(nsae::mse_loss(std::vector{1.0, 1.0}, std::vector{0.0, 0.0}) == 1.0);
    CHECK_THAT(nsae::mse_loss(std::vector{2.0, 0.0, 1.0}, std::vector{0.0, 1.0, 1.0}),
               WithinAbs(5.0 / 3.0, 1e-12));
    CHECK(code_of([] { nsae::mse_loss(std::vector{1.0}, std::vector{1.0, 2.0}); }) ==
          ErrorCode::DimensionMismatch);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto a = random_vec(6, seed);
        auto b = random_vec(6, seed + 50);
        CHECK(nsae::mse_loss(a, b) == nsae::mse_loss(b, a));
        CHECK(nsae::mse_loss(a, b) >= 0.0);
    }
}

TEST_CASE("backward", "[net]")
{
    SECTION("zero gradient at an exact reconstruction")
    {
        const auto p = nsae::init_autoencoder(sizes({6, 4, 2, 4, 6}), 3);
        const auto x = random_vec(6, 4);
        const auto target = nsae::forward(p, x).reconstruction;
        const auto r = nsae::backward(p, x, target);
        CHECK(r.loss == 0.0);
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            for (double g : r.grad.weights[l])
                CHECK(g == 0.0);
            for (double g : r.grad.bias[l])
                CHECK(g == 0.0);
        }
    }
    SECTION("loss equals mse of the forward pass")
    {
        const auto p = nsae::init_autoencoder(sizes({6, 4, 2, 4, 6}), 3);
        const auto x = random_vec(6, 4);
        const auto t = random_vec(6, 5);
        CHECK(nsae::backward(p, x, t).loss == nsae::mse_loss(nsae::forward(p, x).reconstruction, t));
    }
    SECTION("output bias gradient has the closed form 2/d (x_hat - target)")
    {
        const auto p = nsae::init_autoencoder(sizes({6, 4, 2, 4, 6}), 8);
        const auto x = random_vec(6, 1);
        const auto t = random_vec(6, 2);
        const auto x_hat = oracle::forward(p, x).back();
        const auto r = nsae::backward(p, x, t);
        for (std::size_t i = 0; i < 6; ++i)
            CHECK_THAT(r.grad.bias.back()[i], WithinAbs(2.0 / 6.0 * (x_hat[i] - t[i]), 1e-12));
    }
    SECTION("matches central finite differences on every parameter")
    {
        constexpr double h = 1e-5;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto p = nsae::init_autoencoder(sizes({6, 4, 2, 4, 6}), seed);
            for (auto& l : p.layers)
                for (std::size_t i = 0; i < l.bias.size(); ++i)
                    l.bias[i] = 0.1 * nsae::CounterRng(seed, 99 + i).gaussian();
            const auto x = random_vec(6, seed + 10);
            const auto t = random_vec(6, seed + 20);
            const auto r = nsae::backward(p, x, t);
            for (std::size_t l = 0; l < p.layers.size(); ++l) {
                for (std::size_t i = 0; i < p.layers[l].weights.size(); ++i) {
                    const double fd = oracle::finite_difference(
                        p, [&](nsae::AutoencoderParams& q) -> double& { return q.layers[l].weights[i]; },
                        x, t, h);
                    CHECK(relative_error(r.grad.weights[l][i], fd) < 1e-4);
                }
                for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i) {
                    const double fd = oracle::finite_difference(
                        p, [&](nsae::AutoencoderParams& q) -> double& { return q.layers[l].bias[i]; },
                        x, t, h);
                    CHECK(relative_error(r.grad.bias[l][i], fd) < 1e-4);
                }
            }
        }
    }
    SECTION("non-finite activations are reported")
    {
        auto p = nsae::init_autoencoder(sizes({2, 1, 2}), 1);
        p.layers[0].weights[0] = 1e308;
        p.layers[0].weights[1] = 1e308;
        CHECK(code_of([&] { nsae::backward(p, std::vector{10.0, 10.0}, std::vector{0.0, 0.0}); }) ==
              ErrorCode::NonFiniteActivation);
    }
}

TEST_CASE("sgd_step", "[net]")
{
    auto p = nsae::init_autoencoder(sizes({4, 2, 4}), 5);
    auto zero = nsae::Gradients::zeros_like(p);
    CHECK(nsae::sgd_step(p, zero, 0.5) == p);

    auto single = nsae::init_autoencoder(sizes({1, 1, 1}), 1);
    single.layers[0].weights[0] = 1.0;
    auto g = nsae::Gradients::zeros_like(single);
    g.weights[0][0] = 0.5;
    CHECK_THAT(nsae::sgd_step(single, g, 0.1).layers[0].weights[0], WithinAbs(0.95, 1e-15));

    // Two steps with fixed gradients equal one step with their sum.
    const auto x = random_vec(4, 1);
    const auto g1 = nsae::backward(p, x, random_vec(4, 2)).grad;
    const auto g2 = nsae::backward(p, x, random_vec(4, 3)).grad;
    auto sum = g1;
    sum += g2;
    const auto twice = nsae::sgd_step(nsae::sgd_step(p, g1, 0.01), g2, 0.01);
    const auto once = nsae::sgd_step(p, sum, 0.01);
    for (std::size_t l = 0; l < p.layers.size(); ++l)
        for (std::size_t i = 0; i < p.layers[l].weights.size(); ++i)
            CHECK_THAT(twice.layers[l].weights[i], WithinAbs(once.layers[l].weights[i], 1e-15));

    auto wrong = nsae::Gradients::zeros_like(nsae::init_autoencoder(sizes({3, 2, 3}), 1));
    CHECK(code_of([&] { nsae::sgd_step(p, wrong, 0.1); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { nsae::sgd_step(p, zero, 0.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("a small SGD step never increases the pair loss", "[net][property]")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto p = nsae::init_autoencoder(sizes({6, 4, 2, 4, 6}), seed);
        const auto x = random_vec(6, seed + 1);
        const auto t = random_vec(6, seed + 2);
        const auto r = nsae::backward(p, x, t);
        const auto q = nsae::sgd_step(p, r.grad, 1e-6);
        CHECK(nsae::mse_loss(nsae::forward(q, x).reconstruction, t) <= r.loss);
    }
}

TEST_CASE("lr_at", "[net]")
{
    const nsae::LrSchedule log = nsae::LogDecay{1e-2, 1e-8};
    CHECK_THAT(nsae::lr_at(log, 0, 400), WithinRel(1e-2, 1e-12));
    CHECK_THAT(nsae::lr_at(log, 399, 400), WithinRel(1e-8, 1e-12));
    CHECK_THAT(nsae::lr_at(log, 1, 3), WithinRel(1e-5, 1e-12));
    for (std::size_t e = 1; e < 400; ++e)
        CHECK(nsae::lr_at(log, e, 400) < nsae::lr_at(log, e - 1, 400));
    CHECK(nsae::lr_at(log, 0, 1) == 1e-2);

    const nsae::LrSchedule constant = nsae::ConstantWithDecay{0.03, 0.0002};
    CHECK(nsae::lr_at(constant, 0, 10) == 0.03);
    CHECK_THAT(nsae::lr_at(constant, 5, 10), WithinRel(0.03 / 1.001, 1e-12));

    CHECK(code_of([&] { nsae::lr_at(log, 400, 400); }) == ErrorCode::EpochOutOfRange);
    CHECK(code_of([] { nsae::lr_at(nsae::LogDecay{1e-8, 1e-2}, 0, 3); }) == ErrorCode::InvalidConfig);
}
