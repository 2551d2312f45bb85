#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpl/adam.hpp"

using namespace cpl;

TEST_CASE("adam: the first step moves by roughly the learning rate") {
    AdamState state;
    AdamConfig cfg;
    std::array<double, kParamCount> params{};
    std::array<double, kParamCount> grad{};
    grad[0] = 4.2;
    grad[1] = -0.003;
    adam_step(state, params, grad, cfg);
    CHECK(params[0] == doctest::Approx(-cfg.learning_rate).epsilon(1e-6));
    CHECK(params[1] == doctest::Approx(cfg.learning_rate).epsilon(1e-4));
    CHECK(state.steps == 1);
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
    AdamState state;
    AdamConfig cfg;
    std::array<double, kParamCount> params{};
    params[3] = 1.5;
    const std::array<double, kParamCount> zero{};
    for (int i = 0; i < 10; ++i) adam_step(state, params, zero, cfg);
    CHECK(params[3] == 1.5);
    for (std::size_t i = 0; i < kParamCount; ++i)
        if (i != 3) CHECK(params[i] == 0.0);
}

TEST_CASE("adam: matches an independently scripted reference on a quadratic") {
    // Reference implementation written out separately: pow-based bias
    // correction, single scalar, f(x) = (x - 3)^2.
    double x_ref = 0.0;
    double m_ref = 0.0, v_ref = 0.0;
    const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;

    AdamState state;
    AdamConfig cfg;
    std::array<double, kParamCount> params{};
    std::array<double, kParamCount> grad{};

    for (int t = 1; t <= 100; ++t) {
        const double g_ref = 2.0 * (x_ref - 3.0);
        m_ref = b1 * m_ref + (1.0 - b1) * g_ref;
        v_ref = b2 * v_ref + (1.0 - b2) * g_ref * g_ref;
        const double mhat = m_ref / (1.0 - std::pow(b1, t));
        const double vhat = v_ref / (1.0 - std::pow(b2, t));
        x_ref -= lr * mhat / (std::sqrt(vhat) + eps);

        grad[0] = 2.0 * (params[0] - 3.0);
        adam_step(state, params, grad, cfg);
        CHECK(std::abs(params[0] - x_ref) <= 1e-12);
    }
    CHECK(state.steps == 100);
}

TEST_CASE("adam: non-finite gradients are rejected before touching state") {
    AdamState state;
    AdamConfig cfg;
    std::array<double, kParamCount> params{};
    std::array<double, kParamCount> grad{};
    grad[5] = std::nan("");
    CHECK_THROWS_AS(adam_step(state, params, grad, cfg), NonFiniteGradient);
    CHECK(state.steps == 0);
    grad[5] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(adam_step(state, params, grad, cfg), NonFiniteGradient);
}

TEST_CASE("adam: configuration validation") {
    AdamConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.learning_rate = 1e-3;
    cfg.beta1 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.beta1 = 0.9;
    cfg.beta2 = -0.1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
