#include <doctest.h>

#include <cmath>
#include <vector>

#include "stackqa/errors.hpp"
#include "stackqa/nn/optim.hpp"

using namespace stackqa::nn;

namespace {

struct Param {
    std::vector<double> value;
    std::vector<double> grad;

    Eigen::Map<Eigen::ArrayXd> value_map() {
        return {value.data(), static_cast<Eigen::Index>(value.size())};
    }
    Eigen::Map<const Eigen::ArrayXd> grad_map() const {
        return {grad.data(), static_cast<Eigen::Index>(grad.size())};
    }
};

}  // namespace

TEST_CASE("adam first step matches the closed form") {
    // With zero-initialized moments and unit gradient, the bias corrections
    // cancel exactly: m_hat = v_hat = 1, so the update is lr / sqrt(1 + eps).
    Param p{{0.0}, {1.0}};
    AdamState state(1);
    const AdamConfig config;
    adam_step(p.value_map(), p.grad_map(), state, config);
    CHECK(state.step == 1);
    CHECK(p.value[0] == doctest::Approx(-0.000999999995).epsilon(1e-15));

    // A second identical gradient keeps m_hat = v_hat = 1.
    adam_step(p.value_map(), p.grad_map(), state, config);
    CHECK(state.step == 2);
    CHECK(p.value[0] == doctest::Approx(2.0 * -0.000999999995).epsilon(1e-12));
}

TEST_CASE("adam step with a general gradient") {
    Param p{{0.5, -0.25}, {2.0, -3.0}};
    AdamState state(2);
    AdamConfig config;
    config.lr = 0.01;
    adam_step(p.value_map(), p.grad_map(), state, config);
    // Hand expansion: m_hat = g, v_hat = g^2 after one step, so the update is
    // lr * g / sqrt(g^2 + eps) = lr * sign(g) up to eps.
    CHECK(p.value[0] == doctest::Approx(0.5 - 0.01).epsilon(1e-8));
    CHECK(p.value[1] == doctest::Approx(-0.25 + 0.01).epsilon(1e-8));

    // Opposite gradient pulls back toward where it started.
    Param q{{1.0}, {5.0}};
    AdamState qs(1);
    adam_step(q.value_map(), q.grad_map(), qs, config);
    q.grad[0] = -5.0;
    adam_step(q.value_map(), q.grad_map(), qs, config);
    CHECK(q.value[0] > 1.0 - 2 * config.lr);
    CHECK(q.value[0] < 1.0 + config.lr);
}

TEST_CASE("adam validates configuration and shapes") {
    Param p{{0.0}, {1.0}};
    AdamState state(1);
    AdamConfig bad;
    bad.lr = 0.0;
    CHECK_THROWS_AS(adam_step(p.value_map(), p.grad_map(), state, bad), stackqa::ValidationError);

    AdamState wrong(2);
    CHECK_THROWS_AS(adam_step(p.value_map(), p.grad_map(), wrong, AdamConfig{}),
                    stackqa::ValidationError);
}

TEST_CASE("adam converges on a 1d quadratic") {
    // Minimize (w - 3)^2 from w = 0; gradient is 2(w - 3).
    Param p{{0.0}, {0.0}};
    AdamState state(1);
    AdamConfig config;
    config.lr = 0.05;
    for (int i = 0; i < 2000; ++i) {
        p.grad[0] = 2.0 * (p.value[0] - 3.0);
        adam_step(p.value_map(), p.grad_map(), state, config);
    }
    CHECK(p.value[0] == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("plateau scheduler reduces after patience is exceeded") {
    PlateauScheduler sched;
    sched.patience = 3;
    sched.factor = 0.1;
    double lr = 1.0;

    CHECK_FALSE(sched.step(10.0, lr));  // first value improves over -inf
    CHECK(lr == 1.0);
    CHECK_FALSE(sched.step(10.0, lr));  // equal is not an improvement (1)
    CHECK_FALSE(sched.step(9.0, lr));   // (2)
    CHECK_FALSE(sched.step(10.0, lr));  // (3): still within patience
    CHECK(lr == 1.0);
    CHECK(sched.step(10.0, lr));        // (4) > patience: reduce and reset
    CHECK(lr == doctest::Approx(0.1));
    CHECK(sched.epochs_since_improve == 0);

    // Improvement resets the counter without touching the rate.
    CHECK_FALSE(sched.step(11.0, lr));
    CHECK(lr == doctest::Approx(0.1));
    CHECK(sched.best == doctest::Approx(11.0));
}

TEST_CASE("plateau scheduler floors at min_lr and never increases") {
    PlateauScheduler sched;
    sched.patience = 0;  // every non-improving epoch reduces
    sched.factor = 0.5;
    sched.min_lr = 0.3;
    double lr = 1.0;
    CHECK_FALSE(sched.step(1.0, lr));
    CHECK(sched.step(1.0, lr));  // 0.5
    CHECK(sched.step(1.0, lr));  // 0.3 (floored from 0.25)
    CHECK(lr == doctest::Approx(0.3));
    CHECK(sched.step(1.0, lr));
    CHECK(lr == doctest::Approx(0.3));

    // A tiny numerical wiggle below the 1e-12 threshold is not an improvement.
    PlateauScheduler tight;
    tight.patience = 0;
    double lr2 = 1.0;
    CHECK_FALSE(tight.step(5.0, lr2));
    CHECK(tight.step(5.0 + 1e-13, lr2));
    CHECK(lr2 < 1.0);
}
