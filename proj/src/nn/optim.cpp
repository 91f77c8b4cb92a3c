#include "stackqa/nn/optim.hpp"

#include <cmath>

#include "stackqa/errors.hpp"

namespace stackqa::nn {

void adam_step(Eigen::Map<Eigen::ArrayXd> value, Eigen::Map<const Eigen::ArrayXd> grad,
               AdamState& state, const AdamConfig& config) {
    if (config.lr <= 0.0) throw ValidationError("adam learning rate must be > 0");
    if (value.size() != grad.size() || value.size() != state.m.size() ||
        value.size() != state.v.size()) {
        throw ValidationError("adam_step shape mismatch");
    }
    ++state.step;
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.square();
    const double m_corr = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    value -= config.lr * (state.m / m_corr) / ((state.v / v_corr) + config.eps).sqrt();
}

bool PlateauScheduler::step(double metric, double& lr) {
    if (metric > best + 1e-12) {
        best = metric;
        epochs_since_improve = 0;
        return false;
    }
    ++epochs_since_improve;
    if (epochs_since_improve > patience) {
        lr = std::max(lr * factor, min_lr);
        epochs_since_improve = 0;
        return true;
    }
    return false;
}

}  // namespace stackqa::nn
