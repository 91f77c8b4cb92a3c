#pragma once

#include <Eigen/Dense>
#include <limits>

namespace stackqa::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-parameter moment buffers. step counts completed updates.
struct AdamState {
    long step = 0;
    Eigen::ArrayXd m;
    Eigen::ArrayXd v;

    explicit AdamState(Eigen::Index size = 0)
        : m(Eigen::ArrayXd::Zero(size)), v(Eigen::ArrayXd::Zero(size)) {}
};

/// Bias-corrected update: value -= lr * m_hat / sqrt(v_hat + eps).
/// Errors on lr <= 0 or shape mismatch.
void adam_step(Eigen::Map<Eigen::ArrayXd> value, Eigen::Map<const Eigen::ArrayXd> grad,
               AdamState& state, const AdamConfig& config);

/// Reduce-on-plateau policy for a maximized metric. After more than `patience`
/// consecutive epochs without improvement the rate is multiplied by `factor`
/// (floored at min_lr) and the counter resets. The rate never increases.
struct PlateauScheduler {
    int patience = 3;
    double factor = 0.1;
    double min_lr = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    int epochs_since_improve = 0;

    /// Feed one epoch's metric; possibly reduces lr in place. Returns true if
    /// the rate was reduced this step.
    bool step(double metric, double& lr);
};

}  // namespace stackqa::nn
