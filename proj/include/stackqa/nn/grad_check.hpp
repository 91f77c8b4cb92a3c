#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>

namespace stackqa::nn {

/// Flat view over one parameter block for the finite-difference harness.
struct ParamView {
    std::string name;
    double* data = nullptr;
    const double* grad = nullptr;
    Eigen::Index size = 0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_name;
    Eigen::Index worst_index = -1;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    bool pass = true;
};

/// Central-difference check of analytic gradients, coordinate by coordinate.
/// `loss` evaluates the scalar at the current parameter values (stochastic
/// layers must be disabled); `compute_grads` refreshes every grad buffer at
/// the unperturbed point. Relative error uses max(1, |analytic|, |numeric|)
/// as the denominator; pass iff the max is <= tol.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           std::span<const ParamView> params, double delta, double tol);

}  // namespace stackqa::nn
