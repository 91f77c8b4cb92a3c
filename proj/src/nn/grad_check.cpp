#include "stackqa/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "stackqa/errors.hpp"

namespace stackqa::nn {

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<void()>& compute_grads,
                           std::span<const ParamView> params, double delta, double tol) {
    if (delta <= 0.0) throw ValidationError("grad_check delta must be > 0");

    compute_grads();
    // The grad buffers may be refreshed by later loss() calls; snapshot them.
    std::vector<std::vector<double>> analytic(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
        analytic[p].assign(params[p].grad, params[p].grad + params[p].size);
    }

    GradCheckReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const ParamView& view = params[p];
        for (Eigen::Index i = 0; i < view.size; ++i) {
            const double saved = view.data[i];
            view.data[i] = saved + delta;
            const double plus = loss();
            view.data[i] = saved - delta;
            const double minus = loss();
            view.data[i] = saved;

            const double numeric = (plus - minus) / (2.0 * delta);
            const double a = analytic[p][static_cast<std::size_t>(i)];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double rel = std::abs(a - numeric) / denom;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_name = view.name;
                report.worst_index = i;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    report.pass = report.max_rel_error <= tol;
    return report;
}

}  // namespace stackqa::nn
