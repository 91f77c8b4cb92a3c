#include "stackqa/nn/ops.hpp"

#include <cmath>

#include "stackqa/errors.hpp"

namespace stackqa::nn {

Matrix embedding_forward(const Matrix& table, std::span<const int> ids) {
    Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (id < 0 || id >= table.rows()) {
            throw ValidationError("embedding id out of range: " + std::to_string(id));
        }
        out.row(static_cast<Eigen::Index>(i)) = table.row(id);
    }
    return out;
}

void embedding_backward(const Matrix& out_grad, std::span<const int> ids, Matrix& table_grad) {
    if (out_grad.rows() != static_cast<Eigen::Index>(ids.size())) {
        throw ValidationError("embedding_backward: grad rows do not match id count");
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int id = ids[i];
        if (id < 0 || id >= table_grad.rows()) {
            throw ValidationError("embedding id out of range: " + std::to_string(id));
        }
        table_grad.row(id) += out_grad.row(static_cast<Eigen::Index>(i));
    }
}

Matrix im2col1d(const Matrix& input, int kernel, int pad) {
    const Eigen::Index channels = input.rows();
    const Eigen::Index length = input.cols();
    if (kernel < 1) throw ValidationError("conv kernel must be >= 1");
    if (pad < 0) throw ValidationError("conv padding must be >= 0");
    const Eigen::Index out_length = length + 2 * pad - kernel + 1;
    if (out_length < 1) throw ValidationError("conv output length would be empty");

    // Channel-major rows (row c*K + k) so `kernels * cols` works directly.
    Matrix cols = Matrix::Zero(channels * kernel, out_length);
    for (Eigen::Index o = 0; o < out_length; ++o) {
        for (int k = 0; k < kernel; ++k) {
            const Eigen::Index src = o - pad + k;
            if (src < 0 || src >= length) continue;  // zero padding
            for (Eigen::Index c = 0; c < channels; ++c) {
                cols(c * kernel + k, o) = input(c, src);
            }
        }
    }
    return cols;
}

Matrix conv1d_forward(const Matrix& input, const Matrix& kernels, const Vector& bias, int kernel,
                      int pad) {
    if (kernels.cols() != input.rows() * kernel) {
        throw ValidationError("conv kernels shape does not match input channels");
    }
    if (bias.size() != kernels.rows()) throw ValidationError("conv bias size mismatch");
    const Matrix cols = im2col1d(input, kernel, pad);
    Matrix out = kernels * cols;
    out.colwise() += bias;
    return out;
}

Conv1dBackward conv1d_backward(const Matrix& im2col_cache, int in_channels, int in_length,
                               const Matrix& kernels, const Matrix& out_grad, int kernel,
                               int pad) {
    Conv1dBackward grads;
    grads.kernel_grad = out_grad * im2col_cache.transpose();
    grads.bias_grad = out_grad.rowwise().sum();

    // col grad, then fold the columns back onto the padded input positions.
    const Matrix col_grad = kernels.transpose() * out_grad;  // [(C*K) x L_out]
    grads.input_grad = Matrix::Zero(in_channels, in_length);
    const Eigen::Index out_length = out_grad.cols();
    for (Eigen::Index o = 0; o < out_length; ++o) {
        for (int k = 0; k < kernel; ++k) {
            const Eigen::Index src = o - pad + k;
            if (src < 0 || src >= in_length) continue;
            for (Eigen::Index c = 0; c < in_channels; ++c) {
                grads.input_grad(c, src) += col_grad(c * kernel + k, o);
            }
        }
    }
    return grads;
}

MaxPoolResult maxpool1d_forward(const Matrix& input, int window) {
    const Eigen::Index channels = input.rows();
    const Eigen::Index length = input.cols();
    if (length < 1) throw ValidationError("maxpool input must be non-empty");
    const bool global = window == kGlobalWindow;
    if (!global && window < 1) throw ValidationError("maxpool window must be >= 1 or GLOBAL");
    const Eigen::Index effective = global ? length : window;
    const Eigen::Index out_length = global ? 1 : length / effective;
    if (out_length < 1) throw ValidationError("maxpool window longer than input");

    MaxPoolResult result;
    result.output.resize(channels, out_length);
    result.argmax.resize(channels, out_length);
    for (Eigen::Index c = 0; c < channels; ++c) {
        for (Eigen::Index o = 0; o < out_length; ++o) {
            const Eigen::Index begin = o * effective;
            Eigen::Index best = begin;
            double best_value = input(c, begin);
            for (Eigen::Index i = begin + 1; i < begin + effective; ++i) {
                if (input(c, i) > best_value) {  // first max wins ties
                    best_value = input(c, i);
                    best = i;
                }
            }
            result.output(c, o) = best_value;
            result.argmax(c, o) = static_cast<int>(best);
        }
    }
    return result;
}

Matrix maxpool1d_backward(const Eigen::MatrixXi& argmax, const Matrix& out_grad, int in_length) {
    if (argmax.rows() != out_grad.rows() || argmax.cols() != out_grad.cols()) {
        throw ValidationError("maxpool backward shape mismatch");
    }
    Matrix input_grad = Matrix::Zero(out_grad.rows(), in_length);
    for (Eigen::Index c = 0; c < out_grad.rows(); ++c) {
        for (Eigen::Index o = 0; o < out_grad.cols(); ++o) {
            input_grad(c, argmax(c, o)) += out_grad(c, o);
        }
    }
    return input_grad;
}

Vector linear_forward(const Matrix& weight, const Vector& bias, const Vector& x) {
    if (weight.cols() != x.size() || weight.rows() != bias.size()) {
        throw ValidationError("linear shape mismatch");
    }
    return weight * x + bias;
}

LinearBackward linear_backward(const Matrix& weight, const Vector& x, const Vector& out_grad) {
    LinearBackward grads;
    grads.input_grad = weight.transpose() * out_grad;
    grads.weight_grad = out_grad * x.transpose();
    grads.bias_grad = out_grad;
    return grads;
}

Eigen::ArrayXd dropout_mask(Rng& rng, Eigen::Index size, double p) {
    if (p < 0.0 || p >= 1.0) throw ValidationError("dropout probability must be in [0,1)");
    Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(size);
    if (p == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < size; ++i) {
        mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    }
    return mask;
}

void add_gaussian_noise(Matrix& values, Rng& rng, double sigma) {
    if (sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
    if (sigma == 0.0) return;
    double* data = values.data();
    for (Eigen::Index i = 0; i < values.size(); ++i) data[i] += sigma * rng.normal();
}

Vector log_softmax(const Vector& scores) {
    if (scores.size() < 1) throw ValidationError("log_softmax of an empty vector");
    const double max_score = scores.maxCoeff();
    const double log_sum = std::log((scores.array() - max_score).exp().sum());
    return scores.array() - max_score - log_sum;
}

Vector log_softmax_backward(const Vector& log_probs, const Vector& out_grad) {
    const double grad_sum = out_grad.sum();
    return out_grad.array() - log_probs.array().exp() * grad_sum;
}

namespace {

void check_target(const Vector& target) {
    const double sum = target.sum();
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ValidationError("KL target must sum to 1 (got " + std::to_string(sum) + ")");
    }
    if ((target.array() < 0.0).any()) {
        throw ValidationError("KL target must be non-negative");
    }
}

}  // namespace

double kl_div_loss(const Vector& log_pred, const Vector& target, KlDirection direction) {
    if (log_pred.size() != target.size()) throw ValidationError("KL size mismatch");
    check_target(target);
    double loss = 0.0;
    if (direction == KlDirection::Conventional) {
        for (Eigen::Index i = 0; i < target.size(); ++i) {
            const double y = target[i];
            if (y == 0.0) continue;  // 0 ln 0 = 0
            loss += y * (std::log(y) - log_pred[i]);
        }
    } else {
        for (Eigen::Index i = 0; i < target.size(); ++i) {
            const double p = std::exp(log_pred[i]);
            const double y = target[i];
            loss += p * (log_pred[i] - std::log(y));
        }
    }
    return loss;
}

Vector kl_div_loss_backward(const Vector& log_pred, const Vector& target, KlDirection direction) {
    if (log_pred.size() != target.size()) throw ValidationError("KL size mismatch");
    check_target(target);
    Vector grad(log_pred.size());
    if (direction == KlDirection::Conventional) {
        grad = -target;
    } else {
        for (Eigen::Index i = 0; i < target.size(); ++i) {
            const double p = std::exp(log_pred[i]);
            grad[i] = p * (log_pred[i] - std::log(target[i]) + 1.0);
        }
    }
    return grad;
}

}  // namespace stackqa::nn
