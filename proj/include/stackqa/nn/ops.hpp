#pragma once

#include <Eigen/Dense>
#include <span>

#include "stackqa/rng.hpp"

namespace stackqa::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- embedding ----

/// Gather rows: output[i] = table.row(ids[i]). Errors on out-of-range ids.
Matrix embedding_forward(const Matrix& table, std::span<const int> ids);

/// Scatter-add output grads into the gathered rows; repeated ids accumulate.
void embedding_backward(const Matrix& out_grad, std::span<const int> ids, Matrix& table_grad);

// ---- 1d convolution (cross-correlation, stride 1, zero padding) ----
//
// input   [C_in x L]
// kernels [C_out x C_in*K]   (row d holds channel-major kernel d)
// output  [C_out x L + 2*pad - K + 1]

/// Unroll conv windows into columns: [(C_in*K) x L_out].
Matrix im2col1d(const Matrix& input, int kernel, int pad);

Matrix conv1d_forward(const Matrix& input, const Matrix& kernels, const Vector& bias, int kernel,
                      int pad);

struct Conv1dBackward {
    Matrix input_grad;
    Matrix kernel_grad;
    Vector bias_grad;
};

/// Backward from the cached im2col matrix of the forward pass.
Conv1dBackward conv1d_backward(const Matrix& im2col_cache, int in_channels, int in_length,
                               const Matrix& kernels, const Matrix& out_grad, int kernel, int pad);

// ---- max pooling ----

inline constexpr int kGlobalWindow = -1;

struct MaxPoolResult {
    Matrix output;          // [C x floor(L/window)] or [C x 1] for GLOBAL
    Eigen::MatrixXi argmax;  // input column index per output cell (first max wins)
};

MaxPoolResult maxpool1d_forward(const Matrix& input, int window);

/// Route output grads to the argmax positions; everything else gets 0.
Matrix maxpool1d_backward(const Eigen::MatrixXi& argmax, const Matrix& out_grad, int in_length);

// ---- fully connected ----

Vector linear_forward(const Matrix& weight, const Vector& bias, const Vector& x);

struct LinearBackward {
    Vector input_grad;
    Matrix weight_grad;
    Vector bias_grad;
};

LinearBackward linear_backward(const Matrix& weight, const Vector& x, const Vector& out_grad);

// ---- elementwise ----

template <class Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
    return x.cwiseMax(0.0);
}

/// Grad through relu given the pre-activation values.
template <class DerivedPre, class DerivedGrad>
auto relu_backward(const Eigen::MatrixBase<DerivedPre>& pre,
                   const Eigen::MatrixBase<DerivedGrad>& out_grad) {
    return (pre.array() > 0.0).select(out_grad, 0.0);
}

/// Inverted-dropout mask: 0 with probability p, else 1/(1-p). p = 0 yields
/// all-ones without consuming randomness; p >= 1 is an error.
Eigen::ArrayXd dropout_mask(Rng& rng, Eigen::Index size, double p);

/// Add N(0, sigma^2) i.i.d. to every entry, in Eigen storage order.
void add_gaussian_noise(Matrix& values, Rng& rng, double sigma);

// ---- output head ----

/// Numerically stable log-softmax; exp of the result sums to 1.
Vector log_softmax(const Vector& scores);

Vector log_softmax_backward(const Vector& log_probs, const Vector& out_grad);

enum class KlDirection {
    Conventional,  // sum_i y_i (ln y_i - log_pred_i), 0 ln 0 = 0
    LiteralPaper,  // sum_i exp(log_pred_i) (log_pred_i - ln y_i)
};

/// KL-divergence with summative reduction. Errors if the target does not sum
/// to 1 within 1e-6.
double kl_div_loss(const Vector& log_pred, const Vector& target,
                   KlDirection direction = KlDirection::Conventional);

/// d loss / d log_pred.
Vector kl_div_loss_backward(const Vector& log_pred, const Vector& target,
                            KlDirection direction = KlDirection::Conventional);

}  // namespace stackqa::nn
