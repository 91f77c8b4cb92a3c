#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stackqa/nn/grad_check.hpp"
#include "stackqa/nn/ops.hpp"
#include "stackqa/nn/optim.hpp"
#include "stackqa/rng.hpp"
#include "stackqa/stacking_data.hpp"
#include "stackqa/tokenizer.hpp"
#include "stackqa/types.hpp"

namespace stackqa {

struct MetaModelConfig {
    int embed_dim = 512;
    std::vector<int> conv_channels = {1024, 64};
    std::vector<int> fc_sizes = {64, 16};  // last entry must equal n_slots
    double dropout_p = 0.2;
    double embed_dropout_p = 0.0;
    double noise_sigma = 0.0;
    double lr = 0.001;
    int patience = 3;
    double lr_factor = 0.1;
    int epochs = 30;
    int batch_size = 32;
    uint64_t seed = 42;
    bool biased_targets = false;
    nn::KlDirection kl_direction = nn::KlDirection::Conventional;
    int n_slots = 16;       // H
    int tokens_per_hypothesis = 16;  // T

    // Conv geometry: kernel 3, zero padding 1 (length-preserving); every block
    // pools by 2 except the last, which pools globally to one column.
    static constexpr int kKernel = 3;
    static constexpr int kPad = 1;
    static constexpr int kPoolWindow = 2;

    void validate() const;  // throws ValidationError
};

/// Parameter tensors for one model instance; doubles as gradient storage.
struct ParamSet {
    nn::Matrix embedding;                  // [V x E]
    std::vector<nn::Matrix> conv_weights;  // [C_out x C_in*K] per block
    std::vector<nn::Vector> conv_biases;
    std::vector<nn::Matrix> fc_weights;
    std::vector<nn::Vector> fc_biases;

    void set_zero();
};

struct MetaModel {
    MetaModelConfig config;
    Tokenizer tokenizer;
    ParamSet params;
    ParamSet grads;

    /// Stable registry over (params, grads), in update order.
    std::vector<nn::ParamView> param_views();
};

/// Everything the backward pass needs from one forward evaluation.
struct ForwardTrace {
    std::vector<int> ids;
    nn::Matrix embedded;  // [L x E], after dropout/noise when training
    Eigen::ArrayXd embed_mask;
    std::vector<nn::Matrix> conv_cols;  // im2col cache per block
    std::vector<nn::Matrix> conv_pre;   // pre-activation
    std::vector<Eigen::MatrixXi> pool_argmax;
    std::vector<int> pool_in_lengths;
    std::vector<nn::Vector> fc_inputs;  // input to each fc layer
    std::vector<nn::Vector> fc_pre;
    std::vector<Eigen::ArrayXd> fc_masks;
    nn::Vector log_probs;
};

/// Seed-deterministic initialization: layer weights uniform in
/// +-sqrt(1/fan_in), embedding rows N(0, 1/sqrt(E)).
MetaModel init_model(const MetaModelConfig& config, const Tokenizer& tokenizer, uint64_t seed);

/// Token ids -> log-probabilities over the H slots. Dropout and noise apply
/// only in train mode (rng required then). trace may be null for inference.
nn::Vector forward(const MetaModel& model, std::span<const int> x, bool train_mode, Rng* rng,
                   ForwardTrace* trace);

/// Accumulate parameter gradients from d loss / d log_probs.
void backward(MetaModel& model, const ForwardTrace& trace, const nn::Vector& logprob_grad);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;  // mean per-example KL
    double dev_em = 0.0;
    double dev_f1 = 0.0;
    double lr = 0.0;  // rate in effect during the epoch
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;  // argmax dev F1, earliest on ties; -1 when empty
    double best_dev_f1 = 0.0;
};

/// Shuffled minibatch KL training with Adam and the plateau scheduler stepped
/// on dev F1 each epoch. The model is left at the best-dev-F1 checkpoint.
/// Every train example must carry y.
TrainHistory train(MetaModel& model, const std::vector<StackExample>& train_set,
                   const std::vector<StackExample>& dev_set, const Dataset& dev_gold);

/// Argmax over non-padding slots; a no-answer slot maps to "".
std::map<std::string, std::string> predict(const MetaModel& model,
                                           const std::vector<StackExample>& examples,
                                           int jobs = 1);

/// Checkpoint format "stackqa-ckpt-v1": config header, tokenizer, flat
/// parameter arrays.
void save_checkpoint(const MetaModel& model, const std::string& path);
MetaModel load_checkpoint(const std::string& path);

void write_history_csv(const std::string& path, const TrainHistory& history);

}  // namespace stackqa
