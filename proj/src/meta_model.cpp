#include "stackqa/meta_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "stackqa/errors.hpp"
#include "stackqa/parallel.hpp"
#include "stackqa/squad_metrics.hpp"

namespace stackqa {

namespace {
using nlohmann::json;
using nn::Matrix;
using nn::Vector;
}  // namespace

void MetaModelConfig::validate() const {
    if (embed_dim < 1) throw ValidationError("embed_dim must be >= 1");
    if (conv_channels.empty()) throw ValidationError("need at least one conv block");
    for (int c : conv_channels) {
        if (c < 1) throw ValidationError("conv channel counts must be >= 1");
    }
    if (fc_sizes.empty()) throw ValidationError("need at least one fc layer");
    for (int s : fc_sizes) {
        if (s < 1) throw ValidationError("fc sizes must be >= 1");
    }
    if (n_slots < 1) throw ValidationError("n_slots must be >= 1");
    if (tokens_per_hypothesis < 1) throw ValidationError("tokens_per_hypothesis must be >= 1");
    if (fc_sizes.back() != n_slots) {
        throw ValidationError("last fc size (" + std::to_string(fc_sizes.back()) +
                              ") must equal the slot count (" + std::to_string(n_slots) + ")");
    }
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw ValidationError("dropout_p must be in [0,1)");
    if (embed_dropout_p < 0.0 || embed_dropout_p >= 1.0) {
        throw ValidationError("embed_dropout_p must be in [0,1)");
    }
    if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
    if (lr <= 0.0) throw ValidationError("lr must be > 0");
    if (patience < 0) throw ValidationError("patience must be >= 0");
    if (lr_factor <= 0.0 || lr_factor > 1.0) throw ValidationError("lr_factor must be in (0,1]");
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");

    // Every non-final block halves the sequence; the final one pools globally.
    int length = n_slots * tokens_per_hypothesis;
    for (std::size_t b = 0; b + 1 < conv_channels.size(); ++b) {
        length /= kPoolWindow;
        if (length < 1) {
            throw ValidationError("input too short for " +
                                  std::to_string(conv_channels.size()) + " conv blocks");
        }
    }
}

void ParamSet::set_zero() {
    embedding.setZero();
    for (auto& w : conv_weights) w.setZero();
    for (auto& b : conv_biases) b.setZero();
    for (auto& w : fc_weights) w.setZero();
    for (auto& b : fc_biases) b.setZero();
}

std::vector<nn::ParamView> MetaModel::param_views() {
    std::vector<nn::ParamView> views;
    views.push_back({"embedding", params.embedding.data(), grads.embedding.data(),
                     params.embedding.size()});
    for (std::size_t b = 0; b < params.conv_weights.size(); ++b) {
        const std::string tag = "conv" + std::to_string(b);
        views.push_back({tag + ".weight", params.conv_weights[b].data(),
                         grads.conv_weights[b].data(), params.conv_weights[b].size()});
        views.push_back({tag + ".bias", params.conv_biases[b].data(),
                         grads.conv_biases[b].data(), params.conv_biases[b].size()});
    }
    for (std::size_t l = 0; l < params.fc_weights.size(); ++l) {
        const std::string tag = "fc" + std::to_string(l);
        views.push_back({tag + ".weight", params.fc_weights[l].data(),
                         grads.fc_weights[l].data(), params.fc_weights[l].size()});
        views.push_back({tag + ".bias", params.fc_biases[l].data(), grads.fc_biases[l].data(),
                         params.fc_biases[l].size()});
    }
    return views;
}

namespace {

// Allocate every tensor of a ParamSet for the given geometry, zero-filled.
ParamSet allocate_params(const MetaModelConfig& config, int vocab_size) {
    ParamSet set;
    set.embedding = Matrix::Zero(vocab_size, config.embed_dim);
    int in_channels = config.embed_dim;
    for (int out_channels : config.conv_channels) {
        set.conv_weights.push_back(
            Matrix::Zero(out_channels, in_channels * MetaModelConfig::kKernel));
        set.conv_biases.push_back(Vector::Zero(out_channels));
        in_channels = out_channels;
    }
    int in_features = config.conv_channels.back();
    for (int out_features : config.fc_sizes) {
        set.fc_weights.push_back(Matrix::Zero(out_features, in_features));
        set.fc_biases.push_back(Vector::Zero(out_features));
        in_features = out_features;
    }
    return set;
}

void fill_uniform(Matrix& m, Rng& rng, double bound) {
    double* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rng.uniform(-bound, bound);
}

void fill_uniform(Vector& v, Rng& rng, double bound) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

}  // namespace

MetaModel init_model(const MetaModelConfig& config, const Tokenizer& tokenizer, uint64_t seed) {
    config.validate();
    if (tokenizer.num_slots() != config.n_slots) {
        throw ValidationError("tokenizer has " + std::to_string(tokenizer.num_slots()) +
                              " slots, config expects " + std::to_string(config.n_slots));
    }
    MetaModel model;
    model.config = config;
    model.tokenizer = tokenizer;
    model.params = allocate_params(config, tokenizer.vocab_size());
    model.grads = allocate_params(config, tokenizer.vocab_size());

    Rng rng(seed);
    const double embed_sigma = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
    double* embed = model.params.embedding.data();
    for (Eigen::Index i = 0; i < model.params.embedding.size(); ++i) {
        embed[i] = rng.normal(0.0, embed_sigma);
    }
    for (std::size_t b = 0; b < model.params.conv_weights.size(); ++b) {
        const double bound =
            std::sqrt(1.0 / static_cast<double>(model.params.conv_weights[b].cols()));
        fill_uniform(model.params.conv_weights[b], rng, bound);
        fill_uniform(model.params.conv_biases[b], rng, bound);
    }
    for (std::size_t l = 0; l < model.params.fc_weights.size(); ++l) {
        const double bound =
            std::sqrt(1.0 / static_cast<double>(model.params.fc_weights[l].cols()));
        fill_uniform(model.params.fc_weights[l], rng, bound);
        fill_uniform(model.params.fc_biases[l], rng, bound);
    }
    return model;
}

Vector forward(const MetaModel& model, std::span<const int> x, bool train_mode, Rng* rng,
               ForwardTrace* trace) {
    const MetaModelConfig& config = model.config;
    const int L = config.n_slots * config.tokens_per_hypothesis;
    if (static_cast<int>(x.size()) != L) {
        throw ValidationError("forward: input length " + std::to_string(x.size()) +
                              " does not match H*T = " + std::to_string(L));
    }
    if (train_mode && rng == nullptr) {
        throw ValidationError("forward: train mode needs an rng");
    }

    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    t = ForwardTrace{};
    t.ids.assign(x.begin(), x.end());

    t.embedded = nn::embedding_forward(model.params.embedding, x);
    if (train_mode && config.embed_dropout_p > 0.0) {
        t.embed_mask = nn::dropout_mask(*rng, t.embedded.size(), config.embed_dropout_p);
        Eigen::Map<Eigen::ArrayXd>(t.embedded.data(), t.embedded.size()) *= t.embed_mask;
    }
    if (train_mode && config.noise_sigma > 0.0) {
        nn::add_gaussian_noise(t.embedded, *rng, config.noise_sigma);
    }

    Matrix signal = t.embedded.transpose();  // [E x L]
    const std::size_t blocks = config.conv_channels.size();
    for (std::size_t b = 0; b < blocks; ++b) {
        const int in_length = static_cast<int>(signal.cols());
        Matrix cols = nn::im2col1d(signal, MetaModelConfig::kKernel, MetaModelConfig::kPad);
        Matrix pre = model.params.conv_weights[b] * cols;
        pre.colwise() += model.params.conv_biases[b];
        const int window =
            b + 1 == blocks ? nn::kGlobalWindow : MetaModelConfig::kPoolWindow;
        nn::MaxPoolResult pooled = nn::maxpool1d_forward(nn::relu(pre), window);

        t.conv_cols.push_back(std::move(cols));
        t.conv_pre.push_back(std::move(pre));
        t.pool_argmax.push_back(std::move(pooled.argmax));
        t.pool_in_lengths.push_back(in_length);
        signal = std::move(pooled.output);
    }

    Vector activation = signal.col(0);  // GLOBAL pool left [C_last x 1]
    const std::size_t fc_layers = config.fc_sizes.size();
    for (std::size_t l = 0; l < fc_layers; ++l) {
        t.fc_inputs.push_back(activation);
        Vector pre = nn::linear_forward(model.params.fc_weights[l], model.params.fc_biases[l],
                                        activation);
        t.fc_pre.push_back(pre);
        if (l + 1 == fc_layers) {
            activation = std::move(pre);
            break;
        }
        activation = nn::relu(pre);
        if (train_mode && config.dropout_p > 0.0) {
            Eigen::ArrayXd mask = nn::dropout_mask(*rng, activation.size(), config.dropout_p);
            activation.array() *= mask;
            t.fc_masks.push_back(std::move(mask));
        } else {
            t.fc_masks.push_back(Eigen::ArrayXd::Ones(activation.size()));
        }
    }
    t.log_probs = nn::log_softmax(activation);
    return t.log_probs;
}

void backward(MetaModel& model, const ForwardTrace& trace, const Vector& logprob_grad) {
    const MetaModelConfig& config = model.config;
    const std::size_t fc_layers = config.fc_sizes.size();
    const std::size_t blocks = config.conv_channels.size();

    Vector grad = nn::log_softmax_backward(trace.log_probs, logprob_grad);
    for (std::size_t l = fc_layers; l-- > 0;) {
        if (l + 1 < fc_layers) {
            grad.array() *= trace.fc_masks[l];
            grad = nn::relu_backward(trace.fc_pre[l], grad);
        }
        nn::LinearBackward lb =
            nn::linear_backward(model.params.fc_weights[l], trace.fc_inputs[l], grad);
        model.grads.fc_weights[l] += lb.weight_grad;
        model.grads.fc_biases[l] += lb.bias_grad;
        grad = std::move(lb.input_grad);
    }

    Matrix signal_grad = grad;  // [C_last x 1] after the global pool
    for (std::size_t b = blocks; b-- > 0;) {
        Matrix relu_grad =
            nn::maxpool1d_backward(trace.pool_argmax[b], signal_grad, trace.pool_in_lengths[b]);
        Matrix pre_grad = nn::relu_backward(trace.conv_pre[b], relu_grad);
        const int in_channels = b == 0 ? config.embed_dim : config.conv_channels[b - 1];
        // conv is length-preserving (pad 1, kernel 3), so the block input
        // length equals the pool input length.
        nn::Conv1dBackward cb = nn::conv1d_backward(
            trace.conv_cols[b], in_channels, trace.pool_in_lengths[b],
            model.params.conv_weights[b], pre_grad, MetaModelConfig::kKernel,
            MetaModelConfig::kPad);
        model.grads.conv_weights[b] += cb.kernel_grad;
        model.grads.conv_biases[b] += cb.bias_grad;
        signal_grad = std::move(cb.input_grad);
    }

    Matrix embed_grad = signal_grad.transpose();  // back to [L x E]
    if (trace.embed_mask.size() > 0) {
        Eigen::Map<Eigen::ArrayXd>(embed_grad.data(), embed_grad.size()) *= trace.embed_mask;
    }
    nn::embedding_backward(embed_grad, trace.ids, model.grads.embedding);
}

namespace {

void check_example_geometry(const StackExample& ex, const MetaModelConfig& config,
                            bool need_target) {
    const std::size_t L = static_cast<std::size_t>(config.n_slots) *
                          static_cast<std::size_t>(config.tokens_per_hypothesis);
    if (ex.x.size() != L) {
        throw ValidationError("example '" + ex.qid + "' has x length " +
                              std::to_string(ex.x.size()) + ", expected " + std::to_string(L));
    }
    if (ex.surfaces.size() != static_cast<std::size_t>(config.n_slots)) {
        throw ValidationError("example '" + ex.qid + "' has wrong slot count");
    }
    if (need_target) {
        if (!ex.y || ex.y->size() != static_cast<std::size_t>(config.n_slots)) {
            throw ValidationError("train example '" + ex.qid + "' is missing target y");
        }
    }
}

std::string decode_answer(const StackExample& ex, const Vector& log_probs) {
    int best = -1;
    for (int i = 0; i < log_probs.size(); ++i) {
        const std::size_t slot = static_cast<std::size_t>(i);
        if (ex.pad_flags[slot]) continue;
        if (best < 0 || log_probs[i] > log_probs[best]) best = i;
    }
    if (best < 0) {
        throw ValidationError("example '" + ex.qid + "' has only padding slots");
    }
    const std::size_t slot = static_cast<std::size_t>(best);
    if (ex.na_flags[slot]) return std::string();
    return ex.surfaces[slot];
}

}  // namespace

TrainHistory train(MetaModel& model, const std::vector<StackExample>& train_set,
                   const std::vector<StackExample>& dev_set, const Dataset& dev_gold) {
    const MetaModelConfig& config = model.config;
    config.validate();
    if (train_set.empty()) throw ValidationError("train set is empty");
    for (const auto& ex : train_set) check_example_geometry(ex, config, true);
    for (const auto& ex : dev_set) check_example_geometry(ex, config, false);

    TrainHistory history;
    if (config.epochs == 0) return history;

    Rng rng(config.seed);
    std::vector<nn::ParamView> views = model.param_views();
    std::vector<nn::AdamState> adam_states;
    adam_states.reserve(views.size());
    for (const auto& view : views) adam_states.emplace_back(view.size);

    nn::PlateauScheduler scheduler;
    scheduler.patience = config.patience;
    scheduler.factor = config.lr_factor;
    double lr = config.lr;

    ParamSet best_params = model.params;
    double best_f1 = -1.0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    ForwardTrace trace;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            model.grads.set_zero();
            for (std::size_t k = start; k < end; ++k) {
                const StackExample& ex = train_set[order[k]];
                const Vector log_probs = forward(model, ex.x, true, &rng, &trace);
                Eigen::Map<const Vector> target(ex.y->data(),
                                                static_cast<Eigen::Index>(ex.y->size()));
                epoch_loss += nn::kl_div_loss(log_probs, target, config.kl_direction);
                const Vector loss_grad =
                    nn::kl_div_loss_backward(log_probs, target, config.kl_direction);
                backward(model, trace, loss_grad);
            }
            nn::AdamConfig adam{lr, 0.9, 0.999, 1e-8};
            for (std::size_t p = 0; p < views.size(); ++p) {
                nn::adam_step(Eigen::Map<Eigen::ArrayXd>(views[p].data, views[p].size),
                              Eigen::Map<const Eigen::ArrayXd>(views[p].grad, views[p].size),
                              adam_states[p], adam);
            }
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
        stats.lr = lr;
        if (!dev_set.empty()) {
            const auto answers = predict(model, dev_set);
            const EvalReport report = evaluate(answers, dev_gold);
            stats.dev_em = report.em;
            stats.dev_f1 = report.f1;
        }
        history.epochs.push_back(stats);

        // Checkpoint selection needs a dev signal; dev-less training keeps
        // the final parameters instead.
        if (!dev_set.empty()) {
            if (stats.dev_f1 > best_f1) {
                best_f1 = stats.dev_f1;
                best_params = model.params;
                history.best_epoch = epoch;
            }
            scheduler.step(stats.dev_f1, lr);
        }
    }

    if (!dev_set.empty()) {
        history.best_dev_f1 = best_f1;
        model.params = best_params;
    }
    return history;
}

std::map<std::string, std::string> predict(const MetaModel& model,
                                           const std::vector<StackExample>& examples, int jobs) {
    for (const auto& ex : examples) check_example_geometry(ex, model.config, false);
    std::vector<std::string> answers(examples.size());
    parallel_for(examples.size(), jobs, [&](std::size_t i) {
        const Vector log_probs = forward(model, examples[i].x, false, nullptr, nullptr);
        answers[i] = decode_answer(examples[i], log_probs);
    });
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out[examples[i].qid] = std::move(answers[i]);
    }
    return out;
}

namespace {

json config_to_json(const MetaModelConfig& config) {
    json j;
    j["embed_dim"] = config.embed_dim;
    j["conv_channels"] = config.conv_channels;
    j["fc_sizes"] = config.fc_sizes;
    j["dropout_p"] = config.dropout_p;
    j["embed_dropout_p"] = config.embed_dropout_p;
    j["noise_sigma"] = config.noise_sigma;
    j["lr"] = config.lr;
    j["patience"] = config.patience;
    j["lr_factor"] = config.lr_factor;
    j["epochs"] = config.epochs;
    j["batch_size"] = config.batch_size;
    j["seed"] = config.seed;
    j["biased_targets"] = config.biased_targets;
    j["kl_direction"] =
        config.kl_direction == nn::KlDirection::Conventional ? "conventional" : "literal_paper";
    j["n_slots"] = config.n_slots;
    j["tokens_per_hypothesis"] = config.tokens_per_hypothesis;
    return j;
}

MetaModelConfig config_from_json(const json& j) {
    MetaModelConfig config;
    config.embed_dim = j.at("embed_dim").get<int>();
    config.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    config.fc_sizes = j.at("fc_sizes").get<std::vector<int>>();
    config.dropout_p = j.at("dropout_p").get<double>();
    config.embed_dropout_p = j.at("embed_dropout_p").get<double>();
    config.noise_sigma = j.at("noise_sigma").get<double>();
    config.lr = j.at("lr").get<double>();
    config.patience = j.at("patience").get<int>();
    config.lr_factor = j.at("lr_factor").get<double>();
    config.epochs = j.at("epochs").get<int>();
    config.batch_size = j.at("batch_size").get<int>();
    config.seed = j.at("seed").get<uint64_t>();
    config.biased_targets = j.at("biased_targets").get<bool>();
    const std::string direction = j.at("kl_direction").get<std::string>();
    if (direction == "conventional") {
        config.kl_direction = nn::KlDirection::Conventional;
    } else if (direction == "literal_paper") {
        config.kl_direction = nn::KlDirection::LiteralPaper;
    } else {
        throw ValidationError("unknown kl_direction '" + direction + "'");
    }
    config.n_slots = j.at("n_slots").get<int>();
    config.tokens_per_hypothesis = j.at("tokens_per_hypothesis").get<int>();
    return config;
}

json tokenizer_to_json(const Tokenizer& tok) {
    json j;
    j["num_slots"] = tok.num_slots();
    json reserved = json::object();
    reserved["<pad>"] = Tokenizer::kPadId;
    reserved["<unk>"] = Tokenizer::kUnkId;
    reserved["<ap>"] = Tokenizer::kAnswerPadId;
    reserved["<na>"] = Tokenizer::kNoAnswerId;
    for (int h = 1; h <= tok.num_slots(); ++h) {
        reserved["<h" + std::to_string(h) + ">"] = tok.prefix_id(h);
    }
    j["reserved"] = std::move(reserved);
    json vocab = json::object();
    for (const auto& [word, id] : tok.vocab()) vocab[word] = id;
    j["vocab"] = std::move(vocab);
    return j;
}

Tokenizer tokenizer_from_json(const json& j) {
    Tokenizer tok(j.at("num_slots").get<int>());
    std::map<int, std::string> by_id;
    for (const auto& [word, id] : j.at("vocab").items()) {
        if (!by_id.emplace(id.get<int>(), word).second) {
            throw ValidationError("checkpoint tokenizer has duplicate ids");
        }
    }
    int expected = tok.first_word_id();
    for (const auto& [id, word] : by_id) {
        if (id != expected) throw ValidationError("checkpoint tokenizer ids not contiguous");
        tok.add_word(word);
        ++expected;
    }
    return tok;
}

std::vector<double> flatten(const Matrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

std::vector<double> flatten(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

void unflatten(const json& values, Matrix& into, const std::string& name) {
    const auto data = values.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != into.size()) {
        throw ValidationError("checkpoint tensor '" + name + "' has " +
                              std::to_string(data.size()) + " values, expected " +
                              std::to_string(into.size()));
    }
    std::copy(data.begin(), data.end(), into.data());
}

void unflatten(const json& values, Vector& into, const std::string& name) {
    const auto data = values.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != into.size()) {
        throw ValidationError("checkpoint tensor '" + name + "' has " +
                              std::to_string(data.size()) + " values, expected " +
                              std::to_string(into.size()));
    }
    std::copy(data.begin(), data.end(), into.data());
}

}  // namespace

void save_checkpoint(const MetaModel& model, const std::string& path) {
    json doc;
    doc["format"] = "stackqa-ckpt-v1";
    doc["config"] = config_to_json(model.config);
    doc["tokenizer"] = tokenizer_to_json(model.tokenizer);
    json params = json::object();
    params["embedding"] = flatten(model.params.embedding);
    for (std::size_t b = 0; b < model.params.conv_weights.size(); ++b) {
        const std::string tag = "conv" + std::to_string(b);
        params[tag + ".weight"] = flatten(model.params.conv_weights[b]);
        params[tag + ".bias"] = flatten(model.params.conv_biases[b]);
    }
    for (std::size_t l = 0; l < model.params.fc_weights.size(); ++l) {
        const std::string tag = "fc" + std::to_string(l);
        params[tag + ".weight"] = flatten(model.params.fc_weights[l]);
        params[tag + ".bias"] = flatten(model.params.fc_biases[l]);
    }
    doc["params"] = std::move(params);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << doc.dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

MetaModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed checkpoint JSON in " + path + ": " + e.what());
    }
    try {
        if (!doc.contains("format") || doc["format"].get<std::string>() != "stackqa-ckpt-v1") {
            throw ValidationError("unsupported checkpoint format in " + path);
        }
        const MetaModelConfig config = config_from_json(doc.at("config"));
        const Tokenizer tokenizer = tokenizer_from_json(doc.at("tokenizer"));
        MetaModel model = init_model(config, tokenizer, config.seed);
        const json& params = doc.at("params");
        unflatten(params.at("embedding"), model.params.embedding, "embedding");
        for (std::size_t b = 0; b < model.params.conv_weights.size(); ++b) {
            const std::string tag = "conv" + std::to_string(b);
            unflatten(params.at(tag + ".weight"), model.params.conv_weights[b], tag + ".weight");
            unflatten(params.at(tag + ".bias"), model.params.conv_biases[b], tag + ".bias");
        }
        for (std::size_t l = 0; l < model.params.fc_weights.size(); ++l) {
            const std::string tag = "fc" + std::to_string(l);
            unflatten(params.at(tag + ".weight"), model.params.fc_weights[l], tag + ".weight");
            unflatten(params.at(tag + ".bias"), model.params.fc_biases[l], tag + ".bias");
        }
        model.grads.set_zero();
        return model;
    } catch (const json::exception& e) {
        throw ValidationError("invalid checkpoint " + path + ": " + e.what());
    }
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history: " + path);
    out << "epoch,train_loss,dev_em,dev_f1,lr\n";
    out << std::setprecision(17);
    for (const auto& stats : history.epochs) {
        out << stats.epoch << ',' << stats.train_loss << ',' << stats.dev_em << ','
            << stats.dev_f1 << ',' << stats.lr << '\n';
    }
    if (!out) throw IoError("failed writing history: " + path);
}

}  // namespace stackqa
