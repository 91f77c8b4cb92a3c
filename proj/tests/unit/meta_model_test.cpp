#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "stackqa/errors.hpp"
#include "stackqa/meta_model.hpp"
#include "stackqa/squad_metrics.hpp"
#include "stackqa/stacking_data.hpp"

using namespace stackqa;
namespace fs = std::filesystem;

namespace {

MetaModelConfig tiny_config() {
    MetaModelConfig config;
    config.embed_dim = 6;
    config.conv_channels = {5, 4};
    config.fc_sizes = {8, 4};
    config.dropout_p = 0.0;
    config.lr = 0.01;
    config.epochs = 5;
    config.batch_size = 4;
    config.seed = 7;
    config.n_slots = 4;
    config.tokens_per_hypothesis = 4;
    return config;
}

// One synthetic stack row: the winning slot carries a marker trigram right
// after its reserved prefix, every other slot holds quiet filler tokens.
StackExample make_example(const std::string& qid, int winner, int variant) {
    StackExample ex;
    ex.qid = qid;
    const int H = 4, T = 4;
    ex.x.assign(H * T, 0);
    for (int slot = 0; slot < H; ++slot) {
        ex.x[static_cast<std::size_t>(slot) * T] = 4 + slot;
        const bool is_winner = slot == winner;
        for (int t = 1; t < T; ++t) {
            ex.x[static_cast<std::size_t>(slot) * T + static_cast<std::size_t>(t)] =
                is_winner ? 7 : (1 + (slot + t + variant) % 2);
        }
    }
    std::vector<double> scores(H, 0.0);
    scores[static_cast<std::size_t>(winner)] = 1.0;
    ex.y = target_distribution(scores, false, std::vector<bool>(H, false), false);
    ex.f1s = scores;
    for (int slot = 0; slot < H; ++slot) {
        ex.surfaces.push_back("slot" + std::to_string(slot) + "_" + qid);
    }
    ex.na_flags.assign(H, false);
    ex.pad_flags.assign(H, false);
    return ex;
}

int arg_max(const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

bool params_equal(const ParamSet& a, const ParamSet& b) {
    if ((a.embedding - b.embedding).cwiseAbs().maxCoeff() != 0.0) return false;
    for (std::size_t i = 0; i < a.conv_weights.size(); ++i) {
        if ((a.conv_weights[i] - b.conv_weights[i]).cwiseAbs().maxCoeff() != 0.0) return false;
        if ((a.conv_biases[i] - b.conv_biases[i]).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    for (std::size_t i = 0; i < a.fc_weights.size(); ++i) {
        if ((a.fc_weights[i] - b.fc_weights[i]).cwiseAbs().maxCoeff() != 0.0) return false;
        if ((a.fc_biases[i] - b.fc_biases[i]).cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("config validation") {
    MetaModelConfig config = tiny_config();
    CHECK_NOTHROW(config.validate());

    config.fc_sizes = {8, 5};  // head must match n_slots
    CHECK_THROWS_AS(config.validate(), ValidationError);

    config = tiny_config();
    config.dropout_p = 1.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);

    config = tiny_config();
    config.conv_channels.clear();
    CHECK_THROWS_AS(config.validate(), ValidationError);

    // Five halving blocks on a length-16 input run out of sequence.
    config = tiny_config();
    config.conv_channels = {4, 4, 4, 4, 4, 4};
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("too short"), ValidationError);
}

TEST_CASE("init_model is seed deterministic with documented scales") {
    const MetaModelConfig config = tiny_config();
    Tokenizer tok(4);
    MetaModel a = init_model(config, tok, 123);
    MetaModel b = init_model(config, tok, 123);
    MetaModel c = init_model(config, tok, 124);
    CHECK(params_equal(a.params, b.params));
    CHECK_FALSE(params_equal(a.params, c.params));

    // Uniform layers stay inside +-sqrt(1/fan_in).
    for (std::size_t l = 0; l < a.params.fc_weights.size(); ++l) {
        const double bound = std::sqrt(1.0 / static_cast<double>(a.params.fc_weights[l].cols()));
        CHECK(a.params.fc_weights[l].cwiseAbs().maxCoeff() <= bound);
        CHECK(a.params.fc_biases[l].cwiseAbs().maxCoeff() <= bound);
    }
    for (std::size_t cb = 0; cb < a.params.conv_weights.size(); ++cb) {
        const double bound = std::sqrt(1.0 / static_cast<double>(a.params.conv_weights[cb].cols()));
        CHECK(a.params.conv_weights[cb].cwiseAbs().maxCoeff() <= bound);
    }
    CHECK(a.params.embedding.rows() == tok.vocab_size());

    // Registry order is embedding, conv blocks, then fc layers.
    const std::vector<nn::ParamView> views = a.param_views();
    REQUIRE(views.size() == 1 + 2 * 2 + 2 * 2);
    CHECK(views[0].name == "embedding");
    CHECK(views[1].name == "conv0.weight");
    CHECK(views[2].name == "conv0.bias");
    CHECK(views[3].name == "conv1.weight");
    CHECK(views[5].name == "fc0.weight");
    CHECK(views[8].name == "fc1.bias");

    Tokenizer wrong(8);
    CHECK_THROWS_AS(init_model(config, wrong, 1), ValidationError);
}

TEST_CASE("forward emits a log distribution over slots") {
    const MetaModelConfig config = tiny_config();
    MetaModel model = init_model(config, Tokenizer(4), 9);
    const StackExample ex = make_example("q0", 2, 0);
    const nn::Vector lp = forward(model, ex.x, false, nullptr, nullptr);
    REQUIRE(lp.size() == 4);
    CHECK(lp.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(lp.maxCoeff() <= 0.0);

    // Inference is deterministic and ignores dropout configuration.
    const nn::Vector lp2 = forward(model, ex.x, false, nullptr, nullptr);
    CHECK((lp - lp2).cwiseAbs().maxCoeff() == 0.0);

    // Train mode with p=0 and sigma=0 computes the same function.
    Rng rng(1);
    const nn::Vector lp3 = forward(model, ex.x, true, &rng, nullptr);
    CHECK((lp - lp3).cwiseAbs().maxCoeff() == 0.0);

    std::vector<int> short_x(7, 0);
    CHECK_THROWS_AS(forward(model, short_x, false, nullptr, nullptr), ValidationError);
    CHECK_THROWS_AS(forward(model, ex.x, true, nullptr, nullptr), ValidationError);
}

TEST_CASE("backward gradients pass a finite-difference check") {
    const MetaModelConfig config = tiny_config();
    MetaModel model = init_model(config, Tokenizer(4), 31);
    const StackExample ex = make_example("q0", 1, 0);
    Eigen::Map<const nn::Vector> target(ex.y->data(), static_cast<Eigen::Index>(ex.y->size()));

    const auto loss = [&]() {
        const nn::Vector lp = forward(model, ex.x, false, nullptr, nullptr);
        return nn::kl_div_loss(lp, target);
    };
    const auto compute_grads = [&]() {
        model.grads.set_zero();
        ForwardTrace trace;
        const nn::Vector lp = forward(model, ex.x, false, nullptr, &trace);
        backward(model, trace, nn::kl_div_loss_backward(lp, target));
    };
    const std::vector<nn::ParamView> views = model.param_views();
    const nn::GradCheckReport report = nn::grad_check(loss, compute_grads, views, 1e-5, 1e-4);
    INFO("worst: ", report.worst_name, "[", report.worst_index, "] analytic ",
         report.worst_analytic, " numeric ", report.worst_numeric);
    CHECK(report.pass);
    CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("zero epochs returns an empty history and leaves params alone") {
    MetaModelConfig config = tiny_config();
    config.epochs = 0;
    MetaModel model = init_model(config, Tokenizer(4), 5);
    const ParamSet before = model.params;
    const TrainHistory history = train(model, {make_example("q0", 0, 0)}, {}, Dataset{});
    CHECK(history.epochs.empty());
    CHECK(history.best_epoch == -1);
    CHECK(params_equal(model.params, before));

    CHECK_THROWS_AS(train(model, {}, {}, Dataset{}), ValidationError);
}

TEST_CASE("training overfits a single example") {
    MetaModelConfig config = tiny_config();
    config.epochs = 5;
    config.batch_size = 1;
    MetaModel model = init_model(config, Tokenizer(4), 11);
    const std::vector<StackExample> train_set = {make_example("q0", 3, 0)};
    const TrainHistory history = train(model, train_set, {}, Dataset{});
    REQUIRE(history.epochs.size() == 5);
    CHECK(history.epochs.back().train_loss < history.epochs.front().train_loss);
    CHECK(history.best_epoch == -1);  // dev-less run keeps the final params
    for (const auto& e : history.epochs) CHECK(e.lr == doctest::Approx(config.lr));
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    std::vector<StackExample> train_set;
    for (int i = 0; i < 8; ++i) train_set.push_back(make_example("q" + std::to_string(i), i % 4, i));

    MetaModelConfig config = tiny_config();
    config.epochs = 3;
    config.dropout_p = 0.2;  // exercise the stochastic path too
    MetaModel m1 = init_model(config, Tokenizer(4), 77);
    MetaModel m2 = init_model(config, Tokenizer(4), 77);
    const TrainHistory h1 = train(m1, train_set, {}, Dataset{});
    const TrainHistory h2 = train(m2, train_set, {}, Dataset{});
    REQUIRE(h1.epochs.size() == h2.epochs.size());
    for (std::size_t i = 0; i < h1.epochs.size(); ++i) {
        CHECK(h1.epochs[i].train_loss == h2.epochs[i].train_loss);  // exact, not approximate
    }
    CHECK(params_equal(m1.params, m2.params));
}

TEST_CASE("dev-driven training restores the best checkpoint") {
    std::vector<StackExample> train_set, dev_set;
    Dataset dev_gold;
    for (int i = 0; i < 16; ++i) {
        train_set.push_back(make_example("t" + std::to_string(i), i % 4, i));
    }
    for (int i = 0; i < 4; ++i) {
        const std::string qid = "d" + std::to_string(i);
        dev_set.push_back(make_example(qid, i % 4, i));
        dev_gold.per_question[qid] = {{dev_set.back().surfaces[static_cast<std::size_t>(i % 4)]},
                                      false};
    }
    MetaModelConfig config = tiny_config();
    config.epochs = 8;
    MetaModel model = init_model(config, Tokenizer(4), 3);
    const TrainHistory history = train(model, train_set, dev_set, dev_gold);
    REQUIRE(history.epochs.size() == 8);
    REQUIRE(history.best_epoch >= 0);
    REQUIRE(history.best_epoch < 8);
    const double best = history.epochs[static_cast<std::size_t>(history.best_epoch)].dev_f1;
    CHECK(best == doctest::Approx(history.best_dev_f1));
    for (const auto& e : history.epochs) CHECK(e.dev_f1 <= best + 1e-12);
    // Earliest epoch wins ties.
    for (int i = 0; i < history.best_epoch; ++i) {
        CHECK(history.epochs[static_cast<std::size_t>(i)].dev_f1 < best);
    }
    // The restored parameters reproduce the best epoch's dev score.
    const EvalReport restored = evaluate(predict(model, dev_set), dev_gold);
    CHECK(restored.f1 == doctest::Approx(history.best_dev_f1).epsilon(1e-12));
}

TEST_CASE("a trained model memorizes 32 examples") {
    std::vector<StackExample> train_set;
    for (int i = 0; i < 32; ++i) {
        train_set.push_back(make_example("q" + std::to_string(i), i % 4, i / 4));
    }
    MetaModelConfig config = tiny_config();
    config.embed_dim = 12;
    config.conv_channels = {16, 12};
    config.fc_sizes = {24, 4};
    config.epochs = 60;
    config.batch_size = 8;
    MetaModel model = init_model(config, Tokenizer(4), 19);
    train(model, train_set, {}, Dataset{});

    int agree = 0;
    for (const auto& ex : train_set) {
        const nn::Vector lp = forward(model, ex.x, false, nullptr, nullptr);
        int best = 0;
        for (int i = 1; i < lp.size(); ++i) {
            if (lp[i] > lp[best]) best = i;
        }
        if (best == arg_max(*ex.y)) ++agree;
    }
    // At least 31 of 32 argmax decisions match the target distribution.
    CHECK(agree >= 31);
}

TEST_CASE("predict maps slots to surfaces and is jobs-invariant") {
    MetaModelConfig config = tiny_config();
    MetaModel model = init_model(config, Tokenizer(4), 13);
    std::vector<StackExample> examples;
    for (int i = 0; i < 10; ++i) examples.push_back(make_example("q" + std::to_string(i), i % 4, i));

    // A no-answer winner decodes to the empty string.
    examples[0].na_flags.assign(4, true);
    // Padded slots never win: force slot 0 off in one example.
    examples[1].pad_flags[0] = true;

    const auto serial = predict(model, examples, 1);
    const auto parallel = predict(model, examples, 3);
    CHECK(serial == parallel);
    CHECK(serial.size() == examples.size());
    CHECK(serial.at("q0").empty());
    for (const auto& [qid, answer] : serial) {
        if (qid == "q0") continue;
        CHECK_FALSE(answer.empty());
    }

    StackExample all_pad = make_example("qpad", 0, 0);
    all_pad.pad_flags.assign(4, true);
    CHECK_THROWS_WITH_AS(predict(model, {all_pad}, 1), doctest::Contains("qpad"),
                         ValidationError);
}

TEST_CASE("checkpoints round trip bitwise") {
    Tokenizer tok(4);
    tok.add_word("alpha");
    tok.add_word("beta");
    MetaModelConfig config = tiny_config();
    config.kl_direction = nn::KlDirection::LiteralPaper;
    config.biased_targets = true;
    MetaModel model = init_model(config, tok, 21);

    const fs::path path = fs::temp_directory_path() /
                          ("stackqa_ckpt_" + std::to_string(::getpid()) + ".json");
    save_checkpoint(model, path.string());
    const MetaModel loaded = load_checkpoint(path.string());
    CHECK(params_equal(model.params, loaded.params));
    CHECK(loaded.tokenizer == tok);
    CHECK(loaded.config.kl_direction == nn::KlDirection::LiteralPaper);
    CHECK(loaded.config.biased_targets);
    CHECK(loaded.config.embed_dim == config.embed_dim);

    // Identical forward outputs, bit for bit.
    const StackExample ex = make_example("q", 1, 0);
    const nn::Vector a = forward(model, ex.x, false, nullptr, nullptr);
    const nn::Vector b = forward(loaded, ex.x, false, nullptr, nullptr);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

    // Saving the loaded model reproduces the file byte for byte.
    const fs::path again = fs::temp_directory_path() /
                           ("stackqa_ckpt2_" + std::to_string(::getpid()) + ".json");
    save_checkpoint(loaded, again.string());
    std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    fs::remove(path);
    fs::remove(again);

    CHECK_THROWS_AS(load_checkpoint((fs::temp_directory_path() / "nope.json").string()), IoError);
}

TEST_CASE("history csv lists one row per epoch") {
    TrainHistory history;
    history.epochs.push_back({1, 0.5, 10.0, 12.0, 0.001});
    history.epochs.push_back({2, 0.25, 20.0, 22.5, 0.001});
    history.best_epoch = 1;
    history.best_dev_f1 = 22.5;
    const fs::path path = fs::temp_directory_path() /
                          ("stackqa_hist_" + std::to_string(::getpid()) + ".csv");
    write_history_csv(path.string(), history);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,dev_em,dev_f1,lr");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 2);
    fs::remove(path);
}
