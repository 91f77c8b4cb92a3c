#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stackqa/errors.hpp"
#include "stackqa/meta_model.hpp"
#include "stackqa/nn/grad_check.hpp"
#include "stackqa/prediction_io.hpp"
#include "stackqa/squad_metrics.hpp"
#include "stackqa/stacking_data.hpp"
#include "stackqa/synth.hpp"
#include "stackqa/voting.hpp"

namespace {

using nlohmann::json;
using namespace stackqa;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

uint64_t default_seed() {
    if (const char* env = std::getenv("STACKQA_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ValidationError(std::string("STACKQA_SEED is not an integer: ") + env);
        }
    }
    return 42;
}

void write_json_report(const std::string& path, json payload) {
    payload["format"] = "stackqa-report-v1";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path);
    out << payload.dump() << '\n';
    if (!out) throw IoError("failed writing report: " + path);
}

json eval_to_json(const EvalReport& report) {
    return json{{"em", report.em},
                {"f1", report.f1},
                {"na_accuracy", report.na_accuracy},
                {"count", report.count}};
}

std::vector<ModelPredictions> load_models(const std::vector<std::string>& paths) {
    std::vector<ModelPredictions> preds;
    preds.reserve(paths.size());
    for (const auto& path : paths) {
        std::string id = std::filesystem::path(path).filename().string();
        const auto dot = id.find('.');
        if (dot != std::string::npos) id.resize(dot);
        preds.push_back(load_nbest(path, id));
    }
    return preds;
}

// Flags > config file > defaults: parse the JSON first, then let CLI11
// overwrite whatever was set on the command line.
void apply_config_file(MetaModelConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed config JSON in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config must be a JSON object: " + path);
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "embed_dim") config.embed_dim = value.get<int>();
            else if (key == "conv_channels") config.conv_channels = value.get<std::vector<int>>();
            else if (key == "fc_sizes") config.fc_sizes = value.get<std::vector<int>>();
            else if (key == "dropout_p") config.dropout_p = value.get<double>();
            else if (key == "embed_dropout_p") config.embed_dropout_p = value.get<double>();
            else if (key == "noise_sigma") config.noise_sigma = value.get<double>();
            else if (key == "lr") config.lr = value.get<double>();
            else if (key == "patience") config.patience = value.get<int>();
            else if (key == "lr_factor") config.lr_factor = value.get<double>();
            else if (key == "epochs") config.epochs = value.get<int>();
            else if (key == "batch_size") config.batch_size = value.get<int>();
            else if (key == "seed") config.seed = value.get<uint64_t>();
            else if (key == "biased_targets") config.biased_targets = value.get<bool>();
            else if (key == "kl_direction") {
                const std::string dir = value.get<std::string>();
                if (dir == "conventional") config.kl_direction = nn::KlDirection::Conventional;
                else if (dir == "literal_paper") config.kl_direction = nn::KlDirection::LiteralPaper;
                else throw ValidationError("unknown kl_direction '" + dir + "' in " + path);
            }
            else if (key == "n_slots") config.n_slots = value.get<int>();
            else if (key == "tokens_per_hypothesis") config.tokens_per_hypothesis = value.get<int>();
            else throw ValidationError("unknown config key '" + key + "' in " + path);
        } catch (const json::exception& e) {
            throw ValidationError("bad config value for '" + key + "' in " + path + ": " +
                                  e.what());
        }
    }
}

StackConfig stack_config_for(const std::vector<ModelPredictions>& preds, int n_per_model) {
    StackConfig config;
    for (const auto& model : preds) config.models.push_back(model.model_id);
    config.n_per_model = n_per_model;
    return config;
}

std::vector<StackExample> build_examples(const std::vector<ModelPredictions>& preds,
                                         const Dataset* gold, const Tokenizer& tok,
                                         const StackConfig& config, bool biased) {
    std::vector<std::string> qids;
    if (gold) {
        qids = gold->qids();
    } else {
        for (const auto& [qid, _] : preds.front().per_question) qids.push_back(qid);
    }
    std::vector<StackExample> examples;
    examples.reserve(qids.size());
    for (const auto& qid : qids) {
        std::vector<const NBestList*> lists;
        lists.reserve(preds.size());
        for (const auto& model : preds) {
            auto it = model.per_question.find(qid);
            if (it == model.per_question.end()) {
                throw ValidationError("model '" + model.model_id +
                                      "' has no predictions for question '" + qid + "'");
            }
            lists.push_back(&it->second);
        }
        const GroundTruth* truth = nullptr;
        if (gold) truth = &gold->per_question.at(qid);
        examples.push_back(build_example(qid, lists, truth, tok, config, biased));
    }
    return examples;
}

// ---- subcommand runners ----

struct EvalArgs {
    std::string pred_path;
    std::string gold_path;
    std::string json_path;
};

int run_eval(const EvalArgs& args) {
    const auto answers = load_predictions(args.pred_path);
    const Dataset gold = load_ground_truth(args.gold_path);
    const EvalReport report = evaluate(answers, gold);
    std::printf("count %d\n", report.count);
    std::printf("em           %7.3f\n", report.em);
    std::printf("f1           %7.3f\n", report.f1);
    std::printf("na_accuracy  %7.3f\n", report.na_accuracy);
    if (!args.json_path.empty()) {
        write_json_report(args.json_path, json{{"kind", "eval"}, {"metrics", eval_to_json(report)}});
    }
    return 0;
}

struct TopnArgs {
    std::string pred_path;
    std::string gold_path;
    std::vector<int> ns = {1, 2, 3, 4, 5, 6, 7, 8};
    std::string json_path;
};

int run_topn(const TopnArgs& args) {
    const ModelPredictions preds = load_nbest(args.pred_path);
    const Dataset gold = load_ground_truth(args.gold_path);
    const TopNReport report = topn_eval(preds, gold, args.ns);
    std::printf("%4s %8s %8s %12s\n", "n", "em", "f1", "na_accuracy");
    json rows = json::array();
    for (const auto& [n, scores] : report.per_n) {
        std::printf("%4d %8.3f %8.3f %12.3f\n", n, scores.em, scores.f1, scores.na_accuracy);
        rows.push_back({{"n", n},
                        {"em", scores.em},
                        {"f1", scores.f1},
                        {"na_accuracy", scores.na_accuracy}});
    }
    if (!args.json_path.empty()) {
        write_json_report(args.json_path, json{{"kind", "topn"}, {"rows", rows}});
    }
    return 0;
}

struct OracleArgs {
    std::vector<std::string> pred_paths;
    std::string gold_path;
    int n = 8;
    std::string json_path;
};

int run_oracle(const OracleArgs& args) {
    const auto preds = load_models(args.pred_paths);
    const Dataset gold = load_ground_truth(args.gold_path);
    const EvalReport report = oracle_eval(preds, args.n, gold);
    std::printf("pooled oracle over %zu model(s), top-%d\n", preds.size(), args.n);
    std::printf("em           %7.3f\n", report.em);
    std::printf("f1           %7.3f\n", report.f1);
    std::printf("na_accuracy  %7.3f\n", report.na_accuracy);
    if (!args.json_path.empty()) {
        write_json_report(args.json_path,
                          json{{"kind", "oracle"}, {"n", args.n}, {"metrics", eval_to_json(report)}});
    }
    return 0;
}

struct VoteArgs {
    std::vector<std::string> pred_paths;
    std::string gold_path;
    std::string out_path;
    std::string method = "1";
    int n = 1;
    int jobs = 1;
    std::string json_path;
};

int run_vote(const VoteArgs& args) {
    const VotingMethod method = parse_voting_method(args.method, args.n);
    const auto preds = load_models(args.pred_paths);

    std::vector<std::string> qids;
    std::optional<Dataset> gold;
    if (!args.gold_path.empty()) {
        gold = load_ground_truth(args.gold_path);
        qids = gold->qids();
    } else {
        for (const auto& [qid, _] : preds.front().per_question) qids.push_back(qid);
    }

    const auto answers = vote_dataset(method, preds, qids, args.jobs);
    write_predictions(args.out_path, answers);
    std::printf("method %s (n=%d), %zu questions -> %s\n", args.method.c_str(), method.n,
                answers.size(), args.out_path.c_str());

    json payload{{"kind", "vote"}, {"method", args.method}, {"n", method.n},
                 {"questions", answers.size()}};
    if (gold) {
        const EvalReport report = evaluate(answers, *gold);
        std::printf("em           %7.3f\n", report.em);
        std::printf("f1           %7.3f\n", report.f1);
        std::printf("na_accuracy  %7.3f\n", report.na_accuracy);
        payload["metrics"] = eval_to_json(report);
    }
    if (!args.json_path.empty()) write_json_report(args.json_path, payload);
    return 0;
}

struct DatasetBuildArgs {
    std::vector<std::string> pred_paths;
    std::string gold_path;
    std::string out_path;
    std::string tokenizer_path;       // load an existing tokenizer
    std::string save_tokenizer_path;  // build one and save it
    int n_per_model = 8;
    bool biased = false;
    std::string json_path;
};

int run_dataset_build(const DatasetBuildArgs& args) {
    if (args.tokenizer_path.empty() == args.save_tokenizer_path.empty()) {
        throw ValidationError("pass exactly one of --tokenizer or --save-tokenizer");
    }
    const auto preds = load_models(args.pred_paths);
    const StackConfig config = stack_config_for(preds, args.n_per_model);

    Tokenizer tok;
    if (!args.tokenizer_path.empty()) {
        tok = Tokenizer::load(args.tokenizer_path);
        if (tok.num_slots() != config.num_slots()) {
            throw ValidationError("tokenizer has " + std::to_string(tok.num_slots()) +
                                  " slots but config needs " +
                                  std::to_string(config.num_slots()));
        }
    } else {
        tok = build_vocab(preds, config);
        tok.save(args.save_tokenizer_path);
    }

    std::optional<Dataset> gold;
    if (!args.gold_path.empty()) gold = load_ground_truth(args.gold_path);
    const auto examples =
        build_examples(preds, gold ? &*gold : nullptr, tok, config, args.biased);
    write_stack_dataset(args.out_path, examples);

    const double padded = padding_stats(examples);
    std::printf("%zu examples, %d slots, padding fraction %.3f -> %s\n", examples.size(),
                config.num_slots(), padded, args.out_path.c_str());
    if (!args.json_path.empty()) {
        write_json_report(args.json_path,
                          json{{"kind", "dataset-build"},
                               {"examples", examples.size()},
                               {"slots", config.num_slots()},
                               {"padding_fraction", padded},
                               {"vocab_size", tok.vocab_size()}});
    }
    return 0;
}

struct TrainArgs {
    std::string train_path;
    std::string dev_path;
    std::string dev_gold_path;
    std::string tokenizer_path;
    std::string ckpt_path;
    std::string history_path;
    std::string config_path;
    MetaModelConfig config;
    std::string json_path;
};

int run_train(TrainArgs& args, const std::vector<std::string>& flag_overrides) {
    // Precedence: flags > config file > STACKQA_SEED env > built-in defaults.
    MetaModelConfig config;
    config.seed = default_seed();
    if (!args.config_path.empty()) apply_config_file(config, args.config_path);
    // Copy back flag values CLI11 stored in args.config for flags the user
    // actually passed, so precedence stays flags > file > defaults.
    for (const auto& name : flag_overrides) {
        if (name == "--embed-dim") config.embed_dim = args.config.embed_dim;
        else if (name == "--conv-channels") config.conv_channels = args.config.conv_channels;
        else if (name == "--fc-sizes") config.fc_sizes = args.config.fc_sizes;
        else if (name == "--dropout") config.dropout_p = args.config.dropout_p;
        else if (name == "--embed-dropout") config.embed_dropout_p = args.config.embed_dropout_p;
        else if (name == "--noise-sigma") config.noise_sigma = args.config.noise_sigma;
        else if (name == "--lr") config.lr = args.config.lr;
        else if (name == "--patience") config.patience = args.config.patience;
        else if (name == "--lr-factor") config.lr_factor = args.config.lr_factor;
        else if (name == "--epochs") config.epochs = args.config.epochs;
        else if (name == "--batch-size") config.batch_size = args.config.batch_size;
        else if (name == "--seed") config.seed = args.config.seed;
        else if (name == "--biased-targets") config.biased_targets = args.config.biased_targets;
        else if (name == "--kl-direction") config.kl_direction = args.config.kl_direction;
    }

    const Tokenizer tok = Tokenizer::load(args.tokenizer_path);
    auto train_set = read_stack_dataset(args.train_path);
    auto dev_set = read_stack_dataset(args.dev_path);
    const Dataset dev_gold = load_ground_truth(args.dev_gold_path);
    if (train_set.empty()) throw ValidationError("train dataset is empty");

    config.n_slots = tok.num_slots();
    const std::size_t L = train_set.front().x.size();
    if (L % static_cast<std::size_t>(config.n_slots) != 0) {
        throw ValidationError("train example length is not a multiple of the slot count");
    }
    config.tokens_per_hypothesis = static_cast<int>(L) / config.n_slots;
    if (config.fc_sizes.empty() || config.fc_sizes.back() != config.n_slots) {
        if (!config.fc_sizes.empty() &&
            config.fc_sizes.back() == MetaModelConfig{}.n_slots) {
            config.fc_sizes.back() = config.n_slots;  // adapt the default head
        } else {
            throw ValidationError("last fc size must equal the slot count " +
                                  std::to_string(config.n_slots));
        }
    }
    config.validate();

    MetaModel model = init_model(config, tok, config.seed);
    const TrainHistory history = train(model, train_set, dev_set, dev_gold);
    save_checkpoint(model, args.ckpt_path);
    if (!args.history_path.empty()) write_history_csv(args.history_path, history);

    for (const auto& stats : history.epochs) {
        std::printf("epoch %3d  loss %10.6f  dev_em %7.3f  dev_f1 %7.3f  lr %g\n", stats.epoch,
                    stats.train_loss, stats.dev_em, stats.dev_f1, stats.lr);
    }
    std::printf("best epoch %d, dev_f1 %.3f -> %s\n",
                history.best_epoch >= 0 ? history.epochs[history.best_epoch].epoch : -1,
                history.best_dev_f1, args.ckpt_path.c_str());
    if (!args.json_path.empty()) {
        json epochs = json::array();
        for (const auto& stats : history.epochs) {
            epochs.push_back({{"epoch", stats.epoch},
                              {"train_loss", stats.train_loss},
                              {"dev_em", stats.dev_em},
                              {"dev_f1", stats.dev_f1},
                              {"lr", stats.lr}});
        }
        write_json_report(args.json_path, json{{"kind", "train"},
                                               {"best_epoch", history.best_epoch},
                                               {"best_dev_f1", history.best_dev_f1},
                                               {"epochs", epochs}});
    }
    return 0;
}

struct PredictArgs {
    std::string ckpt_path;
    std::string data_path;
    std::string out_path;
    std::string gold_path;
    int jobs = 1;
    std::string json_path;
};

int run_predict(const PredictArgs& args) {
    const MetaModel model = load_checkpoint(args.ckpt_path);
    const auto examples = read_stack_dataset(args.data_path);
    const auto answers = predict(model, examples, args.jobs);
    write_predictions(args.out_path, answers);
    std::printf("%zu answers -> %s\n", answers.size(), args.out_path.c_str());

    json payload{{"kind", "predict"}, {"questions", answers.size()}};
    if (!args.gold_path.empty()) {
        const Dataset gold = load_ground_truth(args.gold_path);
        const EvalReport report = evaluate(answers, gold);
        std::printf("em           %7.3f\n", report.em);
        std::printf("f1           %7.3f\n", report.f1);
        std::printf("na_accuracy  %7.3f\n", report.na_accuracy);
        payload["metrics"] = eval_to_json(report);
    }
    if (!args.json_path.empty()) write_json_report(args.json_path, payload);
    return 0;
}

struct SynthArgs {
    std::string out_dir;
    int num_questions = 1000;
    double unanswerable_fraction = 1.0 / 3.0;
    std::vector<std::string> model_specs;  // id:top1:recall:n
    uint64_t seed = 42;
    bool seed_set = false;
    double miss_correlation = 0.0;
    double short_list_fraction = 0.0;
    std::string json_path;
};

SynthModelSpec parse_model_spec(const std::string& text) {
    SynthModelSpec spec;
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(text);
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 4) {
        throw ValidationError("model spec must be id:top1:recall:n, got '" + text + "'");
    }
    spec.id = parts[0];
    try {
        spec.top1_accuracy = std::stod(parts[1]);
        spec.topn_recall = std::stod(parts[2]);
        spec.n = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw ValidationError("cannot parse model spec '" + text + "'");
    }
    return spec;
}

int run_synth(const SynthArgs& args) {
    SynthConfig config;
    config.num_questions = args.num_questions;
    config.unanswerable_fraction = args.unanswerable_fraction;
    config.seed = args.seed_set ? args.seed : default_seed();
    config.miss_correlation = args.miss_correlation;
    config.short_list_fraction = args.short_list_fraction;
    if (args.model_specs.empty()) {
        config.models = {{"model-a", 0.80, 0.95, 8}, {"model-b", 0.75, 0.93, 8}};
    } else {
        for (const auto& text : args.model_specs) config.models.push_back(parse_model_spec(text));
    }

    const SynthOutput output = generate(config, args.out_dir);
    std::printf("gold: %s\n", output.gold_path.c_str());
    for (const auto& path : output.nbest_paths) std::printf("nbest: %s\n", path.c_str());

    // Quick sanity numbers straight off the generated files.
    const Dataset gold = load_ground_truth(output.gold_path);
    json models = json::array();
    for (const auto& path : output.nbest_paths) {
        const ModelPredictions preds = load_nbest(path);
        const TopNReport report = topn_eval(preds, gold, {1, config.models.front().n});
        const auto& top1 = report.per_n.at(1);
        std::printf("%-28s top1 em %7.3f  f1 %7.3f\n", path.c_str(), top1.em, top1.f1);
        models.push_back({{"path", path}, {"top1_em", top1.em}, {"top1_f1", top1.f1}});
    }
    if (!args.json_path.empty()) {
        write_json_report(args.json_path, json{{"kind", "synth"},
                                               {"gold", output.gold_path},
                                               {"questions", config.num_questions},
                                               {"models", models}});
    }
    return 0;
}

int run_grad_check() {
    // Tiny deterministic battery over the full model graph; mirrors the unit
    // suite so field installs can self-verify numerics.
    Tokenizer tok(4);
    for (const char* word : {"alpha", "beta", "gamma", "delta", "epsilon"}) tok.add_word(word);

    MetaModelConfig config;
    config.embed_dim = 4;
    config.conv_channels = {3, 2};
    config.fc_sizes = {5, 4};
    config.n_slots = 4;
    config.tokens_per_hypothesis = 4;
    config.dropout_p = 0.0;
    config.embed_dropout_p = 0.0;
    config.noise_sigma = 0.0;
    MetaModel model = init_model(config, tok, 7);

    std::vector<int> x;
    Rng rng(11);
    for (int i = 0; i < config.n_slots * config.tokens_per_hypothesis; ++i) {
        x.push_back(static_cast<int>(rng.uniform_int(tok.vocab_size())));
    }
    nn::Vector target(4);
    target << 0.4, 0.3, 0.2, 0.1;

    ForwardTrace trace;
    const auto loss = [&]() {
        return nn::kl_div_loss(forward(model, x, false, nullptr, nullptr), target);
    };
    const auto compute = [&]() {
        model.grads.set_zero();
        const nn::Vector log_probs = forward(model, x, false, nullptr, &trace);
        backward(model, trace, nn::kl_div_loss_backward(log_probs, target));
    };
    const auto views = model.param_views();
    const nn::GradCheckReport report = nn::grad_check(loss, compute, views, 1e-5, 1e-4);
    std::printf("max relative error %.3g (tensor %s[%lld]; analytic %.6g, numeric %.6g)\n",
                report.max_rel_error, report.worst_name.c_str(),
                static_cast<long long>(report.worst_index), report.worst_analytic,
                report.worst_numeric);
    std::printf("%s\n", report.pass ? "PASS" : "FAIL");
    return report.pass ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stacking ensemble toolkit for extractive QA n-best lists"};
    app.require_subcommand(1);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score a predictions file against a dataset");
    eval_cmd->add_option("--pred", eval_args.pred_path, "predictions JSON {qid: answer}")
        ->required();
    eval_cmd->add_option("--gold", eval_args.gold_path, "SQuAD v2 dataset")->required();
    eval_cmd->add_option("--json", eval_args.json_path, "write a machine-readable report");

    TopnArgs topn_args;
    auto* topn_cmd = app.add_subcommand("topn", "best-of-N curve for one n-best file");
    topn_cmd->add_option("--pred", topn_args.pred_path, "n-best JSON")->required();
    topn_cmd->add_option("--gold", topn_args.gold_path, "SQuAD v2 dataset")->required();
    topn_cmd->add_option("--n", topn_args.ns, "N values (ascending)");
    topn_cmd->add_option("--json", topn_args.json_path, "write a machine-readable report");

    OracleArgs oracle_args;
    auto* oracle_cmd = app.add_subcommand("oracle", "pooled best-of oracle over several models");
    oracle_cmd->add_option("--pred", oracle_args.pred_paths, "n-best JSON files")
        ->required()
        ->expected(-1);
    oracle_cmd->add_option("--gold", oracle_args.gold_path, "SQuAD v2 dataset")->required();
    oracle_cmd->add_option("--top", oracle_args.n, "pool depth per model");
    oracle_cmd->add_option("--json", oracle_args.json_path, "write a machine-readable report");

    VoteArgs vote_args;
    auto* vote_cmd = app.add_subcommand("vote", "combine models with a hand-crafted voting rule");
    vote_cmd->add_option("--pred", vote_args.pred_paths, "n-best JSON files")
        ->required()
        ->expected(-1);
    vote_cmd->add_option("--method", vote_args.method, "1,2,3,3p,4,5,6,7,8,8p")->required();
    vote_cmd->add_option("--n", vote_args.n, "top-N depth for N-variants");
    vote_cmd->add_option("--gold", vote_args.gold_path, "optional dataset for scoring");
    vote_cmd->add_option("--out", vote_args.out_path, "output predictions JSON")->required();
    vote_cmd->add_option("--jobs", vote_args.jobs, "worker threads");
    vote_cmd->add_option("--json", vote_args.json_path, "write a machine-readable report");

    DatasetBuildArgs build_args;
    auto* build_cmd =
        app.add_subcommand("dataset-build", "assemble a level-1 stack dataset from n-best files");
    build_cmd->add_option("--pred", build_args.pred_paths, "n-best JSON files, level-0 order")
        ->required()
        ->expected(-1);
    build_cmd->add_option("--gold", build_args.gold_path,
                          "dataset with targets (omit for test splits)");
    build_cmd->add_option("--out", build_args.out_path, "output JSONL")->required();
    build_cmd->add_option("--n-per-model", build_args.n_per_model, "hypotheses kept per model");
    build_cmd->add_option("--tokenizer", build_args.tokenizer_path, "load this tokenizer");
    build_cmd->add_option("--save-tokenizer", build_args.save_tokenizer_path,
                          "build a vocabulary and save it here");
    build_cmd->add_flag("--biased", build_args.biased, "bias targets by answerability");
    build_cmd->add_option("--json", build_args.json_path, "write a machine-readable report");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train the level-1 meta-model");
    train_cmd->add_option("--train", train_args.train_path, "train JSONL (needs y)")->required();
    train_cmd->add_option("--dev", train_args.dev_path, "dev JSONL")->required();
    train_cmd->add_option("--dev-gold", train_args.dev_gold_path, "dev dataset")->required();
    train_cmd->add_option("--tokenizer", train_args.tokenizer_path, "tokenizer JSON")->required();
    train_cmd->add_option("--ckpt", train_args.ckpt_path, "output checkpoint")->required();
    train_cmd->add_option("--history", train_args.history_path, "output history CSV");
    train_cmd->add_option("--config", train_args.config_path, "JSON config file");
    train_cmd->add_option("--embed-dim", train_args.config.embed_dim);
    train_cmd->add_option("--conv-channels", train_args.config.conv_channels);
    train_cmd->add_option("--fc-sizes", train_args.config.fc_sizes);
    train_cmd->add_option("--dropout", train_args.config.dropout_p);
    train_cmd->add_option("--embed-dropout", train_args.config.embed_dropout_p);
    train_cmd->add_option("--noise-sigma", train_args.config.noise_sigma);
    train_cmd->add_option("--lr", train_args.config.lr);
    train_cmd->add_option("--patience", train_args.config.patience);
    train_cmd->add_option("--lr-factor", train_args.config.lr_factor);
    train_cmd->add_option("--epochs", train_args.config.epochs);
    train_cmd->add_option("--batch-size", train_args.config.batch_size);
    train_cmd->add_option("--seed", train_args.config.seed,
                          "training seed (env STACKQA_SEED, then 42)");
    train_cmd->add_flag("--biased-targets", train_args.config.biased_targets);
    std::string kl_direction_flag;
    train_cmd->add_option("--kl-direction", kl_direction_flag, "conventional|literal_paper")
        ->check(CLI::IsMember({"conventional", "literal_paper"}));
    train_cmd->add_option("--json", train_args.json_path, "write a machine-readable report");

    PredictArgs predict_args;
    auto* predict_cmd = app.add_subcommand("predict", "run a checkpoint over a stack dataset");
    predict_cmd->add_option("--ckpt", predict_args.ckpt_path, "checkpoint JSON")->required();
    predict_cmd->add_option("--data", predict_args.data_path, "stack JSONL")->required();
    predict_cmd->add_option("--out", predict_args.out_path, "output predictions JSON")->required();
    predict_cmd->add_option("--gold", predict_args.gold_path, "optional dataset for scoring");
    predict_cmd->add_option("--jobs", predict_args.jobs, "worker threads");
    predict_cmd->add_option("--json", predict_args.json_path, "write a machine-readable report");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark");
    synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory")->required();
    synth_cmd->add_option("--questions", synth_args.num_questions, "question count");
    synth_cmd->add_option("--unanswerable", synth_args.unanswerable_fraction,
                          "unanswerable fraction");
    synth_cmd->add_option("--model", synth_args.model_specs,
                          "model spec id:top1:recall:n (repeatable)");
    synth_cmd->add_option("--seed", synth_args.seed, "generator seed (env STACKQA_SEED, then 42)")
        ->each([&](const std::string&) { synth_args.seed_set = true; });
    synth_cmd->add_option("--miss-correlation", synth_args.miss_correlation,
                          "share hit/miss draws across models");
    synth_cmd->add_option("--short-lists", synth_args.short_list_fraction,
                          "fraction of questions with one truncated list");
    synth_cmd->add_option("--json", synth_args.json_path, "write a machine-readable report");

    auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference check of the nn kernels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitValidation;
    }

    try {
        if (eval_cmd->parsed()) return run_eval(eval_args);
        if (topn_cmd->parsed()) return run_topn(topn_args);
        if (oracle_cmd->parsed()) return run_oracle(oracle_args);
        if (vote_cmd->parsed()) return run_vote(vote_args);
        if (build_cmd->parsed()) return run_dataset_build(build_args);
        if (train_cmd->parsed()) {
            if (!kl_direction_flag.empty()) {
                train_args.config.kl_direction = kl_direction_flag == "conventional"
                                                     ? nn::KlDirection::Conventional
                                                     : nn::KlDirection::LiteralPaper;
            }
            std::vector<std::string> overrides;
            for (const auto* opt : train_cmd->get_options()) {
                if (opt->count() > 0) overrides.push_back(opt->get_name());
            }
            if (!kl_direction_flag.empty()) overrides.push_back("--kl-direction");
            return run_train(train_args, overrides);
        }
        if (predict_cmd->parsed()) return run_predict(predict_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (grad_cmd->parsed()) return run_grad_check();
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
