#include "stackqa/stacking_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "stackqa/errors.hpp"
#include "stackqa/squad_metrics.hpp"

namespace stackqa {

namespace {

using nlohmann::json;

std::vector<std::string> hypothesis_words(const std::string& text, int max_answer_length) {
    std::vector<std::string> words = answer_tokens(normalize_answer(text));
    if (static_cast<int>(words.size()) > max_answer_length) {
        words.resize(static_cast<std::size_t>(max_answer_length));
    }
    return words;
}

}  // namespace

Tokenizer build_vocab(const std::vector<ModelPredictions>& preds, const StackConfig& config) {
    if (preds.size() != config.models.size()) {
        throw ValidationError("build_vocab: got " + std::to_string(preds.size()) +
                              " models, config names " + std::to_string(config.models.size()));
    }
    Tokenizer tok(config.num_slots());

    // Sorted union of qids keeps the traversal independent of map layouts.
    std::vector<std::string> qids;
    for (const auto& model : preds) {
        for (const auto& [qid, _] : model.per_question) qids.push_back(qid);
    }
    std::sort(qids.begin(), qids.end());
    qids.erase(std::unique(qids.begin(), qids.end()), qids.end());
    if (qids.empty()) throw ValidationError("build_vocab: empty corpus");

    for (const auto& qid : qids) {
        for (const auto& model : preds) {
            auto it = model.per_question.find(qid);
            if (it == model.per_question.end()) continue;
            for (const auto& hyp : it->second) {
                for (const auto& word : hypothesis_words(hyp.text, config.max_answer_length)) {
                    tok.add_word(word);
                }
            }
        }
    }
    return tok;
}

std::vector<int> encode_hypothesis(const Tokenizer& tok, int h_index, const std::string& text,
                                   HypothesisKind kind, int tokens_per_hypothesis,
                                   int max_answer_length) {
    if (tokens_per_hypothesis < 1) {
        throw ValidationError("tokens_per_hypothesis must be >= 1");
    }
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(tokens_per_hypothesis));
    ids.push_back(tok.prefix_id(h_index));
    switch (kind) {
        case HypothesisKind::NoAnswer:
            ids.push_back(Tokenizer::kNoAnswerId);
            break;
        case HypothesisKind::Padding:
            ids.push_back(Tokenizer::kAnswerPadId);
            break;
        case HypothesisKind::Answer:
            for (const auto& word : hypothesis_words(text, max_answer_length)) {
                ids.push_back(tok.word_id(word));
            }
            break;
    }
    if (static_cast<int>(ids.size()) > tokens_per_hypothesis) {
        ids.resize(static_cast<std::size_t>(tokens_per_hypothesis));
    }
    ids.resize(static_cast<std::size_t>(tokens_per_hypothesis), Tokenizer::kPadId);
    return ids;
}

std::vector<double> target_distribution(const std::vector<double>& f1s, bool biased,
                                        const std::vector<bool>& na_flags,
                                        bool question_unanswerable) {
    if (f1s.empty()) throw ValidationError("target_distribution: empty score vector");
    if (biased && na_flags.size() != f1s.size()) {
        throw ValidationError("target_distribution: na_flags size mismatch");
    }
    std::vector<double> scores = f1s;
    if (biased) {
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (na_flags[i] != question_unanswerable) scores[i] = -1.0;
        }
    }
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);
    std::vector<double> y(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        y[i] = std::exp(scores[i] - max_score);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

StackExample build_example(const std::string& qid, const std::vector<const NBestList*>& lists,
                           const GroundTruth* truths, const Tokenizer& tok,
                           const StackConfig& config, bool biased) {
    const int M = static_cast<int>(config.models.size());
    if (static_cast<int>(lists.size()) != M) {
        throw ValidationError("build_example: expected " + std::to_string(M) + " lists, got " +
                              std::to_string(lists.size()) + " for question '" + qid + "'");
    }
    const int H = config.num_slots();
    if (tok.num_slots() != H) {
        throw ValidationError("build_example: tokenizer has " + std::to_string(tok.num_slots()) +
                              " slots, config needs " + std::to_string(H));
    }

    StackExample ex;
    ex.qid = qid;
    ex.x.reserve(static_cast<std::size_t>(config.input_length()));
    ex.surfaces.resize(static_cast<std::size_t>(H));
    ex.na_flags.assign(static_cast<std::size_t>(H), false);
    ex.pad_flags.assign(static_cast<std::size_t>(H), false);

    std::vector<double> f1s(static_cast<std::size_t>(H), 0.0);
    const std::vector<std::string> scoring =
        truths ? truths->scoring_truths() : std::vector<std::string>{};

    for (int i = 0; i < H; ++i) {
        const int model = i % M;
        const int rank = i / M + 1;  // 1-based within the model's list
        const NBestList& list = *lists[static_cast<std::size_t>(model)];
        const bool present =
            rank <= config.n_per_model && rank <= static_cast<int>(list.size());

        HypothesisKind kind = HypothesisKind::Padding;
        std::string text;
        if (present) {
            text = list[static_cast<std::size_t>(rank - 1)].text;
            kind = text.empty() ? HypothesisKind::NoAnswer : HypothesisKind::Answer;
        }

        const std::size_t slot = static_cast<std::size_t>(i);
        ex.surfaces[slot] = present ? text : std::string();
        ex.na_flags[slot] = kind == HypothesisKind::NoAnswer;
        ex.pad_flags[slot] = kind == HypothesisKind::Padding;
        if (truths && present) f1s[slot] = f1_score(text, scoring);

        const std::vector<int> ids =
            encode_hypothesis(tok, i + 1, text, kind, config.tokens_per_hypothesis,
                              config.max_answer_length);
        ex.x.insert(ex.x.end(), ids.begin(), ids.end());
    }

    if (truths) {
        if (biased) {
            for (int i = 0; i < H; ++i) {
                const std::size_t slot = static_cast<std::size_t>(i);
                if (ex.na_flags[slot] != truths->is_impossible) f1s[slot] = -1.0;
            }
        }
        ex.y = target_distribution(f1s, false, ex.na_flags, truths->is_impossible);
        ex.f1s = std::move(f1s);
    }
    return ex;
}

double padding_stats(const std::vector<StackExample>& examples) {
    if (examples.empty()) {
        std::cerr << "warning: padding_stats over an empty example list\n";
        return 0.0;
    }
    std::size_t padded = 0;
    for (const auto& ex : examples) {
        if (ex.has_padding()) ++padded;
    }
    return static_cast<double>(padded) / static_cast<double>(examples.size());
}

void write_stack_dataset(const std::string& path, const std::vector<StackExample>& examples) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write stack dataset: " + path);
    for (const auto& ex : examples) {
        json row;
        row["qid"] = ex.qid;
        row["x"] = ex.x;
        if (ex.y) row["y"] = *ex.y;
        row["surfaces"] = ex.surfaces;
        row["na_flags"] = json::array();
        for (bool b : ex.na_flags) row["na_flags"].push_back(b);
        row["pad_flags"] = json::array();
        for (bool b : ex.pad_flags) row["pad_flags"].push_back(b);
        if (ex.f1s) row["f1s"] = *ex.f1s;
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("failed writing stack dataset: " + path);
}

std::vector<StackExample> read_stack_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stack dataset: " + path);
    std::vector<StackExample> examples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "stack dataset " + path + " line " + std::to_string(line_no);
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (!row.is_object() || !row.contains("qid") || !row["qid"].is_string() ||
            !row.contains("x") || !row["x"].is_array() || !row.contains("surfaces") ||
            !row.contains("na_flags") || !row.contains("pad_flags")) {
            throw ValidationError(where + ": missing required fields");
        }
        StackExample ex;
        ex.qid = row["qid"].get<std::string>();
        try {
            ex.x = row["x"].get<std::vector<int>>();
            ex.surfaces = row["surfaces"].get<std::vector<std::string>>();
            ex.na_flags = row["na_flags"].get<std::vector<bool>>();
            ex.pad_flags = row["pad_flags"].get<std::vector<bool>>();
            if (row.contains("y")) ex.y = row["y"].get<std::vector<double>>();
            if (row.contains("f1s")) ex.f1s = row["f1s"].get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        const std::size_t H = ex.surfaces.size();
        if (ex.na_flags.size() != H || ex.pad_flags.size() != H ||
            (ex.y && ex.y->size() != H) || (ex.f1s && ex.f1s->size() != H) || H == 0 ||
            ex.x.size() % H != 0) {
            throw ValidationError(where + ": inconsistent field lengths");
        }
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace stackqa
