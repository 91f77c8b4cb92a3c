#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stackqa/tokenizer.hpp"
#include "stackqa/types.hpp"

namespace stackqa {

struct StackConfig {
    std::vector<std::string> models;  // ordered ids; slot i holds model i % M
    int n_per_model = 8;
    int tokens_per_hypothesis = 16;  // T
    int max_answer_length = 30;      // words kept per hypothesis before encoding

    int num_slots() const { return static_cast<int>(models.size()) * n_per_model; }  // H
    int input_length() const { return num_slots() * tokens_per_hypothesis; }         // H*T
};

enum class HypothesisKind { Answer, NoAnswer, Padding };

/// One training/eval row for the meta-model.
struct StackExample {
    std::string qid;
    std::vector<int> x;  // token ids, length H*T
    std::optional<std::vector<double>> y;    // target distribution; absent on test splits
    std::vector<std::string> surfaces;       // original answer texts, "" for pads
    std::vector<bool> na_flags;              // hypothesis is the no-answer
    std::vector<bool> pad_flags;             // slot is <ap> padding
    std::optional<std::vector<double>> f1s;  // scores fed to softmax; -1 under biasing

    bool has_padding() const {
        for (bool p : pad_flags)
            if (p) return true;
        return false;
    }
};

/// Deterministic vocabulary over every hypothesis text: sorted-by-qid
/// traversal, models in config order, hypotheses by rank, word ids in
/// first-appearance order.
Tokenizer build_vocab(const std::vector<ModelPredictions>& preds, const StackConfig& config);

/// Encode one hypothesis slot: prefix token, then <na>/<ap> or word ids
/// (<unk> for unknown words), truncated and <pad>-padded to exactly T.
std::vector<int> encode_hypothesis(const Tokenizer& tok, int h_index, const std::string& text,
                                   HypothesisKind kind, int tokens_per_hypothesis,
                                   int max_answer_length);

/// Softmax over the slot scores. Biasing first rewrites the score of every
/// slot whose answerability disagrees with the question's to -1.
std::vector<double> target_distribution(const std::vector<double>& f1s, bool biased,
                                        const std::vector<bool>& na_flags,
                                        bool question_unanswerable);

/// Assemble one example: truncate each model's list to n_per_model, interleave
/// by rank across models (A1,B1,A2,B2,...), pad short lists with <ap> slots at
/// F1 0, score the rest with f1_score. Null truths (test split) drop y and f1s.
StackExample build_example(const std::string& qid, const std::vector<const NBestList*>& lists,
                           const GroundTruth* truths, const Tokenizer& tok,
                           const StackConfig& config, bool biased);

/// Fraction of examples with at least one padded slot.
double padding_stats(const std::vector<StackExample>& examples);

/// JSONL, one example per line; read(write(x)) == x. Read errors carry the
/// 1-based line number.
void write_stack_dataset(const std::string& path, const std::vector<StackExample>& examples);
std::vector<StackExample> read_stack_dataset(const std::string& path);

}  // namespace stackqa
