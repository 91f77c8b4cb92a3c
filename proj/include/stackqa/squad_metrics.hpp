#pragma once

#include <map>
#include <string>
#include <vector>

#include "stackqa/types.hpp"

namespace stackqa {

struct QuestionScore {
    double em = 0.0;  // in {0,1}
    double f1 = 0.0;  // in [0,1]
};

struct EvalReport {
    double em = 0.0;           // percentage
    double f1 = 0.0;           // percentage
    double na_accuracy = 0.0;  // percentage
    std::map<std::string, QuestionScore> per_question;
    int count = 0;
};

struct TopNScores {
    double em = 0.0;
    double f1 = 0.0;
    double na_accuracy = 0.0;
};

struct TopNReport {
    std::map<int, TopNScores> per_n;
};

/// Lowercase, strip punctuation, drop the articles a/an/the, collapse whitespace.
/// Total and idempotent; accented letters survive (UTF-8 aware).
std::string normalize_answer(const std::string& text);

/// Split a normalized answer on single spaces.
std::vector<std::string> answer_tokens(const std::string& normalized);

/// 1 iff the normalized prediction equals some normalized truth.
double exact_match(const std::string& prediction, const std::vector<std::string>& truths);

/// Token-overlap harmonic mean against the best-matching truth. Multiset
/// overlap; an empty normalized side scores 1 only against another empty side.
double f1_score(const std::string& prediction, const std::vector<std::string>& truths);

/// Score one answer per dataset question. Requires every dataset qid in
/// `answers`; aggregates in sorted-qid order. na_accuracy counts questions
/// whose predicted emptiness matches is_impossible.
EvalReport evaluate(const std::map<std::string, std::string>& answers, const Dataset& dataset);

/// Best-of-N scores: per question the max over the first min(N, k) hypotheses,
/// independently for EM, F1, and answerability.
TopNReport topn_eval(const ModelPredictions& preds, const Dataset& dataset, const std::vector<int>& ns);

/// Pool the top-n hypotheses of every model per question and take the best
/// score per metric. With one model this equals topn_eval at that n.
EvalReport oracle_eval(const std::vector<ModelPredictions>& preds, int n, const Dataset& dataset);

}  // namespace stackqa
