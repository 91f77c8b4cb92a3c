#pragma once

#include <map>
#include <string>
#include <vector>

#include "stackqa/types.hpp"

namespace stackqa {

// The ten hand-crafted combiners. Top-1 rules ignore n.
enum class VoteRule {
    Plurality1,      // 1:  one vote per model's top answer
    WeightedProb1,   // 2:  vote weight = probability score
    ZScore1,         // 3:  weight = (P - mean) / stddev over the model's list
    MedianScore1,    // 3p: weight = P - median over the model's list
    PluralityN,      // 4:  plurality over the bag of top-N answers
    LinearRankN,     // 5:  weight = n - rank + 1
    FibonacciRankN,  // 6:  weight = Fib(n - rank + 1), Fib(1)=Fib(2)=1
    WeightedProbN,   // 7:  top-N variant of 2
    ZScoreN,         // 8:  top-N variant of 3
    MedianScoreN,    // 8p: top-N variant of 3p
};

struct VotingMethod {
    VoteRule rule = VoteRule::Plurality1;
    int n = 1;  // >= 1; top-1 rules behave as n = 1
};

/// Map a CLI code ("1".."8", "3p", "8p") to its rule.
VotingMethod parse_voting_method(const std::string& code, int n);
std::string voting_method_code(VoteRule rule);

bool is_top1_rule(VoteRule rule);
bool is_zscore_rule(VoteRule rule);

/// Population statistics over every probability in one model's list.
struct ListStats {
    double mean = 0.0;
    double stddev = 0.0;  // population (divide by k)
    double median = 0.0;
};
ListStats list_stats(const NBestList& list);

/// nth Fibonacci number with Fib(1) = Fib(2) = 1.
double fibonacci(int n);

/// Weight of one hypothesis under a method. Statistics are computed over the
/// model's full list for that question, not the truncated top-n. A z-score
/// weight over a zero-stddev list is 0 (degenerate).
double hypothesis_weight(const VotingMethod& method, const Hypothesis& hyp, const NBestList& list);

/// Accumulated weights per normalized answer plus everything needed for the
/// documented tie-break and surface-form choice.
struct VoteTally {
    std::map<std::string, double> weights;    // normalized answer -> total weight
    std::map<std::string, double> prob_mass;  // normalized answer -> summed raw probability
    // normalized answer -> (best probability, display string)
    std::map<std::string, std::pair<double, std::string>> surface;
    int contributions = 0;
    int degenerate_contributions = 0;  // z-score weights from zero-stddev lists

    bool all_degenerate() const {
        return contributions > 0 && degenerate_contributions == contributions;
    }
};

/// Truncate each list to top-n and accumulate hypothesis weights per
/// normalized answer.
VoteTally tally_question(const VotingMethod& method, const std::vector<const NBestList*>& lists);

/// Argmax total weight; ties broken by highest summed raw probability mass,
/// then lexicographically smallest normalized answer. Returns the winner's
/// surface form (highest-probability original text; no-answer surfaces as "").
std::string pick_winner(const VoteTally& tally);

/// Full per-question combiner. A z-score method whose every contribution is
/// degenerate falls back to plurality over the same truncated lists.
std::string combine_question(const VotingMethod& method, const std::vector<const NBestList*>& lists);

/// Batch driver: combine_question per qid. Errors name the model and qid when
/// a model does not cover a question.
std::map<std::string, std::string> vote_dataset(const VotingMethod& method,
                                                const std::vector<ModelPredictions>& preds,
                                                const std::vector<std::string>& qids,
                                                int jobs = 1);

}  // namespace stackqa
