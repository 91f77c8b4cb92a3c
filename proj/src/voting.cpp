#include "stackqa/voting.hpp"

#include <algorithm>
#include <cmath>

#include "stackqa/errors.hpp"
#include "stackqa/parallel.hpp"
#include "stackqa/squad_metrics.hpp"

namespace stackqa {

VotingMethod parse_voting_method(const std::string& code, int n) {
    if (n < 1) throw ValidationError("voting n must be >= 1");
    VotingMethod method;
    method.n = n;
    if (code == "1") {
        method.rule = VoteRule::Plurality1;
    } else if (code == "2") {
        method.rule = VoteRule::WeightedProb1;
    } else if (code == "3") {
        method.rule = VoteRule::ZScore1;
    } else if (code == "3p") {
        method.rule = VoteRule::MedianScore1;
    } else if (code == "4") {
        method.rule = VoteRule::PluralityN;
    } else if (code == "5") {
        method.rule = VoteRule::LinearRankN;
    } else if (code == "6") {
        method.rule = VoteRule::FibonacciRankN;
    } else if (code == "7") {
        method.rule = VoteRule::WeightedProbN;
    } else if (code == "8") {
        method.rule = VoteRule::ZScoreN;
    } else if (code == "8p") {
        method.rule = VoteRule::MedianScoreN;
    } else {
        throw ValidationError("unknown voting method code '" + code +
                              "' (expected 1,2,3,3p,4,5,6,7,8,8p)");
    }
    if (is_top1_rule(method.rule)) method.n = 1;
    return method;
}

std::string voting_method_code(VoteRule rule) {
    switch (rule) {
        case VoteRule::Plurality1: return "1";
        case VoteRule::WeightedProb1: return "2";
        case VoteRule::ZScore1: return "3";
        case VoteRule::MedianScore1: return "3p";
        case VoteRule::PluralityN: return "4";
        case VoteRule::LinearRankN: return "5";
        case VoteRule::FibonacciRankN: return "6";
        case VoteRule::WeightedProbN: return "7";
        case VoteRule::ZScoreN: return "8";
        case VoteRule::MedianScoreN: return "8p";
    }
    throw ValidationError("invalid voting rule");
}

bool is_top1_rule(VoteRule rule) {
    switch (rule) {
        case VoteRule::Plurality1:
        case VoteRule::WeightedProb1:
        case VoteRule::ZScore1:
        case VoteRule::MedianScore1:
            return true;
        default:
            return false;
    }
}

bool is_zscore_rule(VoteRule rule) {
    return rule == VoteRule::ZScore1 || rule == VoteRule::ZScoreN;
}

ListStats list_stats(const NBestList& list) {
    ListStats stats;
    if (list.empty()) return stats;
    const double k = static_cast<double>(list.size());
    double sum = 0.0;
    for (const auto& hyp : list) sum += hyp.probability;
    stats.mean = sum / k;
    double sq = 0.0;
    for (const auto& hyp : list) {
        const double d = hyp.probability - stats.mean;
        sq += d * d;
    }
    stats.stddev = std::sqrt(sq / k);

    std::vector<double> probs;
    probs.reserve(list.size());
    for (const auto& hyp : list) probs.push_back(hyp.probability);
    std::sort(probs.begin(), probs.end());
    const std::size_t mid = probs.size() / 2;
    stats.median = (probs.size() % 2 == 1) ? probs[mid] : 0.5 * (probs[mid - 1] + probs[mid]);
    return stats;
}

double fibonacci(int n) {
    if (n < 1) throw ValidationError("fibonacci index must be >= 1");
    double a = 1.0, b = 1.0;  // Fib(1), Fib(2)
    for (int i = 3; i <= n; ++i) {
        const double next = a + b;
        a = b;
        b = next;
    }
    return n == 1 ? a : b;
}

double hypothesis_weight(const VotingMethod& method, const Hypothesis& hyp,
                         const NBestList& list) {
    switch (method.rule) {
        case VoteRule::Plurality1:
        case VoteRule::PluralityN:
            return 1.0;
        case VoteRule::WeightedProb1:
        case VoteRule::WeightedProbN:
            return hyp.probability;
        case VoteRule::ZScore1:
        case VoteRule::ZScoreN: {
            const ListStats stats = list_stats(list);
            if (stats.stddev == 0.0) return 0.0;
            return (hyp.probability - stats.mean) / stats.stddev;
        }
        case VoteRule::MedianScore1:
        case VoteRule::MedianScoreN:
            return hyp.probability - list_stats(list).median;
        case VoteRule::LinearRankN:
            return static_cast<double>(method.n - hyp.rank + 1);
        case VoteRule::FibonacciRankN:
            return fibonacci(method.n - hyp.rank + 1);
    }
    throw ValidationError("invalid voting rule");
}

VoteTally tally_question(const VotingMethod& method, const std::vector<const NBestList*>& lists) {
    VoteTally tally;
    for (const NBestList* list : lists) {
        const bool degenerate_list =
            is_zscore_rule(method.rule) && list_stats(*list).stddev == 0.0;
        const int take = std::min<int>(method.n, static_cast<int>(list->size()));
        for (int i = 0; i < take; ++i) {
            const Hypothesis& hyp = (*list)[i];
            const double weight = hypothesis_weight(method, hyp, *list);
            const std::string key = normalize_answer(hyp.text);
            tally.weights[key] += weight;
            tally.prob_mass[key] += hyp.probability;
            auto it = tally.surface.find(key);
            if (it == tally.surface.end()) {
                tally.surface.emplace(key, std::make_pair(hyp.probability, hyp.text));
            } else if (hyp.probability > it->second.first) {
                it->second = {hyp.probability, hyp.text};
            }
            ++tally.contributions;
            if (degenerate_list) ++tally.degenerate_contributions;
        }
    }
    return tally;
}

std::string pick_winner(const VoteTally& tally) {
    if (tally.weights.empty()) throw ValidationError("cannot pick a winner from an empty tally");
    const std::string* best = nullptr;
    for (const auto& [key, weight] : tally.weights) {
        if (!best) {
            best = &key;
            continue;
        }
        const double best_weight = tally.weights.at(*best);
        if (weight > best_weight) {
            best = &key;
        } else if (weight == best_weight) {
            const double mass = tally.prob_mass.at(key);
            const double best_mass = tally.prob_mass.at(*best);
            if (mass > best_mass) best = &key;
            // Equal mass: keep the earlier key, which is lexicographically
            // smaller thanks to std::map iteration order.
        }
    }
    if (best->empty()) return std::string();  // no-answer wins
    return tally.surface.at(*best).second;
}

std::string combine_question(const VotingMethod& method,
                             const std::vector<const NBestList*>& lists) {
    if (lists.empty()) throw ValidationError("combine_question needs at least one n-best list");
    VoteTally tally = tally_question(method, lists);
    if (is_zscore_rule(method.rule) && tally.all_degenerate()) {
        VotingMethod fallback = method;
        fallback.rule = is_top1_rule(method.rule) ? VoteRule::Plurality1 : VoteRule::PluralityN;
        tally = tally_question(fallback, lists);
    }
    return pick_winner(tally);
}

std::map<std::string, std::string> vote_dataset(const VotingMethod& method,
                                                const std::vector<ModelPredictions>& preds,
                                                const std::vector<std::string>& qids, int jobs) {
    if (preds.empty()) throw ValidationError("vote_dataset needs at least one model");
    // Resolve every list up front so coverage errors surface deterministically.
    std::vector<std::vector<const NBestList*>> resolved(qids.size());
    for (std::size_t i = 0; i < qids.size(); ++i) {
        resolved[i].reserve(preds.size());
        for (const auto& model : preds) {
            auto it = model.per_question.find(qids[i]);
            if (it == model.per_question.end()) {
                throw ValidationError("model '" + model.model_id +
                                      "' has no predictions for question '" + qids[i] + "'");
            }
            resolved[i].push_back(&it->second);
        }
    }
    std::vector<std::string> answers(qids.size());
    parallel_for(qids.size(), jobs,
                 [&](std::size_t i) { answers[i] = combine_question(method, resolved[i]); });
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < qids.size(); ++i) out.emplace(qids[i], std::move(answers[i]));
    return out;
}

}  // namespace stackqa
