#pragma once

#include <map>
#include <string>
#include <vector>

namespace stackqa {

/// One ranked candidate answer. An empty text is the no-answer hypothesis.
struct Hypothesis {
    std::string text;
    double probability = 0.0;  // in [0,1]
    int rank = 0;              // 1-based, consecutive within a list

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

using NBestList = std::vector<Hypothesis>;

/// All n-best lists of one upstream model, keyed by question id.
struct ModelPredictions {
    std::string model_id;
    std::map<std::string, NBestList> per_question;

    friend bool operator==(const ModelPredictions&, const ModelPredictions&) = default;
};

/// Acceptable answers for one question; empty set means unanswerable.
struct GroundTruth {
    std::vector<std::string> answers;
    bool is_impossible = false;

    // Scorers treat an unanswerable question as the single truth "".
    std::vector<std::string> scoring_truths() const {
        if (answers.empty()) return {std::string()};
        return answers;
    }
};

struct Dataset {
    std::map<std::string, GroundTruth> per_question;
    std::string split_name;

    std::vector<std::string> qids() const {
        std::vector<std::string> out;
        out.reserve(per_question.size());
        for (const auto& [qid, _] : per_question) out.push_back(qid);
        return out;
    }
};

}  // namespace stackqa
