#include "stackqa/prediction_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "stackqa/errors.hpp"

namespace stackqa {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
}

}  // namespace

ModelPredictions load_nbest(const std::string& path, const std::string& model_id) {
    const json doc = parse_file(path);
    if (!doc.is_object()) throw ValidationError("n-best file must be a JSON object: " + path);

    ModelPredictions preds;
    preds.model_id = model_id;
    for (const auto& [qid, entries] : doc.items()) {
        if (!entries.is_array()) {
            throw ValidationError("n-best entry for question '" + qid + "' must be an array");
        }
        if (entries.empty()) {
            throw ValidationError("empty n-best list for question '" + qid + "' in " + path);
        }
        NBestList list;
        list.reserve(entries.size());
        for (const auto& entry : entries) {
            if (!entry.is_object() || !entry.contains("text") || !entry.contains("probability")) {
                throw ValidationError("n-best hypothesis for question '" + qid +
                                      "' needs string 'text' and numeric 'probability'");
            }
            Hypothesis hyp;
            if (!entry["text"].is_string()) {
                throw ValidationError("hypothesis 'text' must be a string for question '" + qid +
                                      "'");
            }
            hyp.text = entry["text"].get<std::string>();
            if (!entry["probability"].is_number()) {
                throw ValidationError("hypothesis 'probability' must be numeric for question '" +
                                      qid + "'");
            }
            hyp.probability = entry["probability"].get<double>();
            if (hyp.probability < 0.0 || hyp.probability > 1.0) {
                throw ValidationError("probability out of [0,1] for question '" + qid + "'");
            }
            list.push_back(std::move(hyp));
        }
        std::stable_sort(list.begin(), list.end(), [](const Hypothesis& a, const Hypothesis& b) {
            return a.probability > b.probability;
        });
        for (std::size_t i = 0; i < list.size(); ++i) list[i].rank = static_cast<int>(i) + 1;
        preds.per_question.emplace(qid, std::move(list));
    }
    if (preds.per_question.empty()) {
        throw ValidationError("n-best file contains no questions: " + path);
    }
    return preds;
}

Dataset load_ground_truth(const std::string& path) {
    const json doc = parse_file(path);
    if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
        throw ValidationError("dataset must be an object with a 'data' array: " + path);
    }

    Dataset dataset;
    if (doc.contains("split") && doc["split"].is_string()) {
        dataset.split_name = doc["split"].get<std::string>();
    }
    for (const auto& article : doc["data"]) {
        if (!article.contains("paragraphs") || !article["paragraphs"].is_array()) {
            throw ValidationError("dataset article missing 'paragraphs' array");
        }
        for (const auto& paragraph : article["paragraphs"]) {
            if (!paragraph.contains("qas") || !paragraph["qas"].is_array()) {
                throw ValidationError("dataset paragraph missing 'qas' array");
            }
            for (const auto& qa : paragraph["qas"]) {
                if (!qa.contains("id") || !qa["id"].is_string()) {
                    throw ValidationError("dataset question missing string 'id'");
                }
                const std::string qid = qa["id"].get<std::string>();
                GroundTruth truth;
                truth.is_impossible =
                    qa.contains("is_impossible") && qa["is_impossible"].is_boolean()
                        ? qa["is_impossible"].get<bool>()
                        : false;
                std::unordered_set<std::string> seen;
                if (qa.contains("answers") && qa["answers"].is_array()) {
                    for (const auto& answer : qa["answers"]) {
                        if (!answer.contains("text") || !answer["text"].is_string()) continue;
                        std::string text = answer["text"].get<std::string>();
                        if (seen.insert(text).second) truth.answers.push_back(std::move(text));
                    }
                }
                if (truth.is_impossible) truth.answers.clear();
                if (truth.answers.empty()) truth.is_impossible = true;
                if (!dataset.per_question.emplace(qid, std::move(truth)).second) {
                    throw ValidationError("duplicate question id '" + qid + "' in " + path);
                }
            }
        }
    }
    if (dataset.per_question.empty()) {
        throw ValidationError("dataset contains no questions: " + path);
    }
    return dataset;
}

void write_predictions(const std::string& path, const std::map<std::string, std::string>& answers) {
    json doc = json::object();
    for (const auto& [qid, text] : answers) doc[qid] = text;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << doc.dump() << '\n';
    if (!out) throw IoError("failed writing file: " + path);
}

std::map<std::string, std::string> load_predictions(const std::string& path) {
    const json doc = parse_file(path);
    if (!doc.is_object()) {
        throw ValidationError("predictions file must be a JSON object: " + path);
    }
    std::map<std::string, std::string> answers;
    for (const auto& [qid, value] : doc.items()) {
        if (!value.is_string()) {
            throw ValidationError("prediction for question '" + qid + "' must be a string");
        }
        answers[qid] = value.get<std::string>();
    }
    return answers;
}

}  // namespace stackqa
