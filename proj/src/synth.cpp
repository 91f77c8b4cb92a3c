#include "stackqa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "stackqa/errors.hpp"
#include "stackqa/rng.hpp"

namespace stackqa {

namespace {
using nlohmann::json;
}

void SynthConfig::validate() const {
    if (num_questions < 1) throw ValidationError("num_questions must be >= 1");
    if (unanswerable_fraction < 0.0 || unanswerable_fraction > 1.0) {
        throw ValidationError("unanswerable_fraction must be in [0,1]");
    }
    if (models.empty()) throw ValidationError("synth config needs at least one model");
    int max_n = 0;
    for (const auto& model : models) {
        if (model.id.empty()) throw ValidationError("synth model id must be non-empty");
        if (model.top1_accuracy < 0.0 || model.top1_accuracy > model.topn_recall ||
            model.topn_recall > 1.0) {
            throw ValidationError("model '" + model.id +
                                  "' needs 0 <= top1_accuracy <= topn_recall <= 1");
        }
        if (model.n < 1) throw ValidationError("model '" + model.id + "' needs n >= 1");
        if (model.topn_recall > model.top1_accuracy && model.n < 2) {
            throw ValidationError("model '" + model.id +
                                  "' cannot place late hits with a length-1 list");
        }
        if (short_list_fraction > 0.0 && model.n < 2) {
            throw ValidationError("short lists need every model n >= 2");
        }
        max_n = std::max(max_n, model.n);
    }
    if (vocab_size < 2 * max_n) {
        throw ValidationError("vocab_size must be at least twice the longest list");
    }
    if (answer_length_range.first < 1 ||
        answer_length_range.second < answer_length_range.first) {
        throw ValidationError("answer_length_range must satisfy 1 <= lo <= hi");
    }
    if (miss_correlation < 0.0 || miss_correlation > 1.0) {
        throw ValidationError("miss_correlation must be in [0,1]");
    }
    if (short_list_fraction < 0.0 || short_list_fraction > 1.0) {
        throw ValidationError("short_list_fraction must be in [0,1]");
    }
    if (split_name.empty()) throw ValidationError("split_name must be non-empty");
}

namespace {

std::string question_id(int index, int total) {
    int width = 1;
    for (int v = total - 1; v >= 10; v /= 10) ++width;
    std::string digits = std::to_string(index);
    return "synth-" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

// Pairwise-distinct answer pool: entry i leads with its own word.
std::vector<std::string> build_answer_pool(const SynthConfig& config, Rng& rng) {
    std::vector<std::string> pool;
    pool.reserve(static_cast<std::size_t>(config.vocab_size));
    const int lo = config.answer_length_range.first;
    const int hi = config.answer_length_range.second;
    for (int i = 0; i < config.vocab_size; ++i) {
        const int length = lo + static_cast<int>(rng.uniform_int(
                                    static_cast<uint64_t>(hi - lo + 1)));
        std::string text = "w" + std::to_string(i);
        for (int w = 1; w < length; ++w) {
            text += " w" + std::to_string(
                               rng.uniform_int(static_cast<uint64_t>(config.vocab_size)));
        }
        pool.push_back(std::move(text));
    }
    return pool;
}

}  // namespace

SynthData generate_in_memory(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const std::vector<std::string> pool = build_answer_pool(config, rng);
    const int M = static_cast<int>(config.models.size());

    SynthData data;
    data.gold.split_name = config.split_name;
    data.preds.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        data.preds[static_cast<std::size_t>(m)].model_id =
            config.models[static_cast<std::size_t>(m)].id;
    }

    std::vector<std::string> qids(static_cast<std::size_t>(config.num_questions));
    for (int q = 0; q < config.num_questions; ++q) {
        const std::string qid = question_id(q, config.num_questions);
        qids[static_cast<std::size_t>(q)] = qid;

        const bool unanswerable = rng.uniform() < config.unanswerable_fraction;
        std::string gold_text;
        if (!unanswerable) {
            gold_text = pool[rng.uniform_int(static_cast<uint64_t>(config.vocab_size))];
        }
        GroundTruth truth;
        truth.is_impossible = unanswerable;
        if (!unanswerable) truth.answers.push_back(gold_text);
        data.gold.per_question.emplace(qid, std::move(truth));

        const bool shared_draw = rng.uniform() < config.miss_correlation;
        const double shared_u = shared_draw ? rng.uniform() : 0.0;

        for (int m = 0; m < M; ++m) {
            const SynthModelSpec& spec = config.models[static_cast<std::size_t>(m)];
            const double u = shared_draw ? shared_u : rng.uniform();
            int gold_rank = 0;  // 0 = absent
            if (u < spec.top1_accuracy) {
                gold_rank = 1;
            } else if (u < spec.topn_recall) {
                gold_rank = 2 + static_cast<int>(
                                    rng.uniform_int(static_cast<uint64_t>(spec.n - 1)));
            }

            std::vector<double> probs(static_cast<std::size_t>(spec.n));
            for (double& p : probs) p = rng.uniform(0.01, 1.0);
            std::sort(probs.begin(), probs.end(), std::greater<>());
            const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
            for (double& p : probs) p /= sum;

            NBestList list(static_cast<std::size_t>(spec.n));
            std::unordered_set<std::string> used;
            if (gold_rank > 0) {
                list[static_cast<std::size_t>(gold_rank - 1)].text = gold_text;
                used.insert(gold_text);
            } else if (!unanswerable) {
                used.insert(gold_text);  // a distractor must not accidentally hit
            }
            for (int r = 0; r < spec.n; ++r) {
                if (r + 1 == gold_rank) continue;
                std::string candidate;
                do {
                    candidate =
                        pool[rng.uniform_int(static_cast<uint64_t>(config.vocab_size))];
                } while (used.count(candidate));
                used.insert(candidate);
                list[static_cast<std::size_t>(r)].text = std::move(candidate);
            }
            if (!unanswerable && rng.uniform() < 0.5) {
                // Let the model hedge with a no-answer hypothesis somewhere
                // off the gold slot.
                std::vector<int> slots;
                for (int r = 0; r < spec.n; ++r) {
                    if (r + 1 != gold_rank) slots.push_back(r);
                }
                if (!slots.empty()) {
                    const int pick = slots[rng.uniform_int(slots.size())];
                    list[static_cast<std::size_t>(pick)].text.clear();
                }
            }
            for (int r = 0; r < spec.n; ++r) {
                list[static_cast<std::size_t>(r)].probability =
                    probs[static_cast<std::size_t>(r)];
                list[static_cast<std::size_t>(r)].rank = r + 1;
            }
            data.preds[static_cast<std::size_t>(m)].per_question.emplace(qid, std::move(list));
        }
    }

    if (config.short_list_fraction > 0.0) {
        const auto victims = static_cast<std::size_t>(
            std::llround(config.short_list_fraction * config.num_questions));
        std::vector<std::size_t> order(qids.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (std::size_t k = 0; k < victims && k < order.size(); ++k) {
            const std::string& qid = qids[order[k]];
            const int m = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(M)));
            NBestList& list =
                data.preds[static_cast<std::size_t>(m)].per_question.at(qid);
            const auto new_len =
                1 + rng.uniform_int(static_cast<uint64_t>(list.size() - 1));
            list.resize(new_len);
        }
    }
    return data;
}

void write_squad_dataset(const std::string& path, const Dataset& dataset,
                         const std::map<std::string, std::string>* questions) {
    json qas = json::array();
    for (const auto& [qid, truth] : dataset.per_question) {
        json qa;
        qa["id"] = qid;
        if (questions && questions->count(qid)) {
            qa["question"] = questions->at(qid);
        } else {
            qa["question"] = "synthetic question " + qid;
        }
        qa["is_impossible"] = truth.is_impossible;
        json answers = json::array();
        for (const auto& text : truth.answers) {
            answers.push_back({{"text", text}, {"answer_start", 0}});
        }
        qa["answers"] = std::move(answers);
        json paragraph;
        paragraph["context"] = "synthetic context";
        paragraph["qas"] = json::array({std::move(qa)});
        qas.push_back(std::move(paragraph));
    }
    json doc;
    doc["version"] = "v2.0";
    doc["split"] = dataset.split_name;
    json article;
    article["title"] = dataset.split_name;
    article["paragraphs"] = std::move(qas);
    doc["data"] = json::array({std::move(article)});

    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset: " + path);
    out << doc.dump() << '\n';
    if (!out) throw IoError("failed writing dataset: " + path);
}

void write_nbest(const std::string& path, const ModelPredictions& preds) {
    json doc = json::object();
    for (const auto& [qid, list] : preds.per_question) {
        json entries = json::array();
        for (const auto& hyp : list) {
            entries.push_back({{"text", hyp.text}, {"probability", hyp.probability}});
        }
        doc[qid] = std::move(entries);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write n-best file: " + path);
    out << doc.dump() << '\n';
    if (!out) throw IoError("failed writing n-best file: " + path);
}

SynthOutput generate(const SynthConfig& config, const std::string& out_dir) {
    const SynthData data = generate_in_memory(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());

    SynthOutput output;
    output.gold_path = out_dir + "/gold.json";
    write_squad_dataset(output.gold_path, data.gold, nullptr);
    for (const auto& preds : data.preds) {
        const std::string path = out_dir + "/" + preds.model_id + ".nbest.json";
        write_nbest(path, preds);
        output.nbest_paths.push_back(path);
    }
    return output;
}

}  // namespace stackqa
