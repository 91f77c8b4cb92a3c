#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stackqa/types.hpp"

namespace stackqa {

struct SynthModelSpec {
    std::string id;
    double top1_accuracy = 0.8;  // P(gold at rank 1)
    double topn_recall = 0.95;   // P(gold anywhere in top n); >= top1_accuracy
    int n = 8;                   // list length
};

struct SynthConfig {
    int num_questions = 1000;
    double unanswerable_fraction = 1.0 / 3.0;
    std::vector<SynthModelSpec> models;
    int vocab_size = 2000;  // shared answer pool size
    std::pair<int, int> answer_length_range = {1, 3};
    uint64_t seed = 42;
    std::string split_name = "synth";
    // With probability miss_correlation all models share one hit/miss draw per
    // question instead of drawing independently.
    double miss_correlation = 0.0;
    // Exactly round(fraction * num_questions) questions get one model's list
    // truncated below n; drives padding in downstream stack datasets.
    double short_list_fraction = 0.0;

    void validate() const;  // throws ValidationError
};

struct SynthData {
    Dataset gold;
    std::vector<ModelPredictions> preds;
};

/// Build the dataset and every model's n-best lists in memory. Pure function
/// of the config; the same seed reproduces identical structures.
SynthData generate_in_memory(const SynthConfig& config);

struct SynthOutput {
    std::string gold_path;
    std::vector<std::string> nbest_paths;
};

/// Write <dir>/gold.json (SQuAD v2 layout) plus <dir>/<model_id>.nbest.json
/// per model. Byte-identical for identical configs.
SynthOutput generate(const SynthConfig& config, const std::string& out_dir);

/// SQuAD v2 writer, shared by generate and tests.
void write_squad_dataset(const std::string& path, const Dataset& dataset,
                         const std::map<std::string, std::string>* questions = nullptr);

/// n-best writer emitting the loader's input format.
void write_nbest(const std::string& path, const ModelPredictions& preds);

}  // namespace stackqa
