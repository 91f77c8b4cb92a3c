#pragma once

#include <map>
#include <string>

#include "stackqa/types.hpp"

namespace stackqa {

/// Parse an n-best prediction file: {qid: [{"text": str, "probability": num, ...}, ...]}.
/// Hypotheses are re-sorted by probability descending (stable, so file order
/// breaks ties) and ranks assigned 1..k. Unknown fields are ignored.
ModelPredictions load_nbest(const std::string& path, const std::string& model_id = "");

/// Parse a SQuAD v2.0 dataset file. Answers are deduplicated preserving first
/// occurrence; a question with no answers is marked unanswerable.
Dataset load_ground_truth(const std::string& path);

/// Write {qid: answer} as JSON with lexicographic key order and a trailing LF.
void write_predictions(const std::string& path, const std::map<std::string, std::string>& answers);

/// Re-parse a predictions file written by write_predictions.
std::map<std::string, std::string> load_predictions(const std::string& path);

}  // namespace stackqa
