#include "stackqa/tokenizer.hpp"

#include <fstream>

#include <json.hpp>

#include "stackqa/errors.hpp"

namespace stackqa {

namespace {
using nlohmann::json;
}

Tokenizer::Tokenizer(int num_slots) : num_slots_(num_slots) {
    if (num_slots < 1) throw ValidationError("tokenizer needs at least one hypothesis slot");
}

int Tokenizer::prefix_id(int h_index) const {
    if (h_index < 1 || h_index > num_slots_) {
        throw ValidationError("hypothesis index out of range: " + std::to_string(h_index));
    }
    return 3 + h_index;
}

int Tokenizer::add_word(const std::string& word) {
    auto it = vocab_.find(word);
    if (it != vocab_.end()) return it->second;
    const int id = first_word_id() + static_cast<int>(vocab_.size());
    vocab_.emplace(word, id);
    return id;
}

int Tokenizer::word_id(const std::string& word) const {
    auto it = vocab_.find(word);
    return it == vocab_.end() ? kUnkId : it->second;
}

void Tokenizer::save(const std::string& path) const {
    json doc;
    doc["num_slots"] = num_slots_;
    json reserved = json::object();
    reserved["<pad>"] = kPadId;
    reserved["<unk>"] = kUnkId;
    reserved["<ap>"] = kAnswerPadId;
    reserved["<na>"] = kNoAnswerId;
    for (int h = 1; h <= num_slots_; ++h) {
        reserved["<h" + std::to_string(h) + ">"] = prefix_id(h);
    }
    doc["reserved"] = std::move(reserved);
    json vocab = json::object();
    for (const auto& [word, id] : vocab_) vocab[word] = id;
    doc["vocab"] = std::move(vocab);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write tokenizer: " + path);
    out << doc.dump() << '\n';
    if (!out) throw IoError("failed writing tokenizer: " + path);
}

Tokenizer Tokenizer::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tokenizer: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed tokenizer JSON in " + path + ": " + e.what());
    }
    if (!doc.contains("num_slots") || !doc["num_slots"].is_number_integer()) {
        throw ValidationError("tokenizer file missing integer 'num_slots': " + path);
    }
    Tokenizer tok(doc["num_slots"].get<int>());
    if (!doc.contains("vocab") || !doc["vocab"].is_object()) {
        throw ValidationError("tokenizer file missing 'vocab' object: " + path);
    }
    // Ids must tile [first_word_id, first_word_id + size) exactly once.
    std::map<int, std::string> by_id;
    for (const auto& [word, id] : doc["vocab"].items()) {
        if (!id.is_number_integer()) {
            throw ValidationError("tokenizer word '" + word + "' has a non-integer id");
        }
        if (!by_id.emplace(id.get<int>(), word).second) {
            throw ValidationError("tokenizer has duplicate id " + id.dump());
        }
    }
    int expected = tok.first_word_id();
    for (const auto& [id, word] : by_id) {
        if (id != expected) {
            throw ValidationError("tokenizer ids must be contiguous from " +
                                  std::to_string(tok.first_word_id()) + "; got " +
                                  std::to_string(id) + " where " + std::to_string(expected) +
                                  " was expected");
        }
        tok.vocab_.emplace(word, id);
        ++expected;
    }
    return tok;
}

}  // namespace stackqa
