#pragma once

#include <map>
#include <string>
#include <vector>

namespace stackqa {

// Word-level tokenizer with a fixed reserved-id block:
//   <pad>=0, <unk>=1, <ap>=2, <na>=3, <h1>..<hH> = 4..3+H.
// Word ids are contiguous from 4+H in first-appearance order.
class Tokenizer {
public:
    static constexpr int kPadId = 0;
    static constexpr int kUnkId = 1;
    static constexpr int kAnswerPadId = 2;  // <ap>: absent-hypothesis padding
    static constexpr int kNoAnswerId = 3;   // <na>: the no-answer hypothesis

    Tokenizer() = default;
    explicit Tokenizer(int num_slots);

    int num_slots() const { return num_slots_; }

    /// Reserved prefix id for hypothesis slot h_index (1-based).
    int prefix_id(int h_index) const;

    int first_word_id() const { return 4 + num_slots_; }

    /// Total id space: reserved block plus learned words.
    int vocab_size() const { return first_word_id() + static_cast<int>(vocab_.size()); }

    /// Insert a word if new; returns its id either way.
    int add_word(const std::string& word);

    /// Lookup; kUnkId for out-of-vocabulary words.
    int word_id(const std::string& word) const;

    const std::map<std::string, int>& vocab() const { return vocab_; }

    void save(const std::string& path) const;
    static Tokenizer load(const std::string& path);

    friend bool operator==(const Tokenizer&, const Tokenizer&) = default;

private:
    int num_slots_ = 0;
    std::map<std::string, int> vocab_;
};

}  // namespace stackqa
