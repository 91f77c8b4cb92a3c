#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "stackqa/errors.hpp"
#include "stackqa/stacking_data.hpp"

using namespace stackqa;
namespace fs = std::filesystem;

namespace {

NBestList make_list(std::vector<std::pair<std::string, double>> entries) {
    NBestList list;
    int rank = 1;
    for (auto& [text, prob] : entries) list.push_back({text, prob, rank++});
    return list;
}

StackConfig two_by_eight() {
    StackConfig config;
    config.models = {"a", "b"};
    config.n_per_model = 8;
    config.tokens_per_hypothesis = 16;
    return config;
}

bool examples_equal(const StackExample& lhs, const StackExample& rhs) {
    return lhs.qid == rhs.qid && lhs.x == rhs.x && lhs.y == rhs.y &&
           lhs.surfaces == rhs.surfaces && lhs.na_flags == rhs.na_flags &&
           lhs.pad_flags == rhs.pad_flags && lhs.f1s == rhs.f1s;
}

}  // namespace

TEST_CASE("tokenizer reserved block and word ids") {
    Tokenizer tok(16);
    CHECK(Tokenizer::kPadId == 0);
    CHECK(Tokenizer::kUnkId == 1);
    CHECK(Tokenizer::kAnswerPadId == 2);
    CHECK(Tokenizer::kNoAnswerId == 3);
    CHECK(tok.prefix_id(1) == 4);
    CHECK(tok.prefix_id(16) == 19);
    CHECK(tok.first_word_id() == 20);
    CHECK(tok.vocab_size() == 20);
    CHECK(tok.add_word("paris") == 20);
    CHECK(tok.add_word("rome") == 21);
    CHECK(tok.add_word("paris") == 20);  // repeat keeps its id
    CHECK(tok.word_id("rome") == 21);
    CHECK(tok.word_id("unseen") == Tokenizer::kUnkId);
    CHECK(tok.vocab_size() == 22);
    CHECK_THROWS_AS(tok.prefix_id(0), ValidationError);
    CHECK_THROWS_AS(tok.prefix_id(17), ValidationError);
}

TEST_CASE("tokenizer save and load round trip") {
    Tokenizer tok(4);
    tok.add_word("one");
    tok.add_word("two");
    const fs::path path = fs::temp_directory_path() /
                          ("stackqa_tok_" + std::to_string(::getpid()) + ".json");
    tok.save(path.string());
    CHECK(Tokenizer::load(path.string()) == tok);
    fs::remove(path);
}

TEST_CASE("build_vocab assigns ids in sorted-qid first-appearance order") {
    ModelPredictions a, b;
    a.model_id = "a";
    b.model_id = "b";
    // Sorted traversal visits q1 then q2; within a question, model a then b.
    a.per_question["q2"] = make_list({{"zebra", 1.0}});
    a.per_question["q1"] = make_list({{"paris france", 0.9}, {"paris", 0.1}});
    b.per_question["q1"] = make_list({{"berlin", 1.0}});
    b.per_question["q2"] = make_list({{"apple", 1.0}});

    const StackConfig config = two_by_eight();
    const Tokenizer tok = build_vocab({a, b}, config);
    CHECK(tok.num_slots() == 16);
    CHECK(tok.word_id("paris") == 20);
    CHECK(tok.word_id("france") == 21);
    CHECK(tok.word_id("berlin") == 22);
    CHECK(tok.word_id("zebra") == 23);  // q2 visits model a before model b
    CHECK(tok.word_id("apple") == 24);

    // Same content again: identical vocabulary.
    CHECK(build_vocab({a, b}, config) == tok);
}

TEST_CASE("encode_hypothesis slot layouts") {
    Tokenizer tok(16);
    tok.add_word("paris");

    std::vector<int> expected(16, Tokenizer::kPadId);
    expected[0] = 4;   // <h1>
    expected[1] = 20;  // "paris"
    CHECK(encode_hypothesis(tok, 1, "Paris", HypothesisKind::Answer, 16, 30) == expected);

    expected = std::vector<int>(16, Tokenizer::kPadId);
    expected[0] = 5;  // <h2>
    expected[1] = Tokenizer::kNoAnswerId;
    CHECK(encode_hypothesis(tok, 2, "", HypothesisKind::NoAnswer, 16, 30) == expected);

    expected = std::vector<int>(16, Tokenizer::kPadId);
    expected[0] = 19;  // <h16>
    expected[1] = Tokenizer::kAnswerPadId;
    CHECK(encode_hypothesis(tok, 16, "", HypothesisKind::Padding, 16, 30) == expected);

    // Unknown words map to <unk>; output length is always T.
    const std::vector<int> unk = encode_hypothesis(tok, 1, "totally new", HypothesisKind::Answer,
                                                   16, 30);
    CHECK(unk[1] == Tokenizer::kUnkId);
    CHECK(unk[2] == Tokenizer::kUnkId);
    CHECK(unk.size() == 16);

    // A long answer truncates at T tokens (prefix included).
    const std::vector<int> tight = encode_hypothesis(
        tok, 1, "paris paris paris paris paris", HypothesisKind::Answer, 4, 30);
    CHECK(tight == std::vector<int>{4, 20, 20, 20});
}

TEST_CASE("target_distribution softmax values") {
    const std::vector<bool> no_flags(16, false);
    const std::vector<double> zeros(16, 0.0);
    const std::vector<double> uniform = target_distribution(zeros, false, no_flags, false);
    for (double v : uniform) CHECK(v == doctest::Approx(1.0 / 16.0).epsilon(1e-12));

    std::vector<double> one_hot(16, 0.0);
    one_hot[3] = 1.0;
    const std::vector<double> peaked = target_distribution(one_hot, false, no_flags, false);
    const double e = std::exp(1.0);
    CHECK(peaked[3] == doctest::Approx(e / (e + 15.0)).epsilon(1e-12));
    CHECK(peaked[0] == doctest::Approx(1.0 / (e + 15.0)).epsilon(1e-12));
    CHECK(std::accumulate(peaked.begin(), peaked.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("target_distribution is shift invariant") {
    const std::vector<double> scores = {0.2, 0.9, 0.0, 0.5};
    std::vector<double> shifted = scores;
    for (double& s : shifted) s += 123.0;
    const std::vector<bool> flags(4, false);
    const std::vector<double> a = target_distribution(scores, false, flags, false);
    const std::vector<double> b = target_distribution(shifted, false, flags, false);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("target_distribution biasing rewrites disagreeing slots") {
    // Answerable question: the no-answer slot (index 1) drops to score -1.
    const std::vector<double> f1s = {1.0, 1.0, 0.0};
    const std::vector<bool> na_flags = {false, true, false};
    const std::vector<double> y = target_distribution(f1s, true, na_flags, false);
    const std::vector<double> manual = target_distribution({1.0, -1.0, 0.0}, false,
                                                           {false, false, false}, false);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == doctest::Approx(manual[i]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(target_distribution({}, false, {}, false), ValidationError);
    CHECK_THROWS_AS(target_distribution({1.0}, true, {}, false), ValidationError);
}

TEST_CASE("build_example interleaves models by rank") {
    StackConfig config = two_by_eight();
    config.tokens_per_hypothesis = 4;
    std::vector<std::pair<std::string, double>> a_entries, b_entries;
    for (int r = 1; r <= 8; ++r) {
        a_entries.push_back({"a" + std::to_string(r), 1.0 - 0.1 * r});
        b_entries.push_back({"b" + std::to_string(r), 1.0 - 0.1 * r});
    }
    const NBestList a = make_list(std::move(a_entries));
    const NBestList b = make_list(std::move(b_entries));
    ModelPredictions pa, pb;
    pa.model_id = "a";
    pb.model_id = "b";
    pa.per_question["q"] = a;
    pb.per_question["q"] = b;
    const Tokenizer tok = build_vocab({pa, pb}, config);
    const GroundTruth truth{{"a1"}, false};

    const StackExample ex = build_example("q", {&a, &b}, &truth, tok, config, false);
    REQUIRE(ex.surfaces.size() == 16);
    for (int i = 0; i < 16; ++i) {
        const std::string expect =
            (i % 2 == 0 ? "a" : "b") + std::to_string(i / 2 + 1);
        CHECK(ex.surfaces[static_cast<std::size_t>(i)] == expect);
    }
    CHECK(ex.x.size() == 16u * 4u);
    // Each slot opens with its reserved prefix id.
    for (int i = 0; i < 16; ++i) CHECK(ex.x[static_cast<std::size_t>(i) * 4] == 4 + i);
    REQUIRE(ex.f1s.has_value());
    CHECK((*ex.f1s)[0] == doctest::Approx(1.0));  // a1 matches the gold answer
    CHECK((*ex.f1s)[1] == doctest::Approx(0.0));
    REQUIRE(ex.y.has_value());
    CHECK(std::accumulate(ex.y->begin(), ex.y->end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_FALSE(ex.has_padding());
}

TEST_CASE("short model lists pad the tail slots of that model") {
    StackConfig config = two_by_eight();
    config.tokens_per_hypothesis = 4;
    std::vector<std::pair<std::string, double>> a_entries, b_entries;
    for (int r = 1; r <= 8; ++r) a_entries.push_back({"a" + std::to_string(r), 0.9 - 0.1 * r});
    for (int r = 1; r <= 5; ++r) b_entries.push_back({"b" + std::to_string(r), 0.9 - 0.1 * r});
    const NBestList a = make_list(std::move(a_entries));
    const NBestList b = make_list(std::move(b_entries));
    Tokenizer tok(16);
    const GroundTruth truth{{"a1"}, false};

    const StackExample ex = build_example("q", {&a, &b}, &truth, tok, config, false);
    CHECK(ex.has_padding());
    // Model b fills slots 1,3,...,15; its missing ranks 6..8 land at 11,13,15.
    for (int slot : {11, 13, 15}) {
        CHECK(ex.pad_flags[static_cast<std::size_t>(slot)]);
        CHECK(ex.surfaces[static_cast<std::size_t>(slot)].empty());
        CHECK(ex.x[static_cast<std::size_t>(slot) * 4 + 1] == Tokenizer::kAnswerPadId);
    }
    for (int slot : {0, 1, 9, 10, 12, 14}) {
        CHECK_FALSE(ex.pad_flags[static_cast<std::size_t>(slot)]);
    }
    CHECK((*ex.f1s)[11] == doctest::Approx(0.0));
}

TEST_CASE("biased examples score disagreeing slots -1 including pads") {
    StackConfig config;
    config.models = {"a"};
    config.n_per_model = 4;
    config.tokens_per_hypothesis = 4;
    const NBestList a = make_list({{"guess", 0.6}, {"", 0.4}});
    Tokenizer tok(4);
    const GroundTruth unanswerable{{}, true};

    const StackExample ex = build_example("q", {&a}, &unanswerable, tok, config, true);
    REQUIRE(ex.f1s.has_value());
    // Slot 0: answer on an unanswerable question -> -1. Slot 1: <na> agrees -> f1 1.
    CHECK((*ex.f1s)[0] == doctest::Approx(-1.0));
    CHECK((*ex.f1s)[1] == doctest::Approx(1.0));
    // Slots 2,3 are padding (na_flag false) and disagree too.
    CHECK((*ex.f1s)[2] == doctest::Approx(-1.0));
    CHECK((*ex.f1s)[3] == doctest::Approx(-1.0));
    // y is the softmax of exactly the stored adjusted scores.
    const std::vector<double> manual =
        target_distribution(*ex.f1s, false, ex.na_flags, true);
    for (std::size_t i = 0; i < manual.size(); ++i) {
        CHECK((*ex.y)[i] == doctest::Approx(manual[i]).epsilon(1e-12));
    }
}

TEST_CASE("test-split examples carry no targets") {
    StackConfig config;
    config.models = {"a"};
    config.n_per_model = 2;
    config.tokens_per_hypothesis = 4;
    const NBestList a = make_list({{"x", 0.7}, {"y", 0.3}});
    Tokenizer tok(2);
    const StackExample ex = build_example("q", {&a}, nullptr, tok, config, false);
    CHECK_FALSE(ex.y.has_value());
    CHECK_FALSE(ex.f1s.has_value());
    CHECK(ex.surfaces[0] == "x");
}

TEST_CASE("padding_stats counts examples with any padded slot") {
    StackExample padded, full;
    padded.pad_flags = {false, true};
    full.pad_flags = {false, false};
    CHECK(padding_stats({padded, full, full, full}) == doctest::Approx(0.25));
    CHECK(padding_stats({}) == doctest::Approx(0.0));
}

TEST_CASE("stack dataset JSONL round trip") {
    StackConfig config;
    config.models = {"a", "b"};
    config.n_per_model = 2;
    config.tokens_per_hypothesis = 4;
    const NBestList a = make_list({{"alpha beta", 0.8}, {"gamma", 0.2}});
    const NBestList b = make_list({{"alpha", 1.0}});
    ModelPredictions pa, pb;
    pa.model_id = "a";
    pb.model_id = "b";
    pa.per_question["q1"] = a;
    pb.per_question["q1"] = b;
    const Tokenizer tok = build_vocab({pa, pb}, config);
    const GroundTruth truth{{"alpha beta"}, false};

    std::vector<StackExample> examples;
    examples.push_back(build_example("q1", {&a, &b}, &truth, tok, config, false));
    examples.push_back(build_example("q1", {&a, &b}, nullptr, tok, config, false));

    const fs::path path = fs::temp_directory_path() /
                          ("stackqa_stack_" + std::to_string(::getpid()) + ".jsonl");
    write_stack_dataset(path.string(), examples);
    const std::vector<StackExample> loaded = read_stack_dataset(path.string());
    REQUIRE(loaded.size() == examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        CHECK(examples_equal(loaded[i], examples[i]));
    }

    // Byte-identical rewrite.
    const fs::path again = fs::temp_directory_path() /
                           ("stackqa_stack2_" + std::to_string(::getpid()) + ".jsonl");
    write_stack_dataset(again.string(), loaded);
    std::ifstream f1(path, std::ios::binary), f2(again, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    fs::remove(path);
    fs::remove(again);
}

TEST_CASE("stack dataset read errors carry the line number") {
    const fs::path path = fs::temp_directory_path() /
                          ("stackqa_badline_" + std::to_string(::getpid()) + ".jsonl");
    {
        std::ofstream out(path);
        out << R"({"qid":"q1","x":[4,0],"surfaces":[""],"na_flags":[false],"pad_flags":[true]})"
            << '\n';
        out << R"({"qid":"q2","x":[4,0],"surfaces":[""],"na_flags":[false],"pad_flags":[true]})"
            << '\n';
        out << "{ broken\n";
    }
    CHECK_THROWS_WITH_AS(read_stack_dataset(path.string()), doctest::Contains("line 3"),
                         ValidationError);
    fs::remove(path);

    {
        std::ofstream out(path);
        out << R"({"qid":"q1","x":[4,0,5],"surfaces":["", ""],"na_flags":[false,false],"pad_flags":[true,true]})"
            << '\n';
    }
    // x length 3 is not divisible by 2 slots.
    CHECK_THROWS_WITH_AS(read_stack_dataset(path.string()), doctest::Contains("line 1"),
                         ValidationError);
    fs::remove(path);
}
