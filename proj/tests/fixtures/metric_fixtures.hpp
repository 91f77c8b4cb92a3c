#pragma once

#include <string>
#include <vector>

namespace stackqa::testing {

struct MetricFixture {
    const char* label;
    std::string prediction;
    std::vector<std::string> truths;  // empty = unanswerable (scored as {""})
    double em;
    double f1;
};

// Every score below is hand-derived from the normalization + token-F1 rules.
// F1 fractions: 2pr/(p+r) with multiset token overlap.
inline const std::vector<MetricFixture>& metric_fixtures() {
    static const std::vector<MetricFixture> fixtures = {
        {"identical", "Paris", {"Paris"}, 1.0, 1.0},
        {"case-folding", "paris", {"PARIS"}, 1.0, 1.0},
        {"leading-article", "the Paris", {"Paris"}, 1.0, 1.0},
        {"extra-token", "Paris, France", {"Paris"}, 0.0, 2.0 / 3.0},
        // overlap 1 of pred 1 / truth 4 tokens: p=1, r=1/4, f1=0.4
        {"perez", "Pérez", {"Enrique Pérez de Guzmán"}, 0.0, 0.4},
        {"both-empty", "", {}, 1.0, 1.0},
        {"empty-pred-vs-answer", "", {"Paris"}, 0.0, 0.0},
        {"answer-vs-unanswerable", "Paris", {}, 0.0, 0.0},
        {"articles-only-pred", "a an the", {}, 1.0, 1.0},
        {"punct-only-pred", "!!!", {}, 1.0, 1.0},
        {"apostrophe-article", "The King's Speech!", {"king's speech"}, 1.0, 1.0},
        // overlap 2: p=2/3, r=2/3
        {"partial-overlap", "one two three", {"two three four"}, 0.0, 2.0 / 3.0},
        // multiset: second "two" unmatched, p=1/2, r=1
        {"multiset-pred-dup", "two two", {"two"}, 0.0, 2.0 / 3.0},
        // p=1, r=1/2
        {"multiset-truth-dup", "two", {"two two"}, 0.0, 2.0 / 3.0},
        {"best-of-truths-em", "Paris", {"London", "Paris"}, 1.0, 1.0},
        // vs "london": 2/3; vs "paris city": 1/2; max rules
        {"best-of-truths-f1", "london paris", {"London", "Paris city"}, 0.0, 2.0 / 3.0},
        {"digits", "42", {"42"}, 1.0, 1.0},
        {"dotted-abbrev", "US", {"U.S."}, 1.0, 1.0},
        {"whitespace-collapse", "  spaced   out  ", {"spaced out"}, 1.0, 1.0},
        {"hyphen-removal", "hyphen-ated", {"hyphenated"}, 1.0, 1.0},
        {"accents-kept", "naïve approach", {"naïve approach"}, 1.0, 1.0},
        {"latin1-case", "École", {"école"}, 1.0, 1.0},
        {"accents-not-folded", "résumé", {"resume"}, 0.0, 0.0},
        // "el" is not an English article: p=1/3, r=1, f1=1/2
        {"el-kept", "El Niño event", {"Niño"}, 0.0, 0.5},
        {"curly-quotes", "“quoted”", {"quoted"}, 1.0, 1.0},
        {"ascii-apostrophe", "don't", {"dont"}, 1.0, 1.0},
        {"article-an", "an apple", {"apple"}, 1.0, 1.0},
        {"article-normalizes-empty", "A", {"a"}, 1.0, 1.0},
        // overlap 2: p=1, r=1/3
        {"long-truth", "three four", {"one two three four five six"}, 0.0, 0.5},
        {"multiplication-sign-kept", "3 × 4", {"3 × 4"}, 1.0, 1.0},
    };
    return fixtures;
}

}  // namespace stackqa::testing
