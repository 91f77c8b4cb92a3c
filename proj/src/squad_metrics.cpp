#include "stackqa/squad_metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <unordered_map>

#include "stackqa/errors.hpp"

namespace stackqa {

namespace {

// Minimal UTF-8 decoder. Invalid sequences are passed through byte by byte so
// normalization stays total.
uint32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return b0;  // stray continuation byte
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
        ++i;
        return b0;  // truncated sequence
    }
    for (int k = 1; k <= extra; ++k) {
        const unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    i += extra + 1;
    return cp;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

uint32_t to_lower_cp(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    // Latin-1 supplement capitals, skipping the multiplication sign.
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 32;
    return cp;
}

bool is_punct_cp(uint32_t cp) {
    if (cp < 0x80) {
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') || (cp >= '[' && cp <= '`') ||
               (cp >= '{' && cp <= '~');
    }
    switch (cp) {
        case 0x00A1:  // inverted exclamation
        case 0x00A7:  // section sign
        case 0x00AB:  // left guillemet
        case 0x00B6:  // pilcrow
        case 0x00B7:  // middle dot
        case 0x00BB:  // right guillemet
        case 0x00BF:  // inverted question
            return true;
        default:
            break;
    }
    if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, curly quotes, ellipsis
    if (cp >= 0x2030 && cp <= 0x205E) return true;  // primes, single guillemets
    if (cp >= 0x3001 && cp <= 0x303F) return true;  // CJK punctuation
    return false;
}

bool is_space_cp(uint32_t cp) {
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' || cp == '\f') return true;
    if (cp == 0x00A0 || cp == 0x1680) return true;
    if (cp >= 0x2000 && cp <= 0x200A) return true;
    if (cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000) return true;
    return false;
}

bool is_article(const std::string& token) {
    return token == "a" || token == "an" || token == "the";
}

struct PerQuestion {
    double em = 0.0;
    double f1 = 0.0;
    bool na_correct = false;
};

}  // namespace

std::string normalize_answer(const std::string& text) {
    std::string stripped;
    stripped.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = decode_utf8(text, i);
        if (is_punct_cp(cp)) continue;
        if (is_space_cp(cp)) {
            stripped.push_back(' ');
            continue;
        }
        append_utf8(stripped, to_lower_cp(cp));
    }

    std::string out;
    out.reserve(stripped.size());
    std::istringstream words(stripped);
    std::string token;
    while (words >> token) {
        if (is_article(token)) continue;
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

std::vector<std::string> answer_tokens(const std::string& normalized) {
    std::vector<std::string> tokens;
    std::istringstream in(normalized);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

double exact_match(const std::string& prediction, const std::vector<std::string>& truths) {
    const std::string norm_pred = normalize_answer(prediction);
    for (const auto& truth : truths) {
        if (norm_pred == normalize_answer(truth)) return 1.0;
    }
    return 0.0;
}

double f1_score(const std::string& prediction, const std::vector<std::string>& truths) {
    const std::string norm_pred = normalize_answer(prediction);
    const std::vector<std::string> pred_tokens = answer_tokens(norm_pred);
    double best = 0.0;
    for (const auto& truth : truths) {
        const std::string norm_truth = normalize_answer(truth);
        if (norm_pred.empty() || norm_truth.empty()) {
            best = std::max(best, norm_pred == norm_truth ? 1.0 : 0.0);
            continue;
        }
        const std::vector<std::string> truth_tokens = answer_tokens(norm_truth);
        std::unordered_map<std::string, int> counts;
        for (const auto& t : truth_tokens) ++counts[t];
        int overlap = 0;
        for (const auto& t : pred_tokens) {
            auto it = counts.find(t);
            if (it != counts.end() && it->second > 0) {
                --it->second;
                ++overlap;
            }
        }
        if (overlap == 0) continue;
        const double precision = static_cast<double>(overlap) / pred_tokens.size();
        const double recall = static_cast<double>(overlap) / truth_tokens.size();
        best = std::max(best, 2.0 * precision * recall / (precision + recall));
    }
    return best;
}

EvalReport evaluate(const std::map<std::string, std::string>& answers, const Dataset& dataset) {
    std::vector<std::string> missing;
    for (const auto& [qid, _] : dataset.per_question) {
        if (!answers.count(qid)) {
            missing.push_back(qid);
            if (missing.size() >= 10) break;
        }
    }
    if (!missing.empty()) {
        std::string msg = "answers missing for dataset question(s):";
        for (const auto& qid : missing) msg += " " + qid;
        throw ValidationError(msg);
    }

    EvalReport report;
    double em_sum = 0.0, f1_sum = 0.0, na_sum = 0.0;
    for (const auto& [qid, truth] : dataset.per_question) {
        const std::string& answer = answers.at(qid);
        const auto truths = truth.scoring_truths();
        QuestionScore qs;
        qs.em = exact_match(answer, truths);
        qs.f1 = f1_score(answer, truths);
        const bool predicted_empty = normalize_answer(answer).empty();
        const bool na_correct = predicted_empty == truth.is_impossible;
        em_sum += qs.em;
        f1_sum += qs.f1;
        na_sum += na_correct ? 1.0 : 0.0;
        report.per_question.emplace(qid, qs);
    }
    report.count = static_cast<int>(dataset.per_question.size());
    if (report.count > 0) {
        report.em = 100.0 * em_sum / report.count;
        report.f1 = 100.0 * f1_sum / report.count;
        report.na_accuracy = 100.0 * na_sum / report.count;
    }
    return report;
}

namespace {

// Best-of-prefix scores for one question against one pooled bag of hypotheses.
PerQuestion best_of(const std::vector<const Hypothesis*>& bag, const GroundTruth& truth) {
    PerQuestion best;
    const auto truths = truth.scoring_truths();
    for (const Hypothesis* hyp : bag) {
        best.em = std::max(best.em, exact_match(hyp->text, truths));
        best.f1 = std::max(best.f1, f1_score(hyp->text, truths));
        const bool predicted_empty = normalize_answer(hyp->text).empty();
        if (predicted_empty == truth.is_impossible) best.na_correct = true;
    }
    return best;
}

const NBestList& list_for(const ModelPredictions& preds, const std::string& qid) {
    auto it = preds.per_question.find(qid);
    if (it == preds.per_question.end()) {
        throw ValidationError("model '" + preds.model_id + "' has no predictions for question '" +
                              qid + "'");
    }
    return it->second;
}

}  // namespace

TopNReport topn_eval(const ModelPredictions& preds, const Dataset& dataset,
                     const std::vector<int>& ns) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw ValidationError("top-N values must be >= 1");
        if (i > 0 && ns[i] < ns[i - 1]) throw ValidationError("top-N values must be ascending");
    }
    TopNReport report;
    const int count = static_cast<int>(dataset.per_question.size());
    for (int n : ns) {
        TopNScores agg;
        for (const auto& [qid, truth] : dataset.per_question) {
            const NBestList& list = list_for(preds, qid);
            std::vector<const Hypothesis*> bag;
            const int take = std::min<int>(n, static_cast<int>(list.size()));
            for (int i = 0; i < take; ++i) bag.push_back(&list[i]);
            const PerQuestion best = best_of(bag, truth);
            agg.em += best.em;
            agg.f1 += best.f1;
            agg.na_accuracy += best.na_correct ? 1.0 : 0.0;
        }
        if (count > 0) {
            agg.em = 100.0 * agg.em / count;
            agg.f1 = 100.0 * agg.f1 / count;
            agg.na_accuracy = 100.0 * agg.na_accuracy / count;
        }
        report.per_n[n] = agg;
    }
    return report;
}

EvalReport oracle_eval(const std::vector<ModelPredictions>& preds, int n, const Dataset& dataset) {
    if (n < 1) throw ValidationError("oracle n must be >= 1");
    EvalReport report;
    double em_sum = 0.0, f1_sum = 0.0, na_sum = 0.0;
    for (const auto& [qid, truth] : dataset.per_question) {
        std::vector<const Hypothesis*> bag;
        for (const auto& model : preds) {
            const NBestList& list = list_for(model, qid);
            const int take = std::min<int>(n, static_cast<int>(list.size()));
            for (int i = 0; i < take; ++i) bag.push_back(&list[i]);
        }
        const PerQuestion best = best_of(bag, truth);
        em_sum += best.em;
        f1_sum += best.f1;
        na_sum += best.na_correct ? 1.0 : 0.0;
        report.per_question.emplace(qid, QuestionScore{best.em, best.f1});
    }
    report.count = static_cast<int>(dataset.per_question.size());
    if (report.count > 0) {
        report.em = 100.0 * em_sum / report.count;
        report.f1 = 100.0 * f1_sum / report.count;
        report.na_accuracy = 100.0 * na_sum / report.count;
    }
    return report;
}

}  // namespace stackqa
