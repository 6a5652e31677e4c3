#include "ssa/aggregation.hpp"

#include <algorithm>

#include "ssa/extraction.hpp"

namespace ssa {
namespace {

// Lowest candidate index whose extracted answer is equivalent to `answer`.
std::optional<std::size_t> matching_candidate(const SampleSet& set, const std::string& answer) {
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& cand = set.candidates[i];
        if (cand.is_valid && answers_equivalent(*cand.extracted_answer, answer)) return i;
    }
    return std::nullopt;
}

}  // namespace

Strategy strategy_for(PromptKind kind) {
    switch (kind) {
        case PromptKind::ssa: return Strategy::ssa;
        case PromptKind::ssa_nothink: return Strategy::ssa_nothink;
        case PromptKind::usc: return Strategy::usc;
        case PromptKind::sft_oracle: return Strategy::ssa;
    }
    return Strategy::ssa;
}

AggregateDecision majority_vote(const SampleSet& set) {
    AggregateDecision decision;
    decision.strategy = Strategy::majority;

    // Equivalence classes keyed by the first index seen with that answer.
    std::vector<std::pair<std::size_t, std::size_t>> classes;  // (first index, count)
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& cand = set.candidates[i];
        if (!cand.is_valid) continue;
        bool merged = false;
        for (auto& [first, count] : classes) {
            if (answers_equivalent(*set.candidates[first].extracted_answer,
                                   *cand.extracted_answer)) {
                ++count;
                merged = true;
                break;
            }
        }
        if (!merged) classes.emplace_back(i, 1);
    }
    if (classes.empty()) return decision;  // no valid candidates: no decision

    auto best = classes.front();
    for (const auto& cls : classes)
        if (cls.second > best.second) best = cls;  // ties keep the earlier first-index

    decision.chosen_index = best.first;
    decision.final_answer = set.candidates[best.first].extracted_answer;
    decision.provenance = Provenance::copied;
    return decision;
}

AggregateDecision scorer_rerank(const SampleSet& set, const ScorerEndpoint& scorer) {
    AggregateDecision decision;
    decision.strategy = Strategy::scorer_rerank;

    std::optional<std::size_t> best_index;
    double best_score = 0.0;
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& cand = set.candidates[i];
        if (!cand.is_valid) continue;
        double score;
        try {
            if (scorer.mode == ScorerMode::outcome) {
                score = scorer.score_fn(set.question.text, cand.text);
            } else {
                score = 1.0;
                for (const auto& step : split_steps(cand.text))
                    score *= scorer.score_fn(set.question.text, step);
            }
        } catch (const std::exception&) {
            continue;  // scorer failure excludes the candidate
        }
        if (!best_index || score > best_score) {
            best_index = i;
            best_score = score;
        }
    }
    if (!best_index) return decision;

    decision.chosen_index = best_index;
    decision.final_answer = set.candidates[*best_index].extracted_answer;
    decision.provenance = Provenance::copied;
    return decision;
}

AggregateDecision ssa_aggregate(const SampleSet& set, Gateway& gateway,
                                const PromptTemplate& tmpl, std::uint64_t shuffle_seed,
                                const SamplingParams& params) {
    AggregateDecision decision;
    decision.strategy = strategy_for(tmpl.kind);

    BuiltPrompt prompt = build_prompt(tmpl, set.question, set, shuffle_seed);
    decision.raw_output = complete_checked(gateway, prompt.text, params);

    auto extracted = extract_answer(decision.raw_output, format_for(tmpl.kind));
    if (!extracted) return decision;  // no decision, raw retained

    decision.final_answer = normalize_answer(extracted->answer);
    if (auto idx = matching_candidate(set, *decision.final_answer)) {
        decision.chosen_index = idx;
        decision.provenance = Provenance::copied;
    } else {
        decision.provenance = Provenance::synthesized;
    }
    return decision;
}

}  // namespace ssa
