#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssa/core_types.hpp"
#include "ssa/gateway.hpp"
#include "ssa/prompts.hpp"

namespace ssa {

enum class ScorerMode { outcome, process_product };

// Scores candidates either as whole responses (outcome) or as a product of
// per-step scores (process_product). score_fn abstracts the scorer endpoint:
// it receives one text segment and returns its score, or throws on failure.
struct ScorerEndpoint {
    ScorerMode mode = ScorerMode::outcome;
    std::function<double(const std::string& question, const std::string& segment)> score_fn;
};

// Most frequent answer under answers_equivalent, over valid candidates only.
// Ties go to the class whose first member has the lowest index.
AggregateDecision majority_vote(const SampleSet& set);

// Argmax of scorer output; process_product multiplies per-step scores.
// Candidates the scorer fails on are excluded.
AggregateDecision scorer_rerank(const SampleSet& set, const ScorerEndpoint& scorer);

// One aggregator call: build the prompt (invalid candidates included), run
// the completion, extract with the template's format, classify provenance by
// equivalence against the candidates' extracted answers.
AggregateDecision ssa_aggregate(const SampleSet& set, Gateway& gateway,
                                const PromptTemplate& tmpl, std::uint64_t shuffle_seed,
                                const SamplingParams& params = {1.0, 1024, 1});

Strategy strategy_for(PromptKind kind);

}  // namespace ssa
