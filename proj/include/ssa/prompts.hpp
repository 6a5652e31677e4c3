#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssa/core_types.hpp"
#include "ssa/extraction.hpp"

namespace ssa {

enum class PromptKind { ssa, ssa_nothink, usc, sft_oracle };

struct PromptTemplate {
    PromptKind kind = PromptKind::ssa;
    // Placeholders: {question}, {answers}, always; {gold} for sft_oracle.
    std::string body;
};

PromptTemplate default_template(PromptKind kind);

// The extraction format each template's output contract implies.
ExtractionFormat format_for(PromptKind kind);

struct BuiltPrompt {
    std::string text;
    // order[label - 1] = original candidate index shown as "Answer <label>".
    std::vector<std::size_t> order;
    std::uint64_t shuffle_seed = 0;
};

// Renders the template with the question and the candidates concatenated as
// "Answer 1: ..." blocks after a seed-driven permutation (seed 0 keeps the
// original order). Byte-deterministic given (inputs, seed).
BuiltPrompt build_prompt(const PromptTemplate& tmpl, const Question& question,
                         const SampleSet& set, std::uint64_t shuffle_seed,
                         std::string_view gold = "");

// Permutation of {0..n-1} used by build_prompt; exposed for audits.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace ssa
