#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Shared data model for the sampling/aggregation pipeline.
//
// Answer strings that have passed through normalize_answer() are called
// "normalized" throughout; all equivalence checks assume that form.

namespace ssa {

struct Question {
    std::string id;
    std::string text;
    std::optional<std::string> gold_answer;  // normalized
    std::string source;                      // dataset tag, e.g. "gsm8k"
};

struct Candidate {
    std::string text;
    std::optional<std::string> extracted_answer;  // normalized
    bool is_valid = false;                        // extraction succeeded
    std::uint64_t token_count = 0;

    bool consistent() const { return is_valid == extracted_answer.has_value(); }
};

// Ordered set of K candidates for one question. order_seed records the
// permutation applied when the candidates were (re)ordered; 0 = as sampled.
struct SampleSet {
    Question question;
    std::vector<Candidate> candidates;
    std::uint64_t order_seed = 0;
};

enum class Strategy {
    majority,
    scorer_rerank,
    ssa,
    ssa_two_stage,
    usc,
    ssa_nothink,
};

enum class Provenance { copied, synthesized, none };

struct AggregateDecision {
    Strategy strategy = Strategy::majority;
    std::optional<std::string> final_answer;  // normalized
    std::optional<std::size_t> chosen_index;
    std::string raw_output;
    Provenance provenance = Provenance::none;
};

struct GrpoConfig {
    int group_size = 8;
    double clip_epsilon = 0.2;
    double kl_coefficient = 0.01;
    double learning_rate = 1e-5;
    double advantage_std_floor = 1e-8;
};

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);
std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view name);

// Canonicalizes an extracted answer string:
//   - trims whitespace, strips surrounding LaTeX/markup ($...$, \boxed{...},
//     \text{...}, trailing "." and "\\"), removes thousands separators
//   - exact rationals are reduced: "3/6" -> "1/2", "0.50" -> "1/2",
//     integers lose leading zeros and trailing ".0"
//   - non-numeric answers are case-folded and whitespace-collapsed
// Total and idempotent; never throws.
std::string normalize_answer(std::string_view raw);

// Equality on normalized answers. Exact-rational comparison for numeric
// forms, string equality otherwise. No floating-point epsilon.
bool answers_equivalent(std::string_view a, std::string_view b);

// Declared approximate tokenization rule used everywhere a token count is
// needed: a token is a maximal run of alphanumeric characters, or a single
// non-space, non-alphanumeric character.
std::uint64_t count_tokens(std::string_view text);

// Byte offsets of token starts under the same rule (for tail truncation).
std::vector<std::size_t> token_starts(std::string_view text);

}  // namespace ssa
