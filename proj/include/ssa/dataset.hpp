#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssa/core_types.hpp"
#include "ssa/extraction.hpp"
#include "ssa/prompts.hpp"

namespace ssa {

struct InstanceFilterConfig {
    std::uint64_t max_total_tokens = 4000;
    int min_valid_answers = 3;
    int max_null_answers = 1;
};

struct FilterReport {
    std::size_t input_count = 0;
    std::size_t kept = 0;
    std::map<std::string, std::size_t> dropped_by_rule;  // "validity" | "length"
    // correctness histogram over kept instances: index m = exactly m of K correct
    std::vector<std::size_t> correctness_histogram;

    std::size_t dropped_total() const;
};

// A candidate is "null" when its generation is empty or no answer parses.
bool is_null_candidate(const Candidate& cand);

// Validity filter then length filter, per-instance candidate shuffle (seeded,
// recorded in order_seed). Instances must carry gold answers for the
// correctness histogram.
std::vector<SampleSet> build_instances(const std::vector<SampleSet>& samples,
                                       const InstanceFilterConfig& cfg, std::uint64_t seed,
                                       FilterReport& report);

// Removes the final ceil(fraction * token_count) tokens and re-runs
// extraction on what remains.
Candidate truncate_tail(const Candidate& cand, double fraction, ExtractionFormat format);

// Renders the oracle-data construction prompt (gold inside answer tags) for
// each instance. Instances without gold are skipped.
std::vector<BuiltPrompt> build_sft_oracle_requests(const std::vector<SampleSet>& instances);

struct OracleAudit {
    std::size_t total = 0;
    std::size_t matched = 0;  // oracle output's answer equivalent to gold
    double match_rate() const { return total ? 100.0 * matched / total : 0.0; }
};

// Share of oracle completions whose extracted answer equals gold.
OracleAudit audit_oracle_outputs(const std::vector<SampleSet>& instances,
                                 const std::vector<std::string>& completions);

// Fresh per-instance candidate permutations; candidate contents preserved.
std::vector<SampleSet> permute_instances(const std::vector<SampleSet>& instances,
                                         std::uint64_t seed);

}  // namespace ssa
