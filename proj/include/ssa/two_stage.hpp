#pragma once

#include <cstdint>
#include <vector>

#include "ssa/aggregation.hpp"
#include "ssa/core_types.hpp"

namespace ssa {

// Hierarchical aggregation plan for large K: l2 cyclic, overlap-allowed
// windows of length l1 with evenly spaced starts. l2 == 0 is the degenerate
// plan (K <= l1, a single direct aggregator call).
struct TwoStagePlan {
    int k = 0;
    int l1 = 15;
    int l2 = 0;
    std::vector<int> start_indices;

    bool direct() const { return l2 == 0; }
    // (l1 * l2) / k as an exact fraction; 1/1 for the direct plan.
    std::pair<int, int> replication_factor() const;
    // Group i as candidate indices, wrapping modulo k.
    std::vector<int> group(int i) const;
};

TwoStagePlan plan_groups(int k, int l1);

struct TwoStageResult {
    AggregateDecision decision;
    int ssa_calls = 0;
    std::vector<AggregateDecision> stage1;  // empty for a direct plan
};

// Stage 1 aggregates every group independently; each winner maps back to the
// chosen candidate's full text (synthesized winners fall back to the raw
// aggregator output). Stage 2 aggregates the winner texts once.
TwoStageResult run_two_stage(const SampleSet& set, Gateway& gateway, const PromptTemplate& tmpl,
                             const TwoStagePlan& plan, std::uint64_t seed,
                             const SamplingParams& params = {1.0, 1024, 1});

}  // namespace ssa
