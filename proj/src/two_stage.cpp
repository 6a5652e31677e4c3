#include "ssa/two_stage.hpp"

#include <numeric>

#include "ssa/extraction.hpp"

namespace ssa {

std::pair<int, int> TwoStagePlan::replication_factor() const {
    if (direct()) return {1, 1};
    int num = l1 * l2, den = k;
    int g = std::gcd(num, den);
    return {num / g, den / g};
}

std::vector<int> TwoStagePlan::group(int i) const {
    std::vector<int> indices(l1);
    for (int t = 0; t < l1; ++t)
        indices[t] = (start_indices[i] + t) % k;
    return indices;
}

TwoStagePlan plan_groups(int k, int l1) {
    TwoStagePlan plan;
    plan.k = k;
    plan.l1 = l1;
    if (k <= l1) return plan;  // direct single call
    plan.l2 = (k + l1 - 1) / l1;
    plan.start_indices.resize(plan.l2);
    for (int i = 0; i < plan.l2; ++i)
        plan.start_indices[i] = static_cast<int>(static_cast<long long>(i) * k / plan.l2);
    return plan;
}

namespace {

std::uint64_t stage_seed(std::uint64_t seed, int i) {
    return seed == 0 ? 0 : seed * 0x100000001b3ull + static_cast<std::uint64_t>(i) + 1;
}

std::optional<std::size_t> match_original(const SampleSet& set, const std::string& answer) {
    for (std::size_t i = 0; i < set.candidates.size(); ++i)
        if (set.candidates[i].is_valid &&
            answers_equivalent(*set.candidates[i].extracted_answer, answer))
            return i;
    return std::nullopt;
}

Candidate winner_candidate(std::string text, ExtractionFormat format) {
    Candidate cand;
    cand.text = std::move(text);
    cand.token_count = count_tokens(cand.text);
    auto ext = extract_answer(cand.text, format);
    if (!ext) ext = extract_answer(cand.text, ExtractionFormat::answer_tags);
    if (ext) {
        cand.extracted_answer = normalize_answer(ext->answer);
        cand.is_valid = true;
    }
    return cand;
}

}  // namespace

TwoStageResult run_two_stage(const SampleSet& set, Gateway& gateway, const PromptTemplate& tmpl,
                             const TwoStagePlan& plan, std::uint64_t seed,
                             const SamplingParams& params) {
    TwoStageResult result;

    if (plan.direct()) {
        result.decision = ssa_aggregate(set, gateway, tmpl, seed, params);
        result.decision.strategy = Strategy::ssa_two_stage;
        result.ssa_calls = 1;
        return result;
    }

    ExtractionFormat format = format_for(tmpl.kind);
    SampleSet stage2;
    stage2.question = set.question;

    bool any_decision = false;
    for (int i = 0; i < plan.l2; ++i) {
        SampleSet group_set;
        group_set.question = set.question;
        for (int idx : plan.group(i)) group_set.candidates.push_back(set.candidates[idx]);

        AggregateDecision stage1 = ssa_aggregate(group_set, gateway, tmpl, stage_seed(seed, i), params);
        ++result.ssa_calls;

        std::string winner_text;
        if (stage1.final_answer && stage1.chosen_index) {
            // MapBack: the chosen candidate's full solution text.
            winner_text = set.candidates[plan.group(i)[*stage1.chosen_index]].text;
            any_decision = true;
        } else if (stage1.final_answer) {
            // synthesized winner: no candidate to map back to, pass the raw output
            winner_text = stage1.raw_output;
            any_decision = true;
        } else {
            winner_text = "no answer";
        }
        stage2.candidates.push_back(winner_candidate(std::move(winner_text), format));
        result.stage1.push_back(std::move(stage1));
    }

    if (!any_decision) {
        result.decision.strategy = Strategy::ssa_two_stage;
        return result;  // all groups failed: no decision, no stage-2 call
    }

    result.decision = ssa_aggregate(stage2, gateway, tmpl, stage_seed(seed, plan.l2), params);
    ++result.ssa_calls;
    result.decision.strategy = Strategy::ssa_two_stage;

    // Re-resolve provenance against the original candidate set.
    if (result.decision.final_answer) {
        if (auto idx = match_original(set, *result.decision.final_answer)) {
            result.decision.chosen_index = idx;
            result.decision.provenance = Provenance::copied;
        } else {
            result.decision.chosen_index.reset();
            result.decision.provenance = Provenance::synthesized;
        }
    }
    return result;
}

}  // namespace ssa
