#include "ssa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssa {
namespace {

std::uint64_t instance_seed(std::uint64_t seed, const std::string& question_id) {
    std::uint64_t h = seed;
    for (unsigned char c : question_id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

SampleSet permuted(const SampleSet& set, std::uint64_t seed) {
    SampleSet out;
    out.question = set.question;
    out.order_seed = seed;
    auto order = shuffled_indices(set.candidates.size(), seed);
    out.candidates.reserve(order.size());
    for (std::size_t idx : order) out.candidates.push_back(set.candidates[idx]);
    return out;
}

std::size_t correct_count(const SampleSet& set) {
    std::size_t n = 0;
    for (const auto& cand : set.candidates)
        if (cand.is_valid && set.question.gold_answer &&
            answers_equivalent(*cand.extracted_answer, *set.question.gold_answer))
            ++n;
    return n;
}

}  // namespace

std::size_t FilterReport::dropped_total() const {
    std::size_t n = 0;
    for (const auto& [rule, count] : dropped_by_rule) n += count;
    return n;
}

bool is_null_candidate(const Candidate& cand) {
    return cand.text.empty() || !cand.extracted_answer.has_value();
}

std::vector<SampleSet> build_instances(const std::vector<SampleSet>& samples,
                                       const InstanceFilterConfig& cfg, std::uint64_t seed,
                                       FilterReport& report) {
    report = FilterReport{};
    report.input_count = samples.size();

    std::size_t max_k = 0;
    for (const auto& set : samples) max_k = std::max(max_k, set.candidates.size());
    report.correctness_histogram.assign(max_k + 1, 0);

    std::vector<SampleSet> kept;
    for (const auto& set : samples) {
        int nulls = 0, valid = 0;
        std::uint64_t total_tokens = count_tokens(set.question.text);
        for (const auto& cand : set.candidates) {
            if (is_null_candidate(cand)) ++nulls;
            if (cand.is_valid) ++valid;
            total_tokens += cand.token_count;
        }
        // validity filter first, then length: drop attribution depends on it
        if (nulls > cfg.max_null_answers || valid < cfg.min_valid_answers) {
            ++report.dropped_by_rule["validity"];
            continue;
        }
        if (total_tokens > cfg.max_total_tokens) {
            ++report.dropped_by_rule["length"];
            continue;
        }
        ++report.kept;
        ++report.correctness_histogram[correct_count(set)];
        kept.push_back(permuted(set, instance_seed(seed, set.question.id)));
    }
    return kept;
}

Candidate truncate_tail(const Candidate& cand, double fraction, ExtractionFormat format) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw std::invalid_argument("truncation fraction must be in (0, 1)");
    auto starts = token_starts(cand.text);
    auto removed = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(starts.size())));

    Candidate out;
    if (removed >= starts.size()) {
        out.text.clear();
    } else {
        // cut at the start of the first removed token
        out.text = cand.text.substr(0, starts[starts.size() - removed]);
        while (!out.text.empty() && std::isspace(static_cast<unsigned char>(out.text.back())))
            out.text.pop_back();
    }
    out.token_count = count_tokens(out.text);
    if (auto ext = extract_answer(out.text, format)) {
        out.extracted_answer = normalize_answer(ext->answer);
        out.is_valid = true;
    }
    return out;
}

std::vector<BuiltPrompt> build_sft_oracle_requests(const std::vector<SampleSet>& instances) {
    PromptTemplate tmpl = default_template(PromptKind::sft_oracle);
    std::vector<BuiltPrompt> prompts;
    prompts.reserve(instances.size());
    for (const auto& set : instances) {
        if (!set.question.gold_answer) continue;
        prompts.push_back(build_prompt(tmpl, set.question, set, 0, *set.question.gold_answer));
    }
    return prompts;
}

OracleAudit audit_oracle_outputs(const std::vector<SampleSet>& instances,
                                 const std::vector<std::string>& completions) {
    OracleAudit audit;
    std::size_t n = std::min(instances.size(), completions.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!instances[i].question.gold_answer) continue;
        ++audit.total;
        auto ext = extract_answer(completions[i], ExtractionFormat::think_answer_tags);
        if (ext && answers_equivalent(normalize_answer(ext->answer),
                                      *instances[i].question.gold_answer))
            ++audit.matched;
    }
    return audit;
}

std::vector<SampleSet> permute_instances(const std::vector<SampleSet>& instances,
                                         std::uint64_t seed) {
    std::vector<SampleSet> out;
    out.reserve(instances.size());
    for (const auto& set : instances)
        out.push_back(permuted(set, instance_seed(seed, set.question.id)));
    return out;
}

}  // namespace ssa
