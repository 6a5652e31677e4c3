#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssa/core_types.hpp"
#include "ssa/gateway.hpp"

namespace ssa {

// Percentage of questions whose first k candidates contain >= 1 correct.
double pass_at_k(const std::vector<std::vector<bool>>& graded, int k);

enum class McNemarVariant { auto_select, chi_square_cc, exact_binomial };

struct McNemarResult {
    std::size_t b = 0;  // baseline-only correct
    std::size_t c = 0;  // method-only correct
    double statistic = 0.0;  // continuity-corrected chi-square; 0 for the exact path
    double p_value = 1.0;
    McNemarVariant variant_used = McNemarVariant::chi_square_cc;
};

// Paired significance over (baseline_correct, method_correct) outcomes.
// chi_square_cc: chi^2 = (|b-c|-1)^2 / (b+c), p from the chi-square(1)
// survival function. exact_binomial: two-sided sign test on the discordant
// pairs. auto_select takes the exact path when b + c < 25.
McNemarResult mcnemar(const std::vector<std::pair<bool, bool>>& outcomes,
                      McNemarVariant variant = McNemarVariant::auto_select);

// Error-taxonomy cell for one decision.
struct ErrorCell {
    bool correct = false;
    bool gold_in_candidates = false;
    Provenance provenance = Provenance::none;
    bool extraction_failed = false;  // decision had no final answer

    std::string key() const;  // e.g. "wrong/gold_absent/copied"
};

ErrorCell classify_error(const SampleSet& set, const AggregateDecision& decision,
                         std::string_view gold);

enum class FlopsMode { inference, training };

// 2*N*D for a forward pass, 6*N*D per training token.
double flops_estimate(double params, double tokens, FlopsMode mode);

// Mean aggregation-only seconds per question from strategy-tagged ledger
// records; candidate-generation records (strategy "sample") are excluded.
double overhead_per_question(const std::vector<RunLedger::Record>& records,
                             const std::string& strategy);

struct SignificanceEntry {
    std::string baseline;
    std::string method;
    double p_value = 1.0;
    bool significant = false;  // p < 0.05
    McNemarResult detail;
};

struct EvalReport {
    // strategy -> source -> accuracy %; source "Avg" holds the overall value
    std::map<std::string, std::map<std::string, double>> accuracy;
    std::map<int, double> pass_at_k_pct;
    std::vector<SignificanceEntry> significance;
    std::map<std::string, std::size_t> error_taxonomy;  // ErrorCell::key -> count
    std::map<std::string, double> overhead_seconds;     // strategy -> s/question
    std::size_t questions = 0;
    std::size_t excluded_missing_gold = 0;
    std::string mcnemar_variant = "auto_select";

    std::string to_json() const;
    // Aligned text table: strategy, overhead, per-source accuracy, Avg.
    std::string to_table(const std::vector<std::string>& source_order) const;
};

}  // namespace ssa
