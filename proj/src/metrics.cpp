#include "ssa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ssa {

double pass_at_k(const std::vector<std::vector<bool>>& graded, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (graded.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& outcomes : graded) {
        if (outcomes.size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("question has fewer than k graded candidates");
        for (int i = 0; i < k; ++i)
            if (outcomes[i]) {
                ++hits;
                break;
            }
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(graded.size());
}

namespace {

// chi-square(1) survival function
double chi2_sf(double x) { return std::erfc(std::sqrt(x / 2.0)); }

double binom_coeff(std::size_t n, std::size_t k) {
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

// two-sided sign test: 2 * P[X >= max(b, c)], X ~ Binomial(n, 1/2)
double exact_binomial_p(std::size_t b, std::size_t c) {
    std::size_t n = b + c, m = std::max(b, c);
    double tail = 0.0;
    for (std::size_t i = m; i <= n; ++i) tail += binom_coeff(n, i);
    return std::min(1.0, 2.0 * tail * std::pow(0.5, static_cast<double>(n)));
}

}  // namespace

McNemarResult mcnemar(const std::vector<std::pair<bool, bool>>& outcomes,
                      McNemarVariant variant) {
    McNemarResult result;
    for (const auto& [baseline, method] : outcomes) {
        if (baseline && !method) ++result.b;
        if (!baseline && method) ++result.c;
    }
    std::size_t n = result.b + result.c;
    if (n == 0) {
        result.p_value = 1.0;  // no disagreement
        result.variant_used =
            variant == McNemarVariant::chi_square_cc ? variant : McNemarVariant::exact_binomial;
        return result;
    }
    if (variant == McNemarVariant::auto_select)
        variant = n < 25 ? McNemarVariant::exact_binomial : McNemarVariant::chi_square_cc;
    result.variant_used = variant;
    if (variant == McNemarVariant::chi_square_cc) {
        double diff = std::abs(static_cast<double>(result.b) - static_cast<double>(result.c));
        result.statistic = (diff - 1.0) * (diff - 1.0) / static_cast<double>(n);
        result.p_value = chi2_sf(result.statistic);
    } else {
        result.p_value = exact_binomial_p(result.b, result.c);
    }
    return result;
}

std::string ErrorCell::key() const {
    if (extraction_failed) return "wrong/extraction_failed";
    std::string key = correct ? "correct" : "wrong";
    key += gold_in_candidates ? "/gold_in" : "/gold_absent";
    key += "/";
    key += provenance_name(provenance);
    return key;
}

ErrorCell classify_error(const SampleSet& set, const AggregateDecision& decision,
                         std::string_view gold) {
    ErrorCell cell;
    for (const auto& cand : set.candidates)
        if (cand.is_valid && answers_equivalent(*cand.extracted_answer, gold))
            cell.gold_in_candidates = true;
    if (!decision.final_answer) {
        cell.extraction_failed = true;
        return cell;
    }
    cell.correct = answers_equivalent(*decision.final_answer, gold);
    cell.provenance = decision.provenance;
    return cell;
}

double flops_estimate(double params, double tokens, FlopsMode mode) {
    if (params <= 0 || tokens <= 0)
        throw std::invalid_argument("flops_estimate requires positive N and D");
    return (mode == FlopsMode::inference ? 2.0 : 6.0) * params * tokens;
}

double overhead_per_question(const std::vector<RunLedger::Record>& records,
                             const std::string& strategy) {
    std::map<std::string, double> per_question;
    for (const auto& rec : records) {
        if (rec.strategy != strategy || rec.strategy == "sample") continue;
        per_question[rec.question_id] += static_cast<double>(rec.latency_ms) / 1000.0;
    }
    if (per_question.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [id, seconds] : per_question) total += seconds;
    return total / static_cast<double>(per_question.size());
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["questions"] = questions;
    j["excluded_missing_gold"] = excluded_missing_gold;
    j["accuracy"] = accuracy;
    for (const auto& [k, pct] : pass_at_k_pct) j["pass_at_k"][std::to_string(k)] = pct;
    j["error_taxonomy"] = error_taxonomy;
    j["overhead_seconds"] = overhead_seconds;
    j["mcnemar_variant"] = mcnemar_variant;
    j["significance"] = nlohmann::json::array();
    for (const auto& entry : significance)
        j["significance"].push_back({{"baseline", entry.baseline},
                                     {"method", entry.method},
                                     {"p_value", entry.p_value},
                                     {"significant", entry.significant},
                                     {"b", entry.detail.b},
                                     {"c", entry.detail.c}});
    return j.dump(2);
}

std::string EvalReport::to_table(const std::vector<std::string>& source_order) const {
    std::ostringstream out;
    out << std::left << std::setw(16) << "Method" << std::right << std::setw(13) << "Overhead(s)";
    for (const auto& source : source_order) out << std::setw(10) << source;
    out << std::setw(10) << "Avg" << "\n";

    auto row = [&](const std::string& strategy, const std::map<std::string, double>& cells) {
        out << std::left << std::setw(16) << strategy << std::right;
        auto overhead = overhead_seconds.find(strategy);
        if (overhead != overhead_seconds.end())
            out << std::setw(13) << std::fixed << std::setprecision(2) << overhead->second;
        else
            out << std::setw(13) << "-";
        for (const auto& source : source_order) {
            auto it = cells.find(source);
            if (it != cells.end())
                out << std::setw(10) << std::fixed << std::setprecision(2) << it->second;
            else
                out << std::setw(10) << "-";
        }
        auto avg = cells.find("Avg");
        if (avg != cells.end())
            out << std::setw(10) << std::fixed << std::setprecision(2) << avg->second;
        else
            out << std::setw(10) << "-";
        out << "\n";
    };

    for (const auto& [k, pct] : pass_at_k_pct)
        row("pass@" + std::to_string(k), {{"Avg", pct}});
    for (const auto& [strategy, cells] : accuracy) row(strategy, cells);
    return out.str();
}

}  // namespace ssa
