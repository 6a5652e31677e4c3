#include "ssa/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace ssa {

using nlohmann::json;

json to_json(const Question& q) {
    return {{"id", q.id},
            {"text", q.text},
            {"gold_answer", q.gold_answer ? json(*q.gold_answer) : json(nullptr)},
            {"source", q.source}};
}

json to_json(const Candidate& c) {
    return {{"text", c.text},
            {"extracted_answer", c.extracted_answer ? json(*c.extracted_answer) : json(nullptr)},
            {"is_valid", c.is_valid},
            {"token_count", c.token_count}};
}

json to_json(const SampleSet& s) {
    json candidates = json::array();
    for (const auto& c : s.candidates) candidates.push_back(to_json(c));
    return {{"question", to_json(s.question)},
            {"candidates", std::move(candidates)},
            {"order_seed", s.order_seed}};
}

json to_json(const AggregateDecision& d) {
    return {{"strategy", strategy_name(d.strategy)},
            {"final_answer", d.final_answer ? json(*d.final_answer) : json(nullptr)},
            {"chosen_index", d.chosen_index ? json(*d.chosen_index) : json(nullptr)},
            {"raw_output", d.raw_output},
            {"provenance", provenance_name(d.provenance)}};
}

Question question_from_json(const json& j) {
    Question q;
    q.id = j.at("id");
    q.text = j.at("text");
    if (j.contains("gold_answer") && !j["gold_answer"].is_null())
        q.gold_answer = normalize_answer(j["gold_answer"].get<std::string>());
    q.source = j.value("source", "");
    if (q.id.empty() || q.text.empty())
        throw std::invalid_argument("question requires non-empty id and text");
    return q;
}

Candidate candidate_from_json(const json& j) {
    Candidate c;
    c.text = j.at("text");
    if (j.contains("extracted_answer") && !j["extracted_answer"].is_null()) {
        c.extracted_answer = j["extracted_answer"].get<std::string>();
        c.is_valid = true;
    }
    c.token_count = j.value("token_count", count_tokens(c.text));
    return c;
}

SampleSet sample_set_from_json(const json& j) {
    SampleSet s;
    s.question = question_from_json(j.at("question"));
    for (const auto& cj : j.at("candidates")) s.candidates.push_back(candidate_from_json(cj));
    s.order_seed = j.value("order_seed", std::uint64_t{0});
    return s;
}

AggregateDecision decision_from_json(const json& j) {
    AggregateDecision d;
    auto strategy = strategy_from_name(j.at("strategy").get<std::string>());
    if (!strategy) throw std::invalid_argument("unknown strategy in decision record");
    d.strategy = *strategy;
    if (j.contains("final_answer") && !j["final_answer"].is_null())
        d.final_answer = j["final_answer"].get<std::string>();
    if (j.contains("chosen_index") && !j["chosen_index"].is_null())
        d.chosen_index = j["chosen_index"].get<std::size_t>();
    d.raw_output = j.value("raw_output", "");
    if (auto p = provenance_from_name(j.value("provenance", "none"))) d.provenance = *p;
    return d;
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<json> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(json::parse(line));
    }
    return records;
}

void append_jsonl(const std::string& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path + " for append");
    out << record.dump() << "\n";
}

}  // namespace ssa
