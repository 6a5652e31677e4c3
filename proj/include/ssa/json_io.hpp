#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ssa/core_types.hpp"

// Canonical JSON schemas for the pipeline's JSONL files. Field names match
// the domain types; optional fields serialize as null.

namespace ssa {

nlohmann::json to_json(const Question& q);
nlohmann::json to_json(const Candidate& c);
nlohmann::json to_json(const SampleSet& s);
nlohmann::json to_json(const AggregateDecision& d);

Question question_from_json(const nlohmann::json& j);
Candidate candidate_from_json(const nlohmann::json& j);
SampleSet sample_set_from_json(const nlohmann::json& j);
AggregateDecision decision_from_json(const nlohmann::json& j);

// One JSON object per line; blank lines are skipped on read.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void append_jsonl(const std::string& path, const nlohmann::json& record);

}  // namespace ssa
