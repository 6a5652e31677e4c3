#pragma once

#include <memory>
#include <ostream>

#include "ssa/aggregation.hpp"
#include "ssa/config.hpp"
#include "ssa/gateway.hpp"
#include "ssa/metrics.hpp"

namespace ssa {

// Exit codes shared by every subcommand: 0 success, 2 partial failures,
// 1 fatal (raised as exceptions and mapped in the CLI).

std::unique_ptr<Gateway> make_gateway(const Config& cfg, const std::string& section);
ScorerEndpoint make_scorer(const Config& cfg);

int cmd_sample(const Config& cfg, std::ostream& log);
int cmd_aggregate(const Config& cfg, std::ostream& log);
int cmd_eval(const Config& cfg, std::ostream& log);
int cmd_build_dataset(const Config& cfg, std::ostream& log);
int cmd_train_toy(const Config& cfg, std::ostream& log);
int cmd_report(const Config& cfg, std::ostream& out);

// Shared by cmd_eval and cmd_report.
EvalReport build_eval_report(const Config& cfg, std::ostream& log);

}  // namespace ssa
