#include "ssa/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ssa/dataset.hpp"
#include "ssa/grpo.hpp"
#include "ssa/json_io.hpp"
#include "ssa/two_stage.hpp"

namespace ssa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

ExtractionFormat format_from_config(const Config& cfg) {
    std::string name = cfg.get("sampling", "format", "think_answer_tags");
    if (name == "answer_tags") return ExtractionFormat::answer_tags;
    if (name == "boxed") return ExtractionFormat::boxed;
    if (name == "last_number") return ExtractionFormat::last_number;
    return ExtractionFormat::think_answer_tags;
}

SamplingParams sampling_from_config(const Config& cfg) {
    SamplingParams params;
    params.temperature = cfg.get_double("sampling", "temperature", 0.5);
    params.max_tokens = static_cast<int>(cfg.get_int("sampling", "max_tokens", 1024));
    params.k = static_cast<int>(cfg.get_int("sampling", "k", 5));
    if (auto v = cfg.find("sampling", "top_p")) params.top_p = std::stod(*v);
    if (auto v = cfg.find("sampling", "top_k")) params.top_k = static_cast<int>(std::stoll(*v));
    return params;
}

SamplingParams aggregator_params(const Config& cfg) {
    SamplingParams params;
    params.temperature = cfg.get_double("aggregate", "temperature", 1.0);
    params.max_tokens = static_cast<int>(cfg.get_int("aggregate", "max_tokens", 1024));
    params.k = 1;
    return params;
}

std::vector<Question> load_questions(const std::string& path) {
    std::vector<Question> questions;
    for (const auto& j : read_jsonl(path)) questions.push_back(question_from_json(j));
    return questions;
}

std::vector<SampleSet> load_samples(const std::string& path) {
    std::vector<SampleSet> sets;
    for (const auto& j : read_jsonl(path)) sets.push_back(sample_set_from_json(j));
    return sets;
}

std::unique_ptr<RunLedger> open_ledger(const Config& cfg) {
    std::string path = cfg.get("paths", "ledger");
    if (path.empty()) return nullptr;
    return std::make_unique<RunLedger>(path);
}

PromptKind kind_for_strategy(Strategy s) {
    switch (s) {
        case Strategy::usc: return PromptKind::usc;
        case Strategy::ssa_nothink: return PromptKind::ssa_nothink;
        default: return PromptKind::ssa;
    }
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const Config& cfg, const std::string& section) {
    LmEndpoint endpoint;
    endpoint.base_url = cfg.get(section, "base_url", "mock://");
    endpoint.model_name = cfg.get(section, "model", "mock");
    endpoint.api_key_env = cfg.get(section, "api_key_env");
    endpoint.timeout_seconds = cfg.get_double(section, "timeout_seconds", 120.0);
    endpoint.max_parallel = static_cast<int>(cfg.get_int(section, "max_parallel", 4));
    endpoint.context_budget_tokens =
        static_cast<std::uint64_t>(cfg.get_int(section, "context_budget", 32768));

    std::string kind = cfg.get(section, "kind", "mock");
    if (kind == "http") return std::make_unique<HttpGateway>(endpoint);
    auto seed = static_cast<std::uint64_t>(cfg.get_int(section, "mock_seed", 42));
    return std::make_unique<MockGateway>(seed, endpoint);
}

ScorerEndpoint make_scorer(const Config& cfg) {
    ScorerEndpoint scorer;
    scorer.mode = cfg.get("scorer", "mode", "outcome") == "process_product"
                      ? ScorerMode::process_product
                      : ScorerMode::outcome;
    std::string kind = cfg.get("scorer", "kind", "mock");
    if (kind == "mock") {
        auto seed = static_cast<std::uint64_t>(cfg.get_int("scorer", "mock_seed", 42));
        scorer.score_fn = [seed](const std::string& question, const std::string& segment) {
            std::uint64_t h = fnv1a(question) ^ (fnv1a(segment) * seed);
            return 0.05 + 0.95 * static_cast<double>(h % 10000) / 10000.0;  // (0, 1]
        };
    } else {
        // external scorer over HTTP: POST /v1/score {question, segment} -> {score}
        std::string base_url = cfg.get("scorer", "base_url");
        double timeout = cfg.get_double("scorer", "timeout_seconds", 60.0);
        scorer.score_fn = [base_url, timeout](const std::string& question,
                                              const std::string& segment) {
            return score_via_http(base_url, question, segment, timeout);
        };
    }
    return scorer;
}

int cmd_sample(const Config& cfg, std::ostream& log) {
    auto questions = load_questions(cfg.get("paths", "questions", "questions.jsonl"));
    std::string samples_path = cfg.get("paths", "samples", "samples.jsonl");
    SamplingParams params = sampling_from_config(cfg);
    ExtractionFormat format = format_from_config(cfg);

    std::set<std::string> done;
    if (fs::exists(samples_path))
        for (const auto& j : read_jsonl(samples_path))
            done.insert(j.at("question").at("id").get<std::string>());

    auto gateway = make_gateway(cfg, "answer_model");
    auto ledger = open_ledger(cfg);
    gateway->set_ledger(ledger.get());
    gateway->set_strategy_tag("sample");

    int failures = 0;
    for (const auto& question : questions) {
        if (done.count(question.id)) continue;
        try {
            SampleSet set = sample_k(*gateway, question, params, format);
            append_jsonl(samples_path, to_json(set));
        } catch (const SampleSetError& e) {
            log << "sample: question " << question.id << " failed: " << e.what() << "\n";
            ++failures;
        }
    }
    return failures ? 2 : 0;
}

int cmd_aggregate(const Config& cfg, std::ostream& log) {
    auto samples = load_samples(cfg.get("paths", "samples", "samples.jsonl"));
    std::string decisions_path = cfg.get("paths", "decisions", "decisions.jsonl");

    std::vector<std::string> strategy_names = cfg.get_list("aggregate", "strategies");
    if (strategy_names.empty()) strategy_names = {"majority", "ssa"};
    std::vector<std::string> k_list = cfg.get_list("aggregate", "k_list");
    if (k_list.empty()) k_list = {"5"};
    std::vector<std::string> seeds = cfg.get_list("aggregate", "seeds");
    if (seeds.empty()) seeds = {"1"};
    int l1 = static_cast<int>(cfg.get_int("aggregate", "l1", 15));

    std::set<std::string> done;
    if (fs::exists(decisions_path))
        for (const auto& j : read_jsonl(decisions_path))
            done.insert(j.at("question_id").get<std::string>() + "|" +
                        j.at("strategy").get<std::string>() + "|" +
                        std::to_string(j.at("k").get<int>()) + "|" +
                        std::to_string(j.at("seed").get<std::uint64_t>()));

    auto ssa_gateway = make_gateway(cfg, "ssa_model");
    auto ledger = open_ledger(cfg);
    ssa_gateway->set_ledger(ledger.get());
    SamplingParams params = aggregator_params(cfg);
    ScorerEndpoint scorer = make_scorer(cfg);

    int failures = 0;
    for (const auto& set : samples) {
        for (const auto& name : strategy_names) {
            auto strategy = strategy_from_name(name);
            if (!strategy) {
                log << "aggregate: unknown strategy " << name << "\n";
                ++failures;
                continue;
            }
            for (const auto& k_str : k_list) {
                int k = std::stoi(k_str);
                if (static_cast<std::size_t>(k) > set.candidates.size()) {
                    log << "aggregate: question " << set.question.id << " has only "
                        << set.candidates.size() << " candidates, skipping k=" << k << "\n";
                    ++failures;
                    continue;
                }
                SampleSet subset;
                subset.question = set.question;
                subset.order_seed = set.order_seed;
                subset.candidates.assign(set.candidates.begin(), set.candidates.begin() + k);

                for (const auto& seed_str : seeds) {
                    auto seed = static_cast<std::uint64_t>(std::stoull(seed_str));
                    std::string key = set.question.id + "|" + name + "|" + std::to_string(k) +
                                      "|" + std::to_string(seed);
                    if (done.count(key)) continue;

                    json record{{"question_id", set.question.id},
                                {"source", set.question.source},
                                {"strategy", name},
                                {"k", k},
                                {"seed", seed}};
                    try {
                        ssa_gateway->set_question_id(set.question.id);
                        ssa_gateway->set_strategy_tag(name);
                        AggregateDecision decision;
                        if (*strategy == Strategy::majority) {
                            decision = majority_vote(subset);
                        } else if (*strategy == Strategy::scorer_rerank) {
                            decision = scorer_rerank(subset, scorer);
                        } else if (*strategy == Strategy::ssa_two_stage) {
                            TwoStagePlan plan = plan_groups(k, l1);
                            auto tmpl = default_template(PromptKind::ssa);
                            TwoStageResult ts =
                                run_two_stage(subset, *ssa_gateway, tmpl, plan, seed, params);
                            decision = ts.decision;
                            record["ssa_calls"] = ts.ssa_calls;
                            record["plan"] = {{"k", plan.k},
                                              {"l1", plan.l1},
                                              {"l2", plan.l2},
                                              {"start_indices", plan.start_indices}};
                        } else {
                            auto tmpl = default_template(kind_for_strategy(*strategy));
                            decision = ssa_aggregate(subset, *ssa_gateway, tmpl, seed, params);
                        }
                        record["decision"] = to_json(decision);
                        append_jsonl(decisions_path, record);
                    } catch (const std::exception& e) {
                        log << "aggregate: " << key << " failed: " << e.what() << "\n";
                        ++failures;
                    }
                }
            }
        }
    }
    return failures ? 2 : 0;
}

EvalReport build_eval_report(const Config& cfg, std::ostream& log) {
    auto samples = load_samples(cfg.get("paths", "samples", "samples.jsonl"));
    auto decisions = read_jsonl(cfg.get("paths", "decisions", "decisions.jsonl"));

    std::map<std::string, const SampleSet*> by_id;
    for (const auto& set : samples) by_id[set.question.id] = &set;

    EvalReport report;
    report.questions = samples.size();

    // pass@k over sampled candidates, graded against gold
    std::vector<std::vector<bool>> graded;
    for (const auto& set : samples) {
        if (!set.question.gold_answer) continue;
        std::vector<bool> outcomes;
        for (const auto& cand : set.candidates)
            outcomes.push_back(cand.is_valid && answers_equivalent(*cand.extracted_answer,
                                                                   *set.question.gold_answer));
        graded.push_back(std::move(outcomes));
    }
    std::size_t min_k = 0;
    for (const auto& g : graded)
        min_k = min_k == 0 ? g.size() : std::min(min_k, g.size());
    auto pass_list = cfg.get_list("eval", "pass_k_list");
    if (pass_list.empty()) pass_list = {"1", std::to_string(min_k)};
    for (const auto& k_str : pass_list) {
        int k = std::stoi(k_str);
        if (!graded.empty() && k >= 1 && static_cast<std::size_t>(k) <= min_k)
            report.pass_at_k_pct[k] = pass_at_k(graded, k);
    }

    // accuracy rows keyed "strategy@k"; correctness per decision record
    struct RowStats {
        std::map<std::string, std::pair<std::size_t, std::size_t>> by_source;  // correct/total
    };
    std::map<std::string, RowStats> rows;
    // (strategy@k, seed) -> question_id -> correct, for McNemar pairing
    std::map<std::string, std::map<std::string, std::map<std::string, bool>>> outcomes_by_row;

    for (const auto& j : decisions) {
        std::string qid = j.at("question_id");
        auto it = by_id.find(qid);
        if (it == by_id.end() || !it->second->question.gold_answer) {
            ++report.excluded_missing_gold;
            continue;
        }
        const SampleSet& set = *it->second;
        AggregateDecision decision = decision_from_json(j.at("decision"));
        std::string row = j.at("strategy").get<std::string>() + "@" +
                          std::to_string(j.at("k").get<int>());
        std::string seed = std::to_string(j.at("seed").get<std::uint64_t>());
        bool correct = decision.final_answer &&
                       answers_equivalent(*decision.final_answer, *set.question.gold_answer);

        std::string source = j.value("source", set.question.source);
        auto& [num, den] = rows[row].by_source[source.empty() ? "default" : source];
        den += 1;
        num += correct ? 1 : 0;
        outcomes_by_row[row][seed][qid] = correct;

        ErrorCell cell = classify_error(set, decision, *set.question.gold_answer);
        ++report.error_taxonomy[j.at("strategy").get<std::string>() + ":" + cell.key()];
    }

    for (const auto& [row, stats] : rows) {
        std::size_t num = 0, den = 0;
        for (const auto& [source, counts] : stats.by_source) {
            report.accuracy[row][source] =
                100.0 * static_cast<double>(counts.first) / static_cast<double>(counts.second);
            num += counts.first;
            den += counts.second;
        }
        report.accuracy[row]["Avg"] = 100.0 * static_cast<double>(num) / static_cast<double>(den);
    }

    // significance against the configured baseline, paired per (seed, question)
    std::string baseline = cfg.get("eval", "baseline");
    std::string variant_name = cfg.get("eval", "mcnemar", "auto");
    McNemarVariant variant = McNemarVariant::auto_select;
    if (variant_name == "chi_square") variant = McNemarVariant::chi_square_cc;
    else if (variant_name == "exact") variant = McNemarVariant::exact_binomial;
    report.mcnemar_variant = variant_name;
    if (!baseline.empty()) {
        for (const auto& [row, by_seed] : outcomes_by_row) {
            if (row.substr(0, row.find('@')) == baseline) continue;
            std::string baseline_row = baseline + row.substr(row.find('@'));
            auto base_it = outcomes_by_row.find(baseline_row);
            if (base_it == outcomes_by_row.end()) continue;
            std::vector<std::pair<bool, bool>> pairs;
            for (const auto& [seed, by_q] : by_seed) {
                auto seed_it = base_it->second.find(seed);
                if (seed_it == base_it->second.end()) continue;
                for (const auto& [qid, correct] : by_q) {
                    auto q_it = seed_it->second.find(qid);
                    if (q_it != seed_it->second.end())
                        pairs.emplace_back(q_it->second, correct);
                }
            }
            if (pairs.empty()) continue;
            SignificanceEntry entry;
            entry.baseline = baseline_row;
            entry.method = row;
            entry.detail = mcnemar(pairs, variant);
            entry.p_value = entry.detail.p_value;
            entry.significant = entry.p_value < 0.05;
            report.significance.push_back(std::move(entry));
        }
    }

    // aggregation overhead from the run ledger, when present
    std::string ledger_path = cfg.get("paths", "ledger");
    if (!ledger_path.empty() && fs::exists(ledger_path)) {
        auto records = RunLedger::load(ledger_path);
        std::set<std::string> strategies;
        for (const auto& rec : records)
            if (!rec.strategy.empty() && rec.strategy != "sample") strategies.insert(rec.strategy);
        for (const auto& strategy : strategies)
            report.overhead_seconds[strategy] = overhead_per_question(records, strategy);
    }

    if (report.excluded_missing_gold)
        log << "eval: excluded " << report.excluded_missing_gold
            << " decisions without gold answers\n";
    return report;
}

int cmd_eval(const Config& cfg, std::ostream& log) {
    EvalReport report = build_eval_report(cfg, log);
    std::vector<std::string> sources = cfg.get_list("eval", "sources");

    std::ofstream json_out(cfg.get("paths", "report_json", "report.json"));
    json_out << report.to_json() << "\n";
    std::ofstream table_out(cfg.get("paths", "report_table", "report.txt"));
    table_out << report.to_table(sources);
    return 0;
}

int cmd_report(const Config& cfg, std::ostream& out) {
    std::ostringstream sink;
    EvalReport report = build_eval_report(cfg, sink);
    out << report.to_table(cfg.get_list("eval", "sources"));
    return 0;
}

int cmd_build_dataset(const Config& cfg, std::ostream& log) {
    auto samples = load_samples(cfg.get("paths", "samples", "samples.jsonl"));

    double truncate_fraction = cfg.get_double("dataset", "truncate_fraction", 0.0);
    if (truncate_fraction > 0.0) {
        ExtractionFormat format = format_from_config(cfg);
        for (auto& set : samples)
            for (auto& cand : set.candidates)
                cand = truncate_tail(cand, truncate_fraction, format);
    }

    InstanceFilterConfig filter;
    filter.max_total_tokens =
        static_cast<std::uint64_t>(cfg.get_int("dataset", "max_total_tokens", 4000));
    filter.min_valid_answers = static_cast<int>(cfg.get_int("dataset", "min_valid_answers", 3));
    filter.max_null_answers = static_cast<int>(cfg.get_int("dataset", "max_null_answers", 1));
    auto seed = static_cast<std::uint64_t>(cfg.get_int("dataset", "seed", 1));

    FilterReport report;
    auto instances = build_instances(samples, filter, seed, report);

    std::string out_path = cfg.get("paths", "instances", "instances.jsonl");
    fs::remove(out_path);
    for (const auto& set : instances) append_jsonl(out_path, to_json(set));

    json summary{{"input", report.input_count},
                 {"kept", report.kept},
                 {"dropped_by_rule", report.dropped_by_rule},
                 {"correctness_histogram", report.correctness_histogram}};
    std::ofstream report_out(cfg.get("paths", "filter_report", "filter_report.json"));
    report_out << summary.dump(2) << "\n";

    log << "build-dataset: kept " << report.kept << " of " << report.input_count << "\n";
    return 0;
}

int cmd_train_toy(const Config& cfg, std::ostream& log) {
    GrpoConfig grpo;
    grpo.group_size = static_cast<int>(cfg.get_int("train", "group_size", 8));
    grpo.clip_epsilon = cfg.get_double("train", "clip_epsilon", 0.2);
    grpo.kl_coefficient = cfg.get_double("train", "kl_coefficient", 0.01);
    grpo.learning_rate = cfg.get_double("train", "learning_rate", 0.5);

    TrainOptions options;
    options.steps = static_cast<int>(cfg.get_int("train", "steps", 2000));
    options.seed = static_cast<std::uint64_t>(cfg.get_int("train", "seed", 1));
    options.old_refresh_every = static_cast<int>(cfg.get_int("train", "old_refresh_every", 1));
    options.ref_refresh_every = static_cast<int>(cfg.get_int("train", "ref_refresh_every", 0));

    auto env = separable_environment(static_cast<int>(cfg.get_int("train", "candidates", 4)));
    TrainResult result = train_toy(ToyPolicy{}, env, grpo, options);

    std::ofstream curve(cfg.get("paths", "curve", "curve.csv"));
    curve << "# group_size=" << grpo.group_size << " learning_rate=" << grpo.learning_rate
          << " kl_coefficient=" << grpo.kl_coefficient << " clip_epsilon=" << grpo.clip_epsilon
          << " seed=" << options.seed << "\n";
    curve << "step,mean_reward,objective,kl\n";
    for (const auto& point : result.curve)
        curve << point.step << "," << point.mean_reward << "," << point.objective << ","
              << point.kl << "\n";

    json weights{{"weights", result.policy.weights()},
                 {"features", {"agreement", "validity", "scorer_hint"}}};
    std::ofstream weights_out(cfg.get("paths", "weights", "weights.json"));
    weights_out << weights.dump(2) << "\n";

    double tail_reward = 0.0;
    int tail = std::min<int>(100, static_cast<int>(result.curve.size()));
    for (int i = 0; i < tail; ++i)
        tail_reward += result.curve[result.curve.size() - 1 - i].mean_reward;
    if (tail) tail_reward /= tail;
    log << "train-toy: final " << tail << "-step mean reward " << tail_reward << "\n";
    return 0;
}

}  // namespace ssa
