#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ssa/json_io.hpp"
#include "ssa/pipeline.hpp"

using namespace ssa;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ssa_pipeline_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_questions(const std::string& path, int n) {
    fs::remove(path);
    for (int i = 0; i < n; ++i) {
        Question q{"q" + std::to_string(i), "Question number " + std::to_string(i) + "?",
                   std::string("4"), i % 2 ? "math" : "gsm8k"};
        append_jsonl(path, to_json(q));
    }
}

Config run_config(const TempDir& dir, const std::string& extra = "") {
    std::ostringstream text;
    text << "[paths]\n"
         << "questions = " << dir.file("questions.jsonl") << "\n"
         << "samples = " << dir.file("samples.jsonl") << "\n"
         << "decisions = " << dir.file("decisions.jsonl") << "\n"
         << "ledger = " << dir.file("ledger.jsonl") << "\n"
         << "report_json = " << dir.file("report.json") << "\n"
         << "report_table = " << dir.file("report.txt") << "\n"
         << "[answer_model]\nkind = mock\nmock_seed = 7\n"
         << "[ssa_model]\nkind = mock\nmock_seed = 11\n"
         << "[sampling]\nk = 5\n"
         << extra;
    return Config::parse(text.str());
}

std::size_t line_count(const std::string& path) { return read_jsonl(path).size(); }

}  // namespace

TEST_CASE("config parses sections, comments, lists, and overrides") {
    Config cfg = Config::parse(
        "# run settings\n"
        "[sampling]\n"
        "k = 5   # trailing comment\n"
        "temperature = 0.5\n"
        "[aggregate]\n"
        "strategies = majority, ssa, usc\n");
    CHECK(cfg.get_int("sampling", "k", 0) == 5);
    CHECK(cfg.get_double("sampling", "temperature", 0) == doctest::Approx(0.5));
    CHECK(cfg.get_list("aggregate", "strategies") ==
          std::vector<std::string>{"majority", "ssa", "usc"});
    CHECK_FALSE(cfg.find("sampling", "missing"));
    CHECK(cfg.get("sampling", "missing", "fallback") == "fallback");

    cfg.set_override("sampling.k=9");
    cfg.set_override("fresh.key=value");
    CHECK(cfg.get_int("sampling", "k", 0) == 9);
    CHECK(cfg.get("fresh", "key") == "value");
}

TEST_CASE("config interpolates environment variables") {
    setenv("SSA_TEST_TOKEN", "sekrit", 1);
    Config cfg = Config::parse("[auth]\nkey = pre-${SSA_TEST_TOKEN}-post\n");
    CHECK(cfg.get("auth", "key") == "pre-sekrit-post");
    unsetenv("SSA_TEST_TOKEN");
    CHECK(interpolate_env("${SSA_TEST_TOKEN}") == "");
}

TEST_CASE("cmd_sample writes k candidates per question and resumes") {
    TempDir dir("sample");
    write_questions(dir.file("questions.jsonl"), 6);
    Config cfg = run_config(dir);

    std::ostringstream log;
    CHECK(cmd_sample(cfg, log) == 0);
    auto records = read_jsonl(dir.file("samples.jsonl"));
    REQUIRE(records.size() == 6);
    for (const auto& j : records) {
        SampleSet set = sample_set_from_json(j);
        CHECK(set.candidates.size() == 5);
    }

    // resume: 4 more questions appear, only they are sampled
    write_questions(dir.file("questions.jsonl"), 10);
    auto before = records;
    CHECK(cmd_sample(cfg, log) == 0);
    auto after = read_jsonl(dir.file("samples.jsonl"));
    REQUIRE(after.size() == 10);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] == before[i]);

    // already complete: rerun appends nothing
    CHECK(cmd_sample(cfg, log) == 0);
    CHECK(line_count(dir.file("samples.jsonl")) == 10);
}

TEST_CASE("cmd_aggregate emits the strategy x k x seed product and resumes") {
    TempDir dir("aggregate");
    write_questions(dir.file("questions.jsonl"), 3);
    Config cfg = run_config(dir,
                            "[aggregate]\n"
                            "strategies = majority, ssa\n"
                            "k_list = 5\n"
                            "seeds = 1\n");
    std::ostringstream log;
    REQUIRE(cmd_sample(cfg, log) == 0);
    CHECK(cmd_aggregate(cfg, log) == 0);
    auto decisions = read_jsonl(dir.file("decisions.jsonl"));
    REQUIRE(decisions.size() == 6);  // 3 questions x 2 strategies x 1 k x 1 seed

    // idempotent resume
    CHECK(cmd_aggregate(cfg, log) == 0);
    CHECK(line_count(dir.file("decisions.jsonl")) == 6);

    for (const auto& j : decisions) {
        CHECK(j.contains("question_id"));
        CHECK(j.at("k") == 5);
        auto decision = decision_from_json(j.at("decision"));
        std::string strategy = j.at("strategy");
        CHECK(strategy_name(decision.strategy) == strategy);
    }
}

TEST_CASE("cmd_aggregate routes two-stage plans and records call counts") {
    TempDir dir("twostage");
    write_questions(dir.file("questions.jsonl"), 2);
    Config cfg = run_config(dir,
                            "[sampling]\nk = 32\n"
                            "[aggregate]\n"
                            "strategies = ssa_two_stage\n"
                            "k_list = 32\n"
                            "l1 = 15\n");
    std::ostringstream log;
    REQUIRE(cmd_sample(cfg, log) == 0);
    CHECK(cmd_aggregate(cfg, log) == 0);
    auto decisions = read_jsonl(dir.file("decisions.jsonl"));
    REQUIRE(decisions.size() == 2);
    for (const auto& j : decisions) {
        CHECK(j.at("ssa_calls") == 4);
        CHECK(j.at("plan").at("l2") == 3);
        CHECK(j.at("plan").at("start_indices") == json::array({0, 10, 21}));
    }
}

TEST_CASE("cmd_eval produces a graded report with overhead and significance") {
    TempDir dir("eval");
    write_questions(dir.file("questions.jsonl"), 8);
    Config cfg = run_config(dir,
                            "[aggregate]\n"
                            "strategies = majority, ssa\n"
                            "k_list = 5\n"
                            "seeds = 1, 2\n"
                            "[eval]\n"
                            "baseline = majority\n"
                            "sources = gsm8k, math\n");
    std::ostringstream log;
    REQUIRE(cmd_sample(cfg, log) == 0);
    REQUIRE(cmd_aggregate(cfg, log) == 0);
    CHECK(cmd_eval(cfg, log) == 0);

    std::ifstream in(dir.file("report.json"));
    json report = json::parse(in);
    CHECK(report.at("questions") == 8);
    REQUIRE(report.at("accuracy").contains("majority@5"));
    REQUIRE(report.at("accuracy").contains("ssa@5"));
    CHECK(report.at("accuracy").at("ssa@5").contains("Avg"));
    CHECK(report.at("accuracy").at("ssa@5").contains("gsm8k"));
    CHECK(report.at("pass_at_k").contains("5"));
    REQUIRE(report.at("significance").size() == 1);
    CHECK(report.at("significance")[0].at("baseline") == "majority@5");
    CHECK(report.at("overhead_seconds").contains("ssa"));

    std::ifstream table_in(dir.file("report.txt"));
    std::stringstream table;
    table << table_in.rdbuf();
    CHECK(table.str().find("Method") != std::string::npos);
    CHECK(table.str().find("majority@5") != std::string::npos);
}

TEST_CASE("cmd_build_dataset filters and writes instances plus a report") {
    TempDir dir("dataset");
    write_questions(dir.file("questions.jsonl"), 5);
    Config cfg = run_config(dir, "[paths]\ninstances = " + dir.file("instances.jsonl") +
                                     "\nfilter_report = " + dir.file("filter_report.json") + "\n");
    std::ostringstream log;
    REQUIRE(cmd_sample(cfg, log) == 0);
    CHECK(cmd_build_dataset(cfg, log) == 0);

    std::ifstream in(dir.file("filter_report.json"));
    json report = json::parse(in);
    CHECK(report.at("input") == 5);
    CHECK(report.at("kept").get<std::size_t>() ==
          line_count(dir.file("instances.jsonl")));
    CHECK(report.contains("correctness_histogram"));
}

TEST_CASE("cmd_train_toy writes a learning curve and weights") {
    TempDir dir("train");
    Config cfg = Config::parse("[paths]\ncurve = " + dir.file("curve.csv") +
                               "\nweights = " + dir.file("weights.json") +
                               "\n[train]\nsteps = 200\n");
    std::ostringstream log;
    CHECK(cmd_train_toy(cfg, log) == 0);

    std::ifstream curve(dir.file("curve.csv"));
    std::string header_meta, header_cols;
    std::getline(curve, header_meta);
    std::getline(curve, header_cols);
    CHECK(header_meta.find("group_size=8") != std::string::npos);
    CHECK(header_cols == "step,mean_reward,objective,kl");
    std::size_t rows = 0;
    for (std::string line; std::getline(curve, line);) rows += !line.empty();
    CHECK(rows == 200);

    std::ifstream weights_in(dir.file("weights.json"));
    json weights = json::parse(weights_in);
    CHECK(weights.at("weights").size() == 3);
}

TEST_CASE("installed CLI binary runs the pipeline end to end") {
    TempDir dir("cli");
    write_questions(dir.file("questions.jsonl"), 3);
    std::ostringstream ini;
    ini << "[paths]\n"
        << "questions = questions.jsonl\nsamples = samples.jsonl\n"
        << "decisions = decisions.jsonl\nreport_json = report.json\n"
        << "report_table = report.txt\n"
        << "[answer_model]\nkind = mock\nmock_seed = 7\n"
        << "[ssa_model]\nkind = mock\nmock_seed = 11\n"
        << "[sampling]\nk = 5\n"
        << "[aggregate]\nstrategies = majority, ssa\nk_list = 5\n";
    {
        std::ofstream out(dir.file("run.ini"));
        out << ini.str();
    }

    auto run = [&](const std::string& args) {
        std::string cmd = "cd " + dir.path.string() + " && " + SSA_CLI_PATH + " " + args +
                          " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    REQUIRE(run("sample -c run.ini") == 0);
    REQUIRE(run("aggregate -c run.ini") == 0);
    REQUIRE(run("eval -c run.ini") == 0);
    CHECK(run("report -c run.ini --set aggregate.k_list=5") == 0);
    CHECK(line_count(dir.file("samples.jsonl")) == 3);
    CHECK(line_count(dir.file("decisions.jsonl")) == 6);
    CHECK(fs::exists(dir.file("report.json")));

    // unknown strategy surfaces as a partial failure (exit 2)
    int code = run("aggregate -c run.ini --set aggregate.strategies=not_a_strategy");
    CHECK(WEXITSTATUS(code) == 2);
}
