#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssa/pipeline.hpp"

// Pipeline driver. Exit codes: 0 success, 2 partial failures, 1 fatal.

int main(int argc, char** argv) {
    CLI::App app{"Sample-set aggregation pipeline"};
    app.require_subcommand(1);

    std::string config_path = "run.ini";
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "run configuration file");
    app.add_option("--set", overrides, "override a config key, section.key=value");

    auto* sample = app.add_subcommand("sample", "draw K candidates per question");
    auto* aggregate = app.add_subcommand("aggregate", "run aggregation strategies");
    auto* eval = app.add_subcommand("eval", "grade decisions and write the report");
    auto* build = app.add_subcommand("build-dataset", "filter sample sets into instances");
    auto* train = app.add_subcommand("train-toy", "run the toy GRPO training loop");
    auto* report = app.add_subcommand("report", "print the evaluation table");
    // allow "-c"/"--set" after the subcommand name
    for (auto* sub : {sample, aggregate, eval, build, train, report}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        ssa::Config cfg = ssa::Config::load(config_path);
        for (const auto& entry : overrides) cfg.set_override(entry);

        if (sample->parsed()) return ssa::cmd_sample(cfg, std::cerr);
        if (aggregate->parsed()) return ssa::cmd_aggregate(cfg, std::cerr);
        if (eval->parsed()) return ssa::cmd_eval(cfg, std::cerr);
        if (build->parsed()) return ssa::cmd_build_dataset(cfg, std::cerr);
        if (train->parsed()) return ssa::cmd_train_toy(cfg, std::cerr);
        if (report->parsed()) return ssa::cmd_report(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
