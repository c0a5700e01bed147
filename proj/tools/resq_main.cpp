#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "resq/workflow.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Resource-aware conditional quantum execution"};
    app.set_version_flag("--version", resq::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string report_path;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Evaluate the constraint and run the main circuit if it passes");
    run->add_option("config", config_path, "Workflow document")->required();
    auto* report_opt = run->add_option("--report", report_path, "Write the report here instead of report_path");
    auto* seed_opt = run->add_option("--seed", seed, "Override the simulator seed");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a workflow document without executing it");
    validate->add_option("config", validate_path, "Workflow document")->required();
    std::uint64_t validate_seed = 0;
    std::string validate_report;
    auto* vseed_opt = validate->add_option("--seed", validate_seed, "Seed override to validate with");
    auto* vreport_opt = validate->add_option("--report", validate_report, "Report path override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : resq::kExitConfigError;
    }

    if (*run) {
        resq::WorkflowOverrides overrides;
        if (*report_opt) {
            overrides.report_path = report_path;
        }
        if (*seed_opt) {
            overrides.seed = seed;
        }
        return resq::run_workflow(config_path, overrides, std::cout, std::cerr);
    }

    resq::WorkflowOverrides overrides;
    if (*vreport_opt) {
        overrides.report_path = validate_report;
    }
    if (*vseed_opt) {
        overrides.seed = validate_seed;
    }
    const auto diagnostics = resq::validate_workflow(validate_path, overrides);
    for (const auto& d : diagnostics) {
        std::cout << d.path << ": " << d.message << "\n";
    }
    if (diagnostics.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    return resq::kExitConfigError;
}
