// oseen_cli: run, validate and report decay experiments from a JSON config.
#include "oseen/config.hpp"
#include "oseen/experiments.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kFailedRows = 1;
constexpr int kConfigError = 2;
constexpr int kPathError = 3;

int exit_code_for(const std::vector<oseen::ConfigIssue>& issues) {
    bool schema = false;
    for (const auto& i : issues)
        if (i.kind != oseen::ConfigIssue::Kind::Path) schema = true;
    return schema ? kConfigError : kPathError;
}

void print_issues(const std::vector<oseen::ConfigIssue>& issues) {
    for (const auto& i : issues) std::cerr << "  " << i.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decay-rate experiments for the Oseen exterior problem"};
    app.require_subcommand(1);

    std::string config_file, output_dir, report_dir;
    int workers = 0;

    auto* run = app.add_subcommand("run", "validate the config, run every experiment and write the summary");
    run->add_option("config", config_file, "JSON config")->required();
    run->add_option("-o,--output-dir", output_dir, "override output_dir");
    run->add_option("-w,--workers", workers, "override the worker count")->check(CLI::Range(1, 64));

    auto* validate = app.add_subcommand("validate", "check a config and list every issue");
    validate->add_option("config", config_file, "JSON config")->required();

    auto* report = app.add_subcommand("report", "re-aggregate and print the summary of an output directory");
    report->add_option("dir", report_dir, "output directory of a run")->required();

    app.add_subcommand("defaults", "print a default config");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("defaults")) {
            std::cout << oseen::default_config().dump(2) << "\n";
            return kOk;
        }
        if (app.got_subcommand("report")) {
            int failed = 0;
            std::cout << oseen::render_report(report_dir, &failed);
            std::cout << (failed ? std::to_string(failed) + " row(s) failed\n" : "all rows pass\n");
            return failed ? kFailedRows : kOk;
        }

        nlohmann::json doc;
        try {
            doc = oseen::read_config_json(config_file);
        } catch (const oseen::ConfigError& e) {
            std::cerr << "invalid config " << config_file << ":\n";
            print_issues(e.issues);
            return exit_code_for(e.issues);
        }
        if (app.got_subcommand("run")) {
            if (!output_dir.empty()) doc["output_dir"] = output_dir;
            if (workers > 0) doc["workers"] = workers;
        }
        const auto issues = oseen::validate_config(doc);
        if (!issues.empty()) {
            std::cerr << "invalid config " << config_file << " (" << issues.size() << " issue"
                      << (issues.size() == 1 ? "" : "s") << "):\n";
            print_issues(issues);
            return exit_code_for(issues);
        }
        if (app.got_subcommand("validate")) {
            std::cout << config_file << ": ok\n";
            return kOk;
        }
        const auto cfg = oseen::parse_config(doc);
        std::cerr << "writing to " << cfg.output_dir.string() << "\n";
        const int rc = oseen::run_experiments(cfg, std::cout);
        return rc == 0 ? kOk : kFailedRows;
    } catch (const oseen::ConfigError& e) {
        print_issues(e.issues);
        return exit_code_for(e.issues);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "path error: " << e.what() << "\n";
        return kPathError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailedRows;
    }
}
