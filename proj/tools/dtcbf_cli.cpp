// Command-line front end: run episodes, run verification suites, check a
// parameter file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dtcbf/dtcbf.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kUsage = 2;

dtcbf::ParamSet load_config(const std::string& path)
{
    return path.empty() ? dtcbf::ParamSet{} : dtcbf::load_params(path);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-time control barrier functions: shielded episodes and verification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    app.add_option("--config", config, "parameter file (key = value)")->check(CLI::ExistingFile);

    dtcbf::RunOptions run;
    std::string filter = "none";
    auto* run_cmd = app.add_subcommand("run", "run episodes and write steps.csv / summary.csv");
    run_cmd->add_option("--env", run.env, "fw or car")->check(CLI::IsMember({"fw", "car"}))->required();
    run_cmd->add_option("--policy", run.policy, "random, constant, greedy-waypoint (fw), greedy-speed (car)");
    run_cmd->add_option("--filter", filter, "none, single, line or candidates")
        ->check(CLI::IsMember({"none", "single", "line", "candidates"}));
    run_cmd->add_option("--episodes", run.episodes, "number of episodes")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed, "run seed");
    run_cmd->add_option("--out", run.out_dir, "output directory for the CSV files");
    run_cmd->add_option("--segments", run.segments, "line-search segments")->check(CLI::PositiveNumber);
    run_cmd->add_option("--threads", run.threads, "worker threads (0 = all cores)");

    std::string suite;
    std::string json_out;
    dtcbf::VerifyOptions vopt;
    auto* verify_cmd = app.add_subcommand("verify", "run a verification suite and print a JSON report");
    verify_cmd->add_option("suite", suite, "suite name")->required()->check(CLI::IsMember(dtcbf::verify_suite_names()));
    verify_cmd->add_option("--samples", vopt.samples, "random samples per check")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--seed", vopt.seed, "sampler seed");
    verify_cmd->add_option("--json", json_out, "also write the report to this file");

    auto* params_cmd = app.add_subcommand("params-check", "load, validate and print the parameters in SI units");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const dtcbf::ParamSet params = load_config(config);
        if (*run_cmd) {
            run.params = params;
            run.filter = dtcbf::parse_filter_mode(filter);
            const auto summary = dtcbf::run(run);
            std::cout << dtcbf::format_summary(summary);
            return kOk;
        }
        if (*verify_cmd) {
            vopt.params = params;
            const auto report = dtcbf::verify_suite(suite, vopt);
            const std::string text = report.to_json().dump(2);
            std::cout << text << '\n';
            if (!json_out.empty()) {
                std::ofstream out(json_out);
                out << text << '\n';
                if (!out) {
                    std::cerr << "error: cannot write " << json_out << '\n';
                    return kUsage;
                }
            }
            return report.ok() ? kOk : kVerifyFailed;
        }
        if (*params_cmd) {
            std::cout << dtcbf::write_params(params);
            try {
                const auto ext = dtcbf::validate_fw_hypotheses(params.fw, params.sim);
                std::cout << "# evasive thrust range [" << ext.min << ", " << ext.max << "] N\n";
            } catch (const dtcbf::ConfigError& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kVerifyFailed;
            }
            return kOk;
        }
    } catch (const dtcbf::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kVerifyFailed;
    }
    return kUsage;
}
