#include "mcastsim/config.hpp"
#include "mcastsim/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::map<mcastsim::NodeId, std::string> parse_config_args(const std::vector<std::string>& args,
                                                          std::string& error) {
    std::map<mcastsim::NodeId, std::string> out;
    for (const auto& arg : args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
            error = "bad --config '" + arg + "', expected <node>=<file>";
            return {};
        }
        out[arg.substr(0, eq)] = arg.substr(eq + 1);
    }
    return out;
}

int check_config_command(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << path << ":0:0: cannot read file\n";
        return 1;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto result = mcastsim::load_config(buffer.str());
    if (std::holds_alternative<std::vector<mcastsim::ConfigError>>(result)) {
        for (const auto& e : std::get<std::vector<mcastsim::ConfigError>>(result)) {
            std::cerr << e.str(path) << "\n";
        }
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic multicast routing simulator"};
    app.require_subcommand(1);

    std::string topology;
    std::vector<std::string> config_args;
    std::string scenario;
    std::optional<int64_t> until;
    std::string log_path;
    std::string report_path;

    auto add_bundle_options = [&](CLI::App* cmd) {
        cmd->add_option("--topology", topology, "topology file")->required();
        cmd->add_option("--config", config_args, "<node>=<file>, repeatable");
        cmd->add_option("--scenario", scenario, "scenario file")->required();
    };

    CLI::App* run_cmd = app.add_subcommand("run", "load a bundle, run it, report");
    add_bundle_options(run_cmd);
    run_cmd->add_option("--until", until, "run horizon in ms");
    run_cmd->add_option("--log", log_path, "write the event log here");
    run_cmd->add_option("--report", report_path, "write the report here");

    std::string check_path;
    CLI::App* check_cmd = app.add_subcommand("check-config", "parse and validate a config file");
    check_cmd->add_option("file", check_path, "config file")->required();

    std::optional<int64_t> shell_at;
    CLI::App* shell_cmd = app.add_subcommand("shell", "read-only show-command console");
    add_bundle_options(shell_cmd);
    shell_cmd->add_option("--at", shell_at, "run to this time before opening the shell");

    CLI11_PARSE(app, argc, argv);

    if (check_cmd->parsed()) return check_config_command(check_path);

    std::string arg_error;
    auto configs = parse_config_args(config_args, arg_error);
    if (!arg_error.empty()) {
        std::cerr << arg_error << "\n";
        return 2;
    }

    std::optional<mcastsim::SimTime> until_ms;
    if (until) until_ms = *until;

    auto loaded = mcastsim::SimInstance::load(topology, configs, scenario, until_ms);
    if (std::holds_alternative<std::vector<mcastsim::LoadError>>(loaded)) {
        for (const auto& e : std::get<std::vector<mcastsim::LoadError>>(loaded)) {
            std::cerr << e.str() << "\n";
        }
        return 2;
    }
    auto& sim = *std::get<std::unique_ptr<mcastsim::SimInstance>>(loaded);

    if (shell_cmd->parsed()) {
        if (shell_at) sim.run_until(*shell_at);
        mcastsim::run_shell(sim, std::cin, std::cout);
        return 0;
    }

    mcastsim::RunReport report = sim.run();
    if (!log_path.empty()) {
        std::ofstream out(log_path, std::ios::binary);
        out << sim.event_log_text();
        report.log_path = log_path;
    }
    std::string report_text = report.render();
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        out << report_text;
    }
    std::cout << report_text;
    return report.passed() ? 0 : 1;
}
