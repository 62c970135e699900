// ipsme run --config <path> --scenario <name> --seed <u64> --duplicates <k>
//           --mode <det|conc> --trace-out <path> --report <path>
//
// Exit status: 0 when every property holds, 1 when a property fails,
// 2 on configuration errors or a run that never reaches quiescence.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "ipsme/error.hpp"
#include "ipsme/harness/config.hpp"
#include "ipsme/harness/properties.hpp"
#include "ipsme/harness/topology.hpp"

namespace {

using namespace ipsme;
using namespace ipsme::harness;

struct RunArgs {
    std::string config;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::uint64_t duplicates = 1;
    std::string mode = "det";
    std::string trace_out;
    std::string report;
};

void write_report(const std::string &path, const nlohmann::json &doc) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write report to " + path);
    out << doc.dump(2) << '\n';
}

int run(const RunArgs &args) {
    nlohmann::json doc{{"scenario", args.scenario}, {"mode", args.mode}, {"duplicates", args.duplicates}};
    try {
        TopologyConfig config = load_config(args.config);
        if (args.seed) config.seed = *args.seed;
        doc["seed"] = config.seed;
        auto it = config.scenarios.find(args.scenario);
        if (it == config.scenarios.end())
            throw Error(ErrorCode::ConfigError, "scenarios: no scenario named '" + args.scenario + "'");

        BuildOptions options;
        options.mode = args.mode == "conc" ? Mode::Concurrent : Mode::Deterministic;
        auto topology = build(config, options);
        RunResult result = run_scenario(*topology, it->second, args.duplicates);
        PropertyReport report = check_properties(result, config, it->second);

        if (!args.trace_out.empty()) {
            std::ofstream out(args.trace_out);
            if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write trace to " + args.trace_out);
            write_trace(out, result.trace);
        }
        doc["properties"] = to_json(report);
        doc["metrics"] = to_json(result.metrics);
        write_report(args.report, doc);

        for (const auto &r : report.results)
            std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : "  " + r.detail) << '\n';
        std::cout << "events " << result.metrics.events << ", link frames " << result.metrics.link_frames << '\n';
        return report.all_passed() ? 0 : 1;
    } catch (const Error &e) {
        doc["error"] = e.what();
        try {
            write_report(args.report, doc);
        } catch (const Error &) {
        }
        std::cerr << "ipsme: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Idempotent publish/subscribe topology harness"};
    app.require_subcommand(1);

    RunArgs args;
    auto *cmd = app.add_subcommand("run", "Build a topology and run one scenario");
    cmd->add_option("--config", args.config, "Topology config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scenario", args.scenario, "Scenario name from the config")->required();
    cmd->add_option("--seed", args.seed, "Overrides the config seed");
    cmd->add_option("--duplicates", args.duplicates, "Times each scenario envelope is published")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1000}));
    cmd->add_option("--mode", args.mode, "det (single activity) or conc (thread pool)")
        ->check(CLI::IsMember({"det", "conc"}));
    cmd->add_option("--trace-out", args.trace_out, "Write the event trace here");
    cmd->add_option("--report", args.report, "Write a JSON property/metrics report here");

    CLI11_PARSE(app, argc, argv);
    return run(args);
}
