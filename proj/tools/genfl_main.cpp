#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "genfl/genfl.hpp"

namespace {

// Exit codes: 0 ok, 2 usage, 3 config parse, 4 config validation, 5 io,
// 1 anything else. Errors are one line on stderr: "error: <category>: <msg>".
constexpr int kExitUsage = 2;
constexpr int kExitConfigParse = 3;
constexpr int kExitConfigValidation = 4;
constexpr int kExitIo = 5;
constexpr int kExitInternal = 1;

int fail(const char* category, const std::string& msg, int code) {
    std::cerr << "error: " << category << ": " << msg << "\n";
    return code;
}

std::vector<std::string> split_list(const std::string& joined, const char* flag) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (true) {
        const auto comma = joined.find(',', start);
        std::string tok = joined.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.erase(0, 1);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
        if (tok.empty())
            throw std::invalid_argument(std::string("empty entry in ") + flag);
        items.push_back(std::move(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GenFL federated-learning simulator"};
    app.require_subcommand(1);

    std::string run_config, run_out;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::size_t> run_rounds;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    run_cmd->add_option("--config", run_config, "config file (key=value)")->required();
    run_cmd->add_option("--seed", run_seed, "override seed");
    run_cmd->add_option("--rounds", run_rounds, "override round count");
    run_cmd->add_option("--out", run_out, "override output directory");

    std::string sweep_config, sweep_axis, sweep_values;
    auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per axis value");
    sweep_cmd->add_option("--config", sweep_config, "base config file")->required();
    sweep_cmd->add_option("--axis", sweep_axis, "config key to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();

    std::string plot_inputs, plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "render accuracy curves from metric CSVs");
    plot_cmd->add_option("--inputs", plot_inputs, "comma-separated metrics.csv paths")->required();
    plot_cmd->add_option("--out", plot_out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), kExitUsage);
    }

    try {
        if (run_cmd->parsed()) {
            genfl::ExperimentConfig cfg = genfl::load_config(run_config);
            if (run_seed) cfg.seed = *run_seed;
            if (run_rounds) cfg.rounds = *run_rounds;
            if (!run_out.empty()) cfg.output_dir = run_out;
            cfg.validate();
            genfl::run_to_dir(cfg);
            std::cout << (std::filesystem::path(cfg.output_dir) / "metrics.csv").string() << "\n";
        } else if (sweep_cmd->parsed()) {
            const genfl::ExperimentConfig base = genfl::load_config(sweep_config);
            const auto values = split_list(sweep_values, "--values");
            const bool parallel = std::thread::hardware_concurrency() > 1;
            genfl::run_sweep(base, sweep_axis, values, parallel);
            std::cout << (std::filesystem::path(base.output_dir) / "sweep.csv").string() << "\n";
        } else if (plot_cmd->parsed()) {
            std::vector<std::filesystem::path> inputs;
            for (auto& p : split_list(plot_inputs, "--inputs")) inputs.emplace_back(p);
            genfl::plot_to_file(inputs, plot_out);
            std::cout << plot_out << "\n";
        }
    } catch (const genfl::ConfigParseError& e) {
        return fail("config-parse", e.what(), kExitConfigParse);
    } catch (const genfl::ConfigValidationError& e) {
        return fail("config-validation", e.what(), kExitConfigValidation);
    } catch (const genfl::IoError& e) {
        return fail("io", e.what(), kExitIo);
    } catch (const std::filesystem::filesystem_error& e) {
        return fail("io", e.what(), kExitIo);
    } catch (const std::invalid_argument& e) {
        return fail("usage", e.what(), kExitUsage);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), kExitInternal);
    }
    return 0;
}
