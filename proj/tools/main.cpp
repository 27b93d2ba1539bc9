#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "nnlif/config.hpp"
#include "nnlif/errors.hpp"
#include "nnlif/experiment.hpp"
#include "nnlif/presets.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nnlif::IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// NNLIF_THREADS, when set, is a hard cap on the configured worker count.
void apply_thread_cap(nnlif::ExperimentConfig& cfg) {
    const char* env = std::getenv("NNLIF_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1)
        throw nnlif::ValidationError("NNLIF_THREADS must be a positive integer");
    cfg.solver.workers = std::min<unsigned>(cfg.solver.workers, static_cast<unsigned>(cap));
}

int execute(const nnlif::ExperimentConfig& cfg) {
    const nnlif::ExperimentResult result = nnlif::run_experiment(cfg);
    for (const auto& path : result.written) std::printf("wrote %s\n", path.c_str());
    if (result.status) {
        std::printf("status %s (t_stop = %.6g)\n", nnlif::run_status_name(*result.status),
                    result.runs.empty() ? 0.0 : result.runs.front().t_stop);
        if (*result.status == nnlif::RunStatus::BlowUp) return 2;
        if (*result.status == nnlif::RunStatus::DiffusionFailure) return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled excitatory-inhibitory leaky integrate-and-fire mean-field toolkit"};
    app.require_subcommand(1);

    std::string run_config_path;
    auto* run_cmd = app.add_subcommand("run", "execute the experiment described by a config file");
    run_cmd->add_option("config", run_config_path, "config file (key = value lines)")
        ->required()
        ->check(CLI::ExistingFile);

    std::string preset_name;
    std::string preset_out;
    bool preset_list = false;
    auto* preset_cmd = app.add_subcommand("preset", "execute a named built-in experiment");
    preset_cmd->add_option("name", preset_name, "preset name");
    preset_cmd->add_option("--out", preset_out, "output directory (defaults to the preset name)");
    preset_cmd->add_flag("--list", preset_list, "list available presets and exit");

    std::string sweep_config_path;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "execute a bifurcation sweep described by a config file");
    sweep_cmd->add_option("config", sweep_config_path, "config file with mode = bifurcation")
        ->required()
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // collapse CLI11's per-error exit codes onto the documented contract:
        // 0 for --help, 1 for any argument problem
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) {
            nnlif::ExperimentConfig cfg = nnlif::parse_config(read_file(run_config_path));
            apply_thread_cap(cfg);
            return execute(cfg);
        }
        if (preset_cmd->parsed()) {
            if (preset_list) {
                for (const auto& p : nnlif::preset_table())
                    std::printf("%-18s %s\n", p.name.c_str(), p.summary.c_str());
                return 0;
            }
            if (preset_name.empty())
                throw nnlif::ValidationError("preset needs a name (or --list)");
            nnlif::ExperimentConfig cfg = nnlif::preset_config(preset_name);
            if (!preset_out.empty()) cfg.output_dir = preset_out;
            apply_thread_cap(cfg);
            return execute(cfg);
        }
        if (sweep_cmd->parsed()) {
            nnlif::ExperimentConfig cfg = nnlif::parse_config(read_file(sweep_config_path));
            if (cfg.mode != nnlif::ExperimentMode::Bifurcation)
                throw nnlif::ValidationError("sweep requires a config with mode = bifurcation");
            apply_thread_cap(cfg);
            return execute(cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
