#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "csid/config.hpp"
#include "csid/errors.hpp"
#include "csid/harness.hpp"
#include "csid/kernels.hpp"

namespace {

// --out wins, then CSID_OUT, then the config's own output path.
std::string resolve_out_dir(const std::string& flag_value, const csid::ExperimentConfig& config) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("CSID_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return config.out_dir;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Collaborative identification of clustered linear systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mode_text;
    std::string backend_text;
    std::uint64_t seed = 0;
    int iterations = 0;

    CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    run_cmd->add_option("--config", config_path, "Experiment config file")->required();
    run_cmd->add_option("--seed", seed, "Master seed")->required();
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_option("--mode", mode_text, "Override the config's mode");
    run_cmd->add_option("--iterations", iterations, "Override the config's iteration count R");
    run_cmd->add_option("--kernels", backend_text, "Force a kernel backend (scalar|avx2)");

    std::string plot_in, plot_out;
    CLI::App* plot_cmd = app.add_subcommand("plot", "Build plot tables and charts from run output");
    plot_cmd->add_option("--in", plot_in, "Directory containing run histories")->required();
    plot_cmd->add_option("--out", plot_out, "Directory for plot files")->required();

    CLI::App* check_cmd = app.add_subcommand("check-config", "Validate a config file");
    check_cmd->add_option("--config", config_path, "Experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        if (!backend_text.empty()) {
            if (backend_text == "scalar") {
                csid::kernels::set_backend(csid::kernels::Backend::scalar);
            } else if (backend_text == "avx2") {
                csid::kernels::set_backend(csid::kernels::Backend::avx2);
            } else {
                throw csid::ConfigError("unknown kernel backend '" + backend_text + "'");
            }
        }
        const csid::ExperimentConfig config = csid::load_config(config_path);
        csid::RunOptions options;
        options.seed = seed;
        options.out_dir = resolve_out_dir(out_dir, config);
        if (!mode_text.empty()) {
            csid::Mode mode;
            if (!csid::parse_mode(mode_text, mode)) {
                throw csid::ConfigError("unknown mode override '" + mode_text + "'");
            }
            options.mode_override = mode;
        }
        if (iterations != 0) options.iterations_override = iterations;
        csid::run_experiment(config, options);
        std::cout << "wrote results to " << options.out_dir << "\n";
        return 0;
    }
    if (plot_cmd->parsed()) {
        csid::emit_plot_data(plot_in, plot_out);
        std::cout << "wrote plot files to " << plot_out << "\n";
        return 0;
    }
    if (check_cmd->parsed()) {
        const csid::ExperimentConfig config = csid::load_config(config_path);
        std::cout << "ok: " << config.num_clusters << " clusters, " << config.total_systems()
                  << " systems, mode " << csid::mode_name(config.mode) << "\n";
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const csid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const csid::DegeneracyError& e) {
        std::cerr << "degeneracy error: " << e.what() << "\n";
        return 2;
    } catch (const csid::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
