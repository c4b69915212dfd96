#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "csid/config.hpp"
#include "csid/errors.hpp"
#include "csid/harness.hpp"
#include "csid/report.hpp"
#include "csid/rng.hpp"

using namespace csid;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("csid_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Small two-cluster setup that runs in milliseconds.
ExperimentConfig tiny_config() {
    ExperimentConfig config;
    config.mode = Mode::clustered;
    config.master_seed = 5;
    config.num_clusters = 2;
    config.num_rollouts = 4;
    config.horizon = 5;
    config.iterations = 6;
    config.eta = 2e-3;
    config.alpha0 = 0.25;
    config.seed_count = 3;
    config.sweep_rollout_counts = {2, 8};
    config.sweep_cluster_sizes = {1, 4};

    ClusterConfig c1;
    c1.a = Matrix{{0.5, 0.1}, {0.0, 0.3}};
    c1.b = Matrix{{1.0}, {0.5}};
    c1.members = 3;
    c1.sigma_x = c1.sigma_u = c1.sigma_w = 0.2;
    ClusterConfig c2 = c1;
    c2.a = Matrix{{-0.4, 0.0}, {0.2, 0.1}};
    c2.b = Matrix{{0.3}, {1.2}};
    c2.members = 2;
    config.clusters = {c1, c2};
    return config;
}

} // namespace

TEST_CASE("clustered experiments write schema-stable deterministic CSVs") {
    const ExperimentConfig config = tiny_config();
    RunOptions options;
    options.seed = 17;

    options.out_dir = scratch_dir("det_a");
    run_experiment(config, options);
    const std::string dir_a = options.out_dir;

    options.out_dir = scratch_dir("det_b");
    run_experiment(config, options);

    const std::string csv_a = slurp(dir_a + "/history_clustered.csv");
    const std::string csv_b = slurp(options.out_dir + "/history_clustered.csv");
    CHECK(csv_a == csv_b);

    std::istringstream lines(csv_a);
    std::string header;
    std::getline(lines, header);
    CHECK(header == std::string(kHistoryCsvHeader));
    // 6 iterations x 2 clusters data rows.
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 12);
    CHECK(fs::exists(dir_a + "/summary_clustered.txt"));
}

TEST_CASE("the bundled full-scale config runs end to end") {
    const ExperimentConfig config =
        load_config(std::string(CSID_CONFIG_DIR) + "/paper_sec4.cfg");
    RunOptions options;
    options.seed = 1;
    options.out_dir = scratch_dir("fullscale");
    run_experiment(config, options);

    const auto rows = read_history_csv(options.out_dir + "/history_clustered.csv");
    CHECK(rows.size() == 100 * 3);  // R iterations x K clusters
    bool reaches_zero = false;
    double error_at[2][3] = {{0}, {0}};  // iterations 5 and 30 per cluster
    for (const auto& row : rows) {
        if (row.misclassified_total == 0) reaches_zero = true;
        if (row.iteration == 5) error_at[0][row.cluster] = row.spectral_error;
        if (row.iteration == 30) error_at[1][row.cluster] = row.spectral_error;
    }
    CHECK(reaches_zero);
    CHECK(rows.back().spectral_error < 0.1);
    for (int j = 0; j < 3; ++j) {
        CHECK(error_at[1][j] < error_at[0][j]);  // errors keep declining
    }
}

TEST_CASE("noiseless single agent mode converges to the truth") {
    ExperimentConfig config = tiny_config();
    config.mode = Mode::single_agent;
    for (auto& cluster : config.clusters) cluster.sigma_w = 0.0;  // library accepts 0
    config.num_rollouts = 6;
    config.horizon = 8;
    config.iterations = 8000;
    config.eta = 2e-2;

    RunOptions options;
    options.seed = 3;
    options.out_dir = scratch_dir("noiseless");
    run_experiment(config, options);

    const auto rows = read_history_csv(options.out_dir + "/history_single_agent.csv");
    REQUIRE_FALSE(rows.empty());
    double final_error[2] = {1.0, 1.0};
    for (const auto& row : rows) final_error[row.cluster] = row.spectral_error;
    CHECK(final_error[0] < 1e-6);
    CHECK(final_error[1] < 1e-6);
}

TEST_CASE("a single-cluster clustered run works end to end") {
    ExperimentConfig config = tiny_config();
    config.num_clusters = 1;
    config.clusters.resize(1);
    RunOptions options;
    options.seed = 8;
    options.out_dir = scratch_dir("single_cluster");
    run_experiment(config, options);
    const auto rows = read_history_csv(options.out_dir + "/history_clustered.csv");
    CHECK(rows.size() == 6);  // 6 iterations x 1 cluster
    CHECK(rows.back().misclassified_total == 0);
}

TEST_CASE("mode and iteration overrides take effect") {
    const ExperimentConfig config = tiny_config();
    RunOptions options;
    options.seed = 4;
    options.out_dir = scratch_dir("override");
    options.mode_override = Mode::pooled;
    options.iterations_override = 3;
    run_experiment(config, options);
    const auto rows = read_history_csv(options.out_dir + "/history_pooled.csv");
    CHECK(rows.size() == 3 * 2);  // 3 iterations x 2 clusters
}

TEST_CASE("sweep over rollout counts reports weakly decreasing early misclassification") {
    ExperimentConfig config = tiny_config();
    config.mode = Mode::sweep_n;
    // Noise level where the smallest N actually misclassifies sometimes.
    for (auto& cluster : config.clusters) cluster.sigma_w = 1.5;
    config.sweep_rollout_counts = {2, 8, 32};
    config.iterations = 2;
    config.seed_count = 5;

    RunOptions options;
    options.seed = 29;
    options.out_dir = scratch_dir("sweep");
    run_experiment(config, options);

    CHECK(fs::exists(options.out_dir + "/history_N2_seed0.csv"));
    CHECK(fs::exists(options.out_dir + "/history_N32_seed4.csv"));
    CHECK(fs::exists(options.out_dir + "/misclassification_vs_N.tsv"));

    // First data line of the TSV holds the iteration-0 medians per N.
    std::ifstream tsv(options.out_dir + "/misclassification_vs_N.tsv");
    std::string header, first;
    std::getline(tsv, header);
    std::getline(tsv, first);
    std::istringstream fields(first);
    double iteration, m2, m8, m32;
    fields >> iteration >> m2 >> m8 >> m32;
    CHECK(m2 >= m8);
    CHECK(m8 >= m32);
}

TEST_CASE("cluster size sweep writes the scaling tables") {
    ExperimentConfig config = tiny_config();
    config.mode = Mode::sweep_cluster_size;
    config.seed_count = 4;
    config.sweep_cluster_sizes = {1, 4};
    config.num_rollouts = 16;

    RunOptions options;
    options.seed = 31;
    options.out_dir = scratch_dir("scaling");
    run_experiment(config, options);

    CHECK(fs::exists(options.out_dir + "/scaling.tsv"));
    CHECK(fs::exists(options.out_dir + "/scaling_raw.tsv"));
    const std::string summary = slurp(options.out_dir + "/summary_sweep_cluster_size.txt");
    CHECK(summary.find("median_error_m1") != std::string::npos);
    CHECK(summary.find("shrink_factor_m4") != std::string::npos);
}

TEST_CASE("plot generation covers the comparison figures") {
    const ExperimentConfig config = tiny_config();
    RunOptions options;
    options.seed = 11;
    options.out_dir = scratch_dir("plot_in");
    run_experiment(config, options);
    options.mode_override = Mode::pooled;
    run_experiment(config, options);
    options.mode_override = Mode::single_agent;
    run_experiment(config, options);

    const std::string plot_dir = scratch_dir("plot_out");
    emit_plot_data(options.out_dir, plot_dir);
    CHECK(fs::exists(plot_dir + "/error_clustered_vs_pooled.tsv"));
    CHECK(fs::exists(plot_dir + "/error_clustered_vs_pooled.svg"));
    CHECK(fs::exists(plot_dir + "/error_clustered_vs_single_agent.svg"));
    CHECK(fs::exists(plot_dir + "/misclassification_vs_iteration.svg"));

    const std::string svg = slurp(plot_dir + "/error_clustered_vs_pooled.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("single iteration histories still plot") {
    const ExperimentConfig config = tiny_config();
    RunOptions options;
    options.seed = 12;
    options.out_dir = scratch_dir("oneiter_in");
    options.iterations_override = 1;
    run_experiment(config, options);
    const std::string plot_dir = scratch_dir("oneiter_out");
    emit_plot_data(options.out_dir, plot_dir);
    CHECK(fs::exists(plot_dir + "/misclassification_vs_iteration.svg"));
}

TEST_CASE("plotting rejects missing or empty histories") {
    const std::string empty_dir = scratch_dir("empty_in");
    const std::string out = scratch_dir("empty_out");
    CHECK_THROWS_AS(emit_plot_data(empty_dir, out), IoError);
    CHECK_THROWS_AS(emit_plot_data("/nonexistent/dir", out), IoError);

    // Header-only history: an error, not an empty chart.
    {
        std::ofstream csv(empty_dir + "/history_clustered.csv");
        csv << kHistoryCsvHeader << "\n";
    }
    CHECK_THROWS_AS(emit_plot_data(empty_dir, out), IoError);

    // Malformed header.
    {
        std::ofstream csv(empty_dir + "/history_clustered.csv");
        csv << "bogus,header\n1,2,3,4,5\n";
    }
    CHECK_THROWS_AS(emit_plot_data(empty_dir, out), IoError);

    // Malformed data rows.
    {
        std::ofstream csv(empty_dir + "/history_clustered.csv");
        csv << kHistoryCsvHeader << "\n0,0,not_a_number,0,0.001\n";
    }
    CHECK_THROWS_AS(emit_plot_data(empty_dir, out), IoError);
    {
        std::ofstream csv(empty_dir + "/history_clustered.csv");
        csv << kHistoryCsvHeader << "\n0,0,0.5\n";
    }
    CHECK_THROWS_AS(emit_plot_data(empty_dir, out), IoError);
}

TEST_CASE("history rows survive the write/read round trip exactly") {
    RandomStream rng(41);
    std::vector<HistoryRow> rows;
    for (int i = 0; i < 50; ++i) {
        HistoryRow row;
        row.iteration = i / 2;
        row.cluster = i % 2;
        row.spectral_error = std::exp(20.0 * (rng.uniform01() - 0.5)) * rng.normal();
        row.misclassified_total = static_cast<int>(rng.uniform01() * 50);
        row.step_size = rng.uniform01() * 1e-3;
        rows.push_back(row);
    }
    const std::string dir = scratch_dir("roundtrip");
    write_history_csv(dir + "/h.csv", rows);
    const auto back = read_history_csv(dir + "/h.csv");
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].iteration == rows[i].iteration);
        CHECK(back[i].cluster == rows[i].cluster);
        CHECK(back[i].spectral_error == rows[i].spectral_error);  // shortest form is exact
        CHECK(back[i].misclassified_total == rows[i].misclassified_total);
        CHECK(back[i].step_size == rows[i].step_size);
    }
}

TEST_CASE("run_experiment surfaces degenerate configurations") {
    ExperimentConfig config = tiny_config();
    config.clusters[1] = config.clusters[0];  // coincident clusters
    config.clusters[1].members = 2;
    RunOptions options;
    options.seed = 1;
    options.out_dir = scratch_dir("degenerate");
    CHECK_THROWS_AS(run_experiment(config, options), DegeneracyError);
}

#ifdef CSID_CLI_PATH
#include <cstdlib>
#include <sys/wait.h>

namespace {

int cli_exit_code(const std::string& args) {
    const int status = std::system((std::string(CSID_CLI_PATH) + " " + args +
                                    " >/dev/null 2>&1")
                                       .c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("cli maps error classes to exit codes") {
    const std::string dir = scratch_dir("cli");

    // 0: success end to end.
    {
        std::ofstream cfg(dir + "/ok.cfg");
        cfg << serialize_config(tiny_config());
    }
    CHECK(cli_exit_code("check-config --config " + dir + "/ok.cfg") == 0);
    CHECK(cli_exit_code("run --config " + dir + "/ok.cfg --seed 3 --out " + dir + "/out") == 0);
    CHECK(cli_exit_code("plot --in " + dir + "/out --out " + dir + "/plots") == 0);

    // 1: config errors.
    {
        std::ofstream cfg(dir + "/bad.cfg");
        cfg << "mode = clustered\nK = oops\n";
    }
    CHECK(cli_exit_code("check-config --config " + dir + "/bad.cfg") == 1);

    // 2: runtime degeneracy (coincident clusters).
    {
        ExperimentConfig degenerate = tiny_config();
        degenerate.clusters[1].a = degenerate.clusters[0].a;
        degenerate.clusters[1].b = degenerate.clusters[0].b;
        std::ofstream cfg(dir + "/degenerate.cfg");
        cfg << serialize_config(degenerate);
    }
    CHECK(cli_exit_code("run --config " + dir + "/degenerate.cfg --seed 1 --out " + dir +
                        "/deg") == 2);

    // 3: io errors.
    CHECK(cli_exit_code("check-config --config " + dir + "/missing.cfg") == 3);
    CHECK(cli_exit_code("plot --in " + dir + "/nothing_here --out " + dir + "/p2") == 3);
}
#endif // CSID_CLI_PATH
