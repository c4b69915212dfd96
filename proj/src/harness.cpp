#include "csid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "csid/baselines.hpp"
#include "csid/errors.hpp"
#include "csid/kernels.hpp"
#include "csid/metrics.hpp"
#include "csid/moments.hpp"
#include "csid/report.hpp"
#include "csid/strings.hpp"

namespace csid {

namespace fs = std::filesystem;

namespace {

double median(std::vector<double> values) {
    if (values.empty()) throw ConfigError("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::vector<Matrix> truth_thetas(const std::vector<ClusterGroundTruth>& truths) {
    std::vector<Matrix> thetas;
    thetas.reserve(truths.size());
    for (const auto& truth : truths) thetas.push_back(truth.theta);
    return thetas;
}

// N_i * sum_{t < T} Sigma_t for every system; the theoretical step rule
// consumes these per estimated cluster each iteration.
std::vector<Matrix> per_system_moments(const std::vector<SystemSpec>& specs,
                                       const std::vector<ClusterGroundTruth>& truths) {
    std::vector<Matrix> moments;
    moments.reserve(specs.size());
    for (const auto& spec : specs) {
        moments.push_back(moment_sum({spec}, truths[spec.cluster_id]));
    }
    return moments;
}

struct SummaryWriter {
    std::vector<std::pair<std::string, std::string>> entries;
    void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, to_decimal_string(value)); }
    void add(const std::string& key, long long value) { add(key, std::to_string(value)); }
    void write(const std::string& path) const { write_key_value_file(path, entries); }
};

void add_common_summary(SummaryWriter& summary, const ExperimentConfig& config,
                        const RunOptions& options, Mode mode, int iterations) {
    summary.add("mode", mode_name(mode));
    summary.add("seed", std::to_string(options.seed));
    summary.add("K", static_cast<long long>(config.num_clusters));
    summary.add("M", static_cast<long long>(config.total_systems()));
    summary.add("N", static_cast<long long>(config.num_rollouts));
    summary.add("T", static_cast<long long>(config.horizon));
    summary.add("R", static_cast<long long>(iterations));
    summary.add("step_rule", config.step_rule == StepRule::fixed ? "fixed" : "theoretical");
    summary.add("eta", config.eta);
    summary.add("alpha0", config.alpha0);
    summary.add("kernel_backend", kernels::backend_name(kernels::active_backend()));
}

void add_separation_summary(SummaryWriter& summary,
                            const std::vector<ClusterGroundTruth>& truths) {
    if (truths.size() < 2) return;
    const SeparationReport sep = separation(truths);
    summary.add("delta_min", sep.delta_min);
    summary.add("delta_max", sep.delta_max);
}

void add_final_errors(SummaryWriter& summary, const RunHistory& history) {
    if (history.iterations.empty()) return;
    const IterationRecord& last = history.iterations.back();
    for (std::size_t j = 0; j < last.cluster_errors.size(); ++j) {
        summary.add("final_error_cluster_" + std::to_string(j), last.cluster_errors[j]);
    }
    if (last.misclassified >= 0) {
        summary.add("final_misclassified_total", static_cast<long long>(last.misclassified));
    }
    for (std::size_t j = 0; j < last.step_sizes.size(); ++j) {
        summary.add("step_size_cluster_" + std::to_string(j), last.step_sizes[j]);
    }
}

RunHistory run_clustered(const ExperimentConfig& config, std::uint64_t seed, int iterations,
                         const std::vector<SystemSpec>& specs,
                         const std::vector<ClusterGroundTruth>& truths,
                         const std::vector<BatchData>& batches) {
    RandomStream init_rng = derive_stream(seed, StreamPurpose::warm_init, 0);
    const ModelSet init = warm_init(truths, config.alpha0, init_rng);

    RunConfig run_config;
    run_config.step_rule = config.step_rule;
    run_config.fixed_eta = config.eta;
    run_config.iterations = iterations;
    run_config.truth_thetas = truth_thetas(truths);
    for (const auto& spec : specs) run_config.true_labels.push_back(spec.cluster_id);
    if (config.step_rule == StepRule::theoretical) {
        run_config.system_moments = per_system_moments(specs, truths);
    }
    return run(run_config, batches, init);
}

void mode_clustered(const ExperimentConfig& config, const RunOptions& options, int iterations,
                    SummaryWriter& summary) {
    const auto truths = config.truths();
    const auto specs = config.system_specs();
    const auto batches = generate_batches(specs, truths, options.seed);
    const RunHistory history =
        run_clustered(config, options.seed, iterations, specs, truths, batches);
    write_history_csv(options.out_dir + "/history_clustered.csv", history_rows(history));
    add_final_errors(summary, history);

    // Trajectory-count diagnostics; the analysis constants are unknown, so
    // these ratios are informational only.
    if (truths.size() >= 2) {
        const AssumptionReport diag = assumption_diagnostics(specs, truths, config.alpha0, 0.05);
        double ratio_min = diag.trajectory_ratios[0][0];
        for (const auto& per_system : diag.trajectory_ratios) {
            for (const double r : per_system) ratio_min = std::min(ratio_min, r);
        }
        summary.add("assumption_trajectory_ratio_min", ratio_min);
        summary.add("assumption_separation_margin_rhs", diag.separation_margin_rhs);
        summary.add("assumption_constants", "unit (informational only)");
    }
    summary.write(options.out_dir + "/summary_clustered.txt");
}

void mode_pooled(const ExperimentConfig& config, const RunOptions& options, int iterations,
                 SummaryWriter& summary) {
    const auto truths = config.truths();
    const auto specs = config.system_specs();
    const auto batches = generate_batches(specs, truths, options.seed);

    RandomStream init_rng = derive_stream(options.seed, StreamPurpose::warm_init, 0);
    const ModelSet warm = warm_init(truths, config.alpha0, init_rng);
    // The shared model starts from the centroid of the per-cluster
    // initializations; the pooled fixed point does not depend on it.
    Matrix init(warm.thetas[0].rows(), warm.thetas[0].cols());
    for (const auto& theta : warm.thetas) init += theta;
    init *= 1.0 / static_cast<double>(warm.thetas.size());

    const RunHistory history =
        pooled_run(batches, init, config.eta, iterations, truth_thetas(truths));
    write_history_csv(options.out_dir + "/history_pooled.csv", history_rows(history));
    add_final_errors(summary, history);
    summary.write(options.out_dir + "/summary_pooled.txt");
}

void mode_single_agent(const ExperimentConfig& config, const RunOptions& options, int iterations,
                       SummaryWriter& summary) {
    const auto truths = config.truths();
    const auto specs = config.system_specs();
    const auto batches = generate_batches(specs, truths, options.seed);

    RandomStream init_rng = derive_stream(options.seed, StreamPurpose::warm_init, 0);
    const ModelSet warm = warm_init(truths, config.alpha0, init_rng);

    // One representative system per cluster (its first member), estimating
    // from its own data only.
    std::vector<HistoryRow> rows;
    std::vector<RunHistory> histories;
    for (std::size_t j = 0; j < truths.size(); ++j) {
        std::size_t rep = specs.size();
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].cluster_id == static_cast<int>(j)) { rep = i; break; }
        }
        if (rep == specs.size()) {
            throw ConfigError("single_agent: cluster " + std::to_string(j) + " has no systems");
        }
        histories.push_back(single_agent_run(batches[rep], warm.thetas[j], config.eta,
                                             iterations, truths[j].theta));
    }
    for (int r = 0; r < iterations; ++r) {
        for (std::size_t j = 0; j < histories.size(); ++j) {
            const IterationRecord& record = histories[j].iterations[r];
            HistoryRow row;
            row.iteration = r;
            row.cluster = static_cast<int>(j);
            row.spectral_error = record.cluster_errors[0];
            row.misclassified_total = 0;
            row.step_size = config.eta;
            rows.push_back(row);
        }
    }
    write_history_csv(options.out_dir + "/history_single_agent.csv", rows);
    for (std::size_t j = 0; j < histories.size(); ++j) {
        summary.add("final_error_cluster_" + std::to_string(j),
                    histories[j].iterations.back().cluster_errors[0]);
    }
    summary.write(options.out_dir + "/summary_single_agent.txt");
}

void mode_sweep_n(const ExperimentConfig& config, const RunOptions& options, int iterations,
                  SummaryWriter& summary) {
    const auto truths = config.truths();
    std::vector<PlotSeries> median_series;

    for (int n : config.sweep_rollout_counts) {
        ExperimentConfig setting = config;
        setting.num_rollouts = n;
        for (auto& cluster : setting.clusters) cluster.num_rollouts = -1;
        const auto specs = setting.system_specs();

        // counts[s][r]: misclassifications at iteration r under seed index s.
        std::vector<std::vector<double>> counts;
        for (int s = 0; s < config.seed_count; ++s) {
            const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(s);
            const auto batches = generate_batches(specs, truths, seed);
            const RunHistory history =
                run_clustered(setting, seed, iterations, specs, truths, batches);
            write_history_csv(options.out_dir + "/history_N" + std::to_string(n) + "_seed" +
                                  std::to_string(s) + ".csv",
                              history_rows(history));
            std::vector<double> per_iter;
            per_iter.reserve(history.iterations.size());
            for (const auto& record : history.iterations) {
                per_iter.push_back(static_cast<double>(record.misclassified));
            }
            counts.push_back(std::move(per_iter));
        }

        PlotSeries series;
        series.label = "N=" + std::to_string(n);
        for (int r = 0; r < iterations; ++r) {
            std::vector<double> at_r;
            at_r.reserve(counts.size());
            for (const auto& per_iter : counts) at_r.push_back(per_iter[r]);
            series.x.push_back(static_cast<double>(r));
            series.y.push_back(median(at_r));
        }
        summary.add("median_misclassified_iter0_N" + std::to_string(n), series.y.front());
        median_series.push_back(std::move(series));
    }
    write_series_tsv(options.out_dir + "/misclassification_vs_N.tsv", "iteration", median_series);
    summary.add("seed_count", static_cast<long long>(config.seed_count));
    summary.write(options.out_dir + "/summary_sweep_N.txt");
}

void mode_sweep_cluster_size(const ExperimentConfig& config, const RunOptions& options,
                             SummaryWriter& summary) {
    const auto truths = config.truths();
    const ClusterConfig& base = config.clusters.at(0);

    std::vector<PlotSeries> scaling(1);
    scaling[0].label = "median_error";
    double previous_median = 0.0;

    std::vector<std::string> raw_lines;
    for (int m : config.sweep_cluster_sizes) {
        std::vector<double> errors;
        for (int s = 0; s < config.seed_count; ++s) {
            const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(s);
            std::vector<SystemSpec> specs;
            for (int i = 0; i < m; ++i) {
                SystemSpec spec;
                spec.system_id = i;
                spec.cluster_id = 0;
                spec.sigma_x = base.sigma_x;
                spec.sigma_u = base.sigma_u;
                spec.sigma_w = base.sigma_w;
                spec.num_rollouts = config.num_rollouts;
                spec.horizon = config.horizon;
                specs.push_back(spec);
            }
            const auto batches = generate_batches(specs, {truths.at(0)}, seed);
            const Matrix estimate = least_squares_pooled(batches);
            const double error = spectral_error(estimate, truths.at(0).theta);
            errors.push_back(error);
            raw_lines.push_back(std::to_string(m) + "\t" + std::to_string(s) + "\t" +
                                to_decimal_string(error));
        }
        const double med = median(errors);
        scaling[0].x.push_back(static_cast<double>(m));
        scaling[0].y.push_back(med);
        summary.add("median_error_m" + std::to_string(m), med);
        if (previous_median > 0.0) {
            summary.add("shrink_factor_m" + std::to_string(m), previous_median / med);
        }
        previous_median = med;
    }

    std::ofstream rawfile(options.out_dir + "/scaling_raw.tsv");
    if (!rawfile) throw IoError("cannot write scaling_raw.tsv");
    rawfile << "m\tseed\tspectral_error\n";
    for (const auto& line : raw_lines) rawfile << line << "\n";

    write_series_tsv(options.out_dir + "/scaling.tsv", "m", scaling);
    summary.add("seed_count", static_cast<long long>(config.seed_count));
    summary.write(options.out_dir + "/summary_sweep_cluster_size.txt");
}

} // namespace

void run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    if (options.out_dir.empty()) throw ConfigError("run_experiment: empty output directory");
    const Mode mode = options.mode_override.value_or(config.mode);
    const int iterations = options.iterations_override.value_or(config.iterations);
    if (iterations < 1) throw ConfigError("run_experiment: iteration override must be >= 1");
    ensure_dir(options.out_dir);

    const auto start = std::chrono::steady_clock::now();
    SummaryWriter summary;
    add_common_summary(summary, config, options, mode, iterations);
    add_separation_summary(summary, config.truths());

    switch (mode) {
        case Mode::clustered:
            mode_clustered(config, options, iterations, summary);
            break;
        case Mode::pooled:
            mode_pooled(config, options, iterations, summary);
            break;
        case Mode::single_agent:
            mode_single_agent(config, options, iterations, summary);
            break;
        case Mode::sweep_n:
            mode_sweep_n(config, options, iterations, summary);
            break;
        case Mode::sweep_cluster_size:
            mode_sweep_cluster_size(config, options, summary);
            break;
    }

    // Refresh the plot files from every history present so far; the size
    // sweep emits its own scaling tables instead.
    if (mode != Mode::sweep_cluster_size) {
        emit_plot_data(options.out_dir, options.out_dir);
    }

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    SummaryWriter timing;
    timing.add("elapsed_seconds", elapsed.count());
    timing.write(options.out_dir + "/timing_" + std::string(mode_name(mode)) + ".txt");
}

namespace {

struct LoadedHistory {
    std::map<int, PlotSeries> error_by_cluster;  // x: iteration, y: spectral error
    PlotSeries misclassified;
};

LoadedHistory load_history(const std::string& path) {
    const std::vector<HistoryRow> rows = read_history_csv(path);
    if (rows.empty()) throw IoError(path + ": history has no data rows");
    LoadedHistory loaded;
    for (const auto& row : rows) {
        auto& series = loaded.error_by_cluster[row.cluster];
        series.x.push_back(static_cast<double>(row.iteration));
        series.y.push_back(row.spectral_error);
        if (row.cluster == rows[0].cluster) {
            loaded.misclassified.x.push_back(static_cast<double>(row.iteration));
            loaded.misclassified.y.push_back(static_cast<double>(row.misclassified_total));
        }
    }
    return loaded;
}

void emit_comparison(const std::string& out_dir, const std::string& stem,
                     const std::string& title, const LoadedHistory& a, const char* a_name,
                     const LoadedHistory& b, const char* b_name) {
    std::vector<PlotSeries> series;
    for (const auto& [cluster, s] : a.error_by_cluster) {
        PlotSeries named = s;
        named.label = "cluster " + std::to_string(cluster) + " " + a_name;
        series.push_back(std::move(named));
    }
    for (const auto& [cluster, s] : b.error_by_cluster) {
        PlotSeries named = s;
        named.label = "cluster " + std::to_string(cluster) + " " + b_name;
        series.push_back(std::move(named));
    }
    write_series_tsv(out_dir + "/" + stem + ".tsv", "iteration", series);
    write_line_chart_svg(out_dir + "/" + stem + ".svg", title, "iteration", "spectral error",
                         series, /*log_y=*/true);
}

} // namespace

void emit_plot_data(const std::string& in_dir, const std::string& out_dir) {
    if (!fs::exists(in_dir)) throw IoError("input directory does not exist: " + in_dir);
    ensure_dir(out_dir);

    std::optional<LoadedHistory> clustered, pooled, single_agent;
    // Sweep histories grouped by N: name -> per-seed misclassification series.
    std::map<long long, std::vector<PlotSeries>> sweep_by_n;

    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "history_clustered.csv") {
            clustered = load_history(entry.path().string());
        } else if (name == "history_pooled.csv") {
            pooled = load_history(entry.path().string());
        } else if (name == "history_single_agent.csv") {
            single_agent = load_history(entry.path().string());
        } else if (name.starts_with("history_N") && name.ends_with(".csv")) {
            const std::size_t seed_pos = name.find("_seed");
            if (seed_pos == std::string::npos) continue;
            long long n = 0;
            if (!parse_long(name.substr(9, seed_pos - 9), n)) continue;
            sweep_by_n[n].push_back(load_history(entry.path().string()).misclassified);
        }
    }

    bool wrote_any = false;
    const std::pair<const char*, const std::optional<LoadedHistory>*> singles[] = {
        {"clustered", &clustered}, {"pooled", &pooled}, {"single_agent", &single_agent}};
    for (const auto& [name, loaded] : singles) {
        if (!loaded->has_value()) continue;
        std::vector<PlotSeries> series;
        for (const auto& [cluster, s] : (*loaded)->error_by_cluster) {
            PlotSeries named = s;
            named.label = "cluster " + std::to_string(cluster);
            series.push_back(std::move(named));
        }
        const std::string stem = out_dir + "/error_" + name;
        write_series_tsv(stem + ".tsv", "iteration", series);
        write_line_chart_svg(stem + ".svg", std::string("Estimation error: ") + name,
                             "iteration", "spectral error", series, /*log_y=*/true);
        wrote_any = true;
    }
    if (clustered && pooled) {
        emit_comparison(out_dir, "error_clustered_vs_pooled",
                        "Estimation error: clustered vs pooled", *clustered, "clustered",
                        *pooled, "pooled");
    }
    if (clustered && single_agent) {
        emit_comparison(out_dir, "error_clustered_vs_single_agent",
                        "Estimation error: collaborative vs single agent", *clustered,
                        "clustered", *single_agent, "single");
    }

    std::vector<PlotSeries> misclass_series;
    if (!sweep_by_n.empty()) {
        for (const auto& [n, seeds] : sweep_by_n) {
            PlotSeries med;
            med.label = "N=" + std::to_string(n);
            const std::size_t iterations = seeds[0].x.size();
            for (std::size_t r = 0; r < iterations; ++r) {
                std::vector<double> at_r;
                for (const auto& s : seeds) {
                    if (r < s.y.size()) at_r.push_back(s.y[r]);
                }
                med.x.push_back(static_cast<double>(r));
                med.y.push_back(median(at_r));
            }
            misclass_series.push_back(std::move(med));
        }
    } else if (clustered) {
        PlotSeries s = clustered->misclassified;
        s.label = "clustered";
        misclass_series.push_back(std::move(s));
    }
    if (!misclass_series.empty()) {
        write_series_tsv(out_dir + "/misclassification_vs_iteration.tsv", "iteration",
                         misclass_series);
        write_line_chart_svg(out_dir + "/misclassification_vs_iteration.svg",
                             "Misclassified systems per iteration", "iteration",
                             "misclassified systems", misclass_series, /*log_y=*/false);
        wrote_any = true;
    }

    if (!wrote_any) {
        throw IoError("no run histories found in " + in_dir);
    }
}

} // namespace csid
