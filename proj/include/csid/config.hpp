#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csid/lti_sim.hpp"
#include "csid/matrix.hpp"
#include "csid/sysid.hpp"

namespace csid {

enum class Mode {
    clustered,
    pooled,
    single_agent,
    sweep_n,
    sweep_cluster_size,
};

const char* mode_name(Mode mode);
bool parse_mode(const std::string& text, Mode& out);

struct ClusterConfig {
    Matrix a;
    Matrix b;
    int members = 1;
    double sigma_x = 0.0;
    double sigma_u = 0.0;
    double sigma_w = 0.0;
    int num_rollouts = -1;  // -1: use the global N

    bool operator==(const ClusterConfig&) const = default;
};

// Experiment description, loaded from the plain-text config format
// documented in the README (key = value lines plus cluster { ... } blocks,
// matrices as nested number arrays).
struct ExperimentConfig {
    Mode mode = Mode::clustered;
    std::uint64_t master_seed = 0;
    int num_clusters = 0;        // K
    int num_rollouts = 1;        // N (global default)
    int horizon = 1;             // T
    int iterations = 1;          // R
    StepRule step_rule = StepRule::fixed;
    double eta = 1e-3;
    double alpha0 = 0.25;
    int seed_count = 20;         // statistical repetitions in sweep modes
    std::vector<int> sweep_rollout_counts = {5, 20, 100};
    std::vector<int> sweep_cluster_sizes = {1, 4, 16};
    std::string out_dir = "results";
    std::vector<ClusterConfig> clusters;

    bool operator==(const ExperimentConfig&) const = default;

    int total_systems() const;

    std::vector<ClusterGroundTruth> truths() const;
    // One spec per system, cluster by cluster, system ids 0..M-1.
    std::vector<SystemSpec> system_specs() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

} // namespace csid
