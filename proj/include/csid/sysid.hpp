#pragma once

#include <vector>

#include "csid/lti_sim.hpp"
#include "csid/matrix.hpp"
#include "csid/rng.hpp"

namespace csid {

// The K current model estimates plus the iteration counter.
struct ModelSet {
    std::vector<Matrix> thetas;
    int iteration = 0;

    std::size_t num_clusters() const { return thetas.size(); }
};

// Hard assignment of one system: argmin index plus its one-hot encoding.
struct Assignment {
    int chosen = 0;
    std::vector<double> one_hot;
};

// Per-iteration record: spectral error of each model against its ground
// truth, the assignment of every system, the global misclassification
// count (-1 when true labels were not supplied), the per-cluster step
// sizes used, and the clusters skipped because no system was assigned.
struct IterationRecord {
    int iteration = 0;
    std::vector<double> cluster_errors;
    std::vector<int> assignments;
    int misclassified = -1;
    std::vector<double> step_sizes;
    std::vector<int> empty_clusters;
};

struct RunHistory {
    std::vector<IterationRecord> iterations;
    ModelSet final_models;
};

// How the per-cluster step size is chosen each iteration: a fixed shared
// scalar, or |C_j| / lambda_min(sum of member moment matrices) recomputed
// from the current estimated membership.
enum class StepRule { fixed, theoretical };

struct RunConfig {
    StepRule step_rule = StepRule::fixed;
    double fixed_eta = 1e-3;
    int iterations = 1;  // R
    // Required for the theoretical rule: per-system moment matrix
    // N_i * sum_{t<T} Sigma_t^{(i)}, indexed like the batch list.
    std::vector<Matrix> system_moments;
    // Enable error / misclassification reporting in the history.
    std::vector<Matrix> truth_thetas;
    std::vector<int> true_labels;
};

// ||X - theta Z||_F^2, evaluated from the batch Gram statistics.
double frobenius_cost(const BatchData& batch, const Matrix& theta);

// Hard assignment by cost argmin; ties go to the smallest cluster index.
Assignment estimate_cluster(const BatchData& batch, const ModelSet& models);

// One averaged-gradient update per cluster:
//   theta_j += (2 eta_j / |C_j|) * sum_{i in C_j} (X_i - theta_j Z_i) Z_i^T.
// Clusters with no assigned system are left untouched. The per-cluster
// reduction always runs in ascending list position (the canonical system
// order), never in worker-completion order, so updates are reproducible.
ModelSet model_update_step(const ModelSet& models,
                           const std::vector<Assignment>& assignments,
                           const std::vector<BatchData>& batches,
                           const std::vector<double>& step_sizes);

// Models at spectral distance exactly (1/2 - alpha0) * delta_min from their
// ground truths, in a direction drawn from rng. Requires 0 < alpha0 < 1/2
// and separated clusters. With a single cluster there is no separation to
// scale by; the radius falls back to (1/2 - alpha0) * ||theta_0||.
ModelSet warm_init(const std::vector<ClusterGroundTruth>& truths, double alpha0,
                   RandomStream& rng);

// Alternating cluster estimation / model estimation for config.iterations
// rounds. Batches are indexed by system; assignments in the history follow
// that order.
RunHistory run(const RunConfig& config, const std::vector<BatchData>& batches,
               const ModelSet& init);

// Iteration budget suggested by the convergence analysis for reaching a
// target error: ceil(2 + log(delta_min / (4 epsilon))). Diagnostic only.
int suggested_iterations(double delta_min, double epsilon);

} // namespace csid
