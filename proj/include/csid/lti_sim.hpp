#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "csid/matrix.hpp"
#include "csid/rng.hpp"

namespace csid {

// Ground-truth dynamics shared by every system in one cluster:
// x_{t+1} = A x_t + B u_t + w_t, with theta = [A B].
struct ClusterGroundTruth {
    Matrix a;
    Matrix b;
    Matrix theta;

    static ClusterGroundTruth from_ab(Matrix a, Matrix b);

    std::size_t state_dim() const { return a.rows(); }
    std::size_t input_dim() const { return b.cols(); }
};

// Per-system sampling configuration. sigma values of exactly zero are
// accepted as degenerate (deterministic) distributions; the experiment
// configs reject them, test code relies on them.
struct SystemSpec {
    int system_id = 0;
    int cluster_id = 0;
    double sigma_x = 0.0;  // initial state std dev
    double sigma_u = 0.0;  // input std dev
    double sigma_w = 0.0;  // process noise std dev
    int num_rollouts = 1;  // N_i
    int horizon = 1;       // T

    void validate(const ClusterGroundTruth& truth) const;
};

// One simulated trajectory. states holds x_0..x_T as columns, inputs
// u_0..u_{T-1}, noises w_0..w_{T-1} (kept so tests can replay the recursion).
struct Rollout {
    Matrix states;
    Matrix inputs;
    Matrix noises;
};

// The stacked data matrices of one system, satisfying X = theta Z + W for
// the generating cluster. Column convention: within rollout l the columns
// run time-descending (x_T .. x_1 | z_{T-1} .. z_0 | w_{T-1} .. w_0),
// rollouts concatenated in increasing l. Downstream products do not depend
// on the order, but a fixed convention keeps golden outputs reproducible.
//
// zz / xz / xx are the cached Gram statistics Z Z^T, X Z^T, X X^T; every
// cost and gradient evaluation reduces to them, so they are computed once
// here with the data-parallel kernels. Treat BatchData as immutable after
// construction; it is safe to share read-only across threads.
struct BatchData {
    static constexpr std::string_view kColumnOrder =
        "time-descending within each rollout, rollouts in increasing order";

    Matrix x;  // n_x   x (N*T)
    Matrix z;  // n_x+n_u x (N*T)
    Matrix w;  // n_x   x (N*T)
    Matrix zz;
    Matrix xz;
    double xx_trace = 0.0;

    static BatchData from_xzw(Matrix x, Matrix z, Matrix w);
};

Rollout sample_rollout(const SystemSpec& spec, const ClusterGroundTruth& truth,
                       RandomStream& rng);

BatchData collect_batches(const SystemSpec& spec, const ClusterGroundTruth& truth,
                          RandomStream& rng);

// || X - theta Z - W ||_F; vanishes (to rounding) when theta generated the batch.
double verify_batch_relation(const BatchData& batch, const Matrix& theta);

// One batch per spec, each drawn from its own stream derived from
// master_seed, generated across threads. Output order and contents are
// independent of scheduling.
std::vector<BatchData> generate_batches(const std::vector<SystemSpec>& specs,
                                        const std::vector<ClusterGroundTruth>& truths,
                                        std::uint64_t master_seed,
                                        unsigned num_threads = 0);

} // namespace csid
