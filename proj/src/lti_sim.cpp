#include "csid/lti_sim.hpp"

#include <cmath>
#include <string>
#include <thread>

#include "csid/errors.hpp"
#include "csid/kernels.hpp"

namespace csid {

ClusterGroundTruth ClusterGroundTruth::from_ab(Matrix a, Matrix b) {
    if (a.rows() != a.cols()) throw ConfigError("ground truth: A must be square");
    if (b.rows() != a.rows()) throw ConfigError("ground truth: B row count must match A");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a.data()[i])) throw ConfigError("ground truth: A has non-finite entry");
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (!std::isfinite(b.data()[i])) throw ConfigError("ground truth: B has non-finite entry");
    }
    ClusterGroundTruth truth;
    truth.theta = hcat(a, b);
    truth.a = std::move(a);
    truth.b = std::move(b);
    return truth;
}

void SystemSpec::validate(const ClusterGroundTruth& truth) const {
    if (truth.a.rows() == 0) throw ConfigError("system spec: empty dynamics");
    if (sigma_x < 0.0 || sigma_u < 0.0 || sigma_w < 0.0) {
        throw ConfigError("system spec: negative noise scale");
    }
    if (num_rollouts < 1) throw ConfigError("system spec: num_rollouts must be >= 1");
    if (horizon < 1) throw ConfigError("system spec: horizon must be >= 1");
}

namespace {

void fill_normal(double* out, std::size_t n, double sigma, RandomStream& rng) {
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal(sigma);
}

} // namespace

Rollout sample_rollout(const SystemSpec& spec, const ClusterGroundTruth& truth,
                       RandomStream& rng) {
    spec.validate(truth);
    const std::size_t nx = truth.state_dim();
    const std::size_t nu = truth.input_dim();
    const std::size_t horizon = static_cast<std::size_t>(spec.horizon);

    Rollout r;
    r.states = Matrix(nx, horizon + 1);
    r.inputs = Matrix(nu, horizon);
    r.noises = Matrix(nx, horizon);

    std::vector<double> x(nx), u(nu), w(nx), next(nx);
    fill_normal(x.data(), nx, spec.sigma_x, rng);
    for (std::size_t i = 0; i < nx; ++i) r.states(i, 0) = x[i];

    for (std::size_t t = 0; t < horizon; ++t) {
        fill_normal(u.data(), nu, spec.sigma_u, rng);
        fill_normal(w.data(), nx, spec.sigma_w, rng);
        for (std::size_t i = 0; i < nx; ++i) {
            double acc = w[i];
            for (std::size_t k = 0; k < nx; ++k) acc += truth.a(i, k) * x[k];
            for (std::size_t k = 0; k < nu; ++k) acc += truth.b(i, k) * u[k];
            next[i] = acc;
        }
        for (std::size_t i = 0; i < nu; ++i) r.inputs(i, t) = u[i];
        for (std::size_t i = 0; i < nx; ++i) {
            r.noises(i, t) = w[i];
            r.states(i, t + 1) = next[i];
        }
        x = next;
    }
    return r;
}

BatchData BatchData::from_xzw(Matrix x, Matrix z, Matrix w) {
    if (x.cols() != z.cols() || x.cols() != w.cols() || x.rows() != w.rows()) {
        throw ConfigError("batch data: inconsistent matrix shapes");
    }
    BatchData batch;
    batch.zz = multiply_bt(z, z);
    batch.xz = multiply_bt(x, z);
    batch.xx_trace = kernels::sum_sq(x.data(), x.size());
    batch.x = std::move(x);
    batch.z = std::move(z);
    batch.w = std::move(w);
    return batch;
}

BatchData collect_batches(const SystemSpec& spec, const ClusterGroundTruth& truth,
                          RandomStream& rng) {
    spec.validate(truth);
    const std::size_t nx = truth.state_dim();
    const std::size_t nu = truth.input_dim();
    const std::size_t horizon = static_cast<std::size_t>(spec.horizon);
    const std::size_t rollouts = static_cast<std::size_t>(spec.num_rollouts);
    const std::size_t cols = rollouts * horizon;

    Matrix x(nx, cols), z(nx + nu, cols), w(nx, cols);
    for (std::size_t l = 0; l < rollouts; ++l) {
        const Rollout roll = sample_rollout(spec, truth, rng);
        // Time-descending within the rollout: column c holds time T-c data.
        for (std::size_t c = 0; c < horizon; ++c) {
            const std::size_t col = l * horizon + c;
            const std::size_t t = horizon - 1 - c;  // z/w time index; x uses t+1
            for (std::size_t i = 0; i < nx; ++i) {
                x(i, col) = roll.states(i, t + 1);
                z(i, col) = roll.states(i, t);
                w(i, col) = roll.noises(i, t);
            }
            for (std::size_t i = 0; i < nu; ++i) z(nx + i, col) = roll.inputs(i, t);
        }
    }
    return BatchData::from_xzw(std::move(x), std::move(z), std::move(w));
}

double verify_batch_relation(const BatchData& batch, const Matrix& theta) {
    if (theta.rows() != batch.x.rows() || theta.cols() != batch.z.rows()) {
        throw ConfigError("verify_batch_relation: theta shape mismatch");
    }
    const std::size_t cols = batch.x.cols();
    double total = 0.0;
    std::vector<double> residual(cols);
    for (std::size_t i = 0; i < theta.rows(); ++i) {
        for (std::size_t c = 0; c < cols; ++c) {
            residual[c] = batch.x(i, c) - batch.w(i, c);
        }
        for (std::size_t k = 0; k < theta.cols(); ++k) {
            kernels::axpy(-theta(i, k), batch.z.row(k), residual.data(), cols);
        }
        total += kernels::sum_sq(residual.data(), cols);
    }
    return std::sqrt(total);
}

std::vector<BatchData> generate_batches(const std::vector<SystemSpec>& specs,
                                        const std::vector<ClusterGroundTruth>& truths,
                                        std::uint64_t master_seed,
                                        unsigned num_threads) {
    // Validate up front so worker threads cannot throw.
    for (const auto& spec : specs) {
        if (spec.cluster_id < 0 || static_cast<std::size_t>(spec.cluster_id) >= truths.size()) {
            throw ConfigError("generate_batches: system " + std::to_string(spec.system_id) +
                              " references unknown cluster " + std::to_string(spec.cluster_id));
        }
        spec.validate(truths[spec.cluster_id]);
    }

    std::vector<BatchData> batches(specs.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream stream = derive_stream(master_seed, StreamPurpose::system_data,
                                                static_cast<std::uint64_t>(specs[i].system_id));
            batches[i] = collect_batches(specs[i], truths[specs[i].cluster_id], stream);
        }
    };

    if (num_threads == 0) num_threads = std::thread::hardware_concurrency();
    if (num_threads <= 1 || specs.size() <= 1) {
        worker(0, specs.size());
        return batches;
    }

    const std::size_t chunks = std::min<std::size_t>(num_threads, specs.size());
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    const std::size_t per = (specs.size() + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = c * per;
        const std::size_t end = std::min(begin + per, specs.size());
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& t : pool) t.join();
    return batches;
}

} // namespace csid
