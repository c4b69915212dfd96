#include "csid/baselines.hpp"

#include <string>

#include "csid/errors.hpp"
#include "csid/linalg.hpp"
#include "csid/metrics.hpp"

namespace csid {

RunHistory single_agent_run(const BatchData& batch, const Matrix& init, double eta,
                            int iterations, const Matrix& truth_theta) {
    RunConfig config;
    config.step_rule = StepRule::fixed;
    config.fixed_eta = eta;
    config.iterations = iterations;
    config.truth_thetas = {truth_theta};
    ModelSet models;
    models.thetas = {init};
    return run(config, {batch}, models);
}

RunHistory pooled_run(const std::vector<BatchData>& batches, const Matrix& init,
                      double eta, int iterations,
                      const std::vector<Matrix>& truth_thetas) {
    if (iterations < 1) throw ConfigError("pooled_run: iteration count must be >= 1");
    if (batches.empty()) throw ConfigError("pooled_run: no batches");

    RunHistory history;
    history.iterations.reserve(iterations);
    Matrix theta = init;
    const double scale = 2.0 * eta / static_cast<double>(batches.size());

    for (int r = 0; r < iterations; ++r) {
        Matrix gradient(theta.rows(), theta.cols());
        for (const auto& batch : batches) {
            gradient += batch.xz - multiply(theta, batch.zz);
        }
        gradient *= scale;
        theta += gradient;

        IterationRecord record;
        record.iteration = r;
        record.step_sizes.assign(truth_thetas.size(), eta);
        record.cluster_errors.reserve(truth_thetas.size());
        for (const auto& truth : truth_thetas) {
            record.cluster_errors.push_back(spectral_error(theta, truth));
        }
        history.iterations.push_back(std::move(record));
    }
    history.final_models.thetas.assign(truth_thetas.empty() ? 1 : truth_thetas.size(), theta);
    history.final_models.iteration = iterations;
    return history;
}

namespace {

Matrix solve_normal_equations(const Matrix& zz, const Matrix& xz, const char* who) {
    const std::vector<double> eig = symmetric_eigenvalues(symmetrize(zz));
    if (eig.front() <= 1e-10 * eig.back()) {
        throw DegeneracyError(std::string(who) + ": singular Z Z^T (lambda_min " +
                              std::to_string(eig.front()) + ", lambda_max " +
                              std::to_string(eig.back()) + ")");
    }
    // theta = X Z^T (Z Z^T)^{-1}  <=>  (Z Z^T) theta^T = (X Z^T)^T
    return transpose(solve_spd(zz, transpose(xz)));
}

} // namespace

Matrix least_squares(const BatchData& batch) {
    return solve_normal_equations(batch.zz, batch.xz, "least_squares");
}

Matrix least_squares_pooled(const std::vector<BatchData>& batches) {
    if (batches.empty()) throw ConfigError("least_squares_pooled: no batches");
    Matrix zz = batches[0].zz;
    Matrix xz = batches[0].xz;
    for (std::size_t i = 1; i < batches.size(); ++i) {
        zz += batches[i].zz;
        xz += batches[i].xz;
    }
    return solve_normal_equations(zz, xz, "least_squares_pooled");
}

} // namespace csid
