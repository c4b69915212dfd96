#include "csid/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csid/errors.hpp"
#include "csid/kernels.hpp"
#include "csid/linalg.hpp"
#include "csid/metrics.hpp"

namespace csid {

double frobenius_cost(const BatchData& batch, const Matrix& theta) {
    if (theta.rows() != batch.x.rows() || theta.cols() != batch.z.rows()) {
        throw ConfigError("frobenius_cost: theta shape mismatch");
    }
    // ||X - theta Z||_F^2 = tr(XX^T) - 2 <theta, XZ^T> + <theta ZZ^T, theta>
    const Matrix tz = multiply(theta, batch.zz);
    double cost = batch.xx_trace;
    cost -= 2.0 * kernels::dot(theta.data(), batch.xz.data(), theta.size());
    cost += kernels::dot(theta.data(), tz.data(), theta.size());
    return cost;
}

Assignment estimate_cluster(const BatchData& batch, const ModelSet& models) {
    if (models.thetas.empty()) throw ConfigError("estimate_cluster: no models");
    Assignment assignment;
    double best = frobenius_cost(batch, models.thetas[0]);
    assignment.chosen = 0;
    for (std::size_t j = 1; j < models.thetas.size(); ++j) {
        const double cost = frobenius_cost(batch, models.thetas[j]);
        if (cost < best) {  // strict: ties stay with the smaller index
            best = cost;
            assignment.chosen = static_cast<int>(j);
        }
    }
    assignment.one_hot.assign(models.thetas.size(), 0.0);
    assignment.one_hot[assignment.chosen] = 1.0;
    return assignment;
}

ModelSet model_update_step(const ModelSet& models,
                           const std::vector<Assignment>& assignments,
                           const std::vector<BatchData>& batches,
                           const std::vector<double>& step_sizes) {
    const std::size_t k = models.num_clusters();
    if (assignments.size() != batches.size()) {
        throw ConfigError("model_update_step: one assignment per batch required");
    }
    if (step_sizes.size() != k) {
        throw ConfigError("model_update_step: one step size per cluster required");
    }

    ModelSet next = models;
    next.iteration = models.iteration + 1;

    for (std::size_t j = 0; j < k; ++j) {
        const Matrix& theta = models.thetas[j];
        Matrix gradient(theta.rows(), theta.cols());
        std::size_t member_count = 0;
        // Reduce in canonical list order, never in worker-completion order,
        // so the update is bit-reproducible.
        for (std::size_t i = 0; i < batches.size(); ++i) {
            if (assignments[i].chosen != static_cast<int>(j)) continue;
            gradient += batches[i].xz - multiply(theta, batches[i].zz);
            ++member_count;
        }
        if (member_count == 0) continue;  // no data supports an update
        gradient *= 2.0 * step_sizes[j] / static_cast<double>(member_count);
        next.thetas[j] += gradient;
    }
    return next;
}

ModelSet warm_init(const std::vector<ClusterGroundTruth>& truths, double alpha0,
                   RandomStream& rng) {
    if (!(alpha0 > 0.0 && alpha0 < 0.5)) {
        throw ConfigError("warm_init: alpha0 must lie in (0, 1/2)");
    }
    std::vector<Matrix> thetas;
    thetas.reserve(truths.size());
    for (const auto& truth : truths) thetas.push_back(truth.theta);
    const double delta_min = truths.size() >= 2 ? separation(truths).delta_min
                                                : spectral_norm(truths.at(0).theta);
    if (delta_min <= 0.0) throw DegeneracyError("warm_init: coincident clusters");

    const double radius = (0.5 - alpha0) * delta_min;
    ModelSet models;
    models.thetas.reserve(truths.size());
    for (const auto& truth : truths) {
        Matrix direction(truth.theta.rows(), truth.theta.cols());
        for (std::size_t i = 0; i < direction.size(); ++i) {
            direction.data()[i] = rng.normal();
        }
        const double norm = spectral_norm(direction);
        direction *= radius / norm;
        models.thetas.push_back(truth.theta + direction);
    }
    return models;
}

namespace {

std::vector<double> choose_step_sizes(const RunConfig& config,
                                      const std::vector<Assignment>& assignments,
                                      std::size_t num_clusters) {
    std::vector<double> etas(num_clusters, config.fixed_eta);
    if (config.step_rule == StepRule::fixed) return etas;

    if (config.system_moments.size() != assignments.size()) {
        throw ConfigError("run: theoretical step rule requires one moment matrix per system");
    }
    for (std::size_t j = 0; j < num_clusters; ++j) {
        Matrix sum;
        std::size_t members = 0;
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            if (assignments[i].chosen != static_cast<int>(j)) continue;
            if (members == 0) {
                sum = config.system_moments[i];
            } else {
                sum += config.system_moments[i];
            }
            ++members;
        }
        if (members == 0) {
            etas[j] = 0.0;  // empty cluster: no update happens anyway
            continue;
        }
        const std::vector<double> eig = symmetric_eigenvalues(symmetrize(sum));
        if (eig.front() <= 1e-10 * eig.back()) {
            throw DegeneracyError("run: singular moment sum for cluster " + std::to_string(j));
        }
        etas[j] = static_cast<double>(members) / eig.front();
    }
    return etas;
}

} // namespace

RunHistory run(const RunConfig& config, const std::vector<BatchData>& batches,
               const ModelSet& init) {
    if (config.iterations < 1) throw ConfigError("run: iteration count must be >= 1");
    if (batches.empty()) throw ConfigError("run: no batches");
    const std::size_t k = init.num_clusters();
    if (!config.truth_thetas.empty() && config.truth_thetas.size() != k) {
        throw ConfigError("run: one ground truth per cluster required");
    }
    if (!config.true_labels.empty() && config.true_labels.size() != batches.size()) {
        throw ConfigError("run: one true label per system required");
    }

    RunHistory history;
    history.iterations.reserve(config.iterations);
    ModelSet models = init;

    for (int r = 0; r < config.iterations; ++r) {
        IterationRecord record;
        record.iteration = r;

        std::vector<Assignment> assignments;
        assignments.reserve(batches.size());
        for (const auto& batch : batches) {
            assignments.push_back(estimate_cluster(batch, models));
        }
        record.assignments.reserve(batches.size());
        for (const auto& a : assignments) record.assignments.push_back(a.chosen);
        if (!config.true_labels.empty()) {
            record.misclassified = misclassification_count(assignments, config.true_labels);
        }

        record.step_sizes = choose_step_sizes(config, assignments, k);
        for (std::size_t j = 0; j < k; ++j) {
            const bool empty = std::none_of(assignments.begin(), assignments.end(),
                                            [&](const Assignment& a) {
                                                return a.chosen == static_cast<int>(j);
                                            });
            if (empty) record.empty_clusters.push_back(static_cast<int>(j));
        }

        models = model_update_step(models, assignments, batches, record.step_sizes);

        if (!config.truth_thetas.empty()) {
            record.cluster_errors.reserve(k);
            for (std::size_t j = 0; j < k; ++j) {
                record.cluster_errors.push_back(
                    spectral_error(models.thetas[j], config.truth_thetas[j]));
            }
        }
        history.iterations.push_back(std::move(record));
    }
    history.final_models = std::move(models);
    return history;
}

int suggested_iterations(double delta_min, double epsilon) {
    if (delta_min <= 0.0 || epsilon <= 0.0) {
        throw ConfigError("suggested_iterations: arguments must be positive");
    }
    const double r = 2.0 + std::log(delta_min / (4.0 * epsilon));
    return std::max(1, static_cast<int>(std::ceil(r)));
}

} // namespace csid
