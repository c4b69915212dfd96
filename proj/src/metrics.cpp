#include "csid/metrics.hpp"

#include <cmath>

#include "csid/errors.hpp"
#include "csid/linalg.hpp"
#include "csid/moments.hpp"

namespace csid {

double spectral_error(const Matrix& theta_hat, const Matrix& theta) {
    if (!theta_hat.same_shape(theta)) {
        throw ConfigError("spectral_error: shape mismatch");
    }
    return spectral_norm(theta_hat - theta);
}

SeparationReport separation(const std::vector<ClusterGroundTruth>& truths) {
    if (truths.size() < 2) {
        throw ConfigError("separation: at least two clusters required");
    }
    SeparationReport report;
    bool first = true;
    for (std::size_t j = 0; j < truths.size(); ++j) {
        for (std::size_t jp = j + 1; jp < truths.size(); ++jp) {
            const double d = spectral_error(truths[j].theta, truths[jp].theta);
            if (first || d < report.delta_min) {
                report.delta_min = d;
                report.argmin_first = static_cast<int>(j);
                report.argmin_second = static_cast<int>(jp);
            }
            if (first || d > report.delta_max) report.delta_max = d;
            first = false;
        }
    }
    return report;
}

double snr(const SystemSpec& spec, double delta_min) {
    if (spec.sigma_w <= 0.0) {
        throw ConfigError("snr: sigma_w must be positive");
    }
    return delta_min * delta_min / (spec.sigma_w * spec.sigma_w);
}

int misclassification_count(const std::vector<Assignment>& assignments,
                            const std::vector<int>& true_labels) {
    if (assignments.size() != true_labels.size()) {
        throw ConfigError("misclassification_count: length mismatch");
    }
    int count = 0;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i].chosen != true_labels[i]) ++count;
    }
    return count;
}

AssumptionReport assumption_diagnostics(const std::vector<SystemSpec>& specs,
                                        const std::vector<ClusterGroundTruth>& truths,
                                        double alpha0, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ConfigError("assumption_diagnostics: delta must lie in (0, 1)");
    }
    if (!(alpha0 > 0.0 && alpha0 < 0.5)) {
        throw ConfigError("assumption_diagnostics: alpha0 must lie in (0, 1/2)");
    }

    AssumptionReport report;
    const SeparationReport sep = separation(truths);
    report.delta_min = sep.delta_min;

    const double m = static_cast<double>(specs.size());
    double misclass_sum = 0.0;
    report.trajectory_ratios.reserve(specs.size());
    for (const auto& spec : specs) {
        const ClusterGroundTruth& truth = truths.at(spec.cluster_id);
        const double nx = static_cast<double>(truth.state_dim());
        const double rho = snr(spec, sep.delta_min);
        const double log_term = std::log(m * spec.horizon / delta);

        std::vector<double> ratios;
        ratios.reserve(spec.horizon);
        for (unsigned t = 0; t < static_cast<unsigned>(spec.horizon); ++t) {
            const double sig = spectral_norm(state_input_covariance(spec, truth, t).sigma);
            const double shape = (rho * sig + std::sqrt(nx)) / (alpha0 * rho * sig);
            ratios.push_back(spec.num_rollouts * nx / (shape * shape * log_term));
            const double decay = alpha0 * rho * sig / (rho * sig + std::sqrt(nx));
            misclass_sum += std::exp(-spec.num_rollouts * nx * decay * decay);
        }
        report.trajectory_ratios.push_back(std::move(ratios));
    }
    report.separation_margin_rhs = 1.0 + sep.delta_max * misclass_sum;
    return report;
}

} // namespace csid
