#pragma once

#include <vector>

#include "csid/lti_sim.hpp"
#include "csid/matrix.hpp"
#include "csid/sysid.hpp"

namespace csid {

// ||theta_hat - theta||, the largest singular value of the difference.
double spectral_error(const Matrix& theta_hat, const Matrix& theta);

// Minimum / maximum spectral-norm separation over unordered cluster pairs,
// with the pair attaining the minimum.
struct SeparationReport {
    double delta_min = 0.0;
    double delta_max = 0.0;
    int argmin_first = 0;
    int argmin_second = 0;
};

SeparationReport separation(const std::vector<ClusterGroundTruth>& truths);

// Signal-to-noise ratio delta_min^2 / sigma_w^2.
double snr(const SystemSpec& spec, double delta_min);

int misclassification_count(const std::vector<Assignment>& assignments,
                            const std::vector<int>& true_labels);

// Informational diagnostics for the trajectory-count and separation
// conditions behind the misclassification analysis. The analysis carries
// unspecified universal constants; they are set to 1 here, so the ratios
// indicate scale, not pass/fail.
struct AssumptionReport {
    // trajectory_ratios[i][t] =
    //   N_i n_x / [ ((rho |Sigma_t| + sqrt(n_x)) / (alpha0 rho |Sigma_t|))^2 log(M T / delta) ]
    std::vector<std::vector<double>> trajectory_ratios;
    double delta_min = 0.0;
    // 1 + delta_max * sum_i sum_t exp(-N_i n_x (alpha0 rho |Sigma_t| / (rho |Sigma_t| + sqrt(n_x)))^2)
    double separation_margin_rhs = 0.0;
    bool constants_known = false;  // always false: unit constants assumed
};

AssumptionReport assumption_diagnostics(const std::vector<SystemSpec>& specs,
                                        const std::vector<ClusterGroundTruth>& truths,
                                        double alpha0, double delta);

} // namespace csid
