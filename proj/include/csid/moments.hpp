#pragma once

#include <vector>

#include "csid/lti_sim.hpp"
#include "csid/matrix.hpp"

namespace csid {

// Stacked impulse-response blocks of the state recursion at horizon t:
//   g = [A^{t-1} B ... B],  f = [A^{t-1} ... I].
// t = 0 yields empty (zero-column) blocks so the covariance assembly below
// needs no special case.
struct ImpulseBlocks {
    Matrix g;  // n_x x (t * n_u)
    Matrix f;  // n_x x (t * n_x)
    unsigned t = 0;
};

ImpulseBlocks impulse_blocks(const Matrix& a, const Matrix& b, unsigned t);

// Covariance of the stacked state-input vector z_t = [x_t; u_t].
struct StateInputCovariance {
    Matrix sigma;  // (n_x+n_u) x (n_x+n_u), symmetric PSD
    unsigned t = 0;
};

// Closed form: upper-left block
//   sigma_u^2 G_t G_t^T + sigma_w^2 F_t F_t^T + sigma_x^2 A^t (A^t)^T
// (sigma_x^2 I at t = 0), lower-right block sigma_u^2 I, off-diagonals zero.
StateInputCovariance state_input_covariance(const SystemSpec& spec,
                                            const ClusterGroundTruth& truth,
                                            unsigned t);

// sum_{i in members} N_i * sum_{t=0}^{T_i - 1} Sigma_t^{(i)}
Matrix moment_sum(const std::vector<SystemSpec>& members,
                  const ClusterGroundTruth& truth);

// |members| / lambda_min(moment_sum). The member list is the caller's
// choice of true or estimated cluster. Throws DegeneracyError when the
// moment sum is singular (lambda_min < 1e-10 * lambda_max).
double theoretical_step_size(const std::vector<SystemSpec>& members,
                             const ClusterGroundTruth& truth);

} // namespace csid
