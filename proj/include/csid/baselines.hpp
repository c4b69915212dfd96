#pragma once

#include <vector>

#include "csid/lti_sim.hpp"
#include "csid/matrix.hpp"
#include "csid/sysid.hpp"

namespace csid {

// Gradient descent on one system's own data:
//   theta += 2 eta (X - theta Z) Z^T.
// History records the spectral error against truth_theta after each step.
RunHistory single_agent_run(const BatchData& batch, const Matrix& init, double eta,
                            int iterations, const Matrix& truth_theta);

// One shared model updated with the gradient averaged over every system
// (clustering disabled). The history tracks the shared model's spectral
// error against each cluster ground truth separately.
RunHistory pooled_run(const std::vector<BatchData>& batches, const Matrix& init,
                      double eta, int iterations,
                      const std::vector<Matrix>& truth_thetas);

// Closed-form minimizer X Z^T (Z Z^T)^{-1} of the squared Frobenius
// residual. Throws DegeneracyError when Z Z^T is singular
// (lambda_min <= 1e-10 * lambda_max).
Matrix least_squares(const BatchData& batch);

// least_squares on the horizontal concatenation of the given systems' data.
Matrix least_squares_pooled(const std::vector<BatchData>& batches);

} // namespace csid
