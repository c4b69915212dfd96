#include "csid/moments.hpp"

#include <string>

#include "csid/errors.hpp"
#include "csid/linalg.hpp"

namespace csid {

ImpulseBlocks impulse_blocks(const Matrix& a, const Matrix& b, unsigned t) {
    if (a.rows() != a.cols()) throw ConfigError("impulse_blocks: A must be square");
    if (b.rows() != a.rows()) throw ConfigError("impulse_blocks: B row count must match A");
    const std::size_t nx = a.rows();
    const std::size_t nu = b.cols();

    ImpulseBlocks blocks;
    blocks.t = t;
    blocks.g = Matrix(nx, t * nu);
    blocks.f = Matrix(nx, t * nx);

    // Build right to left: block k (from the left) is A^{t-1-k} (B); the
    // rightmost power is A^0 = I.
    Matrix power = Matrix::identity(nx);
    for (unsigned k = t; k-- > 0;) {
        const Matrix gb = multiply(power, b);
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < nu; ++j) blocks.g(i, k * nu + j) = gb(i, j);
            for (std::size_t j = 0; j < nx; ++j) blocks.f(i, k * nx + j) = power(i, j);
        }
        if (k > 0) power = multiply(a, power);
    }
    return blocks;
}

StateInputCovariance state_input_covariance(const SystemSpec& spec,
                                            const ClusterGroundTruth& truth,
                                            unsigned t) {
    spec.validate(truth);
    if (t > static_cast<unsigned>(spec.horizon)) {
        throw ConfigError("state_input_covariance: t exceeds the spec horizon");
    }
    const std::size_t nx = truth.state_dim();
    const std::size_t nu = truth.input_dim();
    const double var_x = spec.sigma_x * spec.sigma_x;
    const double var_u = spec.sigma_u * spec.sigma_u;
    const double var_w = spec.sigma_w * spec.sigma_w;

    StateInputCovariance cov;
    cov.t = t;
    cov.sigma = Matrix(nx + nu, nx + nu);

    const ImpulseBlocks blocks = impulse_blocks(truth.a, truth.b, t);
    const Matrix at = matrix_power(truth.a, t);
    Matrix state_block = multiply_bt(at, at);
    state_block *= var_x;
    if (t > 0) {
        Matrix gg = multiply_bt(blocks.g, blocks.g);
        gg *= var_u;
        Matrix ff = multiply_bt(blocks.f, blocks.f);
        ff *= var_w;
        state_block += gg;
        state_block += ff;
    }

    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < nx; ++j) cov.sigma(i, j) = state_block(i, j);
    }
    for (std::size_t i = 0; i < nu; ++i) cov.sigma(nx + i, nx + i) = var_u;
    return cov;
}

Matrix moment_sum(const std::vector<SystemSpec>& members,
                  const ClusterGroundTruth& truth) {
    if (members.empty()) throw ConfigError("moment_sum: empty member list");
    const std::size_t dim = truth.state_dim() + truth.input_dim();
    Matrix sum(dim, dim);
    for (const auto& spec : members) {
        Matrix per_system(dim, dim);
        for (unsigned t = 0; t < static_cast<unsigned>(spec.horizon); ++t) {
            per_system += state_input_covariance(spec, truth, t).sigma;
        }
        per_system *= static_cast<double>(spec.num_rollouts);
        sum += per_system;
    }
    return sum;
}

double theoretical_step_size(const std::vector<SystemSpec>& members,
                             const ClusterGroundTruth& truth) {
    const Matrix sum = symmetrize(moment_sum(members, truth));
    const std::vector<double> eig = symmetric_eigenvalues(sum);
    const double lambda_min = eig.front();
    const double lambda_max = eig.back();
    if (lambda_min <= 1e-10 * lambda_max) {
        throw DegeneracyError("theoretical_step_size: singular moment sum (lambda_min " +
                              std::to_string(lambda_min) + ", lambda_max " +
                              std::to_string(lambda_max) + ")");
    }
    return static_cast<double>(members.size()) / lambda_min;
}

} // namespace csid
