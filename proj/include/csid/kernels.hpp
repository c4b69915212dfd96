#pragma once

#include <cstddef>
#include <string>

namespace csid::kernels {

// Long-vector primitives behind all batch-matrix reductions (Gram products,
// residual norms, gradient accumulation). A scalar reference implementation
// is always available; on x86-64 an AVX2+FMA variant is selected at runtime
// when the CPU supports it. The two variants differ only in summation order,
// so results agree to rounding; the equivalence tests pin that down.
enum class Backend {
    scalar,
    avx2,
};

const char* backend_name(Backend b);

// Best backend supported by the executing CPU.
Backend detect_backend();
bool backend_supported(Backend b);

// Process-wide selection. Defaults to detect_backend(), overridable at
// startup with CSID_KERNELS=scalar|avx2; intended to be set once early
// (not thread-safe against concurrent kernel calls).
Backend active_backend();
void set_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Reference implementations, exposed for equivalence testing.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
} // namespace scalar

} // namespace csid::kernels
