#include "csid/kernels.hpp"

#include <cstdlib>
#include <string_view>

#include "csid/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define CSID_X86_64 1
#else
#define CSID_X86_64 0
#endif

namespace csid::kernels {

#if CSID_X86_64
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
} // namespace avx2
#endif

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

bool backend_supported(Backend b) {
    if (b == Backend::scalar) return true;
#if CSID_X86_64
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect_backend() {
    return backend_supported(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

namespace {

// CSID_KERNELS=scalar|avx2 pins the startup backend; unsupported or unknown
// values fall back to auto-detection.
Backend initial_backend() {
    if (const char* env = std::getenv("CSID_KERNELS")) {
        const std::string_view requested(env);
        for (Backend b : {Backend::scalar, Backend::avx2}) {
            if (requested == backend_name(b) && backend_supported(b)) return b;
        }
    }
    return detect_backend();
}

Backend g_backend = initial_backend();

} // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
    if (!backend_supported(b)) {
        throw ConfigError(std::string("kernel backend not supported on this CPU: ") +
                          backend_name(b));
    }
    g_backend = b;
}

double dot(const double* a, const double* b, std::size_t n) {
#if CSID_X86_64
    if (g_backend == Backend::avx2) return avx2::dot(a, b, n);
#endif
    return scalar::dot(a, b, n);
}

double sum_sq(const double* a, std::size_t n) {
#if CSID_X86_64
    if (g_backend == Backend::avx2) return avx2::sum_sq(a, n);
#endif
    return scalar::sum_sq(a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if CSID_X86_64
    if (g_backend == Backend::avx2) {
        avx2::axpy(alpha, x, y, n);
        return;
    }
#endif
    scalar::axpy(alpha, x, y, n);
}

} // namespace csid::kernels
