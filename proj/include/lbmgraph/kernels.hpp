#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner-loop kernels used by the solvers. Each kernel has a portable
// scalar reference and, on x86-64 builds, an AVX2/FMA variant. The active
// backend is chosen once at startup from CPUID and can be overridden with the
// LBMGRAPH_SIMD environment variable ("scalar" or "avx2") or set_backend().
namespace lbm::kernels {

enum class Backend { Scalar, Avx2 };

/// Backend currently used by the dispatching entry points.
Backend active_backend();

/// Forces a backend. Returns false (and leaves the selection unchanged) if
/// the requested backend is not compiled in or not supported by this CPU.
bool set_backend(Backend backend);

bool backend_available(Backend backend);

std::string_view backend_name(Backend backend);

// Dispatching entry points. Spans must have equal length.
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
double sum_sq_diff(std::span<const double> x, std::span<const double> y);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
double sum_sq_diff(const double* x, const double* y, std::size_t n);
}  // namespace scalar

#if defined(LBMGRAPH_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
double sum_sq_diff(const double* x, const double* y, std::size_t n);
}  // namespace avx2
#endif

}  // namespace lbm::kernels
