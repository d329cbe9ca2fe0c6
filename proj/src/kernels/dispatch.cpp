#include "lbmgraph/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

namespace lbm::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::max_abs, scalar::sum_sq_diff};
#if defined(LBMGRAPH_HAVE_AVX2)
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::max_abs, avx2::sum_sq_diff};
#endif

bool cpu_has_avx2() {
#if defined(LBMGRAPH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  Backend b = cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
  if (const char* env = std::getenv("LBMGRAPH_SIMD")) {
    const std::string v(env);
    if (v == "scalar") b = Backend::Scalar;
  }
  return b;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

const Table& table() {
#if defined(LBMGRAPH_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Backend::Avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

Backend active_backend() { return current().load(); }

bool backend_available(Backend backend) {
  if (backend == Backend::Scalar) return true;
  return cpu_has_avx2();
}

bool set_backend(Backend backend) {
  if (!backend_available(backend)) return false;
  current().store(backend);
  return true;
}

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return table().dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) { return table().max_abs(x.data(), x.size()); }

double sum_sq_diff(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return table().sum_sq_diff(x.data(), y.data(), x.size());
}

}  // namespace lbm::kernels
