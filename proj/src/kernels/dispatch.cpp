#include "mcl/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_avx2.hpp"
#include "kernels_scalar.hpp"

namespace mcl::kern {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("MCL_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::kScalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports_avx2()) return Backend::kAvx2;
    if (std::strcmp(env, "avx2") == 0) return Backend::kScalar;  // requested but absent
  }
  return cpu_supports_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend> g_backend{initial_backend()};

inline bool use_avx2() { return g_backend.load(std::memory_order_relaxed) == Backend::kAvx2; }

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::kAvx2 && !cpu_supports_avx2()) b = Backend::kScalar;
  g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

// float: dispatched
void add(const float* a, const float* b, float* y, int64_t n) {
  use_avx2() ? avx2::add(a, b, y, n) : scalar::add(a, b, y, n);
}
void sub(const float* a, const float* b, float* y, int64_t n) {
  use_avx2() ? avx2::sub(a, b, y, n) : scalar::sub(a, b, y, n);
}
void mul(const float* a, const float* b, float* y, int64_t n) {
  use_avx2() ? avx2::mul(a, b, y, n) : scalar::mul(a, b, y, n);
}
void div(const float* a, const float* b, float* y, int64_t n) {
  use_avx2() ? avx2::div(a, b, y, n) : scalar::div(a, b, y, n);
}
void relu(const float* x, float* y, int64_t n) {
  use_avx2() ? avx2::relu(x, y, n) : scalar::relu(x, y, n);
}
void relu_mask_mul(const float* g, const float* x, float* y, int64_t n) {
  use_avx2() ? avx2::relu_mask_mul(g, x, y, n) : scalar::relu_mask_mul(g, x, y, n);
}
void sqrt(const float* x, float* y, int64_t n) {
  use_avx2() ? avx2::sqrt(x, y, n) : scalar::sqrt_(x, y, n);
}
void square(const float* x, float* y, int64_t n) {
  use_avx2() ? avx2::square(x, y, n) : scalar::square(x, y, n);
}
void exp(const float* x, float* y, int64_t n) { scalar::exp_(x, y, n); }
void log(const float* x, float* y, int64_t n) { scalar::log_(x, y, n); }
void axpby(float a, const float* x, float b, float* y, int64_t n) {
  use_avx2() ? avx2::axpby(a, x, b, y, n) : scalar::axpby(a, x, b, y, n);
}
void scale(const float* x, float a, float c, float* y, int64_t n) {
  use_avx2() ? avx2::scale(x, a, c, y, n) : scalar::scale(x, a, c, y, n);
}
float sum(const float* x, int64_t n) {
  return use_avx2() ? avx2::sum(x, n) : scalar::sum(x, n);
}
float dot(const float* a, const float* b, int64_t n) {
  return use_avx2() ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}
void hypot4(const float* a, const float* b, const float* c, const float* d,
            float* out, int64_t n) {
  use_avx2() ? avx2::hypot4(a, b, c, d, out, n) : scalar::hypot4(a, b, c, d, out, n);
}
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda, const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc) {
  use_avx2() ? avx2::gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
             : scalar::gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
void tvl1_threshold(const float* rho_c, const float* i1wx, const float* i1wy,
                    const float* grad2, const float* u1, const float* u2,
                    float* v1, float* v2, float l_t, float grad_eps, int64_t n) {
  use_avx2()
      ? avx2::tvl1_threshold(rho_c, i1wx, i1wy, grad2, u1, u2, v1, v2, l_t, grad_eps, n)
      : scalar::tvl1_threshold(rho_c, i1wx, i1wy, grad2, u1, u2, v1, v2, l_t, grad_eps, n);
}
void tvl1_dual_update(const float* u1x, const float* u1y, const float* u2x,
                      const float* u2y, float* p11, float* p12, float* p21,
                      float* p22, float taut, int64_t n) {
  use_avx2() ? avx2::tvl1_dual_update(u1x, u1y, u2x, u2y, p11, p12, p21, p22, taut, n)
             : scalar::tvl1_dual_update(u1x, u1y, u2x, u2y, p11, p12, p21, p22, taut, n);
}
double tvl1_primal_update(const float* v1, const float* v2, const float* div_p1,
                          const float* div_p2, float* u1, float* u2, float theta,
                          int64_t n) {
  return use_avx2()
             ? avx2::tvl1_primal_update(v1, v2, div_p1, div_p2, u1, u2, theta, n)
             : scalar::tvl1_primal_update(v1, v2, div_p1, div_p2, u1, u2, theta, n);
}

// double: scalar reference path
void add(const double* a, const double* b, double* y, int64_t n) { scalar::add(a, b, y, n); }
void sub(const double* a, const double* b, double* y, int64_t n) { scalar::sub(a, b, y, n); }
void mul(const double* a, const double* b, double* y, int64_t n) { scalar::mul(a, b, y, n); }
void div(const double* a, const double* b, double* y, int64_t n) { scalar::div(a, b, y, n); }
void relu(const double* x, double* y, int64_t n) { scalar::relu(x, y, n); }
void relu_mask_mul(const double* g, const double* x, double* y, int64_t n) {
  scalar::relu_mask_mul(g, x, y, n);
}
void sqrt(const double* x, double* y, int64_t n) { scalar::sqrt_(x, y, n); }
void square(const double* x, double* y, int64_t n) { scalar::square(x, y, n); }
void exp(const double* x, double* y, int64_t n) { scalar::exp_(x, y, n); }
void log(const double* x, double* y, int64_t n) { scalar::log_(x, y, n); }
void axpby(double a, const double* x, double b, double* y, int64_t n) {
  scalar::axpby(a, x, b, y, n);
}
void scale(const double* x, double a, double c, double* y, int64_t n) {
  scalar::scale(x, a, c, y, n);
}
double sum(const double* x, int64_t n) { return scalar::sum(x, n); }
double dot(const double* a, const double* b, int64_t n) { return scalar::dot(a, b, n); }
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, int64_t lda, const double* b,
          int64_t ldb, double beta, double* c, int64_t ldc) {
  scalar::gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

}  // namespace mcl::kern
