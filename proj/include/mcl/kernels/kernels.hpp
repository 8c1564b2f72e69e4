#pragma once

#include <cstdint>

namespace mcl::kern {

// Runtime-selected kernel backend. Scalar implementations are the reference;
// the AVX2 variants must agree with them to tight tolerances (see
// tests/test_kernels.cpp). Selection order: explicit set_backend() >
// MCL_KERNEL env var ("scalar"|"avx2") > CPU detection.
enum class Backend { kScalar, kAvx2 };

Backend active_backend();
void set_backend(Backend b);
bool cpu_supports_avx2();
const char* backend_name(Backend b);

// ---- elementwise (contiguous, length n) ----
void add(const float* a, const float* b, float* y, int64_t n);
void sub(const float* a, const float* b, float* y, int64_t n);
void mul(const float* a, const float* b, float* y, int64_t n);
void div(const float* a, const float* b, float* y, int64_t n);
void relu(const float* x, float* y, int64_t n);
// y = g where x > 0, else 0
void relu_mask_mul(const float* g, const float* x, float* y, int64_t n);
void sqrt(const float* x, float* y, int64_t n);
void square(const float* x, float* y, int64_t n);
void exp(const float* x, float* y, int64_t n);
void log(const float* x, float* y, int64_t n);
// y = a*x + b*y
void axpby(float a, const float* x, float b, float* y, int64_t n);
// y = a*x + c
void scale(const float* x, float a, float c, float* y, int64_t n);

float sum(const float* x, int64_t n);
float dot(const float* a, const float* b, int64_t n);

// out = sqrt(a^2 + b^2 + c^2 + d^2), the motion-map accumulation
void hypot4(const float* a, const float* b, const float* c, const float* d,
            float* out, int64_t n);

// ---- GEMM ----
// C[m,n] = alpha * op(A)·op(B) + beta * C, row-major with leading dims.
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda, const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc);

// ---- TV-L1 inner steps (see flow/tvl1.cpp for context) ----
// Pointwise data-term proximal step: v = u + d(rho) with the three-way
// threshold of the TV-L1 dual formulation. rho = rho_c + i1wx*u1 + i1wy*u2.
void tvl1_threshold(const float* rho_c, const float* i1wx, const float* i1wy,
                    const float* grad2, const float* u1, const float* u2,
                    float* v1, float* v2, float l_t, float grad_eps, int64_t n);
// Dual ascent step: p := (p + taut*grad u) / (1 + taut*|grad u|), per flow
// component, where |grad u| = hypot of the forward differences.
void tvl1_dual_update(const float* u1x, const float* u1y, const float* u2x,
                      const float* u2y, float* p11, float* p12, float* p21,
                      float* p22, float taut, int64_t n);
// Primal step u = v + theta*div p; returns the summed squared update.
double tvl1_primal_update(const float* v1, const float* v2, const float* div_p1,
                          const float* div_p2, float* u1, float* u2, float theta,
                          int64_t n);

// ---- double overloads (scalar reference path only; used by the 64-bit
// gradient-check configurations and small evaluation solvers) ----
void add(const double* a, const double* b, double* y, int64_t n);
void sub(const double* a, const double* b, double* y, int64_t n);
void mul(const double* a, const double* b, double* y, int64_t n);
void div(const double* a, const double* b, double* y, int64_t n);
void relu(const double* x, double* y, int64_t n);
void relu_mask_mul(const double* g, const double* x, double* y, int64_t n);
void sqrt(const double* x, double* y, int64_t n);
void square(const double* x, double* y, int64_t n);
void exp(const double* x, double* y, int64_t n);
void log(const double* x, double* y, int64_t n);
void axpby(double a, const double* x, double b, double* y, int64_t n);
void scale(const double* x, double a, double c, double* y, int64_t n);
double sum(const double* x, int64_t n);
double dot(const double* a, const double* b, int64_t n);
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          double alpha, const double* a, int64_t lda, const double* b,
          int64_t ldb, double beta, double* c, int64_t ldc);

}  // namespace mcl::kern
