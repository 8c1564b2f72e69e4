#pragma once

#include <cstdint>

// AVX2+FMA float kernels. Only compiled into the dispatch table when the CPU
// reports both feature bits.
namespace mcl::kern::avx2 {

void add(const float* a, const float* b, float* y, int64_t n);
void sub(const float* a, const float* b, float* y, int64_t n);
void mul(const float* a, const float* b, float* y, int64_t n);
void div(const float* a, const float* b, float* y, int64_t n);
void relu(const float* x, float* y, int64_t n);
void relu_mask_mul(const float* g, const float* x, float* y, int64_t n);
void sqrt(const float* x, float* y, int64_t n);
void square(const float* x, float* y, int64_t n);
void axpby(float a, const float* x, float b, float* y, int64_t n);
void scale(const float* x, float a, float c, float* y, int64_t n);
float sum(const float* x, int64_t n);
float dot(const float* a, const float* b, int64_t n);
void hypot4(const float* a, const float* b, const float* c, const float* d,
            float* out, int64_t n);
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda, const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc);
void tvl1_threshold(const float* rho_c, const float* i1wx, const float* i1wy,
                    const float* grad2, const float* u1, const float* u2,
                    float* v1, float* v2, float l_t, float grad_eps, int64_t n);
void tvl1_dual_update(const float* u1x, const float* u1y, const float* u2x,
                      const float* u2y, float* p11, float* p12, float* p21,
                      float* p22, float taut, int64_t n);
double tvl1_primal_update(const float* v1, const float* v2, const float* div_p1,
                          const float* div_p2, float* u1, float* u2, float theta,
                          int64_t n);

}  // namespace mcl::kern::avx2
