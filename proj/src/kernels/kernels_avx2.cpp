#include "kernels_avx2.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace mcl::kern::avx2 {

namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehl_ps(lo, lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_shuffle_ps(lo, lo, 0x1);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

}  // namespace

void add(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void sub(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] - b[i];
}

void mul(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] * b[i];
}

void div(const float* a, const float* b, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_div_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) y[i] = a[i] / b[i];
}

void relu(const float* x, float* y, int64_t n) {
  const __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), z));
  for (; i < n; ++i) y[i] = x[i] > 0.f ? x[i] : 0.f;
}

void relu_mask_mul(const float* g, const float* x, float* y, int64_t n) {
  const __m256 z = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
    _mm256_storeu_ps(y + i, _mm256_and_ps(_mm256_loadu_ps(g + i), mask));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.f ? g[i] : 0.f;
}

void sqrt(const float* x, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_sqrt_ps(_mm256_loadu_ps(x + i)));
  for (; i < n; ++i) y[i] = std::sqrt(x[i]);
}

void square(const float* x, float* y, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(x + i);
    _mm256_storeu_ps(y + i, _mm256_mul_ps(v, v));
  }
  for (; i < n; ++i) y[i] = x[i] * x[i];
}

void axpby(float a, const float* x, float b, float* y, int64_t n) {
  const __m256 va = _mm256_set1_ps(a);
  const __m256 vb = _mm256_set1_ps(b);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_mul_ps(vb, _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy));
  }
  for (; i < n; ++i) y[i] = a * x[i] + b * y[i];
}

void scale(const float* x, float a, float c, float* y, int64_t n) {
  const __m256 va = _mm256_set1_ps(a);
  const __m256 vc = _mm256_set1_ps(c);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vc));
  for (; i < n; ++i) y[i] = a * x[i] + c;
}

float sum(const float* x, int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

float dot(const float* a, const float* b, int64_t n) {
  __m256 acc = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void hypot4(const float* a, const float* b, const float* c, const float* d,
            float* out, int64_t n) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 va = _mm256_loadu_ps(a + i);
    __m256 vb = _mm256_loadu_ps(b + i);
    __m256 vc = _mm256_loadu_ps(c + i);
    __m256 vd = _mm256_loadu_ps(d + i);
    __m256 s = _mm256_mul_ps(va, va);
    s = _mm256_fmadd_ps(vb, vb, s);
    s = _mm256_fmadd_ps(vc, vc, s);
    s = _mm256_fmadd_ps(vd, vd, s);
    _mm256_storeu_ps(out + i, _mm256_sqrt_ps(s));
  }
  for (; i < n; ++i)
    out[i] = std::sqrt(a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + d[i] * d[i]);
}

// ---------------------------------------------------------------------------
// GEMM: packed panels, 4x16 FMA microkernel.
// ---------------------------------------------------------------------------

namespace {

constexpr int64_t MR = 4;
constexpr int64_t NR = 16;
constexpr int64_t KC = 256;

// Pack an MR x kc slice of op(A) as Ap[p*MR + r], zero-padded rows.
inline void pack_a(bool trans_a, const float* a, int64_t lda, int64_t i0,
                   int64_t rows, int64_t p0, int64_t kc, float* ap) {
  for (int64_t p = 0; p < kc; ++p) {
    for (int64_t r = 0; r < MR; ++r) {
      float v = 0.f;
      if (r < rows) {
        const int64_t i = i0 + r, pp = p0 + p;
        v = trans_a ? a[pp * lda + i] : a[i * lda + pp];
      }
      ap[p * MR + r] = v;
    }
  }
}

// Pack a kc x NR slice of op(B) as Bp[p*NR + j], zero-padded columns.
inline void pack_b(bool trans_b, const float* b, int64_t ldb, int64_t j0,
                   int64_t cols, int64_t p0, int64_t kc, float* bp) {
  for (int64_t p = 0; p < kc; ++p) {
    const int64_t pp = p0 + p;
    for (int64_t j = 0; j < NR; ++j) {
      float v = 0.f;
      if (j < cols) {
        const int64_t jj = j0 + j;
        v = trans_b ? b[jj * ldb + pp] : b[pp * ldb + jj];
      }
      bp[p * NR + j] = v;
    }
  }
}

inline void micro_4x16(const float* ap, const float* bp, int64_t kc,
                       float* acc /* 4*16 */) {
  __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
  __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
  __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
  __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
  for (int64_t p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_loadu_ps(bp + p * NR);
    const __m256 b1 = _mm256_loadu_ps(bp + p * NR + 8);
    __m256 a0 = _mm256_broadcast_ss(ap + p * MR + 0);
    c00 = _mm256_fmadd_ps(a0, b0, c00);
    c01 = _mm256_fmadd_ps(a0, b1, c01);
    a0 = _mm256_broadcast_ss(ap + p * MR + 1);
    c10 = _mm256_fmadd_ps(a0, b0, c10);
    c11 = _mm256_fmadd_ps(a0, b1, c11);
    a0 = _mm256_broadcast_ss(ap + p * MR + 2);
    c20 = _mm256_fmadd_ps(a0, b0, c20);
    c21 = _mm256_fmadd_ps(a0, b1, c21);
    a0 = _mm256_broadcast_ss(ap + p * MR + 3);
    c30 = _mm256_fmadd_ps(a0, b0, c30);
    c31 = _mm256_fmadd_ps(a0, b1, c31);
  }
  _mm256_storeu_ps(acc + 0, c00);
  _mm256_storeu_ps(acc + 8, c01);
  _mm256_storeu_ps(acc + 16, c10);
  _mm256_storeu_ps(acc + 24, c11);
  _mm256_storeu_ps(acc + 32, c20);
  _mm256_storeu_ps(acc + 40, c21);
  _mm256_storeu_ps(acc + 48, c30);
  _mm256_storeu_ps(acc + 56, c31);
}

}  // namespace

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda, const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < n; ++j)
        c[i * ldc + j] = beta == 0.f ? 0.f : beta * c[i * ldc + j];
    return;
  }

  thread_local std::vector<float> bpack, apack;
  const int64_t n_panels = (n + NR - 1) / NR;
  bpack.resize(static_cast<size_t>(KC) * n_panels * NR);
  apack.resize(static_cast<size_t>(KC) * MR);

  for (int64_t p0 = 0; p0 < k; p0 += KC) {
    const int64_t kc = std::min(KC, k - p0);
    const float eff_beta = (p0 == 0) ? beta : 1.f;
    for (int64_t jp = 0; jp < n_panels; ++jp)
      pack_b(trans_b, b, ldb, jp * NR, std::min(NR, n - jp * NR), p0, kc,
             bpack.data() + jp * KC * NR);

    for (int64_t i0 = 0; i0 < m; i0 += MR) {
      const int64_t rows = std::min(MR, m - i0);
      pack_a(trans_a, a, lda, i0, rows, p0, kc, apack.data());
      for (int64_t jp = 0; jp < n_panels; ++jp) {
        const int64_t j0 = jp * NR;
        const int64_t cols = std::min(NR, n - j0);
        alignas(32) float acc[MR * NR];
        micro_4x16(apack.data(), bpack.data() + jp * KC * NR, kc, acc);
        for (int64_t r = 0; r < rows; ++r) {
          float* crow = c + (i0 + r) * ldc + j0;
          const float* arow = acc + r * NR;
          if (eff_beta == 0.f) {
            for (int64_t j = 0; j < cols; ++j) crow[j] = alpha * arow[j];
          } else if (eff_beta == 1.f) {
            for (int64_t j = 0; j < cols; ++j) crow[j] += alpha * arow[j];
          } else {
            for (int64_t j = 0; j < cols; ++j)
              crow[j] = alpha * arow[j] + eff_beta * crow[j];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// TV-L1 steps
// ---------------------------------------------------------------------------

void tvl1_threshold(const float* rho_c, const float* i1wx, const float* i1wy,
                    const float* grad2, const float* u1, const float* u2,
                    float* v1, float* v2, float l_t, float grad_eps, int64_t n) {
  const __m256 vlt = _mm256_set1_ps(l_t);
  const __m256 vneg_lt = _mm256_set1_ps(-l_t);
  const __m256 veps = _mm256_set1_ps(grad_eps);
  const __m256 vzero = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 wx = _mm256_loadu_ps(i1wx + i);
    const __m256 wy = _mm256_loadu_ps(i1wy + i);
    const __m256 g2 = _mm256_loadu_ps(grad2 + i);
    const __m256 a1 = _mm256_loadu_ps(u1 + i);
    const __m256 a2 = _mm256_loadu_ps(u2 + i);
    __m256 rho = _mm256_loadu_ps(rho_c + i);
    rho = _mm256_fmadd_ps(wx, a1, rho);
    rho = _mm256_fmadd_ps(wy, a2, rho);

    const __m256 lt_g2 = _mm256_mul_ps(vlt, g2);
    const __m256 below = _mm256_cmp_ps(rho, _mm256_sub_ps(vzero, lt_g2), _CMP_LT_OQ);
    const __m256 above = _mm256_cmp_ps(rho, lt_g2, _CMP_GT_OQ);
    const __m256 tiny = _mm256_cmp_ps(g2, veps, _CMP_LT_OQ);

    // middle branch: fi = -rho/g2 (guard the division for tiny g2)
    const __m256 safe_g2 = _mm256_blendv_ps(g2, _mm256_set1_ps(1.f), tiny);
    const __m256 fi = _mm256_div_ps(_mm256_sub_ps(vzero, rho), safe_g2);
    __m256 coef = _mm256_blendv_ps(fi, vzero, tiny);
    coef = _mm256_blendv_ps(coef, vneg_lt, above);
    coef = _mm256_blendv_ps(coef, vlt, below);

    _mm256_storeu_ps(v1 + i, _mm256_fmadd_ps(coef, wx, a1));
    _mm256_storeu_ps(v2 + i, _mm256_fmadd_ps(coef, wy, a2));
  }
  for (; i < n; ++i) {
    const float rho = rho_c[i] + i1wx[i] * u1[i] + i1wy[i] * u2[i];
    float d1, d2;
    if (rho < -l_t * grad2[i]) {
      d1 = l_t * i1wx[i];
      d2 = l_t * i1wy[i];
    } else if (rho > l_t * grad2[i]) {
      d1 = -l_t * i1wx[i];
      d2 = -l_t * i1wy[i];
    } else if (grad2[i] < grad_eps) {
      d1 = d2 = 0.f;
    } else {
      const float fi = -rho / grad2[i];
      d1 = fi * i1wx[i];
      d2 = fi * i1wy[i];
    }
    v1[i] = u1[i] + d1;
    v2[i] = u2[i] + d2;
  }
}

void tvl1_dual_update(const float* u1x, const float* u1y, const float* u2x,
                      const float* u2y, float* p11, float* p12, float* p21,
                      float* p22, float taut, int64_t n) {
  const __m256 vt = _mm256_set1_ps(taut);
  const __m256 one = _mm256_set1_ps(1.f);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 x1 = _mm256_loadu_ps(u1x + i);
    const __m256 y1 = _mm256_loadu_ps(u1y + i);
    const __m256 x2 = _mm256_loadu_ps(u2x + i);
    const __m256 y2 = _mm256_loadu_ps(u2y + i);
    const __m256 g1 = _mm256_sqrt_ps(_mm256_fmadd_ps(x1, x1, _mm256_mul_ps(y1, y1)));
    const __m256 g2 = _mm256_sqrt_ps(_mm256_fmadd_ps(x2, x2, _mm256_mul_ps(y2, y2)));
    const __m256 ng1 = _mm256_fmadd_ps(vt, g1, one);
    const __m256 ng2 = _mm256_fmadd_ps(vt, g2, one);
    _mm256_storeu_ps(p11 + i, _mm256_div_ps(_mm256_fmadd_ps(vt, x1, _mm256_loadu_ps(p11 + i)), ng1));
    _mm256_storeu_ps(p12 + i, _mm256_div_ps(_mm256_fmadd_ps(vt, y1, _mm256_loadu_ps(p12 + i)), ng1));
    _mm256_storeu_ps(p21 + i, _mm256_div_ps(_mm256_fmadd_ps(vt, x2, _mm256_loadu_ps(p21 + i)), ng2));
    _mm256_storeu_ps(p22 + i, _mm256_div_ps(_mm256_fmadd_ps(vt, y2, _mm256_loadu_ps(p22 + i)), ng2));
  }
  for (; i < n; ++i) {
    const float g1 = std::sqrt(u1x[i] * u1x[i] + u1y[i] * u1y[i]);
    const float g2 = std::sqrt(u2x[i] * u2x[i] + u2y[i] * u2y[i]);
    const float ng1 = 1.f + taut * g1;
    const float ng2 = 1.f + taut * g2;
    p11[i] = (p11[i] + taut * u1x[i]) / ng1;
    p12[i] = (p12[i] + taut * u1y[i]) / ng1;
    p21[i] = (p21[i] + taut * u2x[i]) / ng2;
    p22[i] = (p22[i] + taut * u2y[i]) / ng2;
  }
}

double tvl1_primal_update(const float* v1, const float* v2, const float* div_p1,
                          const float* div_p2, float* u1, float* u2, float theta,
                          int64_t n) {
  const __m256 vth = _mm256_set1_ps(theta);
  __m256 acc = _mm256_setzero_ps();
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 old1 = _mm256_loadu_ps(u1 + i);
    const __m256 old2 = _mm256_loadu_ps(u2 + i);
    const __m256 n1 = _mm256_fmadd_ps(vth, _mm256_loadu_ps(div_p1 + i), _mm256_loadu_ps(v1 + i));
    const __m256 n2 = _mm256_fmadd_ps(vth, _mm256_loadu_ps(div_p2 + i), _mm256_loadu_ps(v2 + i));
    _mm256_storeu_ps(u1 + i, n1);
    _mm256_storeu_ps(u2 + i, n2);
    const __m256 d1 = _mm256_sub_ps(n1, old1);
    const __m256 d2 = _mm256_sub_ps(n2, old2);
    acc = _mm256_fmadd_ps(d1, d1, acc);
    acc = _mm256_fmadd_ps(d2, d2, acc);
  }
  double err = static_cast<double>(hsum(acc));
  for (; i < n; ++i) {
    const float u1k = u1[i];
    const float u2k = u2[i];
    u1[i] = v1[i] + theta * div_p1[i];
    u2[i] = v2[i] + theta * div_p2[i];
    const double d1 = u1[i] - u1k;
    const double d2 = u2[i] - u2k;
    err += d1 * d1 + d2 * d2;
  }
  return err;
}

}  // namespace mcl::kern::avx2
