#pragma once

#include <cmath>
#include <cstdint>

// Reference implementations. Every SIMD variant is tested against these.
namespace mcl::kern::scalar {

template <typename T>
void add(const T* a, const T* b, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
template <typename T>
void sub(const T* a, const T* b, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}
template <typename T>
void mul(const T* a, const T* b, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
template <typename T>
void div(const T* a, const T* b, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a[i] / b[i];
}
template <typename T>
void relu(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}
template <typename T>
void relu_mask_mul(const T* g, const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? g[i] : T(0);
}
template <typename T>
void sqrt_(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::sqrt(x[i]);
}
template <typename T>
void square(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = x[i] * x[i];
}
template <typename T>
void exp_(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}
template <typename T>
void log_(const T* x, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::log(x[i]);
}
template <typename T>
void axpby(T a, const T* x, T b, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a * x[i] + b * y[i];
}
template <typename T>
void scale(const T* x, T a, T c, T* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = a * x[i] + c;
}
template <typename T>
T sum(const T* x, int64_t n) {
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) s += x[i];
  return s;
}
template <typename T>
T dot(const T* a, const T* b, int64_t n) {
  T s = T(0);
  for (int64_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
template <typename T>
void hypot4(const T* a, const T* b, const T* c, const T* d, T* out, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    out[i] = std::sqrt(a[i] * a[i] + b[i] * b[i] + c[i] * c[i] + d[i] * d[i]);
}

template <typename T>
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k, T alpha,
          const T* a, int64_t lda, const T* b, int64_t ldb, T beta, T* c,
          int64_t ldc) {
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (int64_t p = 0; p < k; ++p) {
        const T av = trans_a ? a[p * lda + i] : a[i * lda + p];
        const T bv = trans_b ? b[j * ldb + p] : b[p * ldb + j];
        acc += av * bv;
      }
      T* cp = &c[i * ldc + j];
      *cp = alpha * acc + (beta == T(0) ? T(0) : beta * *cp);
    }
  }
}

template <typename T>
void tvl1_threshold(const T* rho_c, const T* i1wx, const T* i1wy, const T* grad2,
                    const T* u1, const T* u2, T* v1, T* v2, T l_t, T grad_eps,
                    int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const T rho = rho_c[i] + i1wx[i] * u1[i] + i1wy[i] * u2[i];
    T d1, d2;
    if (rho < -l_t * grad2[i]) {
      d1 = l_t * i1wx[i];
      d2 = l_t * i1wy[i];
    } else if (rho > l_t * grad2[i]) {
      d1 = -l_t * i1wx[i];
      d2 = -l_t * i1wy[i];
    } else if (grad2[i] < grad_eps) {
      d1 = d2 = T(0);
    } else {
      const T fi = -rho / grad2[i];
      d1 = fi * i1wx[i];
      d2 = fi * i1wy[i];
    }
    v1[i] = u1[i] + d1;
    v2[i] = u2[i] + d2;
  }
}

template <typename T>
void tvl1_dual_update(const T* u1x, const T* u1y, const T* u2x, const T* u2y,
                      T* p11, T* p12, T* p21, T* p22, T taut, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const T g1 = std::sqrt(u1x[i] * u1x[i] + u1y[i] * u1y[i]);
    const T g2 = std::sqrt(u2x[i] * u2x[i] + u2y[i] * u2y[i]);
    const T ng1 = T(1) + taut * g1;
    const T ng2 = T(1) + taut * g2;
    p11[i] = (p11[i] + taut * u1x[i]) / ng1;
    p12[i] = (p12[i] + taut * u1y[i]) / ng1;
    p21[i] = (p21[i] + taut * u2x[i]) / ng2;
    p22[i] = (p22[i] + taut * u2y[i]) / ng2;
  }
}

template <typename T>
double tvl1_primal_update(const T* v1, const T* v2, const T* div_p1,
                          const T* div_p2, T* u1, T* u2, T theta, int64_t n) {
  double err = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const T u1k = u1[i];
    const T u2k = u2[i];
    u1[i] = v1[i] + theta * div_p1[i];
    u2[i] = v2[i] + theta * div_p2[i];
    const double d1 = static_cast<double>(u1[i] - u1k);
    const double d2 = static_cast<double>(u2[i] - u2k);
    err += d1 * d1 + d2 * d2;
  }
  return err;
}

}  // namespace mcl::kern::scalar
