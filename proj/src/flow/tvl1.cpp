#include "mcl/flow/tvl1.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcl/core/error.hpp"
#include "mcl/kernels/kernels.hpp"

// Duality-based TV-L1 optical flow (Zach, Pock, Bischof 2007), coarse-to-fine
// with bicubic warping, after the classic public-domain reference structure:
// presmoothed luminance pyramid, per-warp linearized data term, fixed-point
// primal-dual iterations. The finest level additionally carries a monotone
// energy guard: a warp whose true TV-L1 energy would increase is rolled back.

namespace mcl::flow {

namespace {

constexpr float kGradEps = 1e-10f;
constexpr float kPresmoothSigma = 0.8f;
constexpr int kMinLevelSize = 8;

using Buf = std::vector<float>;

void gaussian_blur(Buf& img, int w, int h, float sigma) {
  if (sigma <= 0.f) return;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0f * sigma)));
  std::vector<float> kernel(radius + 1);
  float ksum = 0.f;
  for (int i = 0; i <= radius; ++i) {
    kernel[i] = std::exp(-0.5f * (i * i) / (sigma * sigma));
    ksum += (i == 0) ? kernel[i] : 2.f * kernel[i];
  }
  for (auto& k : kernel) k /= ksum;

  Buf tmp(img.size());
  // horizontal, replicate border
  for (int y = 0; y < h; ++y) {
    const float* row = img.data() + static_cast<size_t>(y) * w;
    float* out = tmp.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float acc = kernel[0] * row[x];
      for (int i = 1; i <= radius; ++i) {
        const int xl = std::max(0, x - i);
        const int xr = std::min(w - 1, x + i);
        acc += kernel[i] * (row[xl] + row[xr]);
      }
      out[x] = acc;
    }
  }
  // vertical
  for (int y = 0; y < h; ++y) {
    float* out = img.data() + static_cast<size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float acc = kernel[0] * tmp[static_cast<size_t>(y) * w + x];
      for (int i = 1; i <= radius; ++i) {
        const int yu = std::max(0, y - i);
        const int yd = std::min(h - 1, y + i);
        acc += kernel[i] * (tmp[static_cast<size_t>(yu) * w + x] +
                            tmp[static_cast<size_t>(yd) * w + x]);
      }
      out[x] = acc;
    }
  }
}

inline float bilinear_at(const Buf& img, int w, int h, float x, float y) {
  x = std::clamp(x, 0.f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.f, static_cast<float>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 2 >= 0 ? w - 2 : 0);
  const int y0 = std::min(static_cast<int>(y), h - 2 >= 0 ? h - 2 : 0);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const float fx = x - x0;
  const float fy = y - y0;
  const float a = img[static_cast<size_t>(y0) * w + x0];
  const float b = img[static_cast<size_t>(y0) * w + x1];
  const float c = img[static_cast<size_t>(y1) * w + x0];
  const float d = img[static_cast<size_t>(y1) * w + x1];
  return (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
}

inline float cubic_cell(float pm1, float p0, float p1, float p2, float t) {
  // cubic convolution, a = -0.5
  return p0 + 0.5f * t *
                  (p1 - pm1 +
                   t * (2.f * pm1 - 5.f * p0 + 4.f * p1 - p2 +
                        t * (3.f * (p0 - p1) + p2 - pm1)));
}

inline float bicubic_at(const Buf& img, int w, int h, float x, float y) {
  x = std::clamp(x, 0.f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.f, static_cast<float>(h - 1));
  const int ix = static_cast<int>(std::floor(x));
  const int iy = static_cast<int>(std::floor(y));
  const float tx = x - ix;
  const float ty = y - iy;
  float col[4];
  for (int m = -1; m <= 2; ++m) {
    const int yy = std::clamp(iy + m, 0, h - 1);
    const float* row = img.data() + static_cast<size_t>(yy) * w;
    const int xm1 = std::clamp(ix - 1, 0, w - 1);
    const int x0 = std::clamp(ix, 0, w - 1);
    const int x1 = std::clamp(ix + 1, 0, w - 1);
    const int x2 = std::clamp(ix + 2, 0, w - 1);
    col[m + 1] = cubic_cell(row[xm1], row[x0], row[x1], row[x2], tx);
  }
  return cubic_cell(col[0], col[1], col[2], col[3], ty);
}

void bicubic_warp(const Buf& img, const Buf& u, const Buf& v, Buf& out, int w, int h) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      out[p] = bicubic_at(img, w, h, x + u[p], y + v[p]);
    }
}

void centered_gradient(const Buf& in, Buf& dx, Buf& dy, int w, int h) {
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(0, y - 1);
    const int yp = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(0, x - 1);
      const int xp = std::min(w - 1, x + 1);
      const size_t p = static_cast<size_t>(y) * w + x;
      dx[p] = 0.5f * (in[static_cast<size_t>(y) * w + xp] - in[static_cast<size_t>(y) * w + xm]);
      dy[p] = 0.5f * (in[static_cast<size_t>(yp) * w + x] - in[static_cast<size_t>(ym) * w + x]);
    }
  }
}

void forward_gradient(const Buf& u, Buf& ux, Buf& uy, int w, int h) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      ux[p] = (x < w - 1) ? u[p + 1] - u[p] : 0.f;
      uy[p] = (y < h - 1) ? u[p + w] - u[p] : 0.f;
    }
  }
}

// Adjoint of forward_gradient (up to sign), so borders mirror its zero rows.
void divergence(const Buf& p1, const Buf& p2, Buf& div, int w, int h) {
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      float dx;
      if (x == 0)
        dx = p1[p];
      else if (x == w - 1)
        dx = -p1[p - 1];
      else
        dx = p1[p] - p1[p - 1];
      float dy;
      if (y == 0)
        dy = p2[p];
      else if (y == h - 1)
        dy = -p2[p - w];
      else
        dy = p2[p] - p2[p - w];
      div[p] = dx + dy;
    }
  }
}

void zoom_size(int w, int h, float factor, int* nw, int* nh) {
  *nw = static_cast<int>(w * factor + 0.5f);
  *nh = static_cast<int>(h * factor + 0.5f);
}

Buf zoom_out(const Buf& src, int w, int h, int nw, int nh) {
  Buf smoothed = src;
  const float factor = static_cast<float>(nw) / w;
  const float sigma = 0.6f * std::sqrt(1.f / (factor * factor) - 1.f);
  gaussian_blur(smoothed, w, h, sigma);
  Buf out(static_cast<size_t>(nw) * nh);
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x) {
      const float sx = x * (static_cast<float>(w) / nw);
      const float sy = y * (static_cast<float>(h) / nh);
      out[static_cast<size_t>(y) * nw + x] = bilinear_at(smoothed, w, h, sx, sy);
    }
  return out;
}

Buf zoom_in_flow(const Buf& src, int w, int h, int nw, int nh) {
  Buf out(static_cast<size_t>(nw) * nh);
  const float fx = static_cast<float>(w) / nw;
  const float fy = static_cast<float>(h) / nh;
  const float gain = static_cast<float>(nw) / w;  // flow values scale with size
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x)
      out[static_cast<size_t>(y) * nw + x] = gain * bilinear_at(src, w, h, x * fx, y * fy);
  return out;
}

double tvl1_energy(const Buf& i0, const Buf& i1, const Buf& u1, const Buf& u2,
                   int w, int h, float lambda) {
  Buf warped(i0.size());
  bicubic_warp(i1, u1, u2, warped, w, h);
  double e = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      const double u1x = (x < w - 1) ? u1[p + 1] - u1[p] : 0.0;
      const double u1y = (y < h - 1) ? u1[p + w] - u1[p] : 0.0;
      const double u2x = (x < w - 1) ? u2[p + 1] - u2[p] : 0.0;
      const double u2y = (y < h - 1) ? u2[p + w] - u2[p] : 0.0;
      e += lambda * std::abs(static_cast<double>(warped[p]) - i0[p]);
      e += std::sqrt(u1x * u1x + u1y * u1y) + std::sqrt(u2x * u2x + u2y * u2y);
    }
  }
  return e;
}

// One pyramid level of the primal-dual scheme. When `energies` is non-null
// the true energy is recorded after every warp and increasing warps are
// rolled back.
void solve_level(const Buf& i0, const Buf& i1, Buf& u1, Buf& u2, int w, int h,
                 const Tvl1Params& prm, std::vector<double>* energies) {
  const int64_t size = static_cast<int64_t>(w) * h;
  const float l_t = prm.lambda_data * prm.theta;
  const float taut = prm.tau_step / prm.theta;

  Buf i1x(size), i1y(size), i1w(size), i1wx(size), i1wy(size);
  Buf rho_c(size), grad2(size), v1(size), v2(size);
  Buf p11(size, 0.f), p12(size, 0.f), p21(size, 0.f), p22(size, 0.f);
  Buf div_p1(size), div_p2(size), u1x(size), u1y(size), u2x(size), u2y(size);

  centered_gradient(i1, i1x, i1y, w, h);

  double best_energy = 0.0;
  Buf snap_u1, snap_u2, snap_p11, snap_p12, snap_p21, snap_p22;
  if (energies) {
    best_energy = tvl1_energy(i0, i1, u1, u2, w, h, prm.lambda_data);
  }

  for (int warp = 0; warp < prm.warps_per_level; ++warp) {
    if (energies) {
      snap_u1 = u1;
      snap_u2 = u2;
      snap_p11 = p11;
      snap_p12 = p12;
      snap_p21 = p21;
      snap_p22 = p22;
    }

    bicubic_warp(i1, u1, u2, i1w, w, h);
    bicubic_warp(i1x, u1, u2, i1wx, w, h);
    bicubic_warp(i1y, u1, u2, i1wy, w, h);
    for (int64_t i = 0; i < size; ++i) {
      grad2[i] = i1wx[i] * i1wx[i] + i1wy[i] * i1wy[i];
      rho_c[i] = i1w[i] - i1wx[i] * u1[i] - i1wy[i] * u2[i] - i0[i];
    }

    for (int n = 0; n < prm.inner_iterations; ++n) {
      kern::tvl1_threshold(rho_c.data(), i1wx.data(), i1wy.data(), grad2.data(),
                           u1.data(), u2.data(), v1.data(), v2.data(), l_t,
                           kGradEps, size);
      divergence(p11, p12, div_p1, w, h);
      divergence(p21, p22, div_p2, w, h);
      const double err = kern::tvl1_primal_update(v1.data(), v2.data(),
                                                  div_p1.data(), div_p2.data(),
                                                  u1.data(), u2.data(),
                                                  prm.theta, size) /
                         static_cast<double>(size);
      forward_gradient(u1, u1x, u1y, w, h);
      forward_gradient(u2, u2x, u2y, w, h);
      kern::tvl1_dual_update(u1x.data(), u1y.data(), u2x.data(), u2y.data(),
                             p11.data(), p12.data(), p21.data(), p22.data(),
                             taut, size);
      if (err < static_cast<double>(prm.stop_epsilon) * prm.stop_epsilon) break;
    }

    if (energies) {
      const double e = tvl1_energy(i0, i1, u1, u2, w, h, prm.lambda_data);
      if (e > best_energy + 1e-9) {
        u1 = snap_u1;
        u2 = snap_u2;
        p11 = snap_p11;
        p12 = snap_p12;
        p21 = snap_p21;
        p22 = snap_p22;
        energies->push_back(best_energy);
        break;
      }
      best_energy = e;
      energies->push_back(e);
    }
  }
}

Buf to_luminance(const TensorF& frame) {
  if (frame.rank() == 2 || (frame.rank() == 3 && frame.dim(2) == 1)) {
    return Buf(frame.data(), frame.data() + frame.numel());
  }
  if (frame.rank() == 3 && frame.dim(2) == 3) {
    const int64_t hw = frame.dim(0) * frame.dim(1);
    Buf out(hw);
    const float* p = frame.data();
    for (int64_t i = 0; i < hw; ++i)
      out[i] = 0.299f * p[3 * i] + 0.587f * p[3 * i + 1] + 0.114f * p[3 * i + 2];
    return out;
  }
  throw ShapeError("frame must be [H,W], [H,W,1] or [H,W,3], got " + frame.shape().str());
}

}  // namespace

void Tvl1Params::validate() const {
  if (lambda_data <= 0 || theta <= 0 || tau_step <= 0)
    throw ConfigError("tvl1: lambda_data, theta and tau_step must be positive");
  if (pyramid_scale <= 0.f || pyramid_scale >= 1.f)
    throw ConfigError("tvl1: pyramid_scale must lie in (0,1)");
  if (pyramid_levels < 1 || warps_per_level < 1 || inner_iterations < 1)
    throw ConfigError("tvl1: pyramid_levels, warps_per_level and inner_iterations must be >= 1");
  if (stop_epsilon <= 0.f) throw ConfigError("tvl1: stop_epsilon must be positive");
}

static FlowPair tvl1_impl(const TensorF& prev, const TensorF& next,
                          const Tvl1Params& prm, std::vector<double>* energies) {
  prm.validate();
  if (prev.shape() != next.shape())
    throw ShapeError("tvl1_flow: frame shapes differ: " + prev.shape().str() +
                     " vs " + next.shape().str());
  if (!prev.all_finite() || !next.all_finite())
    throw InputError("tvl1_flow: frames contain non-finite values");

  const int h = static_cast<int>(prev.dim(0));
  const int w = static_cast<int>(prev.dim(1));
  if (h < 8 || w < 8) throw ShapeError("tvl1_flow: frames must be at least 8x8");

  Buf i0 = to_luminance(prev);
  Buf i1 = to_luminance(next);

  // joint normalization to [0,255]; the published parameter defaults assume
  // this intensity range
  float lo = i0[0], hi = i0[0];
  for (float v : i0) { lo = std::min(lo, v); hi = std::max(hi, v); }
  for (float v : i1) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const float range = hi - lo;
  if (range > 1e-12f) {
    const float s = 255.f / range;
    for (auto& v : i0) v = (v - lo) * s;
    for (auto& v : i1) v = (v - lo) * s;
  } else {
    std::fill(i0.begin(), i0.end(), 0.f);
    std::fill(i1.begin(), i1.end(), 0.f);
  }
  gaussian_blur(i0, w, h, kPresmoothSigma);
  gaussian_blur(i1, w, h, kPresmoothSigma);

  // pyramid
  std::vector<Buf> pyr0{std::move(i0)}, pyr1{std::move(i1)};
  std::vector<int> pw{w}, ph{h};
  for (int s = 1; s < prm.pyramid_levels; ++s) {
    int nw, nh;
    zoom_size(pw[s - 1], ph[s - 1], prm.pyramid_scale, &nw, &nh);
    if (nw < kMinLevelSize || nh < kMinLevelSize)
      throw ConfigError("tvl1_flow: frame smaller than the coarsest pyramid level (level " +
                        std::to_string(s) + " would be " + std::to_string(nw) + "x" +
                        std::to_string(nh) + ")");
    pyr0.push_back(zoom_out(pyr0[s - 1], pw[s - 1], ph[s - 1], nw, nh));
    pyr1.push_back(zoom_out(pyr1[s - 1], pw[s - 1], ph[s - 1], nw, nh));
    pw.push_back(nw);
    ph.push_back(nh);
  }

  const int coarsest = prm.pyramid_levels - 1;
  Buf u1(static_cast<size_t>(pw[coarsest]) * ph[coarsest], 0.f);
  Buf u2(u1.size(), 0.f);

  for (int s = coarsest; s >= 0; --s) {
    std::vector<double>* trace = (s == 0) ? energies : nullptr;
    solve_level(pyr0[s], pyr1[s], u1, u2, pw[s], ph[s], prm, trace);
    if (s > 0) {
      u1 = zoom_in_flow(u1, pw[s], ph[s], pw[s - 1], ph[s - 1]);
      u2 = zoom_in_flow(u2, pw[s], ph[s], pw[s - 1], ph[s - 1]);
    }
  }

  FlowPair out;
  out.u = TensorF(Shape{h, w}, std::move(u1));
  out.v = TensorF(Shape{h, w}, std::move(u2));
  return out;
}

FlowPair tvl1_flow(const TensorF& prev, const TensorF& next, const Tvl1Params& params) {
  // the energy guard is part of the solver contract at the finest level
  std::vector<double> energies;
  return tvl1_impl(prev, next, params, &energies);
}

FlowPair tvl1_flow_traced(const TensorF& prev, const TensorF& next,
                          const Tvl1Params& params, std::vector<double>* finest_energies) {
  return tvl1_impl(prev, next, params, finest_energies);
}

FlowSequence flow_sequence(const std::vector<TensorF>& video, const Tvl1Params& params) {
  const int64_t n = static_cast<int64_t>(video.size());
  if (n < 2) throw InputError("flow_sequence: need at least 2 frames, got " + std::to_string(n));
  FlowSequence seq;
  seq.flows.reserve(n);
  for (int64_t i = 0; i + 1 < n; ++i)
    seq.flows.push_back(tvl1_flow(video[i], video[i + 1], params));
  // the final frame has no successor; repeat the previous displacement field
  FlowPair last;
  last.u = seq.flows.back().u.clone();
  last.v = seq.flows.back().v.clone();
  seq.flows.push_back(std::move(last));
  return seq;
}

}  // namespace mcl::flow
