// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations used only by tests. They are written
// directly from the defining sums, without im2col, shared helpers or the
// library's sampling code.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "sv2v/autograd.hpp"
#include "sv2v/ops.hpp"

namespace oracle {

using sv2v::Tensor;

inline double at4(const Tensor& t, int b, int c, int h, int w) {
  return t[((static_cast<std::size_t>(b) * t.dim(1) + c) * t.dim(2) + h) * t.dim(3) + w];
}
inline double& at4(Tensor& t, int b, int c, int h, int w) {
  return t[((static_cast<std::size_t>(b) * t.dim(1) + c) * t.dim(2) + h) * t.dim(3) + w];
}

inline Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor* bias, int stride, int pad) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int OH = (H + 2 * pad - kh) / stride + 1, OW = (W + 2 * pad - kw) / stride + 1;
  Tensor out({B, Co, OH, OW});
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int i = 0; i < OH; ++i)
        for (int j = 0; j < OW; ++j) {
          double s = bias ? (*bias)[co] : 0.0;
          for (int c = 0; c < C; ++c)
            for (int u = 0; u < kh; ++u)
              for (int v = 0; v < kw; ++v) {
                const int y = i * stride - pad + u, xx = j * stride - pad + v;
                if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                s += at4(w, co, c, u, v) * at4(x, b, c, y, xx);
              }
          at4(out, b, co, i, j) = s;
        }
  return out;
}

/// Scatter form: every input pixel adds w * x to a stride-spaced window.
inline Tensor conv_transpose2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride,
                               int pad, int out_pad) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(1), k = w.dim(2);
  const int OH = (H - 1) * stride - 2 * pad + k + out_pad;
  const int OW = (W - 1) * stride - 2 * pad + k + out_pad;
  Tensor out({B, Co, OH, OW});
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int i = 0; i < OH; ++i)
        for (int j = 0; j < OW; ++j) at4(out, b, co, i, j) = bias[co];
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j)
          for (int co = 0; co < Co; ++co)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int y = i * stride - pad + u, xx = j * stride - pad + v;
                if (y < 0 || y >= OH || xx < 0 || xx >= OW) continue;
                at4(out, b, co, y, xx) += at4(x, b, c, i, j) * at4(w, c, co, u, v);
              }
  return out;
}

/// Bilinear interpolation with zero-valued out-of-range corners.
inline double bilinear(const Tensor& x, int b, int c, double y, double xx) {
  const int H = x.dim(2), W = x.dim(3);
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(xx));
  double s = 0.0;
  for (int dy = 0; dy <= 1; ++dy)
    for (int dx = 0; dx <= 1; ++dx) {
      const int yy = y0 + dy, xi = x0 + dx;
      if (yy < 0 || yy >= H || xi < 0 || xi >= W) continue;
      const double wy = 1.0 - std::abs(y - yy), wx = 1.0 - std::abs(xx - xi);
      s += wy * wx * at4(x, b, c, yy, xi);
    }
  return s;
}

/// Modulated deformable convolution from the defining sum. offsets are local
/// [B, 2*N_p, H, W] (row, col per point), mask [B, N_p, H, W].
inline Tensor deformable_conv(const Tensor& w, const Tensor& x, const Tensor& offsets, const Tensor& mask) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), k = w.dim(2), c0 = k / 2;
  Tensor out({B, Co, H, W});
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Co; ++co)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          double s = 0.0;
          for (int u = 0; u < k; ++u)
            for (int v = 0; v < k; ++v) {
              const int p = u * k + v;
              const double y = i + u - c0 + at4(offsets, b, 2 * p, i, j);
              const double xx = j + v - c0 + at4(offsets, b, 2 * p + 1, i, j);
              const double m = at4(mask, b, p, i, j);
              for (int c = 0; c < C; ++c) s += at4(w, co, c, u, v) * bilinear(x, b, c, y, xx) * m;
            }
          at4(out, b, co, i, j) = s;
        }
  return out;
}

/// Central-difference gradient of a scalar function of `param` at the listed
/// flat indices (all indices when empty).
inline std::vector<double> numeric_grad(const std::function<double()>& f, sv2v::Var& param,
                                        const std::vector<std::size_t>& indices, double h) {
  std::vector<double> g;
  Tensor& v = param.mutable_value();
  for (std::size_t i : indices) {
    const double orig = v[i];
    v[i] = orig + h;
    const double fp = f();
    v[i] = orig - h;
    const double fm = f();
    v[i] = orig;
    g.push_back((fp - fm) / (2 * h));
  }
  return g;
}

/// ||a - n|| / max(||a||, ||n||, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n, double floor = 1e-8) {
  double d = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nn), floor});
}

inline std::vector<std::size_t> all_indices(const Tensor& t) {
  std::vector<std::size_t> idx(t.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

/// Up to `n` distinct indices drawn uniformly.
inline std::vector<std::size_t> sample_indices(const Tensor& t, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx = all_indices(t);
  std::shuffle(idx.begin(), idx.end(), rng);
  if (idx.size() > n) idx.resize(n);
  return idx;
}

/// Offsets whose fractional part lies in [0.25, 0.75], so every sampling
/// coordinate stays at least 0.25 from the grid lines where bilinear
/// interpolation is not differentiable.
inline Tensor off_grid_offsets(const sv2v::Shape& shape, std::mt19937_64& rng, int max_int = 1) {
  std::uniform_int_distribution<int> whole(-max_int, max_int);
  std::uniform_real_distribution<double> frac(0.25, 0.75);
  Tensor t(shape);
  for (auto& v : t.values()) v = whole(rng) + frac(rng);
  return t;
}

/// Scalar projection sum(out * r) used to turn tensor outputs into losses.
inline sv2v::Var project(const sv2v::Var& out, const Tensor& r) {
  return sv2v::sum_all(sv2v::mul(out, sv2v::constant(r)));
}

struct GradCheck {
  double rel_error;
  std::size_t checked;
};

/// Compares backward() against central differences for `param`.
inline GradCheck check_gradient(const std::function<sv2v::Var()>& loss, sv2v::Var param,
                                const std::vector<std::size_t>& indices, double h = 1e-3) {
  param.zero_grad();
  sv2v::Var l = loss();
  sv2v::backward(l);
  std::vector<double> analytic;
  const Tensor g = param.has_grad() ? param.grad() : Tensor(param.shape());
  for (std::size_t i : indices) analytic.push_back(g[i]);
  const auto numeric = numeric_grad([&] { return loss().value()[0]; }, param, indices, h);
  return {relative_error(analytic, numeric), indices.size()};
}

}  // namespace oracle
