// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/deform.hpp"

#include <array>
#include <cmath>

#include "sv2v/ops.hpp"

namespace sv2v::deform {

namespace {

// Four bilinear corners of one sampling position. Out-of-range corners carry
// zero weight and a dummy index so the inner loops stay branch-free.
struct Corners {
  std::array<int, 4> idx{};
  std::array<double, 4> wt{};
  std::array<double, 4> dwy{};  // d wt / d y
  std::array<double, 4> dwx{};  // d wt / d x
};

Corners make_corners(int height, int width, double y, double x) {
  Corners c;
  if (!(y > -1.0 && y < height && x > -1.0 && x < width)) return c;
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double ly = y - y0, lx = x - x0;
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const double wt[4] = {(1 - ly) * (1 - lx), (1 - ly) * lx, ly * (1 - lx), ly * lx};
  const double dwy[4] = {-(1 - lx), -lx, 1 - lx, lx};
  const double dwx[4] = {-(1 - ly), 1 - ly, -ly, ly};
  for (int i = 0; i < 4; ++i) {
    if (ys[i] < 0 || ys[i] >= height || xs[i] < 0 || xs[i] >= width) continue;
    c.idx[i] = ys[i] * width + xs[i];
    c.wt[i] = wt[i];
    c.dwy[i] = dwy[i];
    c.dwx[i] = dwx[i];
  }
  return c;
}

double gather(const double* plane, const Corners& c) {
  return c.wt[0] * plane[c.idx[0]] + c.wt[1] * plane[c.idx[1]] + c.wt[2] * plane[c.idx[2]] +
         c.wt[3] * plane[c.idx[3]];
}

struct KernelGeom {
  int channels, height, width, k_h, k_w;
  int points() const { return k_h * k_w; }
  int plane() const { return height * width; }
};

// Builds the [N_p * P] table of corners for one batch item.
std::vector<Corners> plan_sampling(const KernelGeom& g, const double* offsets) {
  const int P = g.plane(), Np = g.points();
  std::vector<Corners> plan(static_cast<std::size_t>(Np) * P);
  for (int k = 0; k < Np; ++k) {
    const int ky = k / g.k_w - g.k_h / 2, kx = k % g.k_w - g.k_w / 2;
    const double* dy = offsets + static_cast<std::size_t>(2 * k) * P;
    const double* dx = offsets + static_cast<std::size_t>(2 * k + 1) * P;
    for (int p = 0; p < P; ++p) {
      const int oy = p / g.width, ox = p % g.width;
      plan[static_cast<std::size_t>(k) * P + p] =
          make_corners(g.height, g.width, oy + ky + dy[p], ox + kx + dx[p]);
    }
  }
  return plan;
}

// Value at the rigid (integer) kernel position, zero outside the map.
inline double rigid_at(const double* plane, const KernelGeom& g, int k, int p) {
  const int y = p / g.width + k / g.k_w - g.k_h / 2;
  const int x = p % g.width + k % g.k_w - g.k_w / 2;
  if (y < 0 || y >= g.height || x < 0 || x >= g.width) return 0.0;
  return plane[y * g.width + x];
}

inline int rigid_index(const KernelGeom& g, int k, int p) {
  const int y = p / g.width + k / g.k_w - g.k_h / 2;
  const int x = p % g.width + k % g.k_w - g.k_w / 2;
  if (y < 0 || y >= g.height || x < 0 || x >= g.width) return -1;
  return y * g.width + x;
}

void check_weight(const Var& weight, int channels) {
  SV2V_CHECK(weight.value().ndim() == 4, "deformable kernel must be 4-D, got " +
                                             shape_str(weight.shape()));
  SV2V_CHECK(weight.dim(1) == channels, "deformable kernel expects " +
                                            std::to_string(weight.dim(1)) +
                                            " input channels, input has " +
                                            std::to_string(channels));
  SV2V_CHECK(weight.dim(2) % 2 == 1 && weight.dim(3) % 2 == 1,
             "deformable kernels must have odd spatial size");
}

void check_field(const Tensor& t, int batch, int channels, int height, int width,
                 const char* what) {
  SV2V_CHECK(t.ndim() == 4 && t.dim(0) == batch && t.dim(1) == channels && t.dim(2) == height &&
                 t.dim(3) == width,
             std::string(what) + ": expected " +
                 shape_str({batch, channels, height, width}) + ", got " + shape_str(t.shape()));
}

// Columns [C * N_p, P] of modulated samples for one batch item.
void deform_columns(const KernelGeom& g, const double* x, const std::vector<Corners>& plan,
                    const double* mask, double* cols) {
  const int P = g.plane(), Np = g.points();
  for (int c = 0; c < g.channels; ++c) {
    const double* plane = x + static_cast<std::size_t>(c) * P;
    for (int k = 0; k < Np; ++k) {
      double* row = cols + (static_cast<std::size_t>(c) * Np + k) * P;
      const Corners* pk = plan.data() + static_cast<std::size_t>(k) * P;
      const double* mk = mask + static_cast<std::size_t>(k) * P;
      for (int p = 0; p < P; ++p) row[p] = mk[p] * gather(plane, pk[p]);
    }
  }
}

void blend_columns(const KernelGeom& g, const double* a, const double* f,
                   const std::vector<Corners>& plan, const double* mask, double* cols) {
  const int P = g.plane(), Np = g.points();
  for (int c = 0; c < g.channels; ++c) {
    const double* pa = a + static_cast<std::size_t>(c) * P;
    const double* pf = f + static_cast<std::size_t>(c) * P;
    for (int k = 0; k < Np; ++k) {
      double* row = cols + (static_cast<std::size_t>(c) * Np + k) * P;
      const Corners* pk = plan.data() + static_cast<std::size_t>(k) * P;
      const double* mk = mask + static_cast<std::size_t>(k) * P;
      for (int p = 0; p < P; ++p)
        row[p] = mk[p] * rigid_at(pa, g, k, p) + (1.0 - mk[p]) * gather(pf, pk[p]);
    }
  }
}

}  // namespace

double bilinear_at(const double* plane, int height, int width, double y, double x) {
  return gather(plane, make_corners(height, width, y, x));
}

Tensor bilinear_sample(const Tensor& x, const Tensor& coords) {
  check_feature_map(x, "bilinear_sample input");
  check_feature_map(coords, "bilinear_sample coords");
  SV2V_CHECK(coords.dim(0) == x.dim(0), "bilinear_sample: batch mismatch between " +
                                            shape_str(x.shape()) + " and " +
                                            shape_str(coords.shape()));
  SV2V_CHECK(coords.dim(1) == 2, "bilinear_sample: coords must have 2 channels (row, col)");
  SV2V_CHECK(all_finite(coords), "bilinear_sample: non-finite coordinates");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Ho = coords.dim(2), Wo = coords.dim(3);
  Tensor out({B, C, Ho, Wo});
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < Ho; ++i)
      for (int j = 0; j < Wo; ++j) {
        const Corners cn = make_corners(H, W, coords.at(b, 0, i, j), coords.at(b, 1, i, j));
        for (int c = 0; c < C; ++c)
          out.at(b, c, i, j) = gather(&x.data()[(static_cast<std::size_t>(b) * C + c) * H * W], cn);
      }
  return out;
}

Var expand_global_offsets(const Var& global_offsets, int kernel_points) {
  const Tensor& g = global_offsets.value();
  check_feature_map(g, "global offsets");
  SV2V_CHECK(g.dim(1) == 2, "global offsets must have 2 channels, got " + shape_str(g.shape()));
  SV2V_CHECK(kernel_points >= 1, "kernel_points must be positive");
  const int B = g.dim(0), P = g.dim(2) * g.dim(3), Np = kernel_points;
  Tensor out({B, 2 * Np, g.dim(2), g.dim(3)});
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < Np; ++k)
      for (int d = 0; d < 2; ++d)
        std::copy_n(g.data() + (static_cast<std::size_t>(b) * 2 + d) * P, P,
                    out.data() + (static_cast<std::size_t>(b) * 2 * Np + 2 * k + d) * P);
  return Var::make(std::move(out), {global_offsets},
                   [B, P, Np](const Tensor& grad, const std::vector<NodePtr>& p) {
                     Tensor gg(p[0]->value.shape());
                     for (int b = 0; b < B; ++b)
                       for (int k = 0; k < Np; ++k)
                         for (int d = 0; d < 2; ++d) {
                           const double* src =
                               grad.data() + (static_cast<std::size_t>(b) * 2 * Np + 2 * k + d) * P;
                           double* dst = gg.data() + (static_cast<std::size_t>(b) * 2 + d) * P;
                           for (int i = 0; i < P; ++i) dst[i] += src[i];
                         }
                     p[0]->accumulate(gg);
                   });
}

Var deformable_conv(const Var& weight, const Var& x, const OffsetField& offsets,
                    const BlendingMask& mask) {
  check_feature_map(x.value(), "deformable_conv input");
  check_weight(weight, x.dim(1));
  const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
  const KernelGeom g{x.dim(1), H, W, weight.dim(2), weight.dim(3)};
  const int Np = g.points();
  Var local = offsets.data;
  if (offsets.kind == OffsetKind::global) {
    check_field(offsets.data.value(), B, 2, H, W, "deformable_conv global offsets");
    local = expand_global_offsets(offsets.data, Np);
  }
  check_field(local.value(), B, 2 * Np, H, W, "deformable_conv offsets");
  check_field(mask.data.value(), B, Np, H, W, "deformable_conv mask");

  const int Co = weight.dim(0), K = g.channels * Np, P = g.plane();
  Tensor out({B, Co, H, W});
  std::vector<double> cols(static_cast<std::size_t>(K) * P);
  for (int b = 0; b < B; ++b) {
    const auto plan = plan_sampling(g, local.value().data() + static_cast<std::size_t>(b) * 2 * Np * P);
    deform_columns(g, x.value().data() + static_cast<std::size_t>(b) * g.channels * P, plan,
                   mask.data.value().data() + static_cast<std::size_t>(b) * Np * P, cols.data());
    detail::gemm(false, false, Co, P, K, weight.value().data(), cols.data(), 0.0,
                 out.data() + static_cast<std::size_t>(b) * Co * P);
  }

  // parents: weight, x, offsets, mask
  return Var::make(
      std::move(out), {weight, x, local, mask.data},
      [g, B, Co](const Tensor& gout, const std::vector<NodePtr>& p) {
        const int Np = g.points(), P = g.plane(), K = g.channels * Np;
        const Tensor& wv = p[0]->value;
        Tensor gw, gx, goff, gm;
        if (p[0]->requires_grad) gw = Tensor(wv.shape());
        if (p[1]->requires_grad) gx = Tensor(p[1]->value.shape());
        if (p[2]->requires_grad) goff = Tensor(p[2]->value.shape());
        if (p[3]->requires_grad) gm = Tensor(p[3]->value.shape());
        std::vector<double> cols(static_cast<std::size_t>(K) * P);
        std::vector<double> dcols(static_cast<std::size_t>(K) * P);
        for (int b = 0; b < B; ++b) {
          const double* go = gout.data() + static_cast<std::size_t>(b) * Co * P;
          const double* xb = p[1]->value.data() + static_cast<std::size_t>(b) * g.channels * P;
          const double* mb = p[3]->value.data() + static_cast<std::size_t>(b) * Np * P;
          const auto plan = plan_sampling(g, p[2]->value.data() + static_cast<std::size_t>(b) * 2 * Np * P);
          if (!gw.empty()) {
            deform_columns(g, xb, plan, mb, cols.data());
            detail::gemm(false, true, Co, K, P, go, cols.data(), 1.0, gw.data());
          }
          if (gx.empty() && goff.empty() && gm.empty()) continue;
          detail::gemm(true, false, K, P, Co, wv.data(), go, 0.0, dcols.data());
          for (int c = 0; c < g.channels; ++c) {
            const double* plane = xb + static_cast<std::size_t>(c) * P;
            double* gplane = gx.empty() ? nullptr : gx.data() + (static_cast<std::size_t>(b) * g.channels + c) * P;
            for (int k = 0; k < Np; ++k) {
              const double* dc = dcols.data() + (static_cast<std::size_t>(c) * Np + k) * P;
              const Corners* pk = plan.data() + static_cast<std::size_t>(k) * P;
              const double* mk = mb + static_cast<std::size_t>(k) * P;
              double* gdy = goff.empty() ? nullptr : goff.data() + (static_cast<std::size_t>(b) * 2 * Np + 2 * k) * P;
              double* gdx = goff.empty() ? nullptr : gdy + P;
              double* gmk = gm.empty() ? nullptr : gm.data() + (static_cast<std::size_t>(b) * Np + k) * P;
              for (int q = 0; q < P; ++q) {
                const double d = dc[q];
                if (d == 0.0) continue;
                const Corners& cn = pk[q];
                if (gplane)
                  for (int i = 0; i < 4; ++i) gplane[cn.idx[i]] += d * mk[q] * cn.wt[i];
                if (gmk) gmk[q] += d * gather(plane, cn);
                if (gdy) {
                  double sy = 0.0, sx = 0.0;
                  for (int i = 0; i < 4; ++i) {
                    sy += cn.dwy[i] * plane[cn.idx[i]];
                    sx += cn.dwx[i] * plane[cn.idx[i]];
                  }
                  gdy[q] += d * mk[q] * sy;
                  gdx[q] += d * mk[q] * sx;
                }
              }
            }
          }
        }
        if (!gw.empty()) p[0]->accumulate(gw);
        if (!gx.empty()) p[1]->accumulate(gx);
        if (!goff.empty()) p[2]->accumulate(goff);
        if (!gm.empty()) p[3]->accumulate(gm);
      });
}

Var standard_conv(const Var& weight, const Var& x) {
  check_feature_map(x.value(), "standard_conv input");
  check_weight(weight, x.dim(1));
  SV2V_CHECK(weight.dim(2) == weight.dim(3), "standard_conv expects square kernels");
  return conv2d(x, weight, Var(), 1, weight.dim(2) / 2);
}

Var global_align(const Var& w_g, const Var& f, const Var& global_offsets) {
  check_feature_map(f.value(), "global_align input");
  return global_align_coarse(w_g, downsample2(f), global_offsets, f.dim(2), f.dim(3));
}

Var global_align_coarse(const Var& w_g, const Var& f_coarse, const Var& global_offsets, int out_h,
                        int out_w) {
  check_feature_map(f_coarse.value(), "global_align input");
  const int B = f_coarse.dim(0), h2 = f_coarse.dim(2), w2 = f_coarse.dim(3);
  SV2V_CHECK(out_h >= 1 && out_w >= 1 && (out_h + 1) / 2 == h2 && (out_w + 1) / 2 == w2,
             "global_align: coarse grid " + shape_str(f_coarse.shape()) + " is not the half of " +
                 std::to_string(out_h) + "x" + std::to_string(out_w));
  check_field(global_offsets.value(), B, 2, h2, w2, "global_align offsets");
  check_weight(w_g, f_coarse.dim(1));
  const int Np = w_g.dim(2) * w_g.dim(3);
  Var ones = constant(Tensor::ones({B, Np, h2, w2}));
  Var deformed = deformable_conv(w_g, f_coarse, {OffsetKind::global, global_offsets}, {ones});
  return resize_bilinear(deformed, out_h, out_w);
}

Var adabd(const Var& w_l, const Var& a_t, const Var& f_ref_coarse, const OffsetField& local_offsets,
          const BlendingMask& blend_mask) {
  check_feature_map(a_t.value(), "adabd current features");
  SV2V_CHECK(a_t.value().same_shape(f_ref_coarse.value()),
             "adabd: current features " + shape_str(a_t.shape()) +
                 " and reference features " + shape_str(f_ref_coarse.shape()) + " differ in shape");
  SV2V_CHECK(local_offsets.kind == OffsetKind::local, "adabd expects local offsets");
  check_weight(w_l, a_t.dim(1));
  const int B = a_t.dim(0), H = a_t.dim(2), W = a_t.dim(3);
  const KernelGeom g{a_t.dim(1), H, W, w_l.dim(2), w_l.dim(3)};
  const int Np = g.points();
  check_field(local_offsets.data.value(), B, 2 * Np, H, W, "adabd offsets");
  check_field(blend_mask.data.value(), B, Np, H, W, "adabd mask");

  const int Co = w_l.dim(0), K = g.channels * Np, P = g.plane();
  Tensor out({B, Co, H, W});
  std::vector<double> cols(static_cast<std::size_t>(K) * P);
  const Tensor& off = local_offsets.data.value();
  for (int b = 0; b < B; ++b) {
    const auto plan = plan_sampling(g, off.data() + static_cast<std::size_t>(b) * 2 * Np * P);
    blend_columns(g, a_t.value().data() + static_cast<std::size_t>(b) * g.channels * P,
                  f_ref_coarse.value().data() + static_cast<std::size_t>(b) * g.channels * P, plan,
                  blend_mask.data.value().data() + static_cast<std::size_t>(b) * Np * P, cols.data());
    detail::gemm(false, false, Co, P, K, w_l.value().data(), cols.data(), 0.0,
                 out.data() + static_cast<std::size_t>(b) * Co * P);
  }

  // parents: weight, a_t, f_ref_coarse, offsets, mask
  return Var::make(
      std::move(out), {w_l, a_t, f_ref_coarse, local_offsets.data, blend_mask.data},
      [g, B, Co](const Tensor& gout, const std::vector<NodePtr>& p) {
        const int Np = g.points(), P = g.plane(), K = g.channels * Np;
        const Tensor& wv = p[0]->value;
        Tensor gw, ga, gf, goff, gm;
        if (p[0]->requires_grad) gw = Tensor(wv.shape());
        if (p[1]->requires_grad) ga = Tensor(p[1]->value.shape());
        if (p[2]->requires_grad) gf = Tensor(p[2]->value.shape());
        if (p[3]->requires_grad) goff = Tensor(p[3]->value.shape());
        if (p[4]->requires_grad) gm = Tensor(p[4]->value.shape());
        std::vector<double> cols(static_cast<std::size_t>(K) * P);
        std::vector<double> dcols(static_cast<std::size_t>(K) * P);
        for (int b = 0; b < B; ++b) {
          const double* go = gout.data() + static_cast<std::size_t>(b) * Co * P;
          const double* ab = p[1]->value.data() + static_cast<std::size_t>(b) * g.channels * P;
          const double* fb = p[2]->value.data() + static_cast<std::size_t>(b) * g.channels * P;
          const double* mb = p[4]->value.data() + static_cast<std::size_t>(b) * Np * P;
          const auto plan = plan_sampling(g, p[3]->value.data() + static_cast<std::size_t>(b) * 2 * Np * P);
          if (!gw.empty()) {
            blend_columns(g, ab, fb, plan, mb, cols.data());
            detail::gemm(false, true, Co, K, P, go, cols.data(), 1.0, gw.data());
          }
          if (ga.empty() && gf.empty() && goff.empty() && gm.empty()) continue;
          detail::gemm(true, false, K, P, Co, wv.data(), go, 0.0, dcols.data());
          for (int c = 0; c < g.channels; ++c) {
            const double* pa = ab + static_cast<std::size_t>(c) * P;
            const double* pf = fb + static_cast<std::size_t>(c) * P;
            double* gpa = ga.empty() ? nullptr : ga.data() + (static_cast<std::size_t>(b) * g.channels + c) * P;
            double* gpf = gf.empty() ? nullptr : gf.data() + (static_cast<std::size_t>(b) * g.channels + c) * P;
            for (int k = 0; k < Np; ++k) {
              const double* dc = dcols.data() + (static_cast<std::size_t>(c) * Np + k) * P;
              const Corners* pk = plan.data() + static_cast<std::size_t>(k) * P;
              const double* mk = mb + static_cast<std::size_t>(k) * P;
              double* gdy = goff.empty() ? nullptr : goff.data() + (static_cast<std::size_t>(b) * 2 * Np + 2 * k) * P;
              double* gdx = goff.empty() ? nullptr : gdy + P;
              double* gmk = gm.empty() ? nullptr : gm.data() + (static_cast<std::size_t>(b) * Np + k) * P;
              for (int q = 0; q < P; ++q) {
                const double d = dc[q];
                if (d == 0.0) continue;
                const Corners& cn = pk[q];
                const int ri = rigid_index(g, k, q);
                if (gpa && ri >= 0) gpa[ri] += d * mk[q];
                if (gpf)
                  for (int i = 0; i < 4; ++i) gpf[cn.idx[i]] += d * (1.0 - mk[q]) * cn.wt[i];
                if (gmk) gmk[q] += d * ((ri >= 0 ? pa[ri] : 0.0) - gather(pf, cn));
                if (gdy) {
                  double sy = 0.0, sx = 0.0;
                  for (int i = 0; i < 4; ++i) {
                    sy += cn.dwy[i] * pf[cn.idx[i]];
                    sx += cn.dwx[i] * pf[cn.idx[i]];
                  }
                  gdy[q] += d * (1.0 - mk[q]) * sy;
                  gdx[q] += d * (1.0 - mk[q]) * sx;
                }
              }
            }
          }
        }
        if (!gw.empty()) p[0]->accumulate(gw);
        if (!ga.empty()) p[1]->accumulate(ga);
        if (!gf.empty()) p[2]->accumulate(gf);
        if (!goff.empty()) p[3]->accumulate(goff);
        if (!gm.empty()) p[4]->accumulate(gm);
      });
}

}  // namespace sv2v::deform
