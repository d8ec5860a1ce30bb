// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sv2v/autograd.hpp"

// Bilinear sampling and deformable convolution primitives.
//
// Conventions shared by every operator here:
//  * coordinates are (row, col) in feature-grid pixels, origin at the centre of
//    the top-left pixel;
//  * a sampling corner outside [0, H-1] x [0, W-1] reads as 0;
//  * kernels are odd-sized, stride 1, dilation 1, padded to preserve H x W;
//  * local offsets use channel 2k for the row and 2k+1 for the column
//    displacement of kernel point k (row-major over the kernel window);
//  * masks are [B, N_p, H, W] and are shared by all input channels.

namespace sv2v::deform {

enum class OffsetKind { global, local };

/// Sampling displacements. Global: [B, 2, H, W], one (dy, dx) per output
/// location applied to every kernel point. Local: [B, 2*N_p, H, W].
struct OffsetField {
  OffsetKind kind = OffsetKind::local;
  Var data;
};

/// Per-point modulation scalars in [0, 1], [B, N_p, H, W].
struct BlendingMask {
  Var data;
};

/// Bilinear value of one H x W plane at fractional (y, x), zero outside.
double bilinear_at(const double* plane, int height, int width, double y, double x);

/// Samples x [B, C, H, W] at coords [B, 2, H', W'] (row, col); returns [B, C, H', W'].
Tensor bilinear_sample(const Tensor& x, const Tensor& coords);

/// Broadcasts a global [B, 2, H, W] field to the local [B, 2*N_p, H, W] layout.
Var expand_global_offsets(const Var& global_offsets, int kernel_points);

/// sum_k w(p_k) * x(p_o + p_k + dp_k) * m_k. Differentiable in all four inputs.
Var deformable_conv(const Var& weight, const Var& x, const OffsetField& offsets,
                    const BlendingMask& mask);

/// Bias-free convolution with the same geometry as deformable_conv.
Var standard_conv(const Var& weight, const Var& x);

/// Coarse alignment: upsample(deformable_conv(w_g, downsample(f), dp_g, 1)).
/// `global_offsets` lives on the ceil(H/2) x ceil(W/2) grid.
Var global_align(const Var& w_g, const Var& f, const Var& global_offsets);
/// global_align on an input that is already downsample2(f); the result is out_h x out_w.
Var global_align_coarse(const Var& w_g, const Var& f_coarse, const Var& global_offsets, int out_h,
                        int out_w);

/// Fused blend-and-deform. For every output point and kernel point k the
/// shared weights see  m_k * a_t(p_o + p_k) + (1 - m_k) * f(p_o + p_k + dp_k).
Var adabd(const Var& w_l, const Var& a_t, const Var& f_ref_coarse, const OffsetField& local_offsets,
          const BlendingMask& blend_mask);

}  // namespace sv2v::deform
