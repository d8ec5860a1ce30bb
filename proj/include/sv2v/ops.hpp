// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "sv2v/autograd.hpp"

namespace sv2v {

// Elementwise arithmetic; operands must have identical shapes.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// 1 - a
Var one_minus(const Var& a);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope = 0.2);
Var tanh(const Var& x);
Var sigmoid(const Var& x);

/// Concatenates along dimension 1 (channels); remaining dims must agree.
Var concat_channels(const Var& a, const Var& b);
/// Stacks two [B, C, H, W] maps into a [B, C, 2, H, W] clip.
Var stack_time(const Var& first, const Var& second);

Var sum_all(const Var& x);
Var mean_all(const Var& x);
/// mean(|a - b|), the L1 distance used by every reconstruction loss.
Var l1_mean(const Var& a, const Var& b);
/// Binary cross-entropy against a constant target, averaged over patches.
/// Logits are clipped to +-kLogitClip so saturated logits give finite losses.
Var bce_with_logits(const Var& logits, double target);
inline constexpr double kLogitClip = 80.0;
/// mean((x - target)^2)
Var mse_to_value(const Var& x, double target);
/// sum_i weights[i] * terms[i] over scalar terms.
Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights);

/// 2-D convolution. x [B, C, H, W], w [Co, C, kh, kw], bias [Co] or undefined.
Var conv2d(const Var& x, const Var& w, const Var& bias, int stride = 1, int padding = 0);
/// Transposed convolution. w [C, Co, kh, kw] (input-major, as the adjoint of conv2d).
Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int padding,
                     int output_padding);
/// 3-D convolution. x [B, C, D, H, W], w [Co, C, kd, kh, kw].
Var conv3d(const Var& x, const Var& w, const Var& bias, std::array<int, 3> stride,
           std::array<int, 3> padding);

/// Bilinear resize with half-pixel centres and edge clamping; constants are preserved
/// exactly and an exact 2x reduction is a 2x2 box average.
Var resize_bilinear(const Var& x, int out_h, int out_w);
/// Halves spatial size with ceiling division.
Var downsample2(const Var& x);

namespace detail {

/// Geometry of a (possibly 3-D) convolution over one batch item.
struct ConvGeom {
  int channels, in_d, in_h, in_w;
  int k_d, k_h, k_w;
  int s_d, s_h, s_w;
  int p_d, p_h, p_w;
  int out_d, out_h, out_w;

  int rows() const { return channels * k_d * k_h * k_w; }
  int cols() const { return out_d * out_h * out_w; }
  int in_size() const { return channels * in_d * in_h * in_w; }
};

void im2col(const double* x, const ConvGeom& g, double* cols);
void col2im_add(const double* cols, const ConvGeom& g, double* x);

/// C (m x n) = op(A) * op(B) + beta * C, all row-major.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double beta, double* c);

}  // namespace detail

}  // namespace sv2v
