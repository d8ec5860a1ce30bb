// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace sv2v {

namespace {

void check_same(const Var& a, const Var& b, const char* op) {
  SV2V_CHECK(a.value().same_shape(b.value()), std::string(op) + ": shape mismatch " +
                                                  shape_str(a.shape()) + " vs " +
                                                  shape_str(b.shape()));
}

template <typename F, typename G>
Var unary(const Var& x, F f, G df) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return Var::make(std::move(out), {x}, [df](const Tensor& g, const std::vector<NodePtr>& p) {
    const Tensor& xv = p[0]->value;
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] = g[i] * df(xv[i]);
    p[0]->accumulate(gx);
  });
}

Var scalar_var(double v, std::vector<Var> parents, BackwardFn fn) {
  return Var::make(Tensor({1}, v), std::move(parents), std::move(fn));
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same(a, b, "add");
  return Var::make(a.value() + b.value(), {a, b},
                   [](const Tensor& g, const std::vector<NodePtr>& p) {
                     if (p[0]->requires_grad) p[0]->accumulate(g);
                     if (p[1]->requires_grad) p[1]->accumulate(g);
                   });
}

Var sub(const Var& a, const Var& b) {
  check_same(a, b, "sub");
  return Var::make(a.value() - b.value(), {a, b},
                   [](const Tensor& g, const std::vector<NodePtr>& p) {
                     if (p[0]->requires_grad) p[0]->accumulate(g);
                     if (p[1]->requires_grad) p[1]->accumulate(g * -1.0);
                   });
}

Var mul(const Var& a, const Var& b) {
  check_same(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::make(std::move(out), {a, b}, [](const Tensor& g, const std::vector<NodePtr>& p) {
    for (int k = 0; k < 2; ++k) {
      if (!p[k]->requires_grad) continue;
      const Tensor& other = p[1 - k]->value;
      Tensor gk = g;
      for (std::size_t i = 0; i < gk.size(); ++i) gk[i] *= other[i];
      p[k]->accumulate(gk);
    }
  });
}

Var scale(const Var& a, double s) {
  return Var::make(a.value() * s, {a}, [s](const Tensor& g, const std::vector<NodePtr>& p) {
    p[0]->accumulate(g * s);
  });
}

Var add_scalar(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.values()) v += s;
  return Var::make(std::move(out), {a}, [](const Tensor& g, const std::vector<NodePtr>& p) {
    p[0]->accumulate(g);
  });
}

Var one_minus(const Var& a) { return add_scalar(scale(a, -1.0), 1.0); }

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0 ? v : 0.0; }, [](double v) { return v > 0 ? 1.0 : 0.0; });
}

Var leaky_relu(const Var& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0 ? v : slope * v; },
      [slope](double v) { return v > 0 ? 1.0 : slope; });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); },
      [](double v) {
        const double t = std::tanh(v);
        return 1.0 - t * t;
      });
}

Var sigmoid(const Var& x) {
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  return unary(x, sig, [sig](double v) {
    const double s = sig(v);
    return s * (1.0 - s);
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  SV2V_CHECK(sa.size() >= 2 && sa.size() == sb.size() && sa[0] == sb[0] &&
                 std::equal(sa.begin() + 2, sa.end(), sb.begin() + 2),
             "concat_channels: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
  const int batch = sa[0];
  std::size_t inner = 1;
  for (std::size_t i = 2; i < sa.size(); ++i) inner *= sa[i];
  const std::size_t na = sa[1] * inner, nb = sb[1] * inner;
  Shape so = sa;
  so[1] = sa[1] + sb[1];
  Tensor out(so);
  for (int n = 0; n < batch; ++n) {
    std::copy_n(a.value().data() + n * na, na, out.data() + n * (na + nb));
    std::copy_n(b.value().data() + n * nb, nb, out.data() + n * (na + nb) + na);
  }
  return Var::make(std::move(out), {a, b},
                   [batch, na, nb](const Tensor& g, const std::vector<NodePtr>& p) {
                     for (int k = 0; k < 2; ++k) {
                       if (!p[k]->requires_grad) continue;
                       Tensor gk(p[k]->value.shape());
                       const std::size_t len = k == 0 ? na : nb;
                       const std::size_t off = k == 0 ? 0 : na;
                       for (int n = 0; n < batch; ++n)
                         std::copy_n(g.data() + n * (na + nb) + off, len, gk.data() + n * len);
                       p[k]->accumulate(gk);
                     }
                   });
}

Var stack_time(const Var& first, const Var& second) {
  check_same(first, second, "stack_time");
  check_feature_map(first.value(), "stack_time");
  const int B = first.dim(0), C = first.dim(1), H = first.dim(2), W = first.dim(3);
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  Tensor out({B, C, 2, H, W});
  for (int n = 0; n < B; ++n)
    for (int c = 0; c < C; ++c) {
      const std::size_t src = (static_cast<std::size_t>(n) * C + c) * plane;
      const std::size_t dst = (static_cast<std::size_t>(n) * C + c) * 2 * plane;
      std::copy_n(first.value().data() + src, plane, out.data() + dst);
      std::copy_n(second.value().data() + src, plane, out.data() + dst + plane);
    }
  return Var::make(std::move(out), {first, second},
                   [B, C, plane](const Tensor& g, const std::vector<NodePtr>& p) {
                     for (int k = 0; k < 2; ++k) {
                       if (!p[k]->requires_grad) continue;
                       Tensor gk(p[k]->value.shape());
                       for (int n = 0; n < B; ++n)
                         for (int c = 0; c < C; ++c) {
                           const std::size_t src = (static_cast<std::size_t>(n) * C + c) * plane;
                           const std::size_t dst = (static_cast<std::size_t>(n) * C + c) * 2 * plane;
                           std::copy_n(g.data() + dst + k * plane, plane, gk.data() + src);
                         }
                       p[k]->accumulate(gk);
                     }
                   });
}

Var sum_all(const Var& x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return scalar_var(s, {x}, [](const Tensor& g, const std::vector<NodePtr>& p) {
    p[0]->accumulate(Tensor(p[0]->value.shape(), g[0]));
  });
}

Var mean_all(const Var& x) {
  SV2V_CHECK(!x.value().empty(), "mean_all of empty tensor");
  const double n = static_cast<double>(x.value().size());
  return scale(sum_all(x), 1.0 / n);
}

Var l1_mean(const Var& a, const Var& b) {
  check_same(a, b, "l1_mean");
  SV2V_CHECK(!a.value().empty(), "l1_mean of empty tensors");
  const double n = static_cast<double>(a.value().size());
  return scalar_var(mean_abs_diff(a.value(), b.value()), {a, b},
                    [n](const Tensor& g, const std::vector<NodePtr>& p) {
                      const Tensor& av = p[0]->value;
                      const Tensor& bv = p[1]->value;
                      Tensor d(av.shape());
                      for (std::size_t i = 0; i < d.size(); ++i) {
                        const double diff = av[i] - bv[i];
                        d[i] = (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) * g[0] / n;
                      }
                      if (p[0]->requires_grad) p[0]->accumulate(d);
                      if (p[1]->requires_grad) p[1]->accumulate(d * -1.0);
                    });
}

Var bce_with_logits(const Var& logits, double target) {
  const Tensor& z = logits.value();
  SV2V_CHECK(!z.empty(), "bce_with_logits of empty tensor");
  const double n = static_cast<double>(z.size());
  double s = 0.0;
  for (double v : z.values()) {
    const double c = std::clamp(v, -kLogitClip, kLogitClip);
    s += std::max(c, 0.0) - c * target + std::log1p(std::exp(-std::abs(c)));
  }
  return scalar_var(s / n, {logits}, [n, target](const Tensor& g, const std::vector<NodePtr>& p) {
    const Tensor& z = p[0]->value;
    Tensor gz(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (std::abs(z[i]) > kLogitClip) continue;
      gz[i] = (1.0 / (1.0 + std::exp(-z[i])) - target) * g[0] / n;
    }
    p[0]->accumulate(gz);
  });
}

Var mse_to_value(const Var& x, double target) {
  const Tensor& z = x.value();
  SV2V_CHECK(!z.empty(), "mse_to_value of empty tensor");
  const double n = static_cast<double>(z.size());
  double s = 0.0;
  for (double v : z.values()) s += (v - target) * (v - target);
  return scalar_var(s / n, {x}, [n, target](const Tensor& g, const std::vector<NodePtr>& p) {
    const Tensor& z = p[0]->value;
    Tensor gz(z.shape());
    for (std::size_t i = 0; i < z.size(); ++i) gz[i] = 2.0 * (z[i] - target) * g[0] / n;
    p[0]->accumulate(gz);
  });
}

Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights) {
  SV2V_CHECK(terms.size() == weights.size(), "weighted_sum: terms/weights length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    SV2V_CHECK(terms[i].value().size() == 1, "weighted_sum: terms must be scalars");
    s += weights[i] * terms[i].value()[0];
  }
  return scalar_var(s, terms, [weights](const Tensor& g, const std::vector<NodePtr>& p) {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i]->requires_grad) p[i]->accumulate(Tensor({1}, g[0] * weights[i]));
  });
}

namespace detail {

void im2col(const double* x, const ConvGeom& g, double* cols) {
  const int P = g.cols();
  int row = 0;
  for (int c = 0; c < g.channels; ++c)
    for (int kd = 0; kd < g.k_d; ++kd)
      for (int kh = 0; kh < g.k_h; ++kh)
        for (int kw = 0; kw < g.k_w; ++kw, ++row) {
          double* dst = cols + static_cast<std::size_t>(row) * P;
          for (int od = 0; od < g.out_d; ++od) {
            const int id = od * g.s_d - g.p_d + kd;
            for (int oh = 0; oh < g.out_h; ++oh) {
              const int ih = oh * g.s_h - g.p_h + kh;
              double* d = dst + (static_cast<std::size_t>(od) * g.out_h + oh) * g.out_w;
              if (id < 0 || id >= g.in_d || ih < 0 || ih >= g.in_h) {
                std::fill_n(d, g.out_w, 0.0);
                continue;
              }
              const double* src =
                  x + ((static_cast<std::size_t>(c) * g.in_d + id) * g.in_h + ih) * g.in_w;
              for (int ow = 0; ow < g.out_w; ++ow) {
                const int iw = ow * g.s_w - g.p_w + kw;
                d[ow] = (iw >= 0 && iw < g.in_w) ? src[iw] : 0.0;
              }
            }
          }
        }
}

void col2im_add(const double* cols, const ConvGeom& g, double* x) {
  const int P = g.cols();
  int row = 0;
  for (int c = 0; c < g.channels; ++c)
    for (int kd = 0; kd < g.k_d; ++kd)
      for (int kh = 0; kh < g.k_h; ++kh)
        for (int kw = 0; kw < g.k_w; ++kw, ++row) {
          const double* src = cols + static_cast<std::size_t>(row) * P;
          for (int od = 0; od < g.out_d; ++od) {
            const int id = od * g.s_d - g.p_d + kd;
            if (id < 0 || id >= g.in_d) continue;
            for (int oh = 0; oh < g.out_h; ++oh) {
              const int ih = oh * g.s_h - g.p_h + kh;
              if (ih < 0 || ih >= g.in_h) continue;
              const double* s = src + (static_cast<std::size_t>(od) * g.out_h + oh) * g.out_w;
              double* dst = x + ((static_cast<std::size_t>(c) * g.in_d + id) * g.in_h + ih) * g.in_w;
              for (int ow = 0; ow < g.out_w; ++ow) {
                const int iw = ow * g.s_w - g.p_w + kw;
                if (iw >= 0 && iw < g.in_w) dst[iw] += s[ow];
              }
            }
          }
        }
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, const double* a, const double* b,
          double beta, double* c) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using CMap = Eigen::Map<const RowMat>;
  Eigen::Map<RowMat> C(c, m, n);
  auto run = [&](const auto& A, const auto& B) {
    if (beta == 0.0) {
      C.noalias() = A * B;
    } else {
      if (beta != 1.0) C *= beta;
      C.noalias() += A * B;
    }
  };
  if (!trans_a && !trans_b) run(CMap(a, m, k), CMap(b, k, n));
  else if (trans_a && !trans_b) run(CMap(a, k, m).transpose(), CMap(b, k, n));
  else if (!trans_a && trans_b) run(CMap(a, m, k), CMap(b, n, k).transpose());
  else run(CMap(a, k, m).transpose(), CMap(b, n, k).transpose());
}

}  // namespace detail

namespace {

using detail::ConvGeom;

int conv_out(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

// Shared body of conv2d/conv3d: x holds `batch` items of geometry g.
Var conv_forward(const Var& x, const Var& w, const Var& bias, int batch, int out_ch,
                 const ConvGeom& g, Shape out_shape) {
  const int K = g.rows(), P = g.cols();
  const bool has_bias = bias.defined();
  if (has_bias)
    SV2V_CHECK(bias.value().size() == static_cast<std::size_t>(out_ch),
               "conv: bias length must equal output channels");
  Tensor out(std::move(out_shape));
  std::vector<double> cols(static_cast<std::size_t>(K) * P);
  for (int n = 0; n < batch; ++n) {
    detail::im2col(x.value().data() + static_cast<std::size_t>(n) * g.in_size(), g, cols.data());
    double* o = out.data() + static_cast<std::size_t>(n) * out_ch * P;
    detail::gemm(false, false, out_ch, P, K, w.value().data(), cols.data(), 0.0, o);
    if (has_bias)
      for (int co = 0; co < out_ch; ++co)
        for (int i = 0; i < P; ++i) o[static_cast<std::size_t>(co) * P + i] += bias.value()[co];
  }
  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(bias);
  return Var::make(std::move(out), std::move(parents),
                   [g, batch, out_ch, has_bias](const Tensor& gout, const std::vector<NodePtr>& p) {
                     const int K = g.rows(), P = g.cols();
                     std::vector<double> cols(static_cast<std::size_t>(K) * P);
                     Tensor gx, gw, gb;
                     if (p[0]->requires_grad) gx = Tensor(p[0]->value.shape());
                     if (p[1]->requires_grad) gw = Tensor(p[1]->value.shape());
                     if (has_bias && p[2]->requires_grad) gb = Tensor(p[2]->value.shape());
                     for (int n = 0; n < batch; ++n) {
                       const double* go = gout.data() + static_cast<std::size_t>(n) * out_ch * P;
                       if (!gx.empty()) {
                         detail::gemm(true, false, K, P, out_ch, p[1]->value.data(), go, 0.0,
                                      cols.data());
                         detail::col2im_add(cols.data(), g,
                                            gx.data() + static_cast<std::size_t>(n) * g.in_size());
                       }
                       if (!gw.empty()) {
                         detail::im2col(p[0]->value.data() + static_cast<std::size_t>(n) * g.in_size(),
                                        g, cols.data());
                         detail::gemm(false, true, out_ch, K, P, go, cols.data(), 1.0, gw.data());
                       }
                       if (!gb.empty())
                         for (int co = 0; co < out_ch; ++co)
                           for (int i = 0; i < P; ++i) gb[co] += go[static_cast<std::size_t>(co) * P + i];
                     }
                     if (!gx.empty()) p[0]->accumulate(gx);
                     if (!gw.empty()) p[1]->accumulate(gw);
                     if (!gb.empty()) p[2]->accumulate(gb);
                   });
}

// Stride-1 convolution with few output channels: im2col would materialise
// C_in * k^2 copies of the input for a GEMM with only a handful of rows, so
// the shifted-row form is much faster here.
constexpr int kDirectMaxOutChannels = 4;

struct RowSpan {
  int ih, ow0, ow1, iw0;  // output columns [ow0, ow1) read input columns from iw0
};

// Calls fn(oh, span) for every output row whose tap (kh, kw) lands inside the input.
template <typename Fn>
void for_each_tap_row(int H, int W, int OH, int OW, int pad, int kh, int kw, Fn&& fn) {
  const int ow0 = std::max(0, pad - kw);
  const int ow1 = std::min(OW, W + pad - kw);
  if (ow0 >= ow1) return;
  for (int oh = 0; oh < OH; ++oh) {
    const int ih = oh + kh - pad;
    if (ih < 0 || ih >= H) continue;
    fn(oh, RowSpan{ih, ow0, ow1, ow0 + kw - pad});
  }
}

Var conv2d_direct(const Var& x, const Var& w, const Var& bias, int padding, int OH, int OW) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const bool has_bias = bias.defined();
  if (has_bias)
    SV2V_CHECK(bias.value().size() == static_cast<std::size_t>(Co),
               "conv: bias length must equal output channels");
  const std::size_t in_plane = static_cast<std::size_t>(H) * W;
  const std::size_t out_plane = static_cast<std::size_t>(OH) * OW;
  Tensor out({B, Co, OH, OW});
  const double* xv = x.value().data();
  const double* wv = w.value().data();
  for (int n = 0; n < B; ++n)
    for (int co = 0; co < Co; ++co) {
      double* o = out.data() + (static_cast<std::size_t>(n) * Co + co) * out_plane;
      if (has_bias) std::fill_n(o, out_plane, bias.value()[co]);
      for (int ci = 0; ci < C; ++ci) {
        const double* xi = xv + (static_cast<std::size_t>(n) * C + ci) * in_plane;
        for (int kh = 0; kh < KH; ++kh)
          for (int kw = 0; kw < KW; ++kw) {
            const double v = wv[((static_cast<std::size_t>(co) * C + ci) * KH + kh) * KW + kw];
            for_each_tap_row(H, W, OH, OW, padding, kh, kw, [&](int oh, const RowSpan& r) {
              double* dst = o + static_cast<std::size_t>(oh) * OW;
              const double* src = xi + static_cast<std::size_t>(r.ih) * W + r.iw0 - r.ow0;
              for (int ow = r.ow0; ow < r.ow1; ++ow) dst[ow] += v * src[ow];
            });
          }
      }
    }
  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(bias);
  return Var::make(std::move(out), std::move(parents),
                   [=](const Tensor& gout, const std::vector<NodePtr>& p) {
                     Tensor gx, gw, gb;
                     if (p[0]->requires_grad) gx = Tensor(p[0]->value.shape());
                     if (p[1]->requires_grad) gw = Tensor(p[1]->value.shape());
                     if (has_bias && p[2]->requires_grad) gb = Tensor(p[2]->value.shape());
                     const double* xv = p[0]->value.data();
                     const double* wv = p[1]->value.data();
                     for (int n = 0; n < B; ++n)
                       for (int co = 0; co < Co; ++co) {
                         const double* go = gout.data() + (static_cast<std::size_t>(n) * Co + co) * out_plane;
                         if (!gb.empty())
                           for (std::size_t i = 0; i < out_plane; ++i) gb[co] += go[i];
                         if (gx.empty() && gw.empty()) continue;
                         for (int ci = 0; ci < C; ++ci) {
                           const std::size_t in_off = (static_cast<std::size_t>(n) * C + ci) * in_plane;
                           for (int kh = 0; kh < KH; ++kh)
                             for (int kw = 0; kw < KW; ++kw) {
                               const std::size_t wi = ((static_cast<std::size_t>(co) * C + ci) * KH + kh) * KW + kw;
                               const double v = wv[wi];
                               double acc = 0.0;
                               for_each_tap_row(H, W, OH, OW, padding, kh, kw, [&](int oh, const RowSpan& r) {
                                 const double* g = go + static_cast<std::size_t>(oh) * OW;
                                 const std::size_t row = in_off + static_cast<std::size_t>(r.ih) * W + r.iw0 - r.ow0;
                                 if (!gx.empty()) {
                                   double* d = gx.data() + row;
                                   for (int ow = r.ow0; ow < r.ow1; ++ow) d[ow] += v * g[ow];
                                 }
                                 if (!gw.empty()) {
                                   const double* src = xv + row;
                                   for (int ow = r.ow0; ow < r.ow1; ++ow) acc += g[ow] * src[ow];
                                 }
                               });
                               if (!gw.empty()) gw[wi] += acc;
                             }
                         }
                       }
                     if (!gx.empty()) p[0]->accumulate(gx);
                     if (!gw.empty()) p[1]->accumulate(gw);
                     if (!gb.empty()) p[2]->accumulate(gb);
                   });
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int padding) {
  check_feature_map(x.value(), "conv2d input");
  SV2V_CHECK(w.value().ndim() == 4, "conv2d: weight must be 4-D, got " + shape_str(w.shape()));
  SV2V_CHECK(w.dim(1) == x.dim(1), "conv2d: weight expects " + std::to_string(w.dim(1)) +
                                       " input channels, input has " + std::to_string(x.dim(1)));
  SV2V_CHECK(stride >= 1 && padding >= 0, "conv2d: invalid stride/padding");
  const int H = x.dim(2), W = x.dim(3), kh = w.dim(2), kw = w.dim(3);
  const int oh = conv_out(H, kh, stride, padding), ow = conv_out(W, kw, stride, padding);
  SV2V_CHECK(oh >= 1 && ow >= 1, "conv2d: kernel larger than padded input");
  if (stride == 1 && w.dim(0) <= kDirectMaxOutChannels) return conv2d_direct(x, w, bias, padding, oh, ow);
  ConvGeom g{x.dim(1), 1, H, W, 1, kh, kw, 1, stride, stride, 0, padding, padding, 1, oh, ow};
  return conv_forward(x, w, bias, x.dim(0), w.dim(0), g, {x.dim(0), w.dim(0), oh, ow});
}

Var conv3d(const Var& x, const Var& w, const Var& bias, std::array<int, 3> stride,
           std::array<int, 3> padding) {
  SV2V_CHECK(x.value().ndim() == 5, "conv3d: input must be 5-D, got " + shape_str(x.shape()));
  SV2V_CHECK(w.value().ndim() == 5 && w.dim(1) == x.dim(1),
             "conv3d: weight " + shape_str(w.shape()) + " incompatible with input " +
                 shape_str(x.shape()));
  const int D = x.dim(2), H = x.dim(3), W = x.dim(4);
  const int od = conv_out(D, w.dim(2), stride[0], padding[0]);
  const int oh = conv_out(H, w.dim(3), stride[1], padding[1]);
  const int ow = conv_out(W, w.dim(4), stride[2], padding[2]);
  SV2V_CHECK(od >= 1 && oh >= 1 && ow >= 1, "conv3d: kernel larger than padded input");
  ConvGeom g{x.dim(1), D, H, W, w.dim(2), w.dim(3), w.dim(4), stride[0], stride[1], stride[2],
             padding[0], padding[1], padding[2], od, oh, ow};
  return conv_forward(x, w, bias, x.dim(0), w.dim(0), g, {x.dim(0), w.dim(0), od, oh, ow});
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& bias, int stride, int padding,
                     int output_padding) {
  check_feature_map(x.value(), "conv_transpose2d input");
  SV2V_CHECK(w.value().ndim() == 4 && w.dim(0) == x.dim(1),
             "conv_transpose2d: weight " + shape_str(w.shape()) + " incompatible with input " +
                 shape_str(x.shape()));
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const int OH = (H - 1) * stride - 2 * padding + kh + output_padding;
  const int OW = (W - 1) * stride - 2 * padding + kw + output_padding;
  SV2V_CHECK(OH >= 1 && OW >= 1, "conv_transpose2d: empty output");
  // The adjoint convolution maps the output grid back onto the input grid.
  ConvGeom g{Co, 1, OH, OW, 1, kh, kw, 1, stride, stride, 0, padding, padding, 1, H, W};
  SV2V_CHECK(conv_out(OH, kh, stride, padding) == H && conv_out(OW, kw, stride, padding) == W,
             "conv_transpose2d: inconsistent geometry");
  const int K = g.rows(), P = H * W;
  const bool has_bias = bias.defined();
  Tensor out({B, Co, OH, OW});
  std::vector<double> cols(static_cast<std::size_t>(K) * P);
  for (int n = 0; n < B; ++n) {
    detail::gemm(true, false, K, P, C, w.value().data(),
                 x.value().data() + static_cast<std::size_t>(n) * C * P, 0.0, cols.data());
    double* o = out.data() + static_cast<std::size_t>(n) * g.in_size();
    detail::col2im_add(cols.data(), g, o);
    if (has_bias)
      for (int co = 0; co < Co; ++co)
        for (int i = 0; i < OH * OW; ++i) o[static_cast<std::size_t>(co) * OH * OW + i] += bias.value()[co];
  }
  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(bias);
  return Var::make(std::move(out), std::move(parents),
                   [g, B, C, Co, has_bias](const Tensor& gout, const std::vector<NodePtr>& p) {
                     const int K = g.rows(), P = g.cols();
                     const int plane = g.in_h * g.in_w;
                     std::vector<double> cols(static_cast<std::size_t>(K) * P);
                     Tensor gx, gw, gb;
                     if (p[0]->requires_grad) gx = Tensor(p[0]->value.shape());
                     if (p[1]->requires_grad) gw = Tensor(p[1]->value.shape());
                     if (has_bias && p[2]->requires_grad) gb = Tensor(p[2]->value.shape());
                     for (int n = 0; n < B; ++n) {
                       const double* go = gout.data() + static_cast<std::size_t>(n) * g.in_size();
                       detail::im2col(go, g, cols.data());
                       if (!gx.empty())
                         detail::gemm(false, false, C, P, K, p[1]->value.data(), cols.data(), 0.0,
                                      gx.data() + static_cast<std::size_t>(n) * C * P);
                       if (!gw.empty())
                         detail::gemm(false, true, C, K, P,
                                      p[0]->value.data() + static_cast<std::size_t>(n) * C * P,
                                      cols.data(), 1.0, gw.data());
                       if (!gb.empty())
                         for (int co = 0; co < Co; ++co)
                           for (int i = 0; i < plane; ++i)
                             gb[co] += go[static_cast<std::size_t>(co) * plane + i];
                     }
                     if (!gx.empty()) p[0]->accumulate(gx);
                     if (!gw.empty()) p[1]->accumulate(gw);
                     if (!gb.empty()) p[2]->accumulate(gb);
                   });
}

namespace {

struct ResizeAxis {
  std::vector<int> i0, i1;
  std::vector<double> frac;
};

ResizeAxis resize_axis(int in, int out) {
  ResizeAxis ax;
  ax.i0.resize(out);
  ax.i1.resize(out);
  ax.frac.resize(out);
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double s = (o + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in - 1));
    const int i0 = std::min(static_cast<int>(std::floor(s)), in - 1);
    ax.i0[o] = i0;
    ax.i1[o] = std::min(i0 + 1, in - 1);
    ax.frac[o] = s - i0;
  }
  return ax;
}

}  // namespace

Var resize_bilinear(const Var& x, int out_h, int out_w) {
  check_feature_map(x.value(), "resize_bilinear input");
  SV2V_CHECK(out_h >= 1 && out_w >= 1, "resize_bilinear: empty output size");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const ResizeAxis ay = resize_axis(H, out_h), ax = resize_axis(W, out_w);
  Tensor out({B, C, out_h, out_w});
  for (int n = 0; n < B * C; ++n) {
    const double* src = x.value().data() + static_cast<std::size_t>(n) * H * W;
    double* dst = out.data() + static_cast<std::size_t>(n) * out_h * out_w;
    for (int i = 0; i < out_h; ++i) {
      const double ly = ay.frac[i];
      const double* r0 = src + static_cast<std::size_t>(ay.i0[i]) * W;
      const double* r1 = src + static_cast<std::size_t>(ay.i1[i]) * W;
      for (int j = 0; j < out_w; ++j) {
        const double lx = ax.frac[j];
        const double top = (1 - lx) * r0[ax.i0[j]] + lx * r0[ax.i1[j]];
        const double bot = (1 - lx) * r1[ax.i0[j]] + lx * r1[ax.i1[j]];
        dst[static_cast<std::size_t>(i) * out_w + j] = (1 - ly) * top + ly * bot;
      }
    }
  }
  return Var::make(std::move(out), {x},
                   [ay, ax, B, C, H, W, out_h, out_w](const Tensor& g, const std::vector<NodePtr>& p) {
                     Tensor gx(p[0]->value.shape());
                     for (int n = 0; n < B * C; ++n) {
                       const double* go = g.data() + static_cast<std::size_t>(n) * out_h * out_w;
                       double* dst = gx.data() + static_cast<std::size_t>(n) * H * W;
                       for (int i = 0; i < out_h; ++i) {
                         const double ly = ay.frac[i];
                         double* r0 = dst + static_cast<std::size_t>(ay.i0[i]) * W;
                         double* r1 = dst + static_cast<std::size_t>(ay.i1[i]) * W;
                         for (int j = 0; j < out_w; ++j) {
                           const double lx = ax.frac[j];
                           const double v = go[static_cast<std::size_t>(i) * out_w + j];
                           r0[ax.i0[j]] += (1 - ly) * (1 - lx) * v;
                           r0[ax.i1[j]] += (1 - ly) * lx * v;
                           r1[ax.i0[j]] += ly * (1 - lx) * v;
                           r1[ax.i1[j]] += ly * lx * v;
                         }
                       }
                     }
                     p[0]->accumulate(gx);
                   });
}

Var downsample2(const Var& x) {
  check_feature_map(x.value(), "downsample2 input");
  return resize_bilinear(x, (x.dim(2) + 1) / 2, (x.dim(3) + 1) / 2);
}

}  // namespace sv2v
