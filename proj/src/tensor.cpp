// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "sv2v/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sv2v {

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    SV2V_CHECK(d >= 0, "negative dimension in shape " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  SV2V_CHECK(data_.size() == shape_numel(shape_),
             "value count " + std::to_string(data_.size()) + " does not match shape " +
                 shape_str(shape_));
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double stddev) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data_) v = dist(rng);
  return t;
}

Tensor Tensor::uniform(Shape shape, std::mt19937_64& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data_) v = dist(rng);
  return t;
}

Tensor Tensor::reshaped(Shape shape) const {
  SV2V_CHECK(shape_numel(shape) == data_.size(),
             "cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
  SV2V_CHECK(same_shape(other), "shape mismatch in += : " + shape_str(shape_) + " vs " +
                                    shape_str(other.shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  out += b;
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  SV2V_CHECK(a.same_shape(b), "shape mismatch in - : " + shape_str(a.shape()) + " vs " +
                                  shape_str(b.shape()));
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor operator*(const Tensor& a, double s) {
  Tensor out = a;
  out *= s;
  return out;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  SV2V_CHECK(a.same_shape(b), "shape mismatch: " + shape_str(a.shape()) + " vs " +
                                  shape_str(b.shape()));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  SV2V_CHECK(a.same_shape(b), "shape mismatch: " + shape_str(a.shape()) + " vs " +
                                  shape_str(b.shape()));
  SV2V_CHECK(!a.empty(), "mean of empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double mean(const Tensor& t) {
  SV2V_CHECK(!t.empty(), "mean of empty tensor");
  return std::accumulate(t.values().begin(), t.values().end(), 0.0) /
         static_cast<double>(t.size());
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor batch_item(const Tensor& t, int b) {
  SV2V_CHECK(t.ndim() >= 1 && b >= 0 && b < t.dim(0), "batch index out of range");
  Shape s = t.shape();
  s[0] = 1;
  const std::size_t n = shape_numel(s);
  std::vector<double> v(t.data() + b * n, t.data() + (b + 1) * n);
  return Tensor(std::move(s), std::move(v));
}

void check_feature_map(const Tensor& t, const char* what) {
  SV2V_CHECK(t.ndim() == 4, std::string(what) + ": expected a 4-D feature map, got " +
                                shape_str(t.shape()));
  for (int d : t.shape())
    SV2V_CHECK(d >= 1, std::string(what) + ": empty dimension in " + shape_str(t.shape()));
}

}  // namespace sv2v
