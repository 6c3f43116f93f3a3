// Copyright 2026 The UBCL Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UBCL_NETWORK_HPP_
#define UBCL_NETWORK_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ubcl/errors.hpp"
#include "ubcl/rng.hpp"

namespace ubcl {

// Storage that Eigen kernels map into. A fixed base alignment keeps GEMM
// rounding identical from one allocation to the next.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

struct ConvSpec {
  int filters = 16;
  int kernel = 3;
  int stride = 2;
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Shape of the shared actor-critic network: a convolutional encoder over the
// grid (leaky-ReLU), concatenated with the vector input, then gated-linear
// hidden layers feeding a 6-way policy head and a scalar value head.
struct NetworkSpec {
  int in_channels = 8;
  int in_height = 16;
  int in_width = 16;
  int vector_size = 47;
  std::vector<ConvSpec> conv_layers = {{16, 3, 2}, {32, 3, 2}};
  std::vector<int> hidden_widths = {128, 128};
  int action_count = 6;
  double leaky_slope = 0.01;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Output size of a convolution with padding kernel/2.
inline int conv_out(int in, int kernel, int stride) {
  return (in + 2 * (kernel / 2) - kernel) / stride + 1;
}

inline std::vector<std::string> validate(const NetworkSpec& s) {
  std::vector<std::string> v;
  if (s.action_count != 6) v.push_back("network.action_count must be 6");
  if (s.hidden_widths.empty()) v.push_back("network.hidden_widths needs at least one layer");
  for (int w : s.hidden_widths) {
    if (w < 1) v.push_back("network.hidden_widths entries must be >= 1");
  }
  if (s.in_channels < 1 || s.in_height < 1 || s.in_width < 1) {
    v.push_back("network input grid dimensions must be >= 1");
  }
  if (s.vector_size < 0) v.push_back("network.vector_size must be >= 0");
  if (!(s.leaky_slope >= 0 && s.leaky_slope < 1)) {
    v.push_back("network.leaky_slope must be in [0, 1)");
  }
  int h = s.in_height, w = s.in_width;
  for (const auto& c : s.conv_layers) {
    if (c.filters < 1 || c.kernel < 1 || c.stride < 1) {
      v.push_back("network.conv_layers entries need filters, kernel, stride >= 1");
      break;
    }
    h = conv_out(h, c.kernel, c.stride);
    w = conv_out(w, c.kernel, c.stride);
    if (h < 1 || w < 1) {
      v.push_back("network.conv_layers shrink the grid below 1x1");
      break;
    }
  }
  return v;
}

template <typename Scalar>
class ActorCritic {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  // Columns are samples.
  struct Input {
    Mat grid;    // in_channels*in_height*in_width x batch
    Mat vector;  // vector_size x batch
    Eigen::Index batch() const { return vector.cols(); }
  };

  struct Output {
    Mat logits;  // action_count x batch
    Mat values;  // 1 x batch
  };

  // Activations kept for backward().
  struct Cache {
    std::vector<Mat> conv_cols;   // im2col per conv layer
    std::vector<Mat> conv_pre;    // pre-activation, filters x (positions*batch)
    std::vector<Mat> conv_out;    // post-activation, flattened per sample
    std::vector<Mat> dense_in;    // input to each hidden layer
    std::vector<Mat> dense_pre;   // 2*width x batch
    Mat trunk;                    // final hidden activation
  };

  explicit ActorCritic(NetworkSpec spec) : spec_(std::move(spec)) {
    if (auto v = validate(spec_); !v.empty()) throw ConfigError(std::move(v));
    layout();
    params_.assign(total_, Scalar(0));
  }

  const NetworkSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return total_; }
  std::span<Scalar> parameters() { return params_; }
  std::span<const Scalar> parameters() const { return params_; }

  // Uniform fan-in initialization; the policy head is scaled by 0.01 so the
  // initial policy is close to uniform.
  void initialize(Rng& rng) {
    for (const Block& b : blocks_) {
      const double bound = b.gain / std::sqrt(static_cast<double>(b.cols));
      for (std::size_t i = 0; i < b.rows * b.cols; ++i) {
        params_[b.weight + i] = static_cast<Scalar>(rng.uniform(-bound, bound));
      }
      for (std::size_t i = 0; i < b.rows; ++i) params_[b.bias + i] = Scalar(0);
    }
  }

  template <typename Other>
  ActorCritic<Other> cast() const {
    ActorCritic<Other> out(spec_);
    auto dst = out.parameters();
    for (std::size_t i = 0; i < total_; ++i) dst[i] = static_cast<Other>(params_[i]);
    return out;
  }

  Input make_input(Eigen::Index batch) const {
    Input in;
    in.grid.setZero(spec_.in_channels * spec_.in_height * spec_.in_width, batch);
    in.vector.setZero(spec_.vector_size, batch);
    return in;
  }

  void forward(const Input& in, Cache& cache, Output& out) const {
    const Eigen::Index batch = in.batch();
    const std::size_t n_conv = spec_.conv_layers.size();
    const std::size_t n_dense = spec_.hidden_widths.size();
    cache.conv_cols.resize(n_conv);
    cache.conv_pre.resize(n_conv);
    cache.conv_out.resize(n_conv);
    cache.dense_in.resize(n_dense);
    cache.dense_pre.resize(n_dense);
    const Scalar slope = static_cast<Scalar>(spec_.leaky_slope);

    const Mat* x = &in.grid;
    for (std::size_t l = 0; l < n_conv; ++l) {
      const ConvGeom& g = conv_geom_[l];
      im2col(*x, g, batch, cache.conv_cols[l]);
      const Block& b = blocks_[l];
      Mat& pre = cache.conv_pre[l];
      pre.noalias() = weight(b) * cache.conv_cols[l];
      pre.colwise() += bias(b);
      Mat& y = cache.conv_out[l];
      y.resize(static_cast<Eigen::Index>(g.filters) * g.out_h * g.out_w, batch);
      const Eigen::Index pos = static_cast<Eigen::Index>(g.out_h) * g.out_w;
      for (Eigen::Index s = 0; s < batch; ++s) {
        for (int f = 0; f < g.filters; ++f) {
          for (Eigen::Index p = 0; p < pos; ++p) {
            const Scalar z = pre(f, s * pos + p);
            y(f * pos + p, s) = z > 0 ? z : slope * z;
          }
        }
      }
      x = &y;
    }

    Mat& first = cache.dense_in[0];
    const Eigen::Index conv_features = n_conv ? x->rows() : in.grid.rows();
    first.resize(conv_features + spec_.vector_size, batch);
    first.topRows(conv_features) = *x;
    first.bottomRows(spec_.vector_size) = in.vector;

    for (std::size_t l = 0; l < n_dense; ++l) {
      const Block& b = blocks_[n_conv + l];
      Mat& pre = cache.dense_pre[l];
      pre.noalias() = weight(b) * cache.dense_in[l];
      pre.colwise() += bias(b);
      const Eigen::Index w = spec_.hidden_widths[l];
      Mat h = pre.topRows(w).cwiseProduct(sigmoid(pre.bottomRows(w)));
      if (l + 1 < n_dense) {
        cache.dense_in[l + 1] = std::move(h);
      } else {
        cache.trunk = std::move(h);
      }
    }

    const Block& pb = blocks_[n_conv + n_dense];
    const Block& vb = blocks_[n_conv + n_dense + 1];
    out.logits.noalias() = weight(pb) * cache.trunk;
    out.logits.colwise() += bias(pb);
    out.values.noalias() = weight(vb) * cache.trunk;
    out.values.colwise() += bias(vb);
  }

  Output forward(const Input& in) const {
    Cache cache;
    Output out;
    forward(in, cache, out);
    return out;
  }

  // Accumulates d(loss)/d(params) into `grad` given the loss gradients with
  // respect to the logits and values of the forward pass recorded in `cache`.
  void backward(const Cache& cache, const Mat& d_logits, const Mat& d_values,
                std::span<Scalar> grad) const {
    const std::size_t n_conv = spec_.conv_layers.size();
    const std::size_t n_dense = spec_.hidden_widths.size();
    const Eigen::Index batch = d_logits.cols();
    const Scalar slope = static_cast<Scalar>(spec_.leaky_slope);

    const Block& pb = blocks_[n_conv + n_dense];
    const Block& vb = blocks_[n_conv + n_dense + 1];
    grad_weight(pb, grad).noalias() += d_logits * cache.trunk.transpose();
    grad_bias(pb, grad) += d_logits.rowwise().sum();
    grad_weight(vb, grad).noalias() += d_values * cache.trunk.transpose();
    grad_bias(vb, grad) += d_values.rowwise().sum();
    Mat d_h = weight(pb).transpose() * d_logits;
    d_h.noalias() += weight(vb).transpose() * d_values;

    for (std::size_t l = n_dense; l-- > 0;) {
      const Block& b = blocks_[n_conv + l];
      const Mat& pre = cache.dense_pre[l];
      const Eigen::Index w = spec_.hidden_widths[l];
      const Mat gate = sigmoid(pre.bottomRows(w));
      Mat d_pre(2 * w, batch);
      d_pre.topRows(w) = d_h.cwiseProduct(gate);
      d_pre.bottomRows(w) = d_h.cwiseProduct(pre.topRows(w))
                                .cwiseProduct(gate)
                                .cwiseProduct((Mat::Ones(w, batch) - gate));
      grad_weight(b, grad).noalias() += d_pre * cache.dense_in[l].transpose();
      grad_bias(b, grad) += d_pre.rowwise().sum();
      if (l == 0 && n_conv == 0) break;
      d_h = weight(b).transpose() * d_pre;
    }
    if (n_conv == 0) return;

    // Gradient with respect to the flattened conv features.
    Mat d_y = d_h.topRows(cache.conv_out.back().rows());
    for (std::size_t l = n_conv; l-- > 0;) {
      const ConvGeom& g = conv_geom_[l];
      const Block& b = blocks_[l];
      const Eigen::Index pos = static_cast<Eigen::Index>(g.out_h) * g.out_w;
      const Mat& pre = cache.conv_pre[l];
      Mat d_pre(g.filters, pos * batch);
      for (Eigen::Index s = 0; s < batch; ++s) {
        for (int f = 0; f < g.filters; ++f) {
          for (Eigen::Index p = 0; p < pos; ++p) {
            const Scalar z = pre(f, s * pos + p);
            d_pre(f, s * pos + p) = d_y(f * pos + p, s) * (z > 0 ? Scalar(1) : slope);
          }
        }
      }
      grad_weight(b, grad).noalias() += d_pre * cache.conv_cols[l].transpose();
      grad_bias(b, grad) += d_pre.rowwise().sum();
      if (l == 0) break;
      const Mat d_cols = weight(b).transpose() * d_pre;
      col2im(d_cols, g, batch, d_y);
    }
  }

 private:
  struct Block {
    std::size_t weight = 0;  // offset of the rows x cols weight matrix
    std::size_t bias = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    double gain = 1.0;
  };
  struct ConvGeom {
    int in_c, in_h, in_w, filters, kernel, stride, pad, out_h, out_w;
  };

  void layout() {
    std::size_t offset = 0;
    auto add = [&](std::size_t rows, std::size_t cols, double gain) {
      Block b{offset, offset + rows * cols, rows, cols, gain};
      offset += rows * cols + rows;
      blocks_.push_back(b);
    };
    int c = spec_.in_channels, h = spec_.in_height, w = spec_.in_width;
    for (const auto& cs : spec_.conv_layers) {
      ConvGeom g{c, h, w, cs.filters, cs.kernel, cs.stride, cs.kernel / 2,
                 conv_out(h, cs.kernel, cs.stride), conv_out(w, cs.kernel, cs.stride)};
      conv_geom_.push_back(g);
      add(static_cast<std::size_t>(cs.filters),
          static_cast<std::size_t>(c) * cs.kernel * cs.kernel, std::sqrt(3.0));
      c = cs.filters;
      h = g.out_h;
      w = g.out_w;
    }
    std::size_t features = static_cast<std::size_t>(c) * h * w + spec_.vector_size;
    for (int width : spec_.hidden_widths) {
      add(2 * static_cast<std::size_t>(width), features, std::sqrt(3.0));
      features = static_cast<std::size_t>(width);
    }
    add(static_cast<std::size_t>(spec_.action_count), features, 0.01 * std::sqrt(3.0));
    add(1, features, std::sqrt(3.0));
    total_ = offset;
  }

  ConstMatMap weight(const Block& b) const {
    return ConstMatMap(params_.data() + b.weight, static_cast<Eigen::Index>(b.rows),
                       static_cast<Eigen::Index>(b.cols));
  }
  Eigen::Map<const Vec> bias(const Block& b) const {
    return Eigen::Map<const Vec>(params_.data() + b.bias, static_cast<Eigen::Index>(b.rows));
  }
  static MatMap grad_weight(const Block& b, std::span<Scalar> g) {
    return MatMap(g.data() + b.weight, static_cast<Eigen::Index>(b.rows),
                  static_cast<Eigen::Index>(b.cols));
  }
  static Eigen::Map<Vec> grad_bias(const Block& b, std::span<Scalar> g) {
    return Eigen::Map<Vec>(g.data() + b.bias, static_cast<Eigen::Index>(b.rows));
  }

  template <typename Derived>
  static Mat sigmoid(const Eigen::MatrixBase<Derived>& z) {
    return z.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
  }

  // Row = (channel, ky, kx); column = (sample, out_y, out_x).
  static void im2col(const Mat& x, const ConvGeom& g, Eigen::Index batch, Mat& cols) {
    const Eigen::Index pos = static_cast<Eigen::Index>(g.out_h) * g.out_w;
    cols.setZero(static_cast<Eigen::Index>(g.in_c) * g.kernel * g.kernel, pos * batch);
    for (Eigen::Index s = 0; s < batch; ++s) {
      const Scalar* src = x.col(s).data();
      for (int c = 0; c < g.in_c; ++c) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          for (int kx = 0; kx < g.kernel; ++kx) {
            const Eigen::Index row = (static_cast<Eigen::Index>(c) * g.kernel + ky) * g.kernel + kx;
            for (int oy = 0; oy < g.out_h; ++oy) {
              const int iy = oy * g.stride - g.pad + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int ox = 0; ox < g.out_w; ++ox) {
                const int ix = ox * g.stride - g.pad + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                cols(row, s * pos + oy * g.out_w + ox) =
                    src[(static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w + ix];
              }
            }
          }
        }
      }
    }
  }

  static void col2im(const Mat& cols, const ConvGeom& g, Eigen::Index batch, Mat& x) {
    const Eigen::Index pos = static_cast<Eigen::Index>(g.out_h) * g.out_w;
    x.setZero(static_cast<Eigen::Index>(g.in_c) * g.in_h * g.in_w, batch);
    for (Eigen::Index s = 0; s < batch; ++s) {
      Scalar* dst = x.col(s).data();
      for (int c = 0; c < g.in_c; ++c) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          for (int kx = 0; kx < g.kernel; ++kx) {
            const Eigen::Index row = (static_cast<Eigen::Index>(c) * g.kernel + ky) * g.kernel + kx;
            for (int oy = 0; oy < g.out_h; ++oy) {
              const int iy = oy * g.stride - g.pad + ky;
              if (iy < 0 || iy >= g.in_h) continue;
              for (int ox = 0; ox < g.out_w; ++ox) {
                const int ix = ox * g.stride - g.pad + kx;
                if (ix < 0 || ix >= g.in_w) continue;
                dst[(static_cast<std::size_t>(c) * g.in_h + iy) * g.in_w + ix] +=
                    cols(row, s * pos + oy * g.out_w + ox);
              }
            }
          }
        }
      }
    }
  }

  NetworkSpec spec_;
  std::vector<Block> blocks_;
  std::vector<ConvGeom> conv_geom_;
  std::size_t total_ = 0;
  AlignedVector<Scalar> params_;
};

}  // namespace ubcl

#endif  // UBCL_NETWORK_HPP_
