// Copyright 2026 The snnprune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNNPRUNE_TENSOR_HPP_
#define SNNPRUNE_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <cblas.h>

namespace snnprune {

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major tensor of doubles. All layer math in the library runs on
// these; there is no autodiff, gradients are derived by hand in network.hpp.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size())
      throw DimensionError("Tensor: shape does not match data length");
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  static Tensor full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at2(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }

  // Reinterprets the flat buffer under a new shape of equal element count.
  Tensor reshape(std::vector<std::size_t> new_shape) const {
    if (checked_numel(new_shape) != numel())
      throw DimensionError("reshape: element count mismatch");
    return Tensor(std::move(new_shape), data_);
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  static std::size_t checked_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d < 1) throw DimensionError("Tensor: dimension sizes must be >= 1");
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// C = A[m x k] * B[k x n].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2)
    throw DimensionError("matmul: operands must be rank 2");
  if (a.dim(1) != b.dim(0))
    throw DimensionError("matmul: inner dimensions disagree (" +
                         std::to_string(a.dim(1)) + " vs " +
                         std::to_string(b.dim(0)) + ")");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans,
              static_cast<int>(m), static_cast<int>(n), static_cast<int>(k),
              1.0, a.data(), static_cast<int>(k), b.data(),
              static_cast<int>(n), 0.0, c.data(), static_cast<int>(n));
  return c;
}

// C += alpha * op(A) * op(B), raw pointers, row-major.
inline void gemm_acc(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                     std::size_t k, double alpha, const double* a,
                     std::size_t lda, const double* b, std::size_t ldb,
                     double beta, double* c, std::size_t ldc) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), alpha, a,
              static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
              static_cast<int>(ldc));
}

inline std::size_t conv_out_dim(std::size_t in, std::size_t kernel,
                                std::size_t stride, std::size_t pad) {
  if (kernel > in + 2 * pad)
    throw DimensionError("conv2d: kernel larger than padded input");
  return (in + 2 * pad - kernel) / stride + 1;
}

// input [C_in x H x W] -> columns [C_in*k*k x H'*W'].
inline Tensor im2col(const Tensor& input, std::size_t k, std::size_t stride,
                     std::size_t pad) {
  if (input.ndim() != 3) throw DimensionError("im2col: input must be rank 3");
  if (stride < 1) throw DimensionError("im2col: stride must be >= 1");
  const std::size_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t ho = conv_out_dim(h, k, stride, pad);
  const std::size_t wo = conv_out_dim(w, k, stride, pad);
  Tensor cols({cin * k * k, ho * wo});
  double* out = cols.data();
  const double* in = input.data();
  std::size_t row = 0;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        double* dst = out + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * stride + ky) -
              static_cast<std::ptrdiff_t>(pad);
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                static_cast<std::ptrdiff_t>(pad);
            double v = 0.0;
            if (iy >= 0 && iy < static_cast<std::ptrdiff_t>(h) && ix >= 0 &&
                ix < static_cast<std::ptrdiff_t>(w))
              v = in[(c * h + static_cast<std::size_t>(iy)) * w +
                     static_cast<std::size_t>(ix)];
            dst[oy * wo + ox] = v;
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatters columns [C_in*k*k x H'*W'] back onto an
// image [C_in x H x W], accumulating where patches overlap.
inline void col2im_acc(const Tensor& cols, std::size_t cin, std::size_t h,
                       std::size_t w, std::size_t k, std::size_t stride,
                       std::size_t pad, Tensor& image) {
  const std::size_t ho = conv_out_dim(h, k, stride, pad);
  const std::size_t wo = conv_out_dim(w, k, stride, pad);
  const double* in = cols.data();
  double* out = image.data();
  std::size_t row = 0;
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++row) {
        const double* src = in + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy =
              static_cast<std::ptrdiff_t>(oy * stride + ky) -
              static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix =
                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            out[(c * h + static_cast<std::size_t>(iy)) * w +
                static_cast<std::size_t>(ix)] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

// Cross-correlation of a single image [C_in x H x W] with a kernel bank
// [C_out x C_in x k x k].
inline Tensor conv2d(const Tensor& input, const Tensor& kernel,
                     std::size_t stride, std::size_t pad) {
  if (input.ndim() != 3 || kernel.ndim() != 4)
    throw DimensionError("conv2d: want rank-3 input and rank-4 kernel");
  if (kernel.dim(2) != kernel.dim(3))
    throw DimensionError("conv2d: kernel must be square");
  if (kernel.dim(1) != input.dim(0))
    throw DimensionError("conv2d: channel mismatch");
  const std::size_t cout = kernel.dim(0), k = kernel.dim(2);
  const std::size_t ho = conv_out_dim(input.dim(1), k, stride, pad);
  const std::size_t wo = conv_out_dim(input.dim(2), k, stride, pad);
  Tensor cols = im2col(input, k, stride, pad);
  Tensor kmat = kernel.reshape({cout, kernel.dim(1) * k * k});
  Tensor out = matmul(kmat, cols);
  return out.reshape({cout, ho, wo});
}

inline Tensor random_uniform(std::vector<std::size_t> shape, double lo,
                             double hi, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace snnprune

#endif  // SNNPRUNE_TENSOR_HPP_
