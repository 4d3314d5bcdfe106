#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "infpos/rng.hpp"
#include "infpos/tensor.hpp"

namespace infpos::nn {

template <typename T>
struct Param {
  Tensor<T>* value;
  Tensor<T>* grad;       // nullptr for non-trainable state (running stats)
  bool trainable;
  std::string name;
};

// --- convolution -----------------------------------------------------------

template <typename T>
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int kh, int kw, int sh, int sw, int ph, int pw,
         std::string name)
      : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw), sh_(sh), sw_(sw), ph_(ph),
        pw_(pw), name_(std::move(name)),
        weight_({out_ch, in_ch * kh * kw}), bias_({out_ch}),
        wgrad_({out_ch, in_ch * kh * kw}), bgrad_({out_ch}) {}

  // He fan-in initialization; bias zero.
  void init(RngStream& stream) {
    const double stddev = std::sqrt(2.0 / (in_ch_ * kh_ * kw_));
    for (auto& w : weight_.data) w = static_cast<T>(stddev * stream.normal());
    bias_.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    check_input(x);
    input_ = x;
    const int b = x.shape[0], h = x.shape[2], w = x.shape[3];
    const int oh = out_dim(h, kh_, sh_, ph_), ow = out_dim(w, kw_, sw_, pw_);
    Tensor<T> y({b, out_ch_, oh, ow});
    const int k = in_ch_ * kh_ * kw_;
    std::vector<T> col(static_cast<std::size_t>(k) * oh * ow);
    for (int s = 0; s < b; ++s) {
      im2col(x.data.data() + sample_offset(x, s), h, w, oh, ow, col.data());
      T* ys = y.data.data() + sample_offset(y, s);
      gemm(false, false, out_ch_, oh * ow, k, T(1), weight_.data.data(), k, col.data(),
           oh * ow, T(0), ys, oh * ow);
      for (int c = 0; c < out_ch_; ++c) {
        T* row = ys + static_cast<std::size_t>(c) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) row[i] += bias_.data[c];
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const Tensor<T>& x = input_;
    const int b = x.shape[0], h = x.shape[2], w = x.shape[3];
    const int oh = dy.shape[2], ow = dy.shape[3];
    const int k = in_ch_ * kh_ * kw_;
    Tensor<T> dx(x.shape);
    std::vector<T> col(static_cast<std::size_t>(k) * oh * ow);
    std::vector<T> dcol(col.size());
    for (int s = 0; s < b; ++s) {
      im2col(x.data.data() + sample_offset(x, s), h, w, oh, ow, col.data());
      const T* dys = dy.data.data() + sample_offset(dy, s);
      gemm(false, true, out_ch_, k, oh * ow, T(1), dys, oh * ow, col.data(), oh * ow, T(1),
           wgrad_.data.data(), k);
      for (int c = 0; c < out_ch_; ++c) {
        const T* row = dys + static_cast<std::size_t>(c) * oh * ow;
        T acc = T(0);
        for (int i = 0; i < oh * ow; ++i) acc += row[i];
        bgrad_.data[c] += acc;
      }
      gemm(true, false, k, oh * ow, out_ch_, T(1), weight_.data.data(), k, dys, oh * ow,
           T(0), dcol.data(), oh * ow);
      col2im(dcol.data(), h, w, oh, ow, dx.data.data() + sample_offset(dx, s));
    }
    return dx;
  }

  void collect_params(std::vector<Param<T>>& out) {
    out.push_back({&weight_, &wgrad_, true, name_ + ".weight"});
    out.push_back({&bias_, &bgrad_, true, name_ + ".bias"});
  }

  static int out_dim(int in, int k, int s, int p) { return (in + 2 * p - k) / s + 1; }

 private:
  void check_input(const Tensor<T>& x) const {
    if (x.shape.size() != 4 || x.shape[1] != in_ch_ ||
        x.shape[2] + 2 * ph_ < kh_ || x.shape[3] + 2 * pw_ < kw_)
      throw Error(Errc::data, name_ + ": incompatible input shape");
  }

  static std::size_t sample_offset(const Tensor<T>& t, int s) {
    return static_cast<std::size_t>(s) * t.shape[1] * t.shape[2] * t.shape[3];
  }

  // Range of output columns j whose source index j*sw + shift lands in [0, w).
  std::pair<int, int> valid_cols(int shift, int w, int ow) const {
    const int j0 = shift >= 0 ? 0 : (-shift + sw_ - 1) / sw_;
    const int j1 = shift >= w ? 0 : std::min(ow, (w - shift - 1) / sw_ + 1);
    return {std::min(j0, ow), std::max(j1, std::min(j0, ow))};
  }

  void im2col(const T* x, int h, int w, int oh, int ow, T* col) const {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::size_t r = 0;
    for (int c = 0; c < in_ch_; ++c) {
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj, ++r) {
          T* dst = col + r * oh * ow;
          const int shift = kj - pw_;
          const auto [j0, j1] = valid_cols(shift, w, ow);
          for (int i = 0; i < oh; ++i) {
            const int yi = i * sh_ - ph_ + ki;
            T* drow = dst + static_cast<std::size_t>(i) * ow;
            if (yi < 0 || yi >= h) {
              std::fill(drow, drow + ow, T(0));
              continue;
            }
            const T* src = x + c * plane + static_cast<std::size_t>(yi) * w;
            std::fill(drow, drow + j0, T(0));
            if (sw_ == 1) {
              std::copy(src + j0 + shift, src + j1 + shift, drow + j0);
            } else {
              for (int j = j0; j < j1; ++j) drow[j] = src[j * sw_ + shift];
            }
            std::fill(drow + j1, drow + ow, T(0));
          }
        }
      }
    }
  }

  void col2im(const T* col, int h, int w, int oh, int ow, T* x) const {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    std::size_t r = 0;
    for (int c = 0; c < in_ch_; ++c) {
      for (int ki = 0; ki < kh_; ++ki) {
        for (int kj = 0; kj < kw_; ++kj, ++r) {
          const T* src = col + r * oh * ow;
          const int shift = kj - pw_;
          const auto [j0, j1] = valid_cols(shift, w, ow);
          for (int i = 0; i < oh; ++i) {
            const int yi = i * sh_ - ph_ + ki;
            if (yi < 0 || yi >= h) continue;
            T* dst = x + c * plane + static_cast<std::size_t>(yi) * w;
            const T* srow = src + static_cast<std::size_t>(i) * ow;
            if (sw_ == 1) {
              T* drow = dst + shift;
              for (int j = j0; j < j1; ++j) drow[j] += srow[j];
            } else {
              for (int j = j0; j < j1; ++j) dst[j * sw_ + shift] += srow[j];
            }
          }
        }
      }
    }
  }

  int in_ch_, out_ch_, kh_, kw_, sh_, sw_, ph_, pw_;
  std::string name_;
  Tensor<T> weight_, bias_, wgrad_, bgrad_;
  Tensor<T> input_;
};

// --- batch normalization ----------------------------------------------------

template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d(int channels, std::string name)
      : channels_(channels), name_(std::move(name)), gamma_({channels}), beta_({channels}),
        ggrad_({channels}), bgrad_({channels}), running_mean_({channels}),
        running_var_({channels}), invstd_({channels}) {
    gamma_.fill(T(1));
    running_var_.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    const int b = x.shape[0], c = x.shape[1];
    const std::size_t plane = static_cast<std::size_t>(x.shape[2]) * x.shape[3];
    const std::size_t n = static_cast<std::size_t>(b) * plane;
    Tensor<T> y(x.shape);
    trained_forward_ = training;
    if (training) {
      xhat_ = Tensor<T>(x.shape);
      count_ = n;
    }
    for (int ch = 0; ch < c; ++ch) {
      T mean, var;
      if (training) {
        double m = 0.0;
        for (int s = 0; s < b; ++s) {
          const T* px = channel_ptr(x, s, ch, plane);
          for (std::size_t i = 0; i < plane; ++i) m += px[i];
        }
        m /= static_cast<double>(n);
        double v = 0.0;
        for (int s = 0; s < b; ++s) {
          const T* px = channel_ptr(x, s, ch, plane);
          for (std::size_t i = 0; i < plane; ++i) {
            const double d = px[i] - m;
            v += d * d;
          }
        }
        v /= static_cast<double>(n);
        mean = static_cast<T>(m);
        var = static_cast<T>(v);
        running_mean_.data[ch] =
            static_cast<T>((1.0 - momentum_) * running_mean_.data[ch] + momentum_ * m);
        running_var_.data[ch] =
            static_cast<T>((1.0 - momentum_) * running_var_.data[ch] + momentum_ * v);
      } else {
        mean = running_mean_.data[ch];
        var = running_var_.data[ch];
      }
      const T inv = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + eps_));
      invstd_.data[ch] = inv;
      const T g = gamma_.data[ch], bb = beta_.data[ch];
      for (int s = 0; s < b; ++s) {
        const T* px = channel_ptr(x, s, ch, plane);
        T* py = channel_ptr(y, s, ch, plane);
        T* ph = training ? channel_ptr(xhat_, s, ch, plane) : nullptr;
        for (std::size_t i = 0; i < plane; ++i) {
          const T xh = (px[i] - mean) * inv;
          if (training) ph[i] = xh;
          py[i] = g * xh + bb;
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    if (!trained_forward_)
      throw Error(Errc::data, name_ + ": backward without a training-mode forward");
    const int b = dy.shape[0], c = dy.shape[1];
    const std::size_t plane = static_cast<std::size_t>(dy.shape[2]) * dy.shape[3];
    const T n = static_cast<T>(count_);
    Tensor<T> dx(dy.shape);
    for (int ch = 0; ch < c; ++ch) {
      T dg = T(0), db = T(0);
      for (int s = 0; s < b; ++s) {
        const T* pdy = channel_ptr(dy, s, ch, plane);
        const T* ph = channel_ptr(xhat_, s, ch, plane);
        for (std::size_t i = 0; i < plane; ++i) {
          dg += pdy[i] * ph[i];
          db += pdy[i];
        }
      }
      ggrad_.data[ch] += dg;
      bgrad_.data[ch] += db;
      const T coef = gamma_.data[ch] * invstd_.data[ch] / n;
      for (int s = 0; s < b; ++s) {
        const T* pdy = channel_ptr(dy, s, ch, plane);
        const T* ph = channel_ptr(xhat_, s, ch, plane);
        T* pdx = channel_ptr(dx, s, ch, plane);
        for (std::size_t i = 0; i < plane; ++i)
          pdx[i] = coef * (n * pdy[i] - db - ph[i] * dg);
      }
    }
    return dx;
  }

  void collect_params(std::vector<Param<T>>& out) {
    out.push_back({&gamma_, &ggrad_, true, name_ + ".gamma"});
    out.push_back({&beta_, &bgrad_, true, name_ + ".beta"});
    out.push_back({&running_mean_, nullptr, false, name_ + ".running_mean"});
    out.push_back({&running_var_, nullptr, false, name_ + ".running_var"});
  }

  Tensor<T>& gamma() { return gamma_; }

 private:
  static T* channel_ptr(Tensor<T>& t, int s, int ch, std::size_t plane) {
    return t.data.data() +
           (static_cast<std::size_t>(s) * t.shape[1] + ch) * plane;
  }
  static const T* channel_ptr(const Tensor<T>& t, int s, int ch, std::size_t plane) {
    return t.data.data() +
           (static_cast<std::size_t>(s) * t.shape[1] + ch) * plane;
  }

  int channels_;
  std::string name_;
  double eps_ = 1e-5;
  double momentum_ = 0.1;
  Tensor<T> gamma_, beta_, ggrad_, bgrad_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_, invstd_;
  std::size_t count_ = 0;
  bool trained_forward_ = false;
};

// --- pointwise and head layers ----------------------------------------------

template <typename T>
class Relu {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> y(x.shape);
    mask_.resize(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const bool on = x.data[i] > T(0);
      mask_[i] = on;
      y.data[i] = on ? x.data[i] : T(0);
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(dy.shape);
    for (std::size_t i = 0; i < dy.numel(); ++i)
      dx.data[i] = mask_[i] ? dy.data[i] : T(0);
    return dx;
  }

 private:
  std::vector<unsigned char> mask_;
};

template <typename T>
class GlobalAvgPool {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    in_shape_ = x.shape;
    const int b = x.shape[0], c = x.shape[1];
    const std::size_t plane = static_cast<std::size_t>(x.shape[2]) * x.shape[3];
    Tensor<T> y({b, c});
    for (int s = 0; s < b; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        const T* p = x.data.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
        T acc = T(0);
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        y.data[static_cast<std::size_t>(s) * c + ch] = acc / static_cast<T>(plane);
      }
    }
    return y;
  }
  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(in_shape_);
    const int b = in_shape_[0], c = in_shape_[1];
    const std::size_t plane = static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
    for (int s = 0; s < b; ++s) {
      for (int ch = 0; ch < c; ++ch) {
        const T g = dy.data[static_cast<std::size_t>(s) * c + ch] / static_cast<T>(plane);
        T* p = dx.data.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) p[i] = g;
      }
    }
    return dx;
  }

 private:
  std::vector<int> in_shape_;
};

template <typename T>
class Linear {
 public:
  Linear(int in, int out, std::string name)
      : in_(in), out_(out), name_(std::move(name)), weight_({out, in}), bias_({out}),
        wgrad_({out, in}), bgrad_({out}) {}

  void init(RngStream& stream) {
    const double stddev = std::sqrt(2.0 / in_);
    for (auto& w : weight_.data) w = static_cast<T>(stddev * stream.normal());
    bias_.fill(T(0));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    if (x.shape.size() != 2 || x.shape[1] != in_)
      throw Error(Errc::data, name_ + ": incompatible input shape");
    input_ = x;
    const int b = x.shape[0];
    Tensor<T> y({b, out_});
    gemm(false, true, b, out_, in_, T(1), x.data.data(), in_, weight_.data.data(), in_,
         T(0), y.data.data(), out_);
    for (int s = 0; s < b; ++s)
      for (int o = 0; o < out_; ++o) y.data[static_cast<std::size_t>(s) * out_ + o] += bias_.data[o];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int b = dy.shape[0];
    gemm(true, false, out_, in_, b, T(1), dy.data.data(), out_, input_.data.data(), in_,
         T(1), wgrad_.data.data(), in_);
    for (int s = 0; s < b; ++s)
      for (int o = 0; o < out_; ++o) bgrad_.data[o] += dy.data[static_cast<std::size_t>(s) * out_ + o];
    Tensor<T> dx({b, in_});
    gemm(false, false, b, in_, out_, T(1), dy.data.data(), out_, weight_.data.data(), in_,
         T(0), dx.data.data(), in_);
    return dx;
  }

  void collect_params(std::vector<Param<T>>& out) {
    out.push_back({&weight_, &wgrad_, true, name_ + ".weight"});
    out.push_back({&bias_, &bgrad_, true, name_ + ".bias"});
  }

 private:
  int in_, out_;
  std::string name_;
  Tensor<T> weight_, bias_, wgrad_, bgrad_;
  Tensor<T> input_;
};

// Mean over batch and coordinates of the squared error; also returns the
// gradient with respect to the prediction.
template <typename T>
std::pair<double, Tensor<T>> mse_loss(const Tensor<T>& pred, const Tensor<T>& truth) {
  if (pred.shape != truth.shape) throw Error(Errc::data, "mse_loss: shape mismatch");
  const double n = static_cast<double>(pred.numel());
  double loss = 0.0;
  Tensor<T> grad(pred.shape);
  for (std::size_t i = 0; i < pred.numel(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - static_cast<double>(truth.data[i]);
    loss += d * d;
    grad.data[i] = static_cast<T>(2.0 * d / n);
  }
  return {loss / n, std::move(grad)};
}

}  // namespace infpos::nn
