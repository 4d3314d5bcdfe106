#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "infpos/layers.hpp"

namespace infpos::nn {

struct BlockSpec {
  int channels;
  int stride_w;  // downsampling acts along the tap axis only
};

// Residual regressor: stem conv, 7 two-conv residual blocks, global average
// pool, affine head. 1 + 7*2 = 15 convolutional layers (1x1 projection
// shortcuts not counted).
struct ModelArch {
  int in_channels = 2;
  int in_h = 36;
  int in_w = 256;
  int stem_channels = 32;
  std::vector<BlockSpec> blocks = {{32, 1}, {32, 1}, {64, 2}, {64, 1},
                                   {128, 2}, {128, 1}, {128, 1}};
  int outputs = 2;

  int conv_layer_count() const { return 1 + 2 * static_cast<int>(blocks.size()); }
};

// Scales stem/block widths (the "width-halved variant" uses 0.5).
inline ModelArch scaled_arch(const ModelArch& base, double width_multiplier) {
  ModelArch a = base;
  auto scale = [width_multiplier](int c) {
    int v = static_cast<int>(std::lround(c * width_multiplier));
    return v < 1 ? 1 : v;
  };
  a.stem_channels = scale(a.stem_channels);
  for (auto& b : a.blocks) b.channels = scale(b.channels);
  return a;
}

template <typename T>
class ResidualBlock {
 public:
  ResidualBlock(int in_ch, const BlockSpec& spec, const std::string& name)
      : conv1_(in_ch, spec.channels, 3, 3, 1, spec.stride_w, 1, 1, name + ".conv1"),
        bn1_(spec.channels, name + ".bn1"),
        conv2_(spec.channels, spec.channels, 3, 3, 1, 1, 1, 1, name + ".conv2"),
        bn2_(spec.channels, name + ".bn2") {
    if (in_ch != spec.channels || spec.stride_w != 1) {
      proj_ = std::make_unique<Conv2d<T>>(in_ch, spec.channels, 1, 1, 1, spec.stride_w, 0,
                                          0, name + ".proj");
      proj_bn_ = std::make_unique<BatchNorm2d<T>>(spec.channels, name + ".proj_bn");
    }
  }

  void init(RngStream& stream) {
    conv1_.init(stream);
    conv2_.init(stream);
    if (proj_) proj_->init(stream);
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    Tensor<T> h = relu1_.forward(bn1_.forward(conv1_.forward(x), training));
    h = bn2_.forward(conv2_.forward(h), training);
    Tensor<T> s = proj_ ? proj_bn_->forward(proj_->forward(x), training) : x;
    for (std::size_t i = 0; i < h.numel(); ++i) h.data[i] += s.data[i];
    return relu2_.forward(h);
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> d = relu2_.backward(dy);
    Tensor<T> dx = conv1_.backward(
        bn1_.backward(relu1_.backward(conv2_.backward(bn2_.backward(d)))));
    if (proj_) {
      Tensor<T> ds = proj_->backward(proj_bn_->backward(d));
      for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] += ds.data[i];
    } else {
      for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] += d.data[i];
    }
    return dx;
  }

  void collect_params(std::vector<Param<T>>& out) {
    conv1_.collect_params(out);
    bn1_.collect_params(out);
    conv2_.collect_params(out);
    bn2_.collect_params(out);
    if (proj_) {
      proj_->collect_params(out);
      proj_bn_->collect_params(out);
    }
  }

  BatchNorm2d<T>& final_bn() { return bn2_; }

 private:
  Conv2d<T> conv1_;
  BatchNorm2d<T> bn1_;
  Conv2d<T> conv2_;
  BatchNorm2d<T> bn2_;
  std::unique_ptr<Conv2d<T>> proj_;
  std::unique_ptr<BatchNorm2d<T>> proj_bn_;
  Relu<T> relu1_, relu2_;
};

template <typename T>
class Model {
 public:
  explicit Model(const ModelArch& arch)
      : arch_(arch),
        stem_(arch.in_channels, arch.stem_channels, 3, 3, 1, 1, 1, 1, "stem.conv"),
        stem_bn_(arch.stem_channels, "stem.bn"),
        head_(arch.blocks.empty() ? arch.stem_channels : arch.blocks.back().channels,
              arch.outputs, "head") {
    int ch = arch.stem_channels;
    for (std::size_t i = 0; i < arch.blocks.size(); ++i) {
      blocks_.push_back(std::make_unique<ResidualBlock<T>>(
          ch, arch.blocks[i], "block" + std::to_string(i)));
      ch = arch.blocks[i].channels;
    }
  }

  void init(std::uint64_t seed) {
    std::uint64_t layer = 0;
    RngStream s0 = substream(seed, layer++, 0, rng_purpose::kInit);
    stem_.init(s0);
    for (auto& b : blocks_) {
      RngStream s = substream(seed, layer++, 0, rng_purpose::kInit);
      b->init(s);
    }
    RngStream sh = substream(seed, layer++, 0, rng_purpose::kInit);
    head_.init(sh);
  }

  Tensor<T> forward(const Tensor<T>& x, bool training) {
    if (x.shape.size() != 4 || x.shape[1] != arch_.in_channels ||
        x.shape[2] != arch_.in_h || x.shape[3] != arch_.in_w)
      throw Error(Errc::data, "model: input shape mismatch");
    Tensor<T> h = stem_relu_.forward(stem_bn_.forward(stem_.forward(x), training));
    for (auto& b : blocks_) h = b->forward(h, training);
    Tensor<T> pooled = pool_.forward(h);
    Tensor<T> out = head_.forward(pooled);
    for (T v : out.data) {
      if (!std::isfinite(static_cast<double>(v)))
        throw Error(Errc::numeric, "model: non-finite prediction");
    }
    return out;
  }

  void backward(const Tensor<T>& dpred) {
    Tensor<T> d = pool_.backward(head_.backward(dpred));
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) d = (*it)->backward(d);
    stem_.backward(stem_bn_.backward(stem_relu_.backward(d)));
  }

  std::vector<Param<T>> params() {
    std::vector<Param<T>> out;
    stem_.collect_params(out);
    stem_bn_.collect_params(out);
    for (auto& b : blocks_) b->collect_params(out);
    head_.collect_params(out);
    return out;
  }

  void zero_grads() {
    for (auto& p : params()) {
      if (p.grad) p.grad->fill(T(0));
    }
  }

  // Flattened parameter vector (trainable and state) in declaration order.
  std::vector<float> flat_params() {
    std::vector<float> out;
    for (auto& p : params())
      for (T v : p.value->data) out.push_back(static_cast<float>(v));
    return out;
  }

  void set_flat_params(const std::vector<float>& flat) {
    std::size_t i = 0;
    for (auto& p : params()) {
      if (i + p.value->numel() > flat.size())
        throw Error(Errc::format_count, "model: parameter count mismatch");
      for (auto& v : p.value->data) v = static_cast<T>(flat[i++]);
    }
    if (i != flat.size())
      throw Error(Errc::format_count, "model: parameter count mismatch");
  }

  const ModelArch& arch() const { return arch_; }
  ResidualBlock<T>& block(std::size_t i) { return *blocks_[i]; }

 private:
  ModelArch arch_;
  Conv2d<T> stem_;
  BatchNorm2d<T> stem_bn_;
  Relu<T> stem_relu_;
  std::vector<std::unique_ptr<ResidualBlock<T>>> blocks_;
  GlobalAvgPool<T> pool_;
  Linear<T> head_;
};

// Checkpoint format: "IFPM", u32 version=1, u32 in_channels/in_h/in_w/
// stem_channels/outputs/block_count, per block u32 channels + u32 stride,
// u64 value count, little-endian f32 values in declaration order.
void save_checkpoint(const std::string& path, const ModelArch& arch,
                     const std::vector<float>& flat);
std::pair<ModelArch, std::vector<float>> load_checkpoint(const std::string& path);

}  // namespace infpos::nn
