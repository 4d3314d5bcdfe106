#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "infpos/error.hpp"
#include "infpos/model.hpp"
#include "infpos/rng.hpp"

using namespace infpos;
using namespace infpos::nn;

namespace {

Tensor<double> random_tensor(const std::vector<int>& shape, RngStream& stream,
                             double scale = 1.0) {
  Tensor<double> t(shape);
  for (auto& v : t.data) v = scale * stream.normal();
  return t;
}

// Central finite differences over every entry of `value`, compared against the
// gradients already accumulated in `grad` by a backward pass.
double max_grad_rel_error(Tensor<double>& value, const Tensor<double>& grad,
                          const std::function<double()>& loss_fn,
                          std::size_t stride = 1, double eps = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < value.numel(); i += stride) {
    const double saved = value.data[i];
    value.data[i] = saved + eps;
    const double lp = loss_fn();
    value.data[i] = saved - eps;
    const double lm = loss_fn();
    value.data[i] = saved;
    const double fd = (lp - lm) / (2.0 * eps);
    const double a = grad.data[i];
    const double rel = std::abs(a - fd) / (std::abs(a) + std::abs(fd) + 1e-6);
    worst = std::max(worst, rel);
  }
  return worst;
}

ModelArch tiny_arch() {
  ModelArch base;
  base.in_h = 6;
  base.in_w = 16;
  return scaled_arch(base, 0.125);  // stem 4, blocks {4,4,8,8,16,16,16}
}

}  // namespace

TEST_CASE("conv2d output shapes: same padding and the formula property") {
  Conv2d<double> same(1, 1, 3, 3, 1, 1, 1, 1, "same");
  RngStream stream(50);
  same.init(stream);
  Tensor<double> x = random_tensor({1, 1, 36, 256}, stream);
  const Tensor<double> y = same.forward(x);
  CHECK(y.shape == std::vector<int>({1, 1, 36, 256}));

  for (int trial = 0; trial < 30; ++trial) {
    const int k = 1 + static_cast<int>(stream.bounded(4));
    const int s = 1 + static_cast<int>(stream.bounded(2));
    const int p = static_cast<int>(stream.bounded(2));
    const int h = k + static_cast<int>(stream.bounded(10));
    const int w = k + static_cast<int>(stream.bounded(10));
    Conv2d<double> c(2, 3, k, k, s, s, p, p, "c");
    c.init(stream);
    const Tensor<double> out = c.forward(random_tensor({1, 2, h, w}, stream));
    CHECK(out.shape[2] == (h + 2 * p - k) / s + 1);
    CHECK(out.shape[3] == (w + 2 * p - k) / s + 1);
  }
}

TEST_CASE("conv2d identity kernel and hand convolution") {
  // center-1 identity kernel reproduces the input
  Conv2d<double> id(1, 1, 3, 3, 1, 1, 1, 1, "id");
  std::vector<Param<double>> ps;
  id.collect_params(ps);
  ps[0].value->fill(0.0);
  ps[0].value->data[4] = 1.0;  // center of the 3x3 kernel
  ps[1].value->fill(0.0);
  RngStream stream(51);
  const Tensor<double> x = random_tensor({1, 1, 5, 7}, stream);
  const Tensor<double> y = id.forward(x);
  for (std::size_t i = 0; i < x.numel(); ++i)
    CHECK(y.data[i] == doctest::Approx(x.data[i]).epsilon(1e-15));

  // [1,2,3] * [1,0,-1], no padding -> [-2]
  Conv2d<double> row(1, 1, 1, 3, 1, 1, 0, 0, "row");
  std::vector<Param<double>> rp;
  row.collect_params(rp);
  rp[0].value->data = {1.0, 0.0, -1.0};
  rp[1].value->fill(0.0);
  Tensor<double> v({1, 1, 1, 3});
  v.data = {1.0, 2.0, 3.0};
  const Tensor<double> out = row.forward(v);
  REQUIRE(out.numel() == 1);
  CHECK(out.data[0] == doctest::Approx(-2.0).epsilon(1e-15));

  Tensor<double> bad({1, 2, 1, 3});
  CHECK_THROWS_AS(row.forward(bad), Error);
}

TEST_CASE("mse_loss hand values and homogeneity") {
  Tensor<double> p({1, 2}), t({1, 2});
  p.data = {1.0, 2.0};
  t.data = {1.0, 2.0};
  CHECK(mse_loss(p, t).first == 0.0);

  p.data = {3.0, 4.0};
  t.data = {0.0, 0.0};
  auto [loss, grad] = mse_loss(p, t);
  CHECK(loss == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(grad.data[0] == doctest::Approx(3.0));  // 2*3/2
  CHECK(grad.data[1] == doctest::Approx(4.0));

  p.data = {6.0, 8.0};
  CHECK(mse_loss(p, t).first == doctest::Approx(50.0).epsilon(1e-15));

  Tensor<double> wrong({2, 2});
  CHECK_THROWS_AS(mse_loss(p, wrong), Error);
}

TEST_CASE("linear backward matches hand matrix calculus on a 2x2 case") {
  Linear<double> lin(2, 2, "lin");
  std::vector<Param<double>> ps;
  lin.collect_params(ps);
  ps[0].value->data = {1.0, 2.0, 3.0, 4.0};  // W rows
  ps[1].value->fill(0.0);
  ps[0].grad->fill(0.0);
  ps[1].grad->fill(0.0);

  Tensor<double> x({1, 2});
  x.data = {5.0, 6.0};
  const Tensor<double> y = lin.forward(x);
  CHECK(y.data[0] == doctest::Approx(17.0));
  CHECK(y.data[1] == doctest::Approx(39.0));

  Tensor<double> dy({1, 2});
  dy.data = {1.0, -1.0};
  const Tensor<double> dx = lin.backward(dy);
  // dL/dW = dy^T x
  CHECK(ps[0].grad->data == std::vector<double>({5.0, 6.0, -5.0, -6.0}));
  CHECK(ps[1].grad->data == std::vector<double>({1.0, -1.0}));
  // dL/dx = dy W
  CHECK(dx.data == std::vector<double>({1.0 * 1 - 1.0 * 3, 1.0 * 2 - 1.0 * 4}));

  // zero upstream gradient -> zero parameter gradients
  ps[0].grad->fill(0.0);
  ps[1].grad->fill(0.0);
  dy.fill(0.0);
  lin.backward(dy);
  for (double g : ps[0].grad->data) CHECK(g == 0.0);
  for (double g : ps[1].grad->data) CHECK(g == 0.0);
}

TEST_CASE("finite-difference gradient check: conv2d") {
  RngStream stream(52);
  Conv2d<double> conv(2, 3, 3, 3, 1, 2, 1, 1, "conv");
  conv.init(stream);
  Tensor<double> x = random_tensor({2, 2, 4, 6}, stream);
  Tensor<double> target = random_tensor({2, 3, 4, 3}, stream);

  auto loss_fn = [&] { return mse_loss(conv.forward(x), target).first; };

  std::vector<Param<double>> ps;
  conv.collect_params(ps);
  for (auto& p : ps) p.grad->fill(0.0);
  auto [l0, dy] = mse_loss(conv.forward(x), target);
  const Tensor<double> dx = conv.backward(dy);

  for (auto& p : ps) CHECK(max_grad_rel_error(*p.value, *p.grad, loss_fn) < 1e-4);
  CHECK(max_grad_rel_error(x, dx, loss_fn) < 1e-4);
}

TEST_CASE("finite-difference gradient check: batch norm (training mode)") {
  RngStream stream(53);
  Tensor<double> x = random_tensor({3, 2, 2, 4}, stream);
  Tensor<double> target = random_tensor({3, 2, 2, 4}, stream);

  BatchNorm2d<double> bn(2, "bn");
  std::vector<Param<double>> ps;
  bn.collect_params(ps);
  ps[0].value->data = {1.3, 0.7};
  ps[1].value->data = {0.2, -0.4};

  auto loss_fn = [&] { return mse_loss(bn.forward(x, true), target).first; };

  ps[0].grad->fill(0.0);
  ps[1].grad->fill(0.0);
  auto [l0, dy] = mse_loss(bn.forward(x, true), target);
  const Tensor<double> dx = bn.backward(dy);

  CHECK(max_grad_rel_error(*ps[0].value, *ps[0].grad, loss_fn) < 1e-4);
  CHECK(max_grad_rel_error(*ps[1].value, *ps[1].grad, loss_fn) < 1e-4);
  CHECK(max_grad_rel_error(x, dx, loss_fn) < 1e-4);

  BatchNorm2d<double> cold(2, "cold");
  cold.forward(x, false);
  CHECK_THROWS_AS(cold.backward(dy), Error);
}

TEST_CASE("finite-difference gradient check: linear, relu, pooling chain") {
  RngStream stream(54);
  Tensor<double> x = random_tensor({2, 3, 2, 5}, stream);
  Tensor<double> target = random_tensor({2, 2}, stream);
  GlobalAvgPool<double> pool;
  Relu<double> relu;
  Linear<double> lin(3, 2, "head");
  lin.init(stream);

  auto loss_fn = [&] {
    return mse_loss(lin.forward(pool.forward(relu.forward(x))), target).first;
  };

  std::vector<Param<double>> ps;
  lin.collect_params(ps);
  for (auto& p : ps) p.grad->fill(0.0);
  auto [l0, dy] = mse_loss(lin.forward(pool.forward(relu.forward(x))), target);
  const Tensor<double> dx = relu.backward(pool.backward(lin.backward(dy)));

  for (auto& p : ps) CHECK(max_grad_rel_error(*p.value, *p.grad, loss_fn) < 1e-4);
  CHECK(max_grad_rel_error(x, dx, loss_fn) < 1e-4);
}

TEST_CASE("finite-difference gradient check: full 15-conv model") {
  const ModelArch arch = tiny_arch();
  CHECK(arch.conv_layer_count() == 15);
  Model<double> model(arch);
  model.init(60);

  RngStream stream(55);
  Tensor<double> x = random_tensor({2, 2, arch.in_h, arch.in_w}, stream, 0.5);
  Tensor<double> target = random_tensor({2, 2}, stream, 10.0);

  auto loss_fn = [&] { return mse_loss(model.forward(x, true), target).first; };

  model.zero_grads();
  auto [l0, dy] = mse_loss(model.forward(x, true), target);
  model.backward(dy);

  // subsample large tensors; every parameter tensor is probed
  for (auto& p : model.params()) {
    if (!p.grad) continue;
    const std::size_t stride = std::max<std::size_t>(1, p.value->numel() / 8);
    CHECK(max_grad_rel_error(*p.value, *p.grad, loss_fn, stride) < 1e-3);
  }
}

TEST_CASE("residual block is an identity map at zeroed final scale") {
  // no projection: matching channels, stride 1
  ResidualBlock<double> block(8, {8, 1}, "blk");
  RngStream stream(56);
  block.init(stream);
  block.final_bn().gamma().fill(0.0);

  Tensor<double> x = random_tensor({2, 8, 3, 6}, stream);
  for (auto& v : x.data) v = std::abs(v);  // post-ReLU activations are >= 0
  const Tensor<double> y = block.forward(x, true);
  REQUIRE(y.shape == x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data[i] == x.data[i]);
}

TEST_CASE("model forward: shapes, duplicated samples, determinism") {
  const ModelArch arch = tiny_arch();
  Model<float> model(arch);
  model.init(61);

  RngStream stream(57);
  Tensor<float> one({1, 2, arch.in_h, arch.in_w});
  for (auto& v : one.data) v = static_cast<float>(stream.normal());
  const Tensor<float> y1 = model.forward(one, false);
  CHECK(y1.shape == std::vector<int>({1, 2}));

  // duplicated sample in inference mode -> identical rows
  Tensor<float> two({2, 2, arch.in_h, arch.in_w});
  std::copy(one.data.begin(), one.data.end(), two.data.begin());
  std::copy(one.data.begin(), one.data.end(), two.data.begin() + one.numel());
  const Tensor<float> y2 = model.forward(two, false);
  CHECK(y2.data[0] == y2.data[2]);
  CHECK(y2.data[1] == y2.data[3]);
  CHECK(y2.data[0] == y1.data[0]);

  // fresh model with the same seed reproduces the output bit-for-bit
  Model<float> clone(arch);
  clone.init(61);
  const Tensor<float> y3 = clone.forward(one, false);
  CHECK(y3.data == y1.data);

  Tensor<float> wrong({1, 2, arch.in_h + 1, arch.in_w});
  CHECK_THROWS_AS(model.forward(wrong, false), Error);
}

TEST_CASE("init is seed-dependent") {
  const ModelArch arch = tiny_arch();
  Model<float> a(arch), b(arch);
  a.init(1);
  b.init(2);
  CHECK(a.flat_params() != b.flat_params());
}

TEST_CASE("checkpoint round-trip and corruption handling") {
  const ModelArch arch = tiny_arch();
  Model<float> model(arch);
  model.init(62);
  const std::vector<float> flat = model.flat_params();

  const std::string path =
      (std::filesystem::temp_directory_path() / "infpos_test_model.ifpm").string();
  save_checkpoint(path, arch, flat);
  const auto [back_arch, back_flat] = load_checkpoint(path);
  CHECK(back_flat == flat);
  CHECK(back_arch.in_h == arch.in_h);
  CHECK(back_arch.in_w == arch.in_w);
  CHECK(back_arch.stem_channels == arch.stem_channels);
  REQUIRE(back_arch.blocks.size() == arch.blocks.size());
  for (std::size_t i = 0; i < arch.blocks.size(); ++i) {
    CHECK(back_arch.blocks[i].channels == arch.blocks[i].channels);
    CHECK(back_arch.blocks[i].stride_w == arch.blocks[i].stride_w);
  }

  // a reconstructed model accepts the loaded parameters and agrees exactly
  Model<float> restored(back_arch);
  restored.set_flat_params(back_flat);
  RngStream stream(63);
  Tensor<float> x({1, 2, arch.in_h, arch.in_w});
  for (auto& v : x.data) v = static_cast<float>(stream.normal());
  CHECK(restored.forward(x, false).data == model.forward(x, false).data);

  CHECK_THROWS_AS(restored.set_flat_params(std::vector<float>(3, 0.0f)), Error);

  std::fstream fs(path, std::ios::in | std::ios::out | std::ios::binary);
  fs.put('X');
  fs.close();
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}
