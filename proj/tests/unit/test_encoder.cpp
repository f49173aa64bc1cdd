#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "risa/core/error.hpp"
#include "risa/encoder/layers.hpp"
#include "risa/encoder/style_encoder.hpp"
#include "support/fixtures.hpp"

using namespace risa;
using namespace risa::testing;

namespace {

// Measured max |dz| on the model below was 1.56e-4; 5e-4 leaves 3x headroom.
constexpr double kContinuityBound = 5e-4;

void randomize(Tensor& t, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  for (double& v : t.values()) v = n(rng);
}

}  // namespace

TEST_CASE("encode is deterministic with the configured length") {
  const auto model = tiny_model(1);
  std::mt19937_64 rng(2);
  const auto img = random_image(8, rng);
  const auto z = encode(model.encoder, img);
  CHECK(z.size() == 4);
  CHECK(z == encode(model.encoder, img));
  for (double v : z) CHECK(std::isfinite(v));

  EncoderConfig wide = tiny_encoder();
  wide.code_dim = 64;
  const auto big = init_model(wide, tiny_bank(), 1);
  CHECK(encode(big.encoder, img).size() == 64);
}

TEST_CASE("image side must divide by the downsampling factor") {
  const auto model = tiny_model(1);
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(encode(model.encoder, random_image(6, rng)), Error);
  CHECK_NOTHROW(encode(model.encoder, random_image(12, rng)));
}

TEST_CASE("encoder config validation") {
  EncoderConfig c = tiny_encoder();
  c.depth = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = tiny_encoder();
  c.code_dim = 0;
  CHECK_THROWS_AS(validate(c), Error);
  c = tiny_encoder();
  c.downsamples = 7;
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("style difference") {
  CHECK(style_difference(std::vector<double>{1, 3}, std::vector<double>{2, 1}) == std::vector<double>{1, 2});
  const std::vector<double> z = {0.3, -2.0, 5.0};
  CHECK(style_difference(z, z) == std::vector<double>(3, 0.0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(8), b(8);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = n(rng);
    const auto d = style_difference(a, b);
    CHECK(d == style_difference(b, a));
    for (double v : d) CHECK(v >= 0.0);
  }
  CHECK_THROWS_AS(style_difference(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("small pixel perturbations move the code a little") {
  const auto model = tiny_model(21);
  std::mt19937_64 rng(22);
  const auto img = lcg_image(8, 5, 0.5, 0.8);
  const auto z = encode(model.encoder, img);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Tensor t = img.tensor();
    for (double& v : t.values()) v += u(rng);
    const auto dz = style_difference(z, encode(model.encoder, ImageTensor(std::move(t))));
    worst = std::max(worst, *std::max_element(dz.begin(), dz.end()));
  }
  MESSAGE("max |dz| = " << worst);
  CHECK(worst < kContinuityBound);
}

TEST_CASE("conv layer backward matches finite differences") {
  std::mt19937_64 rng(4);
  for (bool bias : {true, false}) {
    for (std::size_t k : {1u, 3u}) {
      nn::Conv2d conv(2, 3, k, bias);
      randomize(conv.weight, rng);
      if (bias) randomize(conv.bias, rng);
      Tensor x({2, 5, 5});
      randomize(x, rng);
      Tensor upstream({3, 5, 5});
      randomize(upstream, rng);
      auto objective = [&](const nn::Conv2d& c, const Tensor& in) {
        const Tensor y = nn::forward(c, in);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * upstream[i];
        return s;
      };
      nn::Conv2d grad(2, 3, k, bias);
      const Tensor gx = nn::backward(conv, x, upstream, grad);
      const double h = 1e-6;
      for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(gx[i] == doctest::Approx((objective(conv, xp) - objective(conv, xm)) / (2 * h)).epsilon(1e-6));
      }
      for (std::size_t i = 0; i < conv.weight.size(); ++i) {
        nn::Conv2d cp = conv, cm = conv;
        cp.weight[i] += h;
        cm.weight[i] -= h;
        CHECK(grad.weight[i] == doctest::Approx((objective(cp, x) - objective(cm, x)) / (2 * h)).epsilon(1e-6));
      }
      if (bias) {
        double total = 0.0;
        for (std::size_t i = 0; i < 25; ++i) total += upstream[i];
        CHECK(grad.bias[0] == doctest::Approx(total));
      }
    }
  }
}

TEST_CASE("pooling layers") {
  Tensor x({1, 2, 2}, std::vector<double>{1, 2, 3, 6});
  const Tensor p = nn::avg_pool2(x);
  CHECK(p.shape() == std::vector<std::size_t>{1, 1, 1});
  CHECK(p[0] == 3.0);
  const Tensor g = nn::avg_pool2_backward(Tensor({1, 1, 1}, std::vector<double>{4.0}));
  CHECK(g == Tensor({1, 2, 2}, std::vector<double>{1, 1, 1, 1}));
  CHECK_THROWS_AS(nn::avg_pool2(Tensor({1, 3, 3})), Error);
  CHECK(nn::global_avg_pool(x) == std::vector<double>{3.0});
}

TEST_CASE("leaky relu slope") {
  const Tensor x({1, 1, 2}, std::vector<double>{-1.0, 2.0});
  CHECK(nn::leaky_relu(x) == Tensor({1, 1, 2}, std::vector<double>{-0.2, 2.0}));
  CHECK(nn::leaky_relu_backward(x, Tensor({1, 1, 2}, 1.0)) ==
        Tensor({1, 1, 2}, std::vector<double>{0.2, 1.0}));
}
