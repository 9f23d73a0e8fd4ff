#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spnet/layers.hpp"

using namespace spnet;

TEST_SUITE("nn.layers") {

TEST_CASE("conv3x3 on an all-ones patch") {
  Tensor in({1, 3, 3});
  in.fill(1.0);
  Tensor w({1, 1, 3, 3});
  w.fill(1.0);
  Tensor b({1});
  Tensor out;
  conv3x3_forward(in, w, b, out);
  // Zero padding: corners see 4 inputs, edges 6, the center all 9.
  CHECK(out.data[4] == doctest::Approx(9.0));
  CHECK(out.data[1] == doctest::Approx(6.0));
  CHECK(out.data[3] == doctest::Approx(6.0));
  CHECK(out.data[0] == doctest::Approx(4.0));
  CHECK(out.data[8] == doctest::Approx(4.0));
}

TEST_CASE("conv3x3 identity kernel") {
  Rng rng(3);
  Tensor in({2, 6, 6});
  for (auto& v : in.data) v = rng.uniform(-1, 1);
  Tensor w({2, 2, 3, 3});
  // Kernel k -> channel k center tap only.
  w.data[size_t(0 * 2 + 0) * 9 + 4] = 1.0;
  w.data[size_t(1 * 2 + 1) * 9 + 4] = 1.0;
  Tensor b({2});
  Tensor out;
  conv3x3_forward(in, w, b, out);
  for (size_t i = 0; i < in.data.size(); ++i) CHECK(out.data[i] == doctest::Approx(in.data[i]));
}

TEST_CASE("conv3x3 bias only") {
  Tensor in({1, 4, 4});
  Tensor w({3, 1, 3, 3});
  Tensor b({3});
  b.data = {0.5, -1.0, 2.0};
  Tensor out;
  conv3x3_forward(in, w, b, out);
  for (int co = 0; co < 3; ++co)
    for (int i = 0; i < 16; ++i) CHECK(out.data[size_t(co) * 16 + i] == b.data[size_t(co)]);
}

TEST_CASE("conv3x3 shape validation") {
  Tensor in({1, 4, 4});
  Tensor w({2, 3, 3, 3});  // wrong C_in
  Tensor b({2});
  Tensor out;
  CHECK_THROWS_AS(conv3x3_forward(in, w, b, out), ShapeMismatch);
}

TEST_CASE("conv3x3 gradients match finite differences") {
  Rng rng(5);
  Tensor in({2, 4, 4});
  for (auto& v : in.data) v = rng.uniform(-1, 1);
  Tensor w({3, 2, 3, 3});
  for (auto& v : w.data) v = rng.uniform(-0.5, 0.5);
  Tensor b({3});
  for (auto& v : b.data) v = rng.uniform(-0.5, 0.5);

  // Loss = sum of outputs weighted by a fixed random map.
  Tensor out;
  conv3x3_forward(in, w, b, out);
  Tensor d_out(out.shape);
  for (auto& v : d_out.data) v = rng.uniform(-1, 1);

  Tensor d_in, d_w, d_b;
  conv3x3_backward(in, w, d_out, d_in, d_w, d_b);

  auto loss = [&](const Tensor& input, const Tensor& weights, const Tensor& bias) {
    Tensor o;
    conv3x3_forward(input, weights, bias, o);
    double s = 0;
    for (size_t i = 0; i < o.data.size(); ++i) s += o.data[i] * d_out.data[i];
    return s;
  };

  const double h = 1e-6;
  auto check_tensor = [&](Tensor& target, const Tensor& analytic, int samples, auto eval) {
    Rng pick(7);
    for (int s = 0; s < samples; ++s) {
      size_t i = pick.uniform_int(target.data.size());
      double saved = target.data[i];
      target.data[i] = saved + h;
      double up = eval();
      target.data[i] = saved - h;
      double down = eval();
      target.data[i] = saved;
      double numeric = (up - down) / (2 * h);
      CHECK(std::fabs(numeric - analytic.data[i]) <
            1e-6 * std::max(1.0, std::fabs(analytic.data[i])));
    }
  };
  check_tensor(in, d_in, 40, [&] { return loss(in, w, b); });
  check_tensor(w, d_w, 40, [&] { return loss(in, w, b); });
  check_tensor(b, d_b, 3, [&] { return loss(in, w, b); });
}

TEST_CASE("maxpool basics") {
  Tensor in({1, 2, 2});
  in.data = {1, 2, 3, 4};
  Tensor out;
  std::vector<int32_t> argmax;
  maxpool2x2_forward(in, out, argmax);
  REQUIRE(out.shape == std::vector<int>{1, 1, 1});
  CHECK(out.data[0] == 4.0);
  CHECK(argmax[0] == 3);

  Tensor constant({2, 4, 4});
  constant.fill(2.5);
  maxpool2x2_forward(constant, out, argmax);
  REQUIRE(out.shape == std::vector<int>{2, 2, 2});
  for (double v : out.data) CHECK(v == 2.5);
}

TEST_CASE("maxpool rejects odd spatial dims") {
  Tensor in({1, 3, 4});
  Tensor out;
  std::vector<int32_t> argmax;
  CHECK_THROWS_AS(maxpool2x2_forward(in, out, argmax), OddSpatialDim);
}

TEST_CASE("maxpool routes gradient to the argmax") {
  Rng rng(9);
  Tensor in({1, 4, 4});
  for (auto& v : in.data) v = rng.uniform(0, 1);
  Tensor out;
  std::vector<int32_t> argmax;
  maxpool2x2_forward(in, out, argmax);
  Tensor d_out(out.shape);
  for (auto& v : d_out.data) v = rng.uniform(0.5, 1.5);
  Tensor d_in(in.shape);
  maxpool2x2_backward(d_out, argmax, d_in);

  const double h = 1e-7;
  for (size_t i = 0; i < in.data.size(); ++i) {
    double saved = in.data[i];
    auto eval = [&] {
      Tensor o;
      std::vector<int32_t> a;
      maxpool2x2_forward(in, o, a);
      double s = 0;
      for (size_t k = 0; k < o.data.size(); ++k) s += o.data[k] * d_out.data[k];
      return s;
    };
    in.data[i] = saved + h;
    double up = eval();
    in.data[i] = saved - h;
    double down = eval();
    in.data[i] = saved;
    CHECK(std::fabs((up - down) / (2 * h) - d_in.data[i]) < 1e-6);
  }
}

TEST_CASE("global average pool") {
  Tensor in({2, 4, 4});
  for (int i = 0; i < 16; ++i) in.data[size_t(i)] = 3.0;
  for (int i = 0; i < 16; ++i) in.data[size_t(16 + i)] = double(i);
  Tensor out;
  global_avg_pool_forward(in, out);
  REQUIRE(out.shape == std::vector<int>{2});
  CHECK(out.data[0] == doctest::Approx(3.0));
  CHECK(out.data[1] == doctest::Approx(7.5));

  // Linearity.
  Tensor a({1, 2, 2}), b({1, 2, 2}), sum({1, 2, 2});
  Rng rng(11);
  for (int i = 0; i < 4; ++i) {
    a.data[size_t(i)] = rng.uniform(-1, 1);
    b.data[size_t(i)] = rng.uniform(-1, 1);
    sum.data[size_t(i)] = a.data[size_t(i)] + b.data[size_t(i)];
  }
  Tensor pa, pb, ps;
  global_avg_pool_forward(a, pa);
  global_avg_pool_forward(b, pb);
  global_avg_pool_forward(sum, ps);
  CHECK(ps.data[0] == doctest::Approx(pa.data[0] + pb.data[0]).epsilon(1e-12));

  // SPNet's last stage: 64 x 16 x 16 -> 64.
  Tensor wide({64, 16, 16});
  Tensor pooled;
  global_avg_pool_forward(wide, pooled);
  CHECK(pooled.shape == std::vector<int>{64});
}

TEST_CASE("tanh stays strictly inside (-1, 1)") {
  Rng rng(13);
  Tensor x({1, 8, 8});
  for (auto& v : x.data) v = rng.uniform(-15, 15);
  tanh_forward(x);
  for (double v : x.data) {
    CHECK(v > -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("dropout at rate zero is the identity") {
  Rng rng(17);
  Tensor x({1, 4, 4});
  for (auto& v : x.data) v = rng.uniform(-1, 1);
  Tensor before = x;
  std::vector<uint8_t> mask;
  dropout_forward(x, 0.0, rng, mask);
  CHECK(x.data == before.data);
}

TEST_CASE("dropout scaling preserves the mean") {
  Rng rng(19);
  Tensor x({1, 64, 64});
  x.fill(1.0);
  std::vector<uint8_t> mask;
  dropout_forward(x, 0.3, rng, mask);
  double mean = 0;
  for (double v : x.data) mean += v;
  mean /= double(x.data.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
  // Kept entries are scaled by 1/(1-rate).
  for (size_t i = 0; i < mask.size(); ++i)
    CHECK(x.data[i] == (mask[i] ? doctest::Approx(1.0 / 0.7) : doctest::Approx(0.0)));
}

TEST_CASE("dropout masks are reproducible from the seed") {
  Tensor a({1, 8, 8}), b({1, 8, 8});
  a.fill(1.0);
  b.fill(1.0);
  std::vector<uint8_t> ma, mb;
  Rng r1(23), r2(23);
  dropout_forward(a, 0.4, r1, ma);
  dropout_forward(b, 0.4, r2, mb);
  CHECK(ma == mb);
  CHECK(a.data == b.data);
}

TEST_CASE("fc gradients match finite differences") {
  Rng rng(29);
  Tensor x({6});
  for (auto& v : x.data) v = rng.uniform(-1, 1);
  Tensor w({4, 6});
  for (auto& v : w.data) v = rng.uniform(-1, 1);
  Tensor b({4});
  for (auto& v : b.data) v = rng.uniform(-1, 1);
  Tensor d_out({4});
  for (auto& v : d_out.data) v = rng.uniform(-1, 1);

  Tensor d_x, d_w, d_b;
  fc_backward(x, w, d_out, d_x, d_w, d_b);

  auto loss = [&] {
    Tensor o;
    fc_forward(x, w, b, o);
    double s = 0;
    for (int i = 0; i < 4; ++i) s += o.data[size_t(i)] * d_out.data[size_t(i)];
    return s;
  };
  const double h = 1e-6;
  for (size_t i = 0; i < w.data.size(); ++i) {
    double saved = w.data[i];
    w.data[i] = saved + h;
    double up = loss();
    w.data[i] = saved - h;
    double down = loss();
    w.data[i] = saved;
    CHECK(std::fabs((up - down) / (2 * h) - d_w.data[i]) < 1e-6);
  }
  for (size_t i = 0; i < x.data.size(); ++i) {
    double saved = x.data[i];
    x.data[i] = saved + h;
    double up = loss();
    x.data[i] = saved - h;
    double down = loss();
    x.data[i] = saved;
    CHECK(std::fabs((up - down) / (2 * h) - d_x.data[i]) < 1e-6);
  }
}

TEST_CASE("softmax cross entropy on uniform scores") {
  std::vector<double> scores(10, 0.37);
  auto [loss, grad] = softmax_cross_entropy(scores, 4);
  CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  double sum = 0;
  for (double g : grad) sum += g;
  CHECK(std::fabs(sum) < 1e-12);
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  Rng rng(31);
  std::vector<double> scores(7);
  for (auto& v : scores) v = rng.uniform(-2, 2);
  int label = 3;
  auto [loss, grad] = softmax_cross_entropy(scores, label);
  (void)loss;
  const double h = 1e-4;
  for (size_t i = 0; i < scores.size(); ++i) {
    double saved = scores[i];
    scores[i] = saved + h;
    double up = softmax_cross_entropy(scores, label).first;
    scores[i] = saved - h;
    double down = softmax_cross_entropy(scores, label).first;
    scores[i] = saved;
    double numeric = (up - down) / (2 * h);
    CHECK(std::fabs(numeric - grad[i]) < 1e-6 * std::max(1.0, std::fabs(grad[i])));
  }
}

TEST_CASE("softmax cross entropy validates the label") {
  std::vector<double> scores(5, 0.0);
  CHECK_THROWS_AS(softmax_cross_entropy(scores, 5), ShapeMismatch);
}

}  // TEST_SUITE
