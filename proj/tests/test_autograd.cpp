#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qarc/autograd.hpp"

using namespace qarc;
using ag::Graph;
using ag::Var;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : t.values) v = dist(rng);
  return t;
}

}  // namespace

TEST_CASE("conv2d identity kernel and zero kernel") {
  Graph g;
  Tensor in = Tensor::full({3, 3, 1}, 1.0);
  Tensor k({1, 1, 1, 1}, {1.0});
  Var out = g.conv2d(g.input(in), g.input(k), 1);
  CHECK(out.t().shape == std::vector<std::size_t>{3, 3, 1});
  for (double v : out.values()) CHECK(v == 1.0);

  Tensor kz = Tensor::zeros({2, 2, 1, 3});
  Var zero = g.conv2d(g.input(in), g.input(kz), 1);
  for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("conv2d matches a nested-loop oracle") {
  std::mt19937_64 rng(3);
  Tensor in = random_tensor({8, 8, 3}, rng);
  Tensor k = random_tensor({3, 3, 3, 4}, rng);
  Graph g;
  Var out = g.conv2d(g.input(in), g.input(k), 1);
  REQUIRE(out.t().shape == std::vector<std::size_t>{6, 6, 4});
  for (std::size_t oy = 0; oy < 6; ++oy) {
    for (std::size_t ox = 0; ox < 6; ++ox) {
      for (std::size_t f = 0; f < 4; ++f) {
        double acc = 0.0;
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx)
            for (std::size_t c = 0; c < 3; ++c)
              acc += in.values[((oy + ky) * 8 + (ox + kx)) * 3 + c] *
                     k.values[((ky * 3 + kx) * 3 + c) * 4 + f];
        CHECK(out.values()[(oy * 6 + ox) * 4 + f] == doctest::Approx(acc).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("pooling on hand examples") {
  Graph g;
  Var cmax = g.max_pool2d(g.input(Tensor::full({4, 4, 2}, 3.5)), 2);
  for (double v : cmax.values()) CHECK(v == 3.5);
  Var cavg = g.avg_pool2d(g.input(Tensor::full({6, 6, 1}, -1.25)), 3);
  for (double v : cavg.values()) CHECK(v == -1.25);

  Var m = g.max_pool2d(g.input(Tensor({2, 2, 1}, {1, 2, 3, 4})), 2);
  CHECK(m.values() == std::vector<double>{4.0});
  Var a = g.avg_pool2d(g.input(Tensor({3, 3, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9})), 3);
  CHECK(a.values() == std::vector<double>{5.0});
}

TEST_CASE("conv1d identity, zero, and loop oracle") {
  Graph g;
  Tensor seq({5, 1}, {1, 2, 3, 4, 5});
  Var same = g.conv1d(g.input(seq), g.input(Tensor({1, 1, 1}, {1.0})), 1);
  CHECK(same.values() == seq.values);
  Var zero = g.conv1d(g.input(seq), g.input(Tensor::zeros({2, 1, 3})), 1);
  for (double v : zero.values()) CHECK(v == 0.0);

  std::mt19937_64 rng(5);
  Tensor in = random_tensor({7, 2}, rng);
  Tensor k = random_tensor({3, 2, 4}, rng);
  Var out = g.conv1d(g.input(in), g.input(k), 1);
  REQUIRE(out.t().shape == std::vector<std::size_t>{5, 4});
  for (std::size_t o = 0; o < 5; ++o) {
    for (std::size_t f = 0; f < 4; ++f) {
      double acc = 0.0;
      for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t c = 0; c < 2; ++c)
          acc += in.values[(o + t) * 2 + c] * k.values[(t * 2 + c) * 4 + f];
      CHECK(out.values()[o * 4 + f] == doctest::Approx(acc).epsilon(1e-10));
    }
  }
}

TEST_CASE("dense identity, bias, and oracle") {
  Graph g;
  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Var same = g.dense(g.input(std::vector<double>{1, -2, 3}), g.input(eye),
                     g.input(Tensor::zeros({3})));
  CHECK(same.values() == std::vector<double>{1, -2, 3});

  Var bias = g.dense(g.input(Tensor::zeros({3})), g.input(eye),
                     g.input(std::vector<double>{4, 5, 6}));
  CHECK(bias.values() == std::vector<double>{4, 5, 6});

  std::mt19937_64 rng(9);
  Tensor w = random_tensor({4, 3}, rng);
  Tensor x = random_tensor({3}, rng);
  Tensor b = random_tensor({4}, rng);
  Var out = g.dense(g.input(x), g.input(w), g.input(b));
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = b.values[i];
    for (std::size_t j = 0; j < 3; ++j) acc += w.values[i * 3 + j] * x.values[j];
    CHECK(out.values()[i] == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("softmax closed forms") {
  Graph g;
  Var uni = g.softmax(g.input(Tensor::zeros({5})));
  for (double p : uni.values()) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));

  Var a = g.softmax(g.input(std::vector<double>{0.3, -1.2, 2.0}));
  Var b = g.softmax(g.input(std::vector<double>{0.3 + 7.5, -1.2 + 7.5, 2.0 + 7.5}));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-12));
  }

  Var thirds =
      g.softmax(g.input(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)}));
  CHECK(thirds.values()[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(thirds.values()[1] == doctest::Approx(2.0 / 6).epsilon(1e-12));
  CHECK(thirds.values()[2] == doctest::Approx(3.0 / 6).epsilon(1e-12));

  double sum = 0.0;
  for (double p : thirds.values()) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("entropy closed forms and rejection") {
  CHECK(ag::entropy_value({0.2, 0.2, 0.2, 0.2, 0.2}) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(ag::entropy_value({0.0, 1.0, 0.0}) == 0.0);
  CHECK(ag::entropy_value({0.5, 0.5, 0.0, 0.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  Graph g;
  CHECK_THROWS(g.entropy(g.input(std::vector<double>{0.5, 0.6, -0.1})));
}

TEST_CASE("mse_l2_loss arithmetic") {
  Graph g;
  Var same = g.mse_l2_loss(g.input(std::vector<double>{0.3, 0.7}), {0.3, 0.7}, {}, 0.0);
  CHECK(same.scalar() == 0.0);

  Var one = g.mse_l2_loss(g.input(std::vector<double>{1.0, 1.0}), {0.0, 0.0}, {}, 0.0);
  CHECK(one.scalar() == doctest::Approx(1.0).epsilon(1e-15));

  Var zero_params = g.mse_l2_loss(g.input(std::vector<double>{1.0, 1.0}), {0.0, 0.0},
                                  {g.input(Tensor::zeros({4}))}, 5.0);
  CHECK(zero_params.scalar() == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS(g.mse_l2_loss(g.input(std::vector<double>{1.0}), {0.0, 0.0}, {}, 0.0));
}

TEST_CASE("gradient checks for the core op chains") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-0.8, 0.8);

  SUBCASE("dense") {
    // x holds the weight matrix; input fixed
    std::vector<double> x0(12);
    for (double& v : x0) v = dist(rng);
    const std::vector<double> in = {0.3, -0.7, 0.9};
    auto value = [&](const std::vector<double>& x) {
      Graph g;
      Var out = g.dense(g.input(in), g.input(Tensor({4, 3}, x)),
                        g.input(Tensor::zeros({4})));
      return g.sumsq(g.tanh(out)).scalar();
    };
    auto gradient = [&](const std::vector<double>& x) {
      Graph g;
      Var w = g.input(Tensor({4, 3}, x));
      Var loss = g.sumsq(g.tanh(g.dense(g.input(in), w, g.input(Tensor::zeros({4})))));
      g.backward(loss);
      return w.grad();
    };
    CHECK(ag::grad_check(value, gradient, x0) < 1e-6);
  }

  SUBCASE("conv2d with pooling") {
    std::vector<double> x0(2 * 2 * 1 * 2);
    for (double& v : x0) v = dist(rng);
    Tensor in({6, 6, 1});
    for (double& v : in.values) v = dist(rng);
    auto value = [&](const std::vector<double>& x) {
      Graph g;
      Var out = g.conv2d(g.input(in), g.input(Tensor({2, 2, 1, 2}, x)), 1);
      return g.sumsq(g.max_pool2d(g.relu(out), 2)).scalar();
    };
    auto gradient = [&](const std::vector<double>& x) {
      Graph g;
      Var k = g.input(Tensor({2, 2, 1, 2}, x));
      Var loss = g.sumsq(g.max_pool2d(g.relu(g.conv2d(g.input(in), k, 1)), 2));
      g.backward(loss);
      return k.grad();
    };
    CHECK(ag::grad_check(value, gradient, x0) < 1e-4);
  }

  SUBCASE("softmax entropy pick") {
    std::vector<double> x0 = {0.4, -0.9, 1.3, 0.1, -0.2};
    auto value = [&](const std::vector<double>& x) {
      Graph g;
      Var p = g.softmax(g.input(x));
      return g.add(g.scale(g.log(g.pick(p, 2)), 0.7), g.scale(g.entropy(p), 0.25))
          .scalar();
    };
    auto gradient = [&](const std::vector<double>& x) {
      Graph g;
      Var logits = g.input(x);
      Var p = g.softmax(logits);
      Var loss = g.add(g.scale(g.log(g.pick(p, 2)), 0.7), g.scale(g.entropy(p), 0.25));
      g.backward(loss);
      return logits.grad();
    };
    CHECK(ag::grad_check(value, gradient, x0) < 1e-6);
  }

  SUBCASE("regularized mse") {
    std::vector<double> x0 = {0.2, -0.4, 0.6};
    const std::vector<double> target = {0.1, 0.1, 0.1};
    auto value = [&](const std::vector<double>& x) {
      Graph g;
      Var pred = g.input(x);
      return g.mse_l2_loss(pred, target, {pred}, 0.01).scalar();
    };
    auto gradient = [&](const std::vector<double>& x) {
      Graph g;
      Var pred = g.input(x);
      Var loss = g.mse_l2_loss(pred, target, {pred}, 0.01);
      g.backward(loss);
      return pred.grad();
    };
    CHECK(ag::grad_check(value, gradient, x0) < 1e-6);
  }
}

TEST_CASE("backward accumulates into bound parameters") {
  Parameter p("w", Tensor({2}, {0.5, -0.5}));
  Graph g;
  Var w = g.param(p);
  Var loss = g.sumsq(w);
  g.backward(loss);
  CHECK(p.tensor.grad[0] == doctest::Approx(1.0));
  CHECK(p.tensor.grad[1] == doctest::Approx(-1.0));
}
