// tests/nn_test.cc

// Copyright 2026  xser authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "xser/nn.h"

using namespace xser;

namespace {

DenseLayer make_layer(const Matrix& w, const Vector& b, Activation act) {
  DenseLayer layer;
  layer.weights = w;
  layer.biases = b;
  layer.activation = act;
  return layer;
}

// Squared error against a fixed target, with its analytic output gradient.
ScalarLoss squared_error_loss(const Vector& target) {
  return {[target](const Vector& out) { return (out - target).squaredNorm(); },
          [target](const Vector& out) { return Vector(2.0 * (out - target)); }};
}

}  // namespace

TEST_CASE("forward: identity linear layer passes input through") {
  DenseNet net({make_layer(Matrix::Identity(3, 3), Vector::Zero(3),
                           Activation::kLinear)},
               0.0, {});
  Vector x(3);
  x << 1, 2, 3;
  Vector out = forward(net, x, false, nullptr);
  CHECK(out.isApprox(x));
}

TEST_CASE("forward: zero-weight sigmoid layer outputs 0.5 everywhere") {
  DenseNet net({make_layer(Matrix::Zero(4, 3), Vector::Zero(4),
                           Activation::kSigmoid)},
               0.0, {});
  Vector x(3);
  x << -7, 0.3, 12;
  Vector out = forward(net, x, false, nullptr);
  for (int k = 0; k < 4; ++k) CHECK(out[k] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forward: two-layer net matches hand-computed matrix algebra") {
  // z0 = W0 x + b0 = [1.5, 2.5], ReLU keeps both.
  // z1 = W1 [1.5, 2.5] + b1 = [1*1.5 - 1*2.5, 2*1.5 + 0.5*2.5 + 1]
  //    = [-1.0, 5.25]
  Matrix w0(2, 2), w1(2, 2);
  w0 << 1, 2, 3, 4;
  w1 << 1, -1, 2, 0.5;
  Vector b0(2), b1(2);
  b0 << 0.5, -0.5;
  b1 << 0, 1;
  DenseNet net({make_layer(w0, b0, Activation::kRelu),
                make_layer(w1, b1, Activation::kLinear)},
               0.0, {});
  Vector x(2);
  x << 1, 0;
  Vector out = forward(net, x, false, nullptr);
  CHECK(out[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(5.25).epsilon(1e-12));
}

TEST_CASE("forward: input dimension mismatch raises ShapeError") {
  DenseNet net({make_layer(Matrix::Identity(3, 3), Vector::Zero(3),
                           Activation::kLinear)},
               0.0, {});
  Vector x(2);
  x << 1, 2;
  CHECK_THROWS_AS(forward(net, x, false, nullptr), ShapeError);
}

TEST_CASE("forward: softmax output is a probability vector") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    int in = 2 + static_cast<int>(rng.uniform_int(10));
    int out_dim = 2 + static_cast<int>(rng.uniform_int(10));
    DenseNet net = DenseNet::random({in, out_dim},
                                    {Activation::kSoftmax}, 0.0, {}, &rng);
    Vector x(in);
    for (int k = 0; k < in; ++k) x[k] = rng.uniform(-30.0, 30.0);
    Vector p = forward(net, x, false, nullptr);
    double sum = 0.0;
    for (int k = 0; k < out_dim; ++k) {
      CHECK(p[k] >= 0.0);
      CHECK(p[k] <= 1.0);
      sum += p[k];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("forward: inverted dropout preserves activations in expectation") {
  // Identity layer: the unmasked activation equals the input, so the mean of
  // masked outputs over many draws must come back to the input.
  const int dim = 8;
  DenseNet net({make_layer(Matrix::Identity(dim, dim), Vector::Zero(dim),
                           Activation::kLinear)},
               0.5, {0});
  Vector x = Vector::Ones(dim);
  Rng rng(123);
  const int n_draws = 10000;
  Vector mean = Vector::Zero(dim);
  for (int i = 0; i < n_draws; ++i) mean += forward(net, x, true, &rng);
  mean /= n_draws;
  // Each masked coordinate is 2 w.p. 1/2 else 0: variance 1, SE = 1/sqrt(N).
  double se = 1.0 / std::sqrt(static_cast<double>(n_draws));
  for (int k = 0; k < dim; ++k) CHECK(std::abs(mean[k] - 1.0) < 3.0 * se);
}

TEST_CASE("forward: no masking or scaling at inference time") {
  const int dim = 5;
  DenseNet net({make_layer(Matrix::Identity(dim, dim), Vector::Zero(dim),
                           Activation::kLinear)},
               0.5, {0});
  Vector x(dim);
  x << 1, -2, 3, -4, 5;
  CHECK(forward(net, x, false, nullptr).isApprox(x));
}

TEST_CASE("backward: linear layer weight gradient is the outer product") {
  Matrix w(1, 3);
  w << 0.2, -0.4, 0.6;
  DenseNet net({make_layer(w, Vector::Zero(1), Activation::kLinear)}, 0.0, {});
  Vector x(3);
  x << 1.5, -2.0, 0.25;
  GradTape tape;
  forward(net, x, true, nullptr, &tape);
  Gradients grads;
  Vector g(1);
  g << 1.0;
  Vector input_grad = backward(net, tape, g, &grads);
  CHECK(grads.layers[0].dw.row(0).transpose().isApprox(x));
  CHECK(grads.layers[0].db[0] == doctest::Approx(1.0));
  CHECK(input_grad.isApprox(w.row(0).transpose()));
}

TEST_CASE("backward: zero output gradient yields zero parameter gradients") {
  Rng rng(5);
  DenseNet net = DenseNet::random({6, 4, 3},
                                  {Activation::kRelu, Activation::kSigmoid},
                                  0.0, {}, &rng);
  Vector x(6);
  for (int k = 0; k < 6; ++k) x[k] = rng.normal();
  GradTape tape;
  forward(net, x, true, nullptr, &tape);
  Gradients grads;
  Vector input_grad = backward(net, tape, Vector::Zero(3), &grads);
  CHECK(input_grad.norm() == 0.0);
  for (const auto& layer : grads.layers) {
    CHECK(layer.dw.norm() == 0.0);
    CHECK(layer.db.norm() == 0.0);
  }
}

TEST_CASE("backward: foreign or stale tapes are rejected") {
  Rng rng(9);
  DenseNet net = DenseNet::random({3, 2}, {Activation::kLinear}, 0.0, {}, &rng);
  DenseNet other = net;
  Vector x(3);
  x << 1, 2, 3;
  GradTape tape;
  forward(net, x, true, nullptr, &tape);

  Gradients grads;
  CHECK_THROWS_AS(backward(other, tape, Vector::Ones(2), &grads), TapeError);

  net.nudge_param(0, 0.5);  // revision bump invalidates the tape
  CHECK_THROWS_AS(backward(net, tape, Vector::Ones(2), &grads), TapeError);
}

TEST_CASE("backward: inference-mode tape is rejected") {
  Rng rng(11);
  DenseNet net = DenseNet::random({3, 2}, {Activation::kLinear}, 0.0, {}, &rng);
  Vector x(3);
  x << 1, 2, 3;
  GradTape tape;
  forward(net, x, false, nullptr, &tape);
  Gradients grads;
  CHECK_THROWS_AS(backward(net, tape, Vector::Ones(2), &grads), TapeError);
}

TEST_CASE("rmsprop: zero gradient leaves params unchanged and decays cache") {
  Vector params(3), grads = Vector::Zero(3), cache(3);
  params << 1, 2, 3;
  cache << 0.4, 0.8, 1.2;
  Vector params_before = params;
  RmsPropConfig cfg;
  rmsprop_step(params, grads, cache, cfg);
  CHECK(params.isApprox(params_before));
  CHECK(cache[0] == doctest::Approx(0.9 * 0.4).epsilon(1e-14));
  CHECK(cache[1] == doctest::Approx(0.9 * 0.8).epsilon(1e-14));
  CHECK(cache[2] == doctest::Approx(0.9 * 1.2).epsilon(1e-14));
}

TEST_CASE("rmsprop: scalar step reproduces the stated update rule") {
  Vector params(1), grads(1), cache = Vector::Zero(1);
  params << 1.0;
  grads << 1.0;
  RmsPropConfig cfg;  // lr 1e-4, decay 0.9, eps 1e-8
  rmsprop_step(params, grads, cache, cfg);
  // Hand recomputation of the rule, independent of the implementation.
  double expected_cache = 0.9 * 0.0 + 0.1 * 1.0;
  double expected_param = 1.0 - 1e-4 * 1.0 / (std::sqrt(expected_cache) + 1e-8);
  CHECK(cache[0] == doctest::Approx(expected_cache).epsilon(1e-14));
  CHECK(params[0] == doctest::Approx(expected_param).epsilon(1e-14));
  // The magnitude lands near -3.1623e-4 as a sanity anchor.
  CHECK(params[0] - 1.0 == doctest::Approx(-3.1623e-4).epsilon(1e-3));
}

TEST_CASE("rmsprop: two constant-gradient steps follow the hand recurrence") {
  Vector params(1), grads(1), cache = Vector::Zero(1);
  params << 0.5;
  grads << 2.0;
  RmsPropConfig cfg;
  rmsprop_step(params, grads, cache, cfg);
  rmsprop_step(params, grads, cache, cfg);
  double c1 = 0.1 * 4.0;
  double p1 = 0.5 - 1e-4 * 2.0 / (std::sqrt(c1) + 1e-8);
  double c2 = 0.9 * c1 + 0.1 * 4.0;
  double p2 = p1 - 1e-4 * 2.0 / (std::sqrt(c2) + 1e-8);
  CHECK(cache[0] == doctest::Approx(c2).epsilon(1e-14));
  CHECK(params[0] == doctest::Approx(p2).epsilon(1e-14));
}

TEST_CASE("rmsprop: non-finite gradient rejects the update") {
  Vector params(2), grads(2), cache = Vector::Zero(2);
  params << 1, 2;
  grads << 1, std::numeric_limits<double>::quiet_NaN();
  Vector params_before = params;
  Vector cache_before = cache;
  RmsPropConfig cfg;
  CHECK_THROWS_AS(rmsprop_step(params, grads, cache, cfg), NumericError);
  CHECK(params.isApprox(params_before));
  CHECK(cache.isApprox(cache_before));
}

TEST_CASE("grad_check: identity linear net with squared error is tight") {
  DenseNet net({make_layer(Matrix::Identity(3, 3), Vector::Zero(3),
                           Activation::kLinear)},
               0.0, {});
  Vector x(3), target(3);
  x << 0.3, -0.7, 1.1;
  target << 1.0, 0.0, -1.0;
  CHECK(grad_check(net, squared_error_loss(target), x, 1e-5) < 1e-7);
}

TEST_CASE("grad_check: random mixed-activation nets pass at 1e-4") {
  Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    DenseNet net = DenseNet::random(
        {10, 8, 6, 4},
        {Activation::kSigmoid, Activation::kRelu, Activation::kLinear}, 0.0, {},
        &rng);
    Vector x(10), target(4);
    for (int k = 0; k < 10; ++k) x[k] = rng.normal();
    for (int k = 0; k < 4; ++k) target[k] = rng.normal();
    CHECK(grad_check(net, squared_error_loss(target), x, 1e-5) < 1e-4);
  }
}

TEST_CASE("grad_check: softmax output layer passes") {
  Rng rng(23);
  DenseNet net = DenseNet::random({5, 4, 3},
                                  {Activation::kRelu, Activation::kSoftmax},
                                  0.0, {}, &rng);
  Vector x(5), weights(3);
  for (int k = 0; k < 5; ++k) x[k] = rng.normal();
  for (int k = 0; k < 3; ++k) weights[k] = rng.normal();
  ScalarLoss loss{[weights](const Vector& out) { return weights.dot(out); },
                  [weights](const Vector&) { return weights; }};
  CHECK(grad_check(net, loss, x, 1e-5) < 1e-4);
}

TEST_CASE("grad_check: dead ReLU unit still agrees with central differences") {
  Matrix w(2, 2);
  w << -1.0, -1.0, 0.5, 0.25;  // first unit strictly dead for positive inputs
  Vector b(2);
  b << -5.0, 0.1;
  DenseNet net({make_layer(w, b, Activation::kRelu)}, 0.0, {});
  Vector x(2), target(2);
  x << 1.0, 2.0;
  target << 0.5, 0.5;
  CHECK(grad_check(net, squared_error_loss(target), x, 1e-5) < 1e-7);
}

TEST_CASE("grad_check: refuses nets with active dropout") {
  Rng rng(29);
  DenseNet net = DenseNet::random({4, 3}, {Activation::kRelu}, 0.5, {0}, &rng);
  Vector x = Vector::Ones(4);
  CHECK_THROWS_AS(grad_check(net, squared_error_loss(Vector::Zero(3)), x, 1e-5),
                  ConfigError);
}

TEST_CASE("determinism: same seed gives bitwise-identical training steps") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    DenseNet net = DenseNet::random({6, 5, 2},
                                    {Activation::kRelu, Activation::kLinear},
                                    0.5, {0}, &rng);
    RmsProp opt(net, {});
    Rng data_rng = rng.spawn(1);
    for (int step = 0; step < 20; ++step) {
      Vector x(6), target(2);
      for (int k = 0; k < 6; ++k) x[k] = data_rng.normal();
      for (int k = 0; k < 2; ++k) target[k] = data_rng.normal();
      GradTape tape;
      Vector out = forward(net, x, true, &data_rng, &tape);
      Gradients grads;
      backward(net, tape, Vector(2.0 * (out - target)), &grads);
      opt.step(&net, grads);
    }
    return net.param_fingerprint();
  };
  CHECK(run(99) == run(99));
  CHECK(run(99) != run(100));
}

TEST_CASE("checkpoint: save/load round-trips bit exactly") {
  Rng rng(31);
  DenseNet net = DenseNet::random(
      {7, 5, 3}, {Activation::kSigmoid, Activation::kSoftmax}, 0.25, {0}, &rng);
  std::stringstream ss;
  save_net(net, ss);
  DenseNet loaded = load_net(ss);
  CHECK(loaded.param_fingerprint() == net.param_fingerprint());
  CHECK(loaded.num_layers() == net.num_layers());
  CHECK(loaded.dropout_rate() == net.dropout_rate());
  CHECK(loaded.dropout_positions() == net.dropout_positions());
  for (int i = 0; i < net.num_layers(); ++i)
    CHECK(loaded.layers()[i].activation == net.layers()[i].activation);
}

TEST_CASE("checkpoint: truncated stream raises DataError") {
  Rng rng(37);
  DenseNet net = DenseNet::random({3, 2}, {Activation::kLinear}, 0.0, {}, &rng);
  std::stringstream ss;
  save_net(net, ss);
  std::string text = ss.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(load_net(cut), DataError);
}

TEST_CASE("net invariants: dims must chain and dropout rate must be valid") {
  Rng rng(41);
  DenseNet good = DenseNet::random({3, 4}, {Activation::kRelu}, 0.0, {}, &rng);
  DenseLayer bad = good.layers()[0];
  bad.weights = Matrix::Zero(4, 7);  // in_dim 7 breaks nothing in 1-layer net
  std::vector<DenseLayer> layers{good.layers()[0], bad};
  CHECK_THROWS_AS(DenseNet(layers, 0.0, {}), ShapeError);
  CHECK_THROWS_AS(DenseNet({good.layers()[0]}, 1.0, {}), ConfigError);
  CHECK_THROWS_AS(DenseNet({good.layers()[0]}, -0.1, {}), ConfigError);
}
