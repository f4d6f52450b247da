// src/nn.cc

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

#include "xser/nn.h"

#include <cmath>
#include <fstream>
#include <sstream>

namespace xser {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kLinear: return "linear";
    case Activation::kSoftmax: return "softmax";
  }
  throw ConfigError("unknown activation enum value");
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "linear") return Activation::kLinear;
  if (name == "softmax") return Activation::kSoftmax;
  throw DataError("unknown activation name: " + name);
}

namespace {

Vector apply_activation(Activation act, const Vector& z) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::kLinear:
      return z;
    case Activation::kSoftmax: {
      Vector shifted = (z.array() - z.maxCoeff()).exp();
      return shifted / shifted.sum();
    }
  }
  throw ConfigError("unknown activation enum value");
}

// dLoss/dz given dLoss/da, with a = act(z).
Vector activation_backward(Activation act, const Vector& z, const Vector& a,
                           const Vector& grad_a) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).select(grad_a, Vector::Zero(z.size()));
    case Activation::kSigmoid:
      return grad_a.array() * a.array() * (1.0 - a.array());
    case Activation::kLinear:
      return grad_a;
    case Activation::kSoftmax: {
      double dot = grad_a.dot(a);
      return a.array() * (grad_a.array() - dot);
    }
  }
  throw ConfigError("unknown activation enum value");
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers, double dropout_rate,
                   std::set<int> dropout_positions)
    : layers_(std::move(layers)),
      dropout_rate_(dropout_rate),
      dropout_positions_(std::move(dropout_positions)) {
  if (dropout_rate_ < 0.0 || dropout_rate_ >= 1.0)
    throw ConfigError("dropout_rate must lie in [0, 1)");
  for (int p : dropout_positions_)
    if (p < 0 || p >= num_layers())
      throw ConfigError("dropout position out of range: " + std::to_string(p));
  check_chain();
}

DenseNet DenseNet::random(const std::vector<int>& dims,
                          const std::vector<Activation>& activations,
                          double dropout_rate,
                          const std::set<int>& dropout_positions, Rng* rng) {
  if (dims.size() < 2) throw ConfigError("need at least one layer");
  if (activations.size() != dims.size() - 1)
    throw ConfigError("one activation per layer required");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    int in = dims[i], out = dims[i + 1];
    if (in < 1 || out < 1) throw ConfigError("layer dims must be positive");
    DenseLayer layer;
    layer.weights = Matrix(out, in);
    double bound = std::sqrt(6.0 / (in + out));
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c)
        layer.weights(r, c) = rng->uniform(-bound, bound);
    layer.biases = Vector::Zero(out);
    layer.activation = activations[i];
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers), dropout_rate, dropout_positions);
}

int DenseNet::input_dim() const {
  if (layers_.empty()) throw ConfigError("empty net has no input dim");
  return layers_.front().in_dim();
}

int DenseNet::output_dim() const {
  if (layers_.empty()) throw ConfigError("empty net has no output dim");
  return layers_.back().out_dim();
}

void DenseNet::set_layer(int i, DenseLayer layer) {
  layers_.at(static_cast<std::size_t>(i)) = std::move(layer);
  check_chain();
  bump();
}

void DenseNet::set_dropout_rate(double rate) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout_rate must lie in [0, 1)");
  dropout_rate_ = rate;
  bump();
}

void DenseNet::set_dropout_positions(std::set<int> positions) {
  for (int p : positions)
    if (p < 0 || p >= num_layers())
      throw ConfigError("dropout position out of range: " + std::to_string(p));
  dropout_positions_ = std::move(positions);
  bump();
}

void DenseNet::apply_deltas(const std::vector<Matrix>& dw,
                            const std::vector<Vector>& db) {
  if (static_cast<int>(dw.size()) != num_layers() ||
      static_cast<int>(db.size()) != num_layers())
    throw ShapeError("delta count does not match layer count");
  for (int i = 0; i < num_layers(); ++i) {
    auto& layer = layers_[static_cast<std::size_t>(i)];
    if (dw[i].rows() != layer.weights.rows() ||
        dw[i].cols() != layer.weights.cols() ||
        db[i].size() != layer.biases.size())
      throw ShapeError("delta shape mismatch at layer " + std::to_string(i));
    layer.weights += dw[i];
    layer.biases += db[i];
  }
  bump();
  if (!all_params_finite())
    throw NumericError("parameters became non-finite after update");
}

int DenseNet::num_params() const {
  int n = 0;
  for (const auto& layer : layers_)
    n += static_cast<int>(layer.weights.size() + layer.biases.size());
  return n;
}

double DenseNet::get_param(int flat_index) const {
  int k = flat_index;
  for (const auto& layer : layers_) {
    int nw = static_cast<int>(layer.weights.size());
    if (k < nw) return layer.weights.data()[k];
    k -= nw;
    int nb = static_cast<int>(layer.biases.size());
    if (k < nb) return layer.biases[k];
    k -= nb;
  }
  throw ConfigError("parameter index out of range");
}

void DenseNet::nudge_param(int flat_index, double delta) {
  int k = flat_index;
  for (auto& layer : layers_) {
    int nw = static_cast<int>(layer.weights.size());
    if (k < nw) {
      layer.weights.data()[k] += delta;
      bump();
      return;
    }
    k -= nw;
    int nb = static_cast<int>(layer.biases.size());
    if (k < nb) {
      layer.biases[k] += delta;
      bump();
      return;
    }
    k -= nb;
  }
  throw ConfigError("parameter index out of range");
}

std::uint64_t DenseNet::param_fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& layer : layers_) {
    h = fnv1a64(layer.weights, h);
    h = fnv1a64(layer.biases, h);
  }
  return h;
}

bool DenseNet::all_params_finite() const {
  for (const auto& layer : layers_)
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) return false;
  return true;
}

void DenseNet::check_chain() const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.out_dim() < 1 || layer.in_dim() < 1)
      throw ShapeError("layer " + std::to_string(i) + " has empty dimension");
    if (layer.biases.size() != layer.out_dim())
      throw ShapeError("bias length mismatch at layer " + std::to_string(i));
    if (i > 0 && layers_[i - 1].out_dim() != layer.in_dim())
      throw ShapeError("layer dims do not chain at layer " + std::to_string(i));
  }
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  for (const auto& layer : net.layers())
    g.layers.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                        Vector::Zero(layer.biases.size())});
  return g;
}

void Gradients::accumulate(const Gradients& other) {
  if (other.layers.size() != layers.size())
    throw ShapeError("gradient layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].dw += other.layers[i].dw;
    layers[i].db += other.layers[i].db;
  }
}

void Gradients::scale(double s) {
  for (auto& layer : layers) {
    layer.dw *= s;
    layer.db *= s;
  }
}

bool Gradients::finite() const {
  for (const auto& layer : layers)
    if (!layer.dw.allFinite() || !layer.db.allFinite()) return false;
  return true;
}

Vector forward(const DenseNet& net, const Vector& input, bool training,
               Rng* rng, GradTape* tape) {
  if (net.num_layers() == 0) throw ConfigError("forward through empty net");
  if (input.size() != net.input_dim())
    throw ShapeError("input length " + std::to_string(input.size()) +
                     " does not match net input dim " +
                     std::to_string(net.input_dim()));
  bool dropout_active = training && net.has_dropout();
  if (dropout_active && rng == nullptr)
    throw ConfigError("training forward with dropout requires an rng");

  if (tape != nullptr) {
    tape->net = &net;
    tape->revision = net.revision();
    tape->training = training;
    tape->input = input;
    tape->pre_acts.clear();
    tape->activations.clear();
    tape->masks.clear();
  }

  double keep = 1.0 - net.dropout_rate();
  Vector x = input;
  for (int i = 0; i < net.num_layers(); ++i) {
    const DenseLayer& layer = net.layers()[static_cast<std::size_t>(i)];
    Vector z = layer.weights * x + layer.biases;
    Vector a = apply_activation(layer.activation, z);
    Vector mask;
    if (dropout_active && net.dropout_positions().count(i)) {
      mask = Vector(a.size());
      for (int k = 0; k < a.size(); ++k)
        mask[k] = rng->uniform() < keep ? 1.0 / keep : 0.0;
      x = a.cwiseProduct(mask);
    } else {
      x = a;
    }
    if (tape != nullptr) {
      tape->pre_acts.push_back(std::move(z));
      tape->activations.push_back(std::move(a));
      tape->masks.push_back(std::move(mask));
    }
  }
  return x;
}

Vector backward(const DenseNet& net, const GradTape& tape,
                const Vector& output_grad, Gradients* param_grads) {
  if (tape.net != &net || tape.revision != net.revision())
    throw TapeError("tape does not match this net (stale or foreign tape)");
  if (!tape.training)
    throw TapeError("backward requires a tape from a training-mode forward");
  if (output_grad.size() != net.output_dim())
    throw ShapeError("output_grad length does not match net output dim");

  if (param_grads != nullptr && param_grads->layers.empty())
    *param_grads = Gradients::zeros_like(net);

  Vector g = output_grad;  // dLoss/d(layer output after dropout)
  for (int i = net.num_layers() - 1; i >= 0; --i) {
    const DenseLayer& layer = net.layers()[static_cast<std::size_t>(i)];
    const Vector& mask = tape.masks[static_cast<std::size_t>(i)];
    Vector grad_a = mask.size() > 0 ? Vector(g.cwiseProduct(mask)) : g;
    Vector grad_z = activation_backward(
        layer.activation, tape.pre_acts[static_cast<std::size_t>(i)],
        tape.activations[static_cast<std::size_t>(i)], grad_a);
    if (param_grads != nullptr) {
      const Vector& layer_input =
          i == 0 ? tape.input
                 : (tape.masks[static_cast<std::size_t>(i - 1)].size() > 0
                        ? Vector(tape.activations[static_cast<std::size_t>(i - 1)]
                                     .cwiseProduct(
                                         tape.masks[static_cast<std::size_t>(i - 1)]))
                        : tape.activations[static_cast<std::size_t>(i - 1)]);
      param_grads->layers[static_cast<std::size_t>(i)].dw +=
          grad_z * layer_input.transpose();
      param_grads->layers[static_cast<std::size_t>(i)].db += grad_z;
    }
    g = layer.weights.transpose() * grad_z;
  }
  return g;
}

void rmsprop_step(Eigen::Ref<Eigen::VectorXd> params,
                  const Eigen::Ref<const Eigen::VectorXd>& grads,
                  Eigen::Ref<Eigen::VectorXd> cache, const RmsPropConfig& cfg) {
  if (params.size() != grads.size() || params.size() != cache.size())
    throw ShapeError("rmsprop_step: params/grads/cache sizes disagree");
  if (!grads.allFinite())
    throw NumericError("rmsprop_step: non-finite gradient, update rejected");
  cache = cfg.decay * cache + (1.0 - cfg.decay) * grads.cwiseProduct(grads);
  params -= cfg.learning_rate *
            grads.cwiseQuotient((cache.cwiseSqrt().array() + cfg.epsilon).matrix());
}

RmsProp::RmsProp(const DenseNet& net, const RmsPropConfig& cfg) : cfg_(cfg) {
  if (cfg.learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (cfg.decay <= 0.0 || cfg.decay >= 1.0)
    throw ConfigError("decay must lie in (0, 1)");
  if (cfg.epsilon <= 0.0) throw ConfigError("epsilon must be positive");
  for (const auto& layer : net.layers())
    cache_.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                      Vector::Zero(layer.biases.size())});
}

void RmsProp::step(DenseNet* net, const Gradients& grads) {
  if (grads.layers.size() != cache_.size())
    throw ShapeError("gradient shape does not match optimizer state");
  if (!grads.finite())
    throw NumericError("rmsprop step: non-finite gradient, update rejected");
  std::vector<Matrix> dw;
  std::vector<Vector> db;
  for (std::size_t i = 0; i < cache_.size(); ++i) {
    auto& cw = cache_[i].dw;
    auto& cb = cache_[i].db;
    const auto& gw = grads.layers[i].dw;
    const auto& gb = grads.layers[i].db;
    cw = cfg_.decay * cw + (1.0 - cfg_.decay) * gw.cwiseProduct(gw);
    cb = cfg_.decay * cb + (1.0 - cfg_.decay) * gb.cwiseProduct(gb);
    dw.push_back(-cfg_.learning_rate *
                 gw.cwiseQuotient((cw.cwiseSqrt().array() + cfg_.epsilon).matrix()));
    db.push_back(-cfg_.learning_rate *
                 gb.cwiseQuotient((cb.cwiseSqrt().array() + cfg_.epsilon).matrix()));
  }
  net->apply_deltas(dw, db);
}

double grad_check(const DenseNet& net, const ScalarLoss& loss,
                  const Vector& input, double h) {
  if (net.has_dropout())
    throw ConfigError("grad_check requires dropout disabled");
  if (h <= 0.0) throw ConfigError("grad_check step h must be positive");

  DenseNet probe = net;  // private copy to perturb
  GradTape tape;
  Vector out = forward(probe, input, /*training=*/true, nullptr, &tape);
  Gradients analytic = Gradients::zeros_like(probe);
  backward(probe, tape, loss.grad(out), &analytic);

  // Flatten analytic gradients in the same order as DenseNet::get_param.
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(probe.num_params()));
  for (const auto& layer : analytic.layers) {
    flat.insert(flat.end(), layer.dw.data(), layer.dw.data() + layer.dw.size());
    flat.insert(flat.end(), layer.db.data(), layer.db.data() + layer.db.size());
  }

  double max_rel = 0.0;
  for (int k = 0; k < probe.num_params(); ++k) {
    probe.nudge_param(k, h);
    double plus = loss.value(forward(probe, input, false, nullptr));
    probe.nudge_param(k, -2.0 * h);
    double minus = loss.value(forward(probe, input, false, nullptr));
    probe.nudge_param(k, h);
    double numeric = (plus - minus) / (2.0 * h);
    double a = flat[static_cast<std::size_t>(k)];
    double rel = std::abs(a - numeric) /
                 std::max({std::abs(a), std::abs(numeric), 1e-12});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

void save_net(const DenseNet& net, std::ostream& out) {
  out << "xser-net v1\n";
  out << "layers " << net.num_layers() << "\n";
  for (int i = 0; i < net.num_layers(); ++i) {
    const DenseLayer& layer = net.layers()[static_cast<std::size_t>(i)];
    out << "layer " << i << " in " << layer.in_dim() << " out "
        << layer.out_dim() << " act " << activation_name(layer.activation)
        << "\n";
    out << "w";
    for (int r = 0; r < layer.weights.rows(); ++r)
      for (int c = 0; c < layer.weights.cols(); ++c)
        out << " " << format_exact(layer.weights(r, c));
    out << "\nb";
    for (int k = 0; k < layer.biases.size(); ++k)
      out << " " << format_exact(layer.biases[k]);
    out << "\n";
  }
  out << "dropout_rate " << format_exact(net.dropout_rate()) << "\n";
  out << "dropout_positions";
  for (int p : net.dropout_positions()) out << " " << p;
  out << "\nend\n";
}

namespace {

std::string expect_token(std::istream& in, const char* context) {
  std::string tok;
  if (!(in >> tok)) throw DataError(std::string("truncated checkpoint at ") + context);
  return tok;
}

void expect_literal(std::istream& in, const std::string& want) {
  std::string tok = expect_token(in, want.c_str());
  if (tok != want)
    throw DataError("checkpoint: expected '" + want + "', got '" + tok + "'");
}

}  // namespace

DenseNet load_net(std::istream& in) {
  expect_literal(in, "xser-net");
  std::string version = expect_token(in, "version");
  if (version != "v1") throw DataError("unsupported checkpoint version " + version);
  expect_literal(in, "layers");
  int n_layers = 0;
  in >> n_layers;
  if (!in || n_layers < 1) throw DataError("checkpoint: bad layer count");
  std::vector<DenseLayer> layers;
  for (int i = 0; i < n_layers; ++i) {
    expect_literal(in, "layer");
    int idx, in_dim, out_dim;
    in >> idx;
    expect_literal(in, "in");
    in >> in_dim;
    expect_literal(in, "out");
    in >> out_dim;
    expect_literal(in, "act");
    std::string act = expect_token(in, "activation");
    if (!in || idx != i || in_dim < 1 || out_dim < 1)
      throw DataError("checkpoint: bad layer header at layer " + std::to_string(i));
    DenseLayer layer;
    layer.activation = activation_from_name(act);
    layer.weights = Matrix(out_dim, in_dim);
    layer.biases = Vector(out_dim);
    expect_literal(in, "w");
    for (int r = 0; r < out_dim; ++r)
      for (int c = 0; c < in_dim; ++c)
        layer.weights(r, c) = parse_double(expect_token(in, "weight"), "checkpoint weight");
    expect_literal(in, "b");
    for (int k = 0; k < out_dim; ++k)
      layer.biases[k] = parse_double(expect_token(in, "bias"), "checkpoint bias");
    layers.push_back(std::move(layer));
  }
  expect_literal(in, "dropout_rate");
  double rate = parse_double(expect_token(in, "dropout_rate"), "dropout rate");
  expect_literal(in, "dropout_positions");
  std::set<int> positions;
  std::string tok;
  while (in >> tok && tok != "end") {
    positions.insert(static_cast<int>(parse_double(tok, "dropout position")));
  }
  if (tok != "end") throw DataError("checkpoint: missing end marker");
  return DenseNet(std::move(layers), rate, std::move(positions));
}

void save_net(const DenseNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_net(net, out);
  if (!out) throw DataError("write failed: " + path);
}

DenseNet load_net_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  return load_net(in);
}

}  // namespace xser
