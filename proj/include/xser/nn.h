// xser/nn.h

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

// Dense-network substrate: fully connected layers, inverted dropout,
// reverse-mode gradients, RMSProp updates, and a finite-difference
// gradient checker. Everything is double precision and seed-deterministic.

#ifndef XSER_NN_H_
#define XSER_NN_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "xser/common.h"

namespace xser {

enum class Activation { kRelu, kSigmoid, kLinear, kSoftmax };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct DenseLayer {
  Matrix weights;  // out_dim x in_dim
  Vector biases;   // out_dim
  Activation activation = Activation::kLinear;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

// Ordered stack of dense layers with inverted dropout after the activation
// of each layer listed in dropout_positions. Parameter mutations go through
// the mutating methods so the revision counter can invalidate stale tapes.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::vector<DenseLayer> layers, double dropout_rate,
           std::set<int> dropout_positions);

  // Glorot-uniform weights, zero biases. dims has one entry per boundary,
  // e.g. {88, 512, 512} builds an 88->512->512 stack of two layers.
  static DenseNet random(const std::vector<int>& dims,
                         const std::vector<Activation>& activations,
                         double dropout_rate,
                         const std::set<int>& dropout_positions, Rng* rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int input_dim() const;
  int output_dim() const;
  double dropout_rate() const { return dropout_rate_; }
  const std::set<int>& dropout_positions() const { return dropout_positions_; }
  bool has_dropout() const {
    return dropout_rate_ > 0.0 && !dropout_positions_.empty();
  }
  std::uint64_t revision() const { return revision_; }

  void set_layer(int i, DenseLayer layer);
  void set_dropout_rate(double rate);
  void set_dropout_positions(std::set<int> positions);

  // Adds the given per-layer deltas to weights and biases. Shapes must
  // mirror the net.
  void apply_deltas(const std::vector<Matrix>& dw, const std::vector<Vector>& db);

  // Direct parameter access for optimizers and the gradient checker.
  double get_param(int flat_index) const;
  void nudge_param(int flat_index, double delta);
  int num_params() const;

  // FNV-1a over all weights and biases; frozen-parameter audits compare this.
  std::uint64_t param_fingerprint() const;

  bool all_params_finite() const;

 private:
  void check_chain() const;
  void bump() { ++revision_; }

  std::vector<DenseLayer> layers_;
  double dropout_rate_ = 0.0;
  std::set<int> dropout_positions_;
  std::uint64_t revision_ = 0;
};

// Cached intermediates from one forward pass. backward() accepts a tape only
// if it came from a training-mode forward on the same net object at the same
// revision, so the dropout masks applied backward are the masks sampled
// forward.
struct GradTape {
  const DenseNet* net = nullptr;
  std::uint64_t revision = 0;
  bool training = false;
  Vector input;
  std::vector<Vector> pre_acts;    // z_i, per layer
  std::vector<Vector> activations; // act(z_i), before dropout
  std::vector<Vector> masks;       // mask * 1/(1-rate); empty when no dropout
};

struct LayerGrads {
  Matrix dw;
  Vector db;
};

struct Gradients {
  std::vector<LayerGrads> layers;

  static Gradients zeros_like(const DenseNet& net);
  void accumulate(const Gradients& other);
  void scale(double s);
  bool finite() const;
};

// Evaluates the net. With training=true, dropout masks are sampled from rng
// with keep probability (1 - dropout_rate) and kept activations are scaled
// by 1/(1 - dropout_rate); with training=false no masking happens. A tape is
// recorded if tape != nullptr.
Vector forward(const DenseNet& net, const Vector& input, bool training,
               Rng* rng, GradTape* tape = nullptr);

// Reverse pass. output_grad is dLoss/dOutput. Fills *param_grads (if given)
// and returns dLoss/dInput for chaining through composed networks.
Vector backward(const DenseNet& net, const GradTape& tape,
                const Vector& output_grad, Gradients* param_grads);

struct RmsPropConfig {
  double learning_rate = 1e-4;
  double decay = 0.9;
  double epsilon = 1e-8;
};

// One flat-parameter step: cache = decay*cache + (1-decay)*grad^2,
// param -= lr * grad / (sqrt(cache) + eps). Throws NumericError on any
// non-finite gradient entry; params and cache are untouched in that case.
void rmsprop_step(Eigen::Ref<Eigen::VectorXd> params,
                  const Eigen::Ref<const Eigen::VectorXd>& grads,
                  Eigen::Ref<Eigen::VectorXd> cache, const RmsPropConfig& cfg);

// RMSProp state shaped like one DenseNet.
class RmsProp {
 public:
  RmsProp(const DenseNet& net, const RmsPropConfig& cfg);

  void step(DenseNet* net, const Gradients& grads);

  const RmsPropConfig& config() const { return cfg_; }
  const std::vector<LayerGrads>& cache() const { return cache_; }

 private:
  RmsPropConfig cfg_;
  std::vector<LayerGrads> cache_;  // running mean of squared gradients
};

// Scalar loss over the net output, with its analytic gradient.
struct ScalarLoss {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
};

// Max over parameters of |analytic - central difference| /
// max(|analytic|, |numeric|, 1e-12). Requires dropout disabled.
double grad_check(const DenseNet& net, const ScalarLoss& loss,
                  const Vector& input, double h);

// Checkpoint format: versioned structured text with hexfloat parameters so
// round-trips are bit exact. Layout documented in docs/file-formats.md.
void save_net(const DenseNet& net, std::ostream& out);
DenseNet load_net(std::istream& in);
void save_net(const DenseNet& net, const std::string& path);
DenseNet load_net_file(const std::string& path);

}  // namespace xser

#endif  // XSER_NN_H_
