// src/autoencoder.cc

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

#include "xser/autoencoder.h"

#include <fstream>
#include <numeric>

namespace xser {

Autoencoder make_autoencoder(const AutoencoderConfig& cfg, DomainTag domain,
                             Rng* rng) {
  if (cfg.feature_dim < 1 || cfg.hidden_dim < 1 || cfg.latent_dim < 1)
    throw ConfigError("autoencoder dims must be positive");
  Autoencoder ae;
  ae.encoder = DenseNet::random({cfg.feature_dim, cfg.hidden_dim, cfg.latent_dim},
                                {Activation::kRelu, Activation::kLinear},
                                cfg.dropout_rate, {0}, rng);
  ae.decoder = DenseNet::random({cfg.latent_dim, cfg.hidden_dim, cfg.feature_dim},
                                {Activation::kRelu, Activation::kLinear},
                                cfg.dropout_rate, {0}, rng);
  ae.feature_dim = cfg.feature_dim;
  ae.latent_dim = cfg.latent_dim;
  ae.domain = domain;
  return ae;
}

LatentCode encode(const Autoencoder& ae, const Vector& x) {
  if (x.size() != ae.feature_dim)
    throw ShapeError("encode: input length " + std::to_string(x.size()) +
                     " does not match feature dim " +
                     std::to_string(ae.feature_dim));
  return {forward(ae.encoder, x, /*training=*/false, nullptr), ae.domain};
}

Vector reconstruct(const Autoencoder& ae, const Vector& x) {
  return forward(ae.decoder, encode(ae, x).values, /*training=*/false, nullptr);
}

double reconstruction_loss(const Autoencoder& ae,
                           const std::vector<Vector>& batch) {
  if (batch.empty()) throw DataError("reconstruction_loss: empty batch");
  double total = 0.0;
  for (const Vector& x : batch) {
    Vector diff = reconstruct(ae, x) - x;
    total += diff.squaredNorm() / static_cast<double>(x.size());
  }
  return total / static_cast<double>(batch.size());
}

TrainHistory train_autoencoder(Autoencoder* ae, const std::vector<Vector>& data,
                               const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be positive");
  if (static_cast<int>(data.size()) < cfg.batch_size)
    throw DataError("training data smaller than one batch");

  Rng rng(cfg.seed);
  Rng dropout_rng = rng.spawn(1);
  RmsProp enc_opt(ae->encoder, cfg.optimizer);
  RmsProp dec_opt(ae->decoder, cfg.optimizer);

  TrainHistory history;
  history.initial_loss = reconstruction_loss(*ae, data);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  double inv_dim = 1.0 / static_cast<double>(ae->feature_dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(&order);
    std::size_t n_batches = data.size() / static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t b = 0; b < n_batches; ++b) {
      Gradients enc_grads = Gradients::zeros_like(ae->encoder);
      Gradients dec_grads = Gradients::zeros_like(ae->decoder);
      double batch_loss = 0.0;
      for (int k = 0; k < cfg.batch_size; ++k) {
        const Vector& x = data[order[b * static_cast<std::size_t>(cfg.batch_size) +
                                      static_cast<std::size_t>(k)]];
        GradTape enc_tape, dec_tape;
        Vector z = forward(ae->encoder, x, true, &dropout_rng, &enc_tape);
        Vector xhat = forward(ae->decoder, z, true, &dropout_rng, &dec_tape);
        Vector diff = xhat - x;
        batch_loss += diff.squaredNorm() * inv_dim;
        Vector out_grad = 2.0 * inv_dim * diff;
        Vector z_grad = backward(ae->decoder, dec_tape, out_grad, &dec_grads);
        backward(ae->encoder, enc_tape, z_grad, &enc_grads);
      }
      batch_loss /= static_cast<double>(cfg.batch_size);
      if (!std::isfinite(batch_loss))
        throw NumericError("autoencoder training diverged at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b));
      double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
      enc_grads.scale(inv_batch);
      dec_grads.scale(inv_batch);
      enc_opt.step(&ae->encoder, enc_grads);
      dec_opt.step(&ae->decoder, dec_grads);
    }
    history.epoch_losses.push_back(reconstruction_loss(*ae, data));
  }
  return history;
}

void save_autoencoder(const Autoencoder& ae, std::ostream& out) {
  out << "xser-autoencoder v1\n";
  out << "feature_dim " << ae.feature_dim << " latent_dim " << ae.latent_dim
      << " domain " << (ae.domain == DomainTag::kSource ? "source" : "target")
      << "\n";
  save_net(ae.encoder, out);
  save_net(ae.decoder, out);
}

Autoencoder load_autoencoder(std::istream& in) {
  std::string tok;
  in >> tok;
  if (tok != "xser-autoencoder")
    throw DataError("not an autoencoder checkpoint");
  in >> tok;
  if (tok != "v1") throw DataError("unsupported autoencoder version " + tok);
  Autoencoder ae;
  in >> tok;
  if (tok != "feature_dim") throw DataError("autoencoder checkpoint malformed");
  in >> ae.feature_dim;
  in >> tok;
  if (tok != "latent_dim") throw DataError("autoencoder checkpoint malformed");
  in >> ae.latent_dim;
  in >> tok;
  if (tok != "domain") throw DataError("autoencoder checkpoint malformed");
  in >> tok;
  ae.domain = tok == "target" ? DomainTag::kTarget : DomainTag::kSource;
  ae.encoder = load_net(in);
  ae.decoder = load_net(in);
  if (ae.encoder.input_dim() != ae.feature_dim ||
      ae.encoder.output_dim() != ae.latent_dim ||
      ae.decoder.input_dim() != ae.latent_dim ||
      ae.decoder.output_dim() != ae.feature_dim)
    throw DataError("autoencoder checkpoint dims are inconsistent");
  return ae;
}

void save_autoencoder(const Autoencoder& ae, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_autoencoder(ae, out);
  if (!out) throw DataError("write failed: " + path);
}

Autoencoder load_autoencoder_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  return load_autoencoder(in);
}

}  // namespace xser
