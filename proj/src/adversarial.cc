// src/adversarial.cc

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

#include "xser/adversarial.h"

#include <cmath>
#include <fstream>
#include <numeric>

namespace xser {

namespace {

constexpr double kProbEps = 1e-7;

double clamp_prob(double p) {
  return std::min(1.0 - kProbEps, std::max(kProbEps, p));
}

// Deals out shuffled minibatch indices, reshuffling on exhaustion.
class BatchCursor {
 public:
  BatchCursor(std::vector<std::size_t> indices, Rng rng)
      : indices_(std::move(indices)), rng_(rng) {
    rng_.shuffle(&indices_);
  }

  std::vector<std::size_t> next(int batch_size) {
    if (static_cast<std::size_t>(batch_size) > indices_.size())
      throw DataError("batch size exceeds available pool");
    if (pos_ + static_cast<std::size_t>(batch_size) > indices_.size()) {
      rng_.shuffle(&indices_);
      pos_ = 0;
    }
    std::vector<std::size_t> batch(indices_.begin() + static_cast<long>(pos_),
                                   indices_.begin() + static_cast<long>(pos_) +
                                       batch_size);
    pos_ += static_cast<std::size_t>(batch_size);
    return batch;
  }

 private:
  std::vector<std::size_t> indices_;
  std::size_t pos_ = 0;
  Rng rng_;
};

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// One discriminator update on the given latent batches. Returns the loss.
double discriminator_step(Discriminator* d, RmsProp* opt,
                          const std::vector<Vector>& source_latents,
                          const std::vector<Vector>& target_latents,
                          Rng* dropout_rng) {
  std::vector<double> p_s, p_t;
  Gradients grads = Gradients::zeros_like(d->net);
  double inv_ns = 1.0 / static_cast<double>(source_latents.size());
  double inv_nt = 1.0 / static_cast<double>(target_latents.size());
  for (const Vector& f : target_latents) {
    GradTape tape;
    double p = clamp_prob(forward(d->net, f, true, dropout_rng, &tape)[0]);
    p_t.push_back(p);
    Vector g(1);
    g[0] = -inv_nt / p;
    backward(d->net, tape, g, &grads);
  }
  for (const Vector& f : source_latents) {
    GradTape tape;
    double p = clamp_prob(forward(d->net, f, true, dropout_rng, &tape)[0]);
    p_s.push_back(p);
    Vector g(1);
    g[0] = inv_ns / (1.0 - p);
    backward(d->net, tape, g, &grads);
  }
  opt->step(&d->net, grads);
  return discriminator_loss(p_s, p_t);
}

double probe_accuracy(const Discriminator& d,
                      const std::vector<Vector>& source_probe,
                      const std::vector<Vector>& target_probe) {
  if (source_probe.empty() && target_probe.empty()) return 0.0;
  int correct = 0;
  for (const Vector& f : target_probe)
    if (discriminate(d, f) > 0.5) ++correct;
  for (const Vector& f : source_probe)
    if (discriminate(d, f) <= 0.5) ++correct;
  return static_cast<double>(correct) /
         static_cast<double>(source_probe.size() + target_probe.size());
}

}  // namespace

Discriminator make_discriminator(const DiscriminatorConfig& cfg, Rng* rng) {
  if (cfg.latent_dim < 1 || cfg.hidden1 < 1 || cfg.hidden2 < 1)
    throw ConfigError("discriminator dims must be positive");
  Discriminator d;
  d.net = DenseNet::random(
      {cfg.latent_dim, cfg.hidden1, cfg.hidden2, 1},
      {Activation::kRelu, Activation::kRelu, Activation::kSigmoid},
      cfg.dropout_rate, {0, 1}, rng);
  return d;
}

double discriminate(const Discriminator& d, const Vector& latent) {
  return forward(d.net, latent, /*training=*/false, nullptr)[0];
}

double discriminator_loss(const std::vector<double>& d_on_source,
                          const std::vector<double>& d_on_target) {
  if (d_on_source.empty()) throw DataError("discriminator_loss: empty source batch");
  if (d_on_target.empty()) throw DataError("discriminator_loss: empty target batch");
  double target_term = 0.0;
  for (double p : d_on_target) target_term += std::log(clamp_prob(p));
  target_term /= static_cast<double>(d_on_target.size());
  double source_term = 0.0;
  for (double p : d_on_source) source_term += std::log(1.0 - clamp_prob(p));
  source_term /= static_cast<double>(d_on_source.size());
  return -(target_term + source_term);
}

double adversarial_loss(const std::vector<double>& d_on_source) {
  if (d_on_source.empty()) throw DataError("adversarial_loss: empty batch");
  double total = 0.0;
  for (double p : d_on_source) total += std::log(1.0 - clamp_prob(p));
  return total / static_cast<double>(d_on_source.size());
}

AdaptResult adapt_source_encoder(const Autoencoder& source_ae,
                                 const Autoencoder& target_ae,
                                 const std::vector<Vector>& source_data,
                                 const std::vector<Vector>& target_data,
                                 const AdaptConfig& cfg) {
  if (source_ae.latent_dim != target_ae.latent_dim)
    throw ShapeError("adapt: latent dims of the two autoencoders differ");
  if (cfg.epochs < 0) throw ConfigError("adapt: epochs must be >= 0");
  if (cfg.d_steps_per_g_step < 1)
    throw ConfigError("adapt: d_steps_per_g_step must be positive");
  if (cfg.batch_size < 1) throw ConfigError("adapt: batch_size must be positive");

  Rng root(cfg.seed);
  Rng init_rng = root.spawn(0);
  Rng split_rng = root.spawn(1);
  Rng dropout_rng = root.spawn(2);

  AdaptResult result;
  result.source_ae = source_ae;
  DiscriminatorConfig d_cfg = cfg.discriminator;
  d_cfg.latent_dim = source_ae.latent_dim;
  result.discriminator = make_discriminator(d_cfg, &init_rng);
  if (cfg.epochs == 0) return result;

  // Probe split: a held-out slice per side, scored each epoch with the
  // co-trained discriminator.
  auto split = [&](std::size_t n) {
    std::vector<std::size_t> idx = iota_indices(n);
    split_rng.shuffle(&idx);
    std::size_t n_probe =
        std::min(n > 1 ? n - 1 : std::size_t{0},
                 static_cast<std::size_t>(std::floor(cfg.probe_fraction *
                                                     static_cast<double>(n))));
    return std::pair{std::vector<std::size_t>(idx.begin(),
                                              idx.begin() + static_cast<long>(n_probe)),
                     std::vector<std::size_t>(idx.begin() + static_cast<long>(n_probe),
                                              idx.end())};
  };
  auto [s_probe_idx, s_pool_idx] = split(source_data.size());
  auto [t_probe_idx, t_pool_idx] = split(target_data.size());
  if (s_pool_idx.size() < static_cast<std::size_t>(cfg.batch_size) ||
      t_pool_idx.size() < static_cast<std::size_t>(cfg.batch_size))
    throw DataError("adapt: not enough data for one batch after probe split");

  BatchCursor s_cursor(s_pool_idx, root.spawn(3));
  BatchCursor t_cursor(t_pool_idx, root.spawn(4));

  RmsProp d_opt(result.discriminator.net, cfg.optimizer);
  RmsProp g_opt(result.source_ae.encoder, cfg.optimizer);

  DenseNet& enc = result.source_ae.encoder;
  DenseNet& d_net = result.discriminator.net;
  const double d_dropout = d_net.dropout_rate();

  std::size_t n_iter =
      std::min(s_pool_idx.size(), t_pool_idx.size()) /
      static_cast<std::size_t>(cfg.batch_size);
  if (n_iter == 0) n_iter = 1;

  int pinned_epochs = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_d_loss = 0.0, epoch_adv_loss = 0.0;
    for (std::size_t it = 0; it < n_iter; ++it) {
      try {
        for (int k = 0; k < cfg.d_steps_per_g_step; ++k) {
          std::vector<Vector> fs, ft;
          for (std::size_t i : s_cursor.next(cfg.batch_size))
            fs.push_back(forward(enc, source_data[i], false, nullptr));
          for (std::size_t i : t_cursor.next(cfg.batch_size))
            ft.push_back(forward(target_ae.encoder, target_data[i], false, nullptr));
          double loss = discriminator_step(&result.discriminator, &d_opt, fs, ft,
                                           &dropout_rng);
          if (k == 0) epoch_d_loss += loss;
        }

        // Source-encoder update: D frozen, so it runs without dropout; its
        // tape is still training-mode, which keeps backward() valid.
        d_net.set_dropout_rate(0.0);
        Gradients enc_grads = Gradients::zeros_like(enc);
        std::vector<double> p_s;
        double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
        for (std::size_t i : s_cursor.next(cfg.batch_size)) {
          GradTape enc_tape, d_tape;
          Vector z = forward(enc, source_data[i], true, &dropout_rng, &enc_tape);
          double p = clamp_prob(forward(d_net, z, true, nullptr, &d_tape)[0]);
          p_s.push_back(p);
          Vector g(1);
          g[0] = cfg.nonsaturating ? -inv_b / p : -inv_b / (1.0 - p);
          Vector z_grad = backward(d_net, d_tape, g, nullptr);
          backward(enc, enc_tape, z_grad, &enc_grads);
        }
        d_net.set_dropout_rate(d_dropout);
        g_opt.step(&enc, enc_grads);
        epoch_adv_loss += adversarial_loss(p_s);
      } catch (const NumericError& e) {
        throw NumericError("adaptation diverged at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(it) + ": " + e.what());
      }
    }

    AdaptEpoch entry;
    entry.d_loss = epoch_d_loss / static_cast<double>(n_iter);
    entry.adv_loss = epoch_adv_loss / static_cast<double>(n_iter);
    std::vector<Vector> s_probe, t_probe;
    for (std::size_t i : s_probe_idx)
      s_probe.push_back(forward(enc, source_data[i], false, nullptr));
    for (std::size_t i : t_probe_idx)
      t_probe.push_back(forward(target_ae.encoder, target_data[i], false, nullptr));
    entry.probe_accuracy = probe_accuracy(result.discriminator, s_probe, t_probe);
    if (entry.probe_accuracy >= 1.0 - 1e-9) ++pinned_epochs;
    result.history.epochs.push_back(entry);
  }
  result.history.collapse_warning =
      pinned_epochs * 4 > cfg.epochs;  // pinned at 1.0 for > 25% of epochs
  return result;
}

double probe_separability(const std::vector<Vector>& source_latents,
                          const std::vector<Vector>& target_latents,
                          const AdaptConfig& cfg) {
  if (source_latents.empty() || target_latents.empty())
    throw DataError("probe_separability: empty latent set");
  if (source_latents[0].size() != target_latents[0].size())
    throw ShapeError("probe_separability: latent dims differ");

  Rng root(cfg.seed);
  Rng init_rng = root.spawn(10);
  Rng split_rng = root.spawn(11);
  Rng dropout_rng = root.spawn(12);

  auto split = [&](const std::vector<Vector>& data) {
    std::vector<std::size_t> idx = iota_indices(data.size());
    split_rng.shuffle(&idx);
    std::size_t n_probe = std::max(
        std::size_t{1}, static_cast<std::size_t>(std::floor(
                            cfg.probe_fraction * static_cast<double>(data.size()))));
    if (n_probe >= data.size()) n_probe = data.size() - 1;
    std::vector<Vector> probe, train;
    for (std::size_t k = 0; k < idx.size(); ++k)
      (k < n_probe ? probe : train).push_back(data[idx[k]]);
    return std::pair{probe, train};
  };
  auto [s_probe, s_train] = split(source_latents);
  auto [t_probe, t_train] = split(target_latents);

  DiscriminatorConfig d_cfg = cfg.discriminator;
  d_cfg.latent_dim = static_cast<int>(source_latents[0].size());
  Discriminator d = make_discriminator(d_cfg, &init_rng);
  RmsProp opt(d.net, cfg.optimizer);

  int batch = std::min({static_cast<std::size_t>(cfg.batch_size), s_train.size(),
                        t_train.size()}) > 0
                  ? static_cast<int>(std::min(
                        {static_cast<std::size_t>(cfg.batch_size),
                         s_train.size(), t_train.size()}))
                  : 1;
  BatchCursor s_cursor(iota_indices(s_train.size()), root.spawn(13));
  BatchCursor t_cursor(iota_indices(t_train.size()), root.spawn(14));
  std::size_t n_iter = std::max(std::size_t{1},
                                std::min(s_train.size(), t_train.size()) /
                                    static_cast<std::size_t>(batch));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t it = 0; it < n_iter; ++it) {
      std::vector<Vector> fs, ft;
      for (std::size_t i : s_cursor.next(batch)) fs.push_back(s_train[i]);
      for (std::size_t i : t_cursor.next(batch)) ft.push_back(t_train[i]);
      discriminator_step(&d, &opt, fs, ft, &dropout_rng);
    }
  }
  return probe_accuracy(d, s_probe, t_probe);
}

void AdaptHistory::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "epoch,d_loss,adv_loss,probe_accuracy\n";
  char buf[128];
  for (std::size_t e = 0; e < epochs.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f\n", e, epochs[e].d_loss,
                  epochs[e].adv_loss, epochs[e].probe_accuracy);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace xser
