// xser/adversarial.h

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

// Discriminator plus the adversarial adaptation loop: the source encoder is
// updated to make source latents indistinguishable from target latents while
// the target encoder and both decoders stay frozen. Target labels are never
// an input anywhere in this module.

#ifndef XSER_ADVERSARIAL_H_
#define XSER_ADVERSARIAL_H_

#include <string>
#include <vector>

#include "xser/autoencoder.h"
#include "xser/nn.h"

namespace xser {

// D(latent) is the probability that the latent came from the TARGET domain
// ("real"). A scalar sigmoid output; equivalent to a two-way softmax.
struct Discriminator {
  DenseNet net;  // latent -> hidden1 -> hidden2 -> 1 (sigmoid)
};

struct DiscriminatorConfig {
  int latent_dim = 512;
  int hidden1 = 512;
  int hidden2 = 256;
  double dropout_rate = 0.5;
};

Discriminator make_discriminator(const DiscriminatorConfig& cfg, Rng* rng);

// D forward with dropout off.
double discriminate(const Discriminator& d, const Vector& latent);

// Binary cross-entropy: -[mean log D(f_t) + mean log(1 - D(f_s))], with
// probabilities clamped to [1e-7, 1 - 1e-7] before the logs. Minimized by
// D(f_t) -> 1 and D(f_s) -> 0.
double discriminator_loss(const std::vector<double>& d_on_source,
                          const std::vector<double>& d_on_target);

// Saturating generator objective: mean log(1 - D(f_s)); always <= 0 after
// clamping, and decreasing it drives D(f_s) -> 1.
double adversarial_loss(const std::vector<double>& d_on_source);

struct AdaptConfig {
  int d_steps_per_g_step = 1;
  int epochs = 50;
  int batch_size = 32;
  RmsPropConfig optimizer;
  std::uint64_t seed = 0;
  double probe_fraction = 0.25;  // held out per side for the accuracy probe
  // Opt-in non-saturating generator loss (-log D(f_s)); the saturating form
  // above is the default.
  bool nonsaturating = false;
  DiscriminatorConfig discriminator;
};

struct AdaptEpoch {
  double d_loss = 0.0;
  double adv_loss = 0.0;
  double probe_accuracy = 0.0;
};

struct AdaptHistory {
  std::vector<AdaptEpoch> epochs;
  // Discriminator accuracy pinned at 1.0 for more than a quarter of epochs.
  bool collapse_warning = false;

  void write_csv(const std::string& path) const;
};

struct AdaptResult {
  Autoencoder source_ae;  // encoder adapted, decoder untouched
  Discriminator discriminator;
  AdaptHistory history;
};

// Alternating loop: per batch iteration, d_steps_per_g_step discriminator
// updates (encoders frozen, inference mode) then one source-encoder update
// (discriminator frozen, dropout off). Both decoders and the target encoder
// are never modified. Throws NumericError with epoch/batch context when a
// loss goes non-finite.
AdaptResult adapt_source_encoder(const Autoencoder& source_ae,
                                 const Autoencoder& target_ae,
                                 const std::vector<Vector>& source_data,
                                 const std::vector<Vector>& target_data,
                                 const AdaptConfig& cfg);

// Separability measure used for pre/post-adaptation checks: trains a fresh
// discriminator on an 1 - probe_fraction split of the given latents and
// returns its accuracy on the held-out probe portion.
double probe_separability(const std::vector<Vector>& source_latents,
                          const std::vector<Vector>& target_latents,
                          const AdaptConfig& cfg);

}  // namespace xser

#endif  // XSER_ADVERSARIAL_H_
