// xser/autoencoder.h

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

// Source/target autoencoders trained by mean-squared-error reconstruction.
// The encoder output is the latent code handed to the classifier; adversarial
// adaptation later retrains the source encoder in place.

#ifndef XSER_AUTOENCODER_H_
#define XSER_AUTOENCODER_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "xser/nn.h"

namespace xser {

enum class DomainTag { kSource, kTarget };

struct LatentCode {
  Vector values;
  DomainTag domain_tag = DomainTag::kSource;
};

struct AutoencoderConfig {
  int feature_dim = 88;
  int hidden_dim = 512;
  int latent_dim = 512;
  double dropout_rate = 0.5;
};

struct Autoencoder {
  DenseNet encoder;  // feature_dim -> hidden -> latent
  DenseNet decoder;  // latent -> hidden -> feature_dim (mirror of encoder)
  int feature_dim = 0;
  int latent_dim = 0;
  DomainTag domain = DomainTag::kSource;
};

// Two FC layers each side: ReLU hidden with dropout after it, linear output.
Autoencoder make_autoencoder(const AutoencoderConfig& cfg, DomainTag domain,
                             Rng* rng);

// Deterministic (dropout off). Throws ShapeError on dimension mismatch.
LatentCode encode(const Autoencoder& ae, const Vector& x);

Vector reconstruct(const Autoencoder& ae, const Vector& x);

// Mean over the batch of the per-sample mean squared error between x and
// decode(encode(x)), measured with dropout off.
double reconstruction_loss(const Autoencoder& ae,
                           const std::vector<Vector>& batch);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  RmsPropConfig optimizer;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  double initial_loss = 0.0;           // before any update
  std::vector<double> epoch_losses;    // full-train-set loss after each epoch
};

// Minibatch RMSProp on encoder+decoder jointly. Aborts with NumericError
// (naming epoch and batch index) if a batch loss goes non-finite.
TrainHistory train_autoencoder(Autoencoder* ae, const std::vector<Vector>& data,
                               const TrainConfig& cfg);

// Checkpoint: dims plus the two nets, bit-exact round trip.
void save_autoencoder(const Autoencoder& ae, std::ostream& out);
Autoencoder load_autoencoder(std::istream& in);
void save_autoencoder(const Autoencoder& ae, const std::string& path);
Autoencoder load_autoencoder_file(const std::string& path);

}  // namespace xser

#endif  // XSER_AUTOENCODER_H_
