// xser/corpus.h

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

// Data model and ingestion: corpora of utterances with per-segment feature
// vectors, the categorical-emotion -> binary-valence registry, per-dimension
// standardization, and a synthetic multi-corpus generator for desk-scale
// experiments. Feature-file format documented in docs/file-formats.md.

#ifndef XSER_CORPUS_H_
#define XSER_CORPUS_H_

#include <optional>
#include <string>
#include <vector>

#include "xser/common.h"

namespace xser {

enum class Valence { kNegative, kPositive };

inline const char* valence_name(Valence v) {
  return v == Valence::kPositive ? "Positive" : "Negative";
}

struct SegmentFeature {
  Vector values;
  int segment_index = 0;
};

struct Utterance {
  std::string id;
  std::string speaker_id;
  std::string corpus_id;
  std::vector<SegmentFeature> segments;
  std::string emotion;
  Valence valence = Valence::kNegative;
};

struct Corpus {
  std::string id;
  std::string language;
  std::vector<Utterance> utterances;
  int feature_dim = 0;

  std::vector<std::string> speakers() const;  // distinct, sorted
  int total_segments() const;
};

// Categorical emotion -> binary valence for the four registered corpora
// (EMO-DB, SAVEE, EMOVO, URDU). Corpus ids match case-insensitively with
// '-'/'_' ignored; emotions match case-insensitively and trimmed. Synthetic
// corpora may use the literal labels "Positive"/"Negative" regardless of
// corpus id. Unknown (corpus, emotion) pairs raise DataError.
Valence map_valence(const std::string& corpus_id, const std::string& emotion);

struct LoadOptions {
  int expected_feature_dim = 0;  // 0 = take from the header
  std::string language;          // the CSV schema does not carry language
};

Corpus load_corpus(const std::string& path, const LoadOptions& options = {});
void write_corpus(const Corpus& corpus, const std::string& path);

// Per-dimension z-scoring. Population standard deviation, floored at 1e-8.
// fit() records a fingerprint of the exact segments it saw so fold protocols
// can audit that no test data leaked into it.
class Standardizer {
 public:
  void fit(const std::vector<Vector>& train_segments);
  Vector apply(const Vector& x) const;
  bool fitted() const { return fitted_; }
  std::uint64_t fit_fingerprint() const { return fit_fingerprint_; }
  const Vector& mean() const { return mean_; }
  const Vector& std_dev() const { return std_; }

 private:
  Vector mean_;
  Vector std_;
  bool fitted_ = false;
  std::uint64_t fit_fingerprint_ = 0;
};

// --- Synthetic corpora -----------------------------------------------------

// Class-conditional Gaussian: x = mean + factors * z + diag_std .* eps, with
// z ~ N(0, I_rank). factors (dim x rank) are drawn once from the spec-level
// seed so every corpus generated from one spec shares its class structure.
struct ClassSpec {
  Vector mean;
  Vector diag_variance;  // entries must be >= 0
  int factor_rank = 0;
  double factor_scale = 1.0;
};

struct CorpusShift {
  Vector scale;   // per-dimension multiplier
  Vector offset;  // per-dimension additive shift
};

struct SyntheticCorpusSpec {
  std::string id;
  std::string language;
  int n_speakers = 0;
  int utterances_per_speaker = 0;
  int segments_per_utterance = 0;
  CorpusShift shift;
  double speaker_sigma = 0.0;
  double positive_fraction = 0.5;
};

struct SyntheticSpec {
  int feature_dim = 88;
  ClassSpec negative;
  ClassSpec positive;
  std::vector<SyntheticCorpusSpec> corpora;
};

SyntheticSpec load_synthetic_spec(const std::string& path);

// Deterministic given (spec, seed). corpus_index selects one entry of
// spec.corpora; factor matrices derive from the spec-level stream so all
// corpora share class structure while shifts and speakers differ.
Corpus generate_synthetic_corpus(const SyntheticSpec& spec, int corpus_index,
                                 std::uint64_t seed);

}  // namespace xser

#endif  // XSER_CORPUS_H_
