// xser/eval.h

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

// Experiment harness: speaker-independent fold plans, UAR, segment-posterior
// aggregation, and the three experiment designs (within-corpus baseline,
// cross-lingual pairwise, multilingual one-language-out) in three feature
// conditions (raw features, latent codes, fused).

#ifndef XSER_EVAL_H_
#define XSER_EVAL_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xser/adversarial.h"
#include "xser/autoencoder.h"
#include "xser/corpus.h"
#include "xser/svm.h"

namespace xser {

enum class FeatureCondition { kRaw, kLatent, kFused, kAll };

std::string condition_name(FeatureCondition c);
FeatureCondition condition_from_name(const std::string& name);

struct FoldPlan {
  enum class Scheme { kLeaveOneSpeakerOut, kGroupedKFold };
  struct Fold {
    std::vector<std::string> train_speakers;
    std::vector<std::string> test_speakers;
  };
  Scheme scheme = Scheme::kLeaveOneSpeakerOut;
  std::vector<Fold> folds;
};

// One fold per speaker. Requires at least two distinct speakers.
FoldPlan make_loso_plan(const Corpus& corpus);

// Speakers shuffled by seed and partitioned into k near-equal disjoint test
// groups (the URDU-style 30/8 protocol becomes a 5-way speaker partition).
FoldPlan make_grouped_kfold_plan(const Corpus& corpus, int k, std::uint64_t seed);

// Throws if any fold has train/test overlap or test sets overlap across
// folds.
void check_speaker_disjoint(const FoldPlan& plan);

// Access-audited label store. Labels of target-role utterances are guarded:
// reading one before begin_scoring() throws LeakageError, and every access is
// logged so tests can assert the audit trail.
class LabelStore {
 public:
  struct Access {
    std::string key;
    bool guarded = false;
    bool during_scoring = false;
  };

  void add(const std::string& key, Valence valence, bool guarded);
  Valence get(const std::string& key);
  void begin_scoring() { scoring_ = true; }
  bool scoring() const { return scoring_; }
  const std::vector<Access>& audit_log() const { return log_; }
  int guarded_reads_before_scoring() const;

 private:
  std::map<std::string, std::pair<Valence, bool>> labels_;
  bool scoring_ = false;
  std::vector<Access> log_;
};

// Mean over classes of per-class recall. Binary task: both valence classes
// must appear in the truth vector.
double uar(const std::vector<Valence>& truth, const std::vector<Valence>& predicted);

// Mean of the segment posteriors; Positive iff the mean exceeds 0.5 (a tie at
// exactly 0.5 resolves to Negative).
std::pair<double, Valence> aggregate_utterance(
    const std::vector<double>& segment_posteriors);

struct FoldResult {
  int fold_index = 0;
  std::vector<std::string> test_speakers;
  int n_test_utterances = 0;
  double uar = 0.0;
  double recall_negative = 0.0;
  double recall_positive = 0.0;
  // Confusion counts; "positive" is positive valence.
  long tn = 0, fp = 0, fn = 0, tp = 0;
  // (utterance key, aggregated posterior); not serialized, used by tests.
  std::vector<std::pair<std::string, double>> utterance_posteriors;
};

struct EvalReport {
  std::string source_ids;  // '+'-joined corpus ids
  std::string target_id;
  std::string scheme;  // "loso", "grouped<k>", or "crosslingual"
  FeatureCondition condition = FeatureCondition::kRaw;
  std::vector<FoldResult> folds;
  double mean_uar = 0.0;
  long tn = 0, fp = 0, fn = 0, tp = 0;  // pooled over folds
};

struct EvalConfig {
  std::uint64_t seed = 42;
  AutoencoderConfig autoencoder;  // latent/hidden dims, dropout
  TrainConfig ae_train;
  AdaptConfig adapt;
  SvmTrainConfig svm;
  int folds = 0;  // baseline only: 0 = LOSO, k >= 2 = grouped k-fold
  // Adapt on a disjoint unlabeled half of the target speakers and score only
  // the other half, instead of the default transductive use of all target
  // features.
  bool inductive_split = false;
};

// Within-corpus speaker-independent baseline on raw features.
std::vector<EvalReport> run_baseline(const Corpus& corpus, const EvalConfig& cfg,
                                     LabelStore* store = nullptr);

// Source trains, target is scored; target labels are read only after
// begin_scoring(). kAll evaluates raw, latent, and fused off one adaptation.
std::vector<EvalReport> run_cross_lingual(const Corpus& source,
                                          const Corpus& target,
                                          FeatureCondition condition,
                                          const EvalConfig& cfg,
                                          LabelStore* store = nullptr);

// Union of all non-held-out corpora as source, held-out corpus as target.
// With two corpora this degenerates to run_cross_lingual exactly.
std::vector<EvalReport> run_multilingual(const std::vector<Corpus>& all_corpora,
                                         const std::string& held_out_id,
                                         FeatureCondition condition,
                                         const EvalConfig& cfg,
                                         LabelStore* store = nullptr);

// Speaker-disjoint split helper (tests and the same-corpus-both-roles check).
std::pair<Corpus, Corpus> split_corpus_by_speakers(const Corpus& corpus,
                                                   double first_fraction,
                                                   std::uint64_t seed);

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path);
void write_reports_table(const std::vector<EvalReport>& reports,
                         const std::string& path);

}  // namespace xser

#endif  // XSER_EVAL_H_
