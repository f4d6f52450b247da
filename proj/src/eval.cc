// src/eval.cc

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

#include "xser/eval.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace xser {

std::string condition_name(FeatureCondition c) {
  switch (c) {
    case FeatureCondition::kRaw: return "raw";
    case FeatureCondition::kLatent: return "latent";
    case FeatureCondition::kFused: return "fused";
    case FeatureCondition::kAll: return "all";
  }
  throw ConfigError("unknown feature condition");
}

FeatureCondition condition_from_name(const std::string& name) {
  if (name == "raw") return FeatureCondition::kRaw;
  if (name == "latent") return FeatureCondition::kLatent;
  if (name == "fused") return FeatureCondition::kFused;
  if (name == "all") return FeatureCondition::kAll;
  throw ConfigError("unknown feature condition: " + name);
}

FoldPlan make_loso_plan(const Corpus& corpus) {
  std::vector<std::string> speakers = corpus.speakers();
  if (speakers.size() < 2)
    throw DataError("corpus '" + corpus.id +
                    "' needs >= 2 distinct speakers for LOSO");
  FoldPlan plan;
  plan.scheme = FoldPlan::Scheme::kLeaveOneSpeakerOut;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    FoldPlan::Fold fold;
    fold.test_speakers.push_back(speakers[i]);
    for (std::size_t j = 0; j < speakers.size(); ++j)
      if (j != i) fold.train_speakers.push_back(speakers[j]);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FoldPlan make_grouped_kfold_plan(const Corpus& corpus, int k, std::uint64_t seed) {
  std::vector<std::string> speakers = corpus.speakers();
  if (k < 2) throw ConfigError("grouped k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > speakers.size())
    throw DataError("grouped k-fold: k exceeds speaker count");
  Rng rng(seed);
  rng.shuffle(&speakers);
  FoldPlan plan;
  plan.scheme = FoldPlan::Scheme::kGroupedKFold;
  plan.folds.resize(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < speakers.size(); ++i)
    plan.folds[i % static_cast<std::size_t>(k)].test_speakers.push_back(speakers[i]);
  for (auto& fold : plan.folds) {
    std::sort(fold.test_speakers.begin(), fold.test_speakers.end());
    std::set<std::string> test_set(fold.test_speakers.begin(),
                                   fold.test_speakers.end());
    for (const auto& s : corpus.speakers())
      if (!test_set.count(s)) fold.train_speakers.push_back(s);
  }
  return plan;
}

void check_speaker_disjoint(const FoldPlan& plan) {
  std::set<std::string> seen_test;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto& fold = plan.folds[f];
    std::set<std::string> train(fold.train_speakers.begin(),
                                fold.train_speakers.end());
    for (const auto& s : fold.test_speakers) {
      if (train.count(s))
        throw DataError("fold " + std::to_string(f) + ": speaker '" + s +
                        "' appears in both train and test");
      if (!seen_test.insert(s).second)
        throw DataError("speaker '" + s +
                        "' appears in test sets of two different folds");
    }
  }
}

void LabelStore::add(const std::string& key, Valence valence, bool guarded) {
  if (!labels_.emplace(key, std::make_pair(valence, guarded)).second)
    throw DataError("duplicate utterance key in label store: " + key);
}

Valence LabelStore::get(const std::string& key) {
  auto it = labels_.find(key);
  if (it == labels_.end())
    throw DataError("unknown utterance key in label store: " + key);
  bool guarded = it->second.second;
  log_.push_back({key, guarded, scoring_});
  if (guarded && !scoring_)
    throw LeakageError("target label '" + key +
                       "' was read before the scoring phase");
  return it->second.first;
}

int LabelStore::guarded_reads_before_scoring() const {
  int n = 0;
  for (const auto& a : log_)
    if (a.guarded && !a.during_scoring) ++n;
  return n;
}

double uar(const std::vector<Valence>& truth,
           const std::vector<Valence>& predicted) {
  if (truth.size() != predicted.size())
    throw ShapeError("uar: label vectors differ in length");
  if (truth.empty()) throw DataError("uar: empty label vectors");
  long pos_total = 0, pos_hit = 0, neg_total = 0, neg_hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Valence::kPositive) {
      ++pos_total;
      if (predicted[i] == Valence::kPositive) ++pos_hit;
    } else {
      ++neg_total;
      if (predicted[i] == Valence::kNegative) ++neg_hit;
    }
  }
  if (pos_total == 0 || neg_total == 0)
    throw DataError("uar: a true class is absent from the truth labels");
  double recall_pos = static_cast<double>(pos_hit) / pos_total;
  double recall_neg = static_cast<double>(neg_hit) / neg_total;
  return 0.5 * (recall_pos + recall_neg);
}

std::pair<double, Valence> aggregate_utterance(
    const std::vector<double>& segment_posteriors) {
  if (segment_posteriors.empty())
    throw DataError("aggregate_utterance: empty posterior list");
  double sum = 0.0;
  for (double p : segment_posteriors) {
    if (!(p > 0.0 && p < 1.0))
      throw DataError("aggregate_utterance: posterior outside (0,1)");
    sum += p;
  }
  double posterior = sum / static_cast<double>(segment_posteriors.size());
  return {posterior,
          posterior > 0.5 ? Valence::kPositive : Valence::kNegative};
}

namespace {

std::string utt_key(const Utterance& u) { return u.corpus_id + "/" + u.id; }
std::string speaker_key(const Utterance& u) {
  return u.corpus_id + "/" + u.speaker_id;
}

struct UttView {
  const Utterance* utt;
  std::string key;      // corpus-qualified utterance id
  std::string speaker;  // corpus-qualified speaker id
};

std::vector<UttView> view_of(const Corpus& corpus) {
  std::vector<UttView> views;
  for (const auto& u : corpus.utterances)
    views.push_back({&u, utt_key(u), speaker_key(u)});
  return views;
}

std::vector<Vector> collect_segments(const std::vector<UttView>& utts) {
  std::vector<Vector> segs;
  for (const auto& v : utts)
    for (const auto& seg : v.utt->segments) segs.push_back(seg.values);
  return segs;
}

std::vector<Vector> apply_all(const Standardizer& std_, const std::vector<Vector>& xs) {
  std::vector<Vector> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(std_.apply(x));
  return out;
}

// Per-segment training matrix with the utterance label replicated over its
// segments; labels come from the store so target labels cannot sneak in.
void labeled_segments(const std::vector<UttView>& utts,
                      const Standardizer& std_, LabelStore* store,
                      std::vector<Vector>* xs, std::vector<int>* ys) {
  for (const auto& v : utts) {
    int y = store->get(v.key) == Valence::kPositive ? 1 : -1;
    for (const auto& seg : v.utt->segments) {
      xs->push_back(std_.apply(seg.values));
      ys->push_back(y);
    }
  }
}

struct Prediction {
  std::string key;
  double posterior;
  Valence predicted;
};

// Segment posteriors -> utterance predictions, no labels touched.
std::vector<Prediction> predict_utterances(
    const std::vector<UttView>& utts, const SvmModel& model,
    const std::function<Vector(const Vector&)>& to_feature) {
  std::vector<Prediction> preds;
  for (const auto& v : utts) {
    std::vector<double> posteriors;
    for (const auto& seg : v.utt->segments)
      posteriors.push_back(predict_proba(model, to_feature(seg.values)));
    auto [posterior, valence] = aggregate_utterance(posteriors);
    preds.push_back({v.key, posterior, valence});
  }
  return preds;
}

FoldResult score_fold(int fold_index, const std::vector<std::string>& test_speakers,
                      const std::vector<Prediction>& preds, LabelStore* store) {
  FoldResult result;
  result.fold_index = fold_index;
  result.test_speakers = test_speakers;
  result.n_test_utterances = static_cast<int>(preds.size());
  std::vector<Valence> truth, predicted;
  for (const auto& p : preds) {
    Valence t = store->get(p.key);
    truth.push_back(t);
    predicted.push_back(p.predicted);
    if (t == Valence::kPositive) {
      (p.predicted == Valence::kPositive ? result.tp : result.fn)++;
    } else {
      (p.predicted == Valence::kNegative ? result.tn : result.fp)++;
    }
    result.utterance_posteriors.emplace_back(p.key, p.posterior);
  }
  result.uar = uar(truth, predicted);
  result.recall_positive =
      result.tp + result.fn > 0
          ? static_cast<double>(result.tp) / (result.tp + result.fn)
          : 0.0;
  result.recall_negative =
      result.tn + result.fp > 0
          ? static_cast<double>(result.tn) / (result.tn + result.fp)
          : 0.0;
  return result;
}

EvalReport assemble_report(const std::string& source_ids,
                           const std::string& target_id,
                           const std::string& scheme, FeatureCondition condition,
                           std::vector<FoldResult> folds) {
  EvalReport report;
  report.source_ids = source_ids;
  report.target_id = target_id;
  report.scheme = scheme;
  report.condition = condition;
  double sum = 0.0;
  for (const auto& f : folds) {
    sum += f.uar;
    report.tn += f.tn;
    report.fp += f.fp;
    report.fn += f.fn;
    report.tp += f.tp;
  }
  report.mean_uar = folds.empty() ? 0.0 : sum / static_cast<double>(folds.size());
  report.folds = std::move(folds);
  return report;
}

// Picks the calibration speaker out of the training speakers; when there is
// only one training speaker, calibration falls back to the training set
// itself.
std::vector<UttView> partition_calibration(std::vector<UttView>* train,
                                           Rng* rng) {
  std::set<std::string> speakers;
  for (const auto& v : *train) speakers.insert(v.speaker);
  if (speakers.size() < 2) return *train;
  std::vector<std::string> sorted(speakers.begin(), speakers.end());
  const std::string& calib_speaker =
      sorted[rng->uniform_int(sorted.size())];
  std::vector<UttView> calib, rest;
  for (const auto& v : *train)
    (v.speaker == calib_speaker ? calib : rest).push_back(v);
  *train = std::move(rest);
  return calib;
}

SvmModel fit_svm(const std::vector<UttView>& train_utts,
                 const std::vector<UttView>& calib_utts,
                 const Standardizer& std_, const SvmTrainConfig& svm_cfg,
                 LabelStore* store) {
  std::vector<Vector> xs;
  std::vector<int> ys;
  labeled_segments(train_utts, std_, store, &xs, &ys);
  SvmModel model = train_smo(xs, ys, svm_cfg);
  std::vector<Vector> cal_xs;
  std::vector<int> cal_ys;
  labeled_segments(calib_utts, std_, store, &cal_xs, &cal_ys);
  return platt_calibrate(std::move(model), cal_xs, cal_ys);
}

// Shared engine for cross-lingual and multilingual runs. Sources are merged
// in the order given; speakers and utterances are corpus-qualified.
std::vector<EvalReport> run_cross_core(const std::vector<const Corpus*>& sources,
                                       const Corpus& target,
                                       FeatureCondition condition,
                                       const EvalConfig& cfg, LabelStore* store) {
  if (sources.empty()) throw DataError("cross-lingual run needs a source corpus");
  for (const Corpus* s : sources) {
    if (s->feature_dim != target.feature_dim)
      throw ShapeError("source corpus '" + s->id + "' feature_dim " +
                       std::to_string(s->feature_dim) + " != target " +
                       std::to_string(target.feature_dim));
    if (s->id == target.id)
      throw DataError("corpus '" + s->id + "' cannot be both source and target");
  }

  LabelStore local_store;
  if (store == nullptr) store = &local_store;
  std::vector<UttView> source_utts;
  std::string source_ids;
  for (const Corpus* s : sources) {
    if (!source_ids.empty()) source_ids += "+";
    source_ids += s->id;
    for (const auto& v : view_of(*s)) {
      store->add(v.key, v.utt->valence, /*guarded=*/false);
      source_utts.push_back(v);
    }
  }
  std::vector<UttView> target_utts = view_of(target);
  for (const auto& v : target_utts)
    store->add(v.key, v.utt->valence, /*guarded=*/true);

  Rng root(cfg.seed);
  Rng calib_rng = root.spawn(1);
  std::vector<UttView> train_utts = source_utts;
  std::vector<UttView> calib_utts = partition_calibration(&train_utts, &calib_rng);

  // Speaker disjointness across the corpus boundary.
  {
    std::set<std::string> train_speakers;
    for (const auto& v : source_utts) train_speakers.insert(v.speaker);
    for (const auto& v : target_utts)
      if (train_speakers.count(v.speaker))
        throw DataError("speaker '" + v.speaker +
                        "' appears in both source and target");
  }

  // Transductive by default: the adaptation sees all unlabeled target
  // features. The inductive flag restricts adaptation to half the target
  // speakers and scores the other half.
  std::vector<UttView> adapt_target_utts = target_utts;
  std::vector<UttView> scored_target_utts = target_utts;
  if (cfg.inductive_split) {
    std::set<std::string> speaker_set;
    for (const auto& v : target_utts) speaker_set.insert(v.speaker);
    std::vector<std::string> speakers(speaker_set.begin(), speaker_set.end());
    if (speakers.size() < 2)
      throw DataError("inductive split needs >= 2 target speakers");
    Rng split_rng = root.spawn(5);
    split_rng.shuffle(&speakers);
    std::set<std::string> adapt_half(speakers.begin(),
                                     speakers.begin() +
                                         static_cast<long>(speakers.size() / 2));
    adapt_target_utts.clear();
    scored_target_utts.clear();
    for (const auto& v : target_utts)
      (adapt_half.count(v.speaker) ? adapt_target_utts : scored_target_utts)
          .push_back(v);
  }

  Standardizer raw_std;
  raw_std.fit(collect_segments(train_utts));

  const bool want_raw =
      condition == FeatureCondition::kRaw || condition == FeatureCondition::kAll;
  const bool want_latent = condition == FeatureCondition::kLatent ||
                           condition == FeatureCondition::kAll;
  const bool want_fused = condition == FeatureCondition::kFused ||
                          condition == FeatureCondition::kAll;

  std::map<std::string, std::vector<Prediction>> predictions;

  if (want_raw) {
    SvmModel model = fit_svm(train_utts, calib_utts, raw_std, cfg.svm, store);
    predictions["raw"] = predict_utterances(
        scored_target_utts, model,
        [&](const Vector& x) { return raw_std.apply(x); });
  }

  Autoencoder adapted_src;
  Autoencoder target_ae;
  if (want_latent || want_fused) {
    AutoencoderConfig ae_cfg = cfg.autoencoder;
    ae_cfg.feature_dim = target.feature_dim;
    Rng src_init = root.spawn(2);
    Rng tgt_init = root.spawn(3);
    Autoencoder source_ae = make_autoencoder(ae_cfg, DomainTag::kSource, &src_init);
    target_ae = make_autoencoder(ae_cfg, DomainTag::kTarget, &tgt_init);

    std::vector<Vector> train_std = apply_all(raw_std, collect_segments(train_utts));
    std::vector<Vector> target_std =
        apply_all(raw_std, collect_segments(adapt_target_utts));

    TrainConfig src_train = cfg.ae_train;
    src_train.seed = root.spawn(6).seed();
    train_autoencoder(&source_ae, train_std, src_train);
    TrainConfig tgt_train = cfg.ae_train;
    tgt_train.seed = root.spawn(7).seed();
    train_autoencoder(&target_ae, target_std, tgt_train);

    AdaptConfig adapt_cfg = cfg.adapt;
    adapt_cfg.seed = root.spawn(8).seed();
    AdaptResult adapted =
        adapt_source_encoder(source_ae, target_ae, train_std, target_std, adapt_cfg);
    adapted_src = std::move(adapted.source_ae);

    auto encode_with = [](const Autoencoder& ae, const Standardizer& raw,
                          const Vector& x) {
      return encode(ae, raw.apply(x)).values;
    };

    std::vector<Vector> train_latents;
    for (const auto& x : collect_segments(train_utts))
      train_latents.push_back(encode_with(adapted_src, raw_std, x));
    Standardizer latent_std;
    latent_std.fit(train_latents);

    if (want_latent) {
      auto to_latent_src = [&](const Vector& x) {
        return latent_std.apply(encode_with(adapted_src, raw_std, x));
      };
      std::vector<Vector> xs;
      std::vector<int> ys;
      for (std::size_t i = 0, seg = 0; i < train_utts.size(); ++i) {
        int y = store->get(train_utts[i].key) == Valence::kPositive ? 1 : -1;
        for (const auto& s : train_utts[i].utt->segments) {
          xs.push_back(latent_std.apply(train_latents[seg++]));
          ys.push_back(y);
        }
      }
      SvmModel model = train_smo(xs, ys, cfg.svm);
      std::vector<Vector> cal_xs;
      std::vector<int> cal_ys;
      for (const auto& v : calib_utts) {
        int y = store->get(v.key) == Valence::kPositive ? 1 : -1;
        for (const auto& s : v.utt->segments) {
          cal_xs.push_back(to_latent_src(s.values));
          cal_ys.push_back(y);
        }
      }
      model = platt_calibrate(std::move(model), cal_xs, cal_ys);
      predictions["latent"] = predict_utterances(
          scored_target_utts, model, [&](const Vector& x) {
            return latent_std.apply(encode_with(target_ae, raw_std, x));
          });
    }

    if (want_fused) {
      auto fuse_src = [&](const Vector& x) {
        Vector raw_part = raw_std.apply(x);
        Vector lat_part = latent_std.apply(encode(adapted_src, raw_part).values);
        Vector fused(raw_part.size() + lat_part.size());
        fused << raw_part, lat_part;
        return fused;
      };
      auto fuse_tgt = [&](const Vector& x) {
        Vector raw_part = raw_std.apply(x);
        Vector lat_part = latent_std.apply(encode(target_ae, raw_part).values);
        Vector fused(raw_part.size() + lat_part.size());
        fused << raw_part, lat_part;
        return fused;
      };
      std::vector<Vector> xs;
      std::vector<int> ys;
      for (const auto& v : train_utts) {
        int y = store->get(v.key) == Valence::kPositive ? 1 : -1;
        for (const auto& s : v.utt->segments) {
          xs.push_back(fuse_src(s.values));
          ys.push_back(y);
        }
      }
      SvmModel model = train_smo(xs, ys, cfg.svm);
      std::vector<Vector> cal_xs;
      std::vector<int> cal_ys;
      for (const auto& v : calib_utts) {
        int y = store->get(v.key) == Valence::kPositive ? 1 : -1;
        for (const auto& s : v.utt->segments) {
          cal_xs.push_back(fuse_src(s.values));
          cal_ys.push_back(y);
        }
      }
      model = platt_calibrate(std::move(model), cal_xs, cal_ys);
      predictions["fused"] = predict_utterances(scored_target_utts, model, fuse_tgt);
    }
  }

  // All predictions exist; only now may target labels be read.
  store->begin_scoring();
  std::vector<std::string> target_speakers;
  {
    std::set<std::string> s;
    for (const auto& v : scored_target_utts) s.insert(v.utt->speaker_id);
    target_speakers.assign(s.begin(), s.end());
  }

  std::vector<EvalReport> reports;
  for (const char* name : {"raw", "latent", "fused"}) {
    auto it = predictions.find(name);
    if (it == predictions.end()) continue;
    std::vector<FoldResult> folds;
    folds.push_back(score_fold(0, target_speakers, it->second, store));
    reports.push_back(assemble_report(source_ids, target.id, "crosslingual",
                                      condition_from_name(name),
                                      std::move(folds)));
  }
  return reports;
}

}  // namespace

std::vector<EvalReport> run_baseline(const Corpus& corpus, const EvalConfig& cfg,
                                     LabelStore* store) {
  LabelStore local_store;
  if (store == nullptr) store = &local_store;
  for (const auto& v : view_of(corpus))
    store->add(v.key, v.utt->valence, /*guarded=*/false);

  Rng root(cfg.seed);
  FoldPlan plan = cfg.folds == 0
                      ? make_loso_plan(corpus)
                      : make_grouped_kfold_plan(corpus, cfg.folds,
                                                root.spawn(50).seed());
  check_speaker_disjoint(plan);

  std::vector<UttView> views = view_of(corpus);
  std::vector<FoldResult> folds;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    try {
      std::set<std::string> test_set(plan.folds[f].test_speakers.begin(),
                                     plan.folds[f].test_speakers.end());
      std::vector<UttView> train_utts, test_utts;
      for (const auto& v : views)
        (test_set.count(v.utt->speaker_id) ? test_utts : train_utts).push_back(v);
      if (train_utts.empty() || test_utts.empty())
        throw DataError("empty train or test side");

      Rng calib_rng = root.spawn(100 + f);
      std::vector<UttView> calib_utts = partition_calibration(&train_utts, &calib_rng);

      Standardizer std_;
      std_.fit(collect_segments(train_utts));
      SvmModel model = fit_svm(train_utts, calib_utts, std_, cfg.svm, store);
      std::vector<Prediction> preds = predict_utterances(
          test_utts, model, [&](const Vector& x) { return std_.apply(x); });
      folds.push_back(score_fold(static_cast<int>(f),
                                 plan.folds[f].test_speakers, preds, store));
    } catch (const NumericError& e) {
      throw NumericError("fold " + std::to_string(f) + ": " + e.what());
    } catch (const LeakageError& e) {
      throw;
    } catch (const Error& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    }
  }

  std::string scheme =
      cfg.folds == 0 ? "loso" : "grouped" + std::to_string(cfg.folds);
  std::vector<EvalReport> reports;
  reports.push_back(assemble_report(corpus.id, corpus.id, scheme,
                                    FeatureCondition::kRaw, std::move(folds)));
  return reports;
}

std::vector<EvalReport> run_cross_lingual(const Corpus& source,
                                          const Corpus& target,
                                          FeatureCondition condition,
                                          const EvalConfig& cfg,
                                          LabelStore* store) {
  return run_cross_core({&source}, target, condition, cfg, store);
}

std::vector<EvalReport> run_multilingual(const std::vector<Corpus>& all_corpora,
                                         const std::string& held_out_id,
                                         FeatureCondition condition,
                                         const EvalConfig& cfg,
                                         LabelStore* store) {
  if (all_corpora.size() < 2)
    throw DataError("multilingual run needs >= 2 corpora");
  const Corpus* target = nullptr;
  std::vector<const Corpus*> sources;
  for (const Corpus& c : all_corpora) {
    if (c.id == held_out_id) {
      if (target != nullptr)
        throw DataError("held-out corpus id '" + held_out_id + "' is ambiguous");
      target = &c;
    } else {
      sources.push_back(&c);
    }
  }
  if (target == nullptr)
    throw DataError("held-out corpus '" + held_out_id + "' not found");
  return run_cross_core(sources, *target, condition, cfg, store);
}

std::pair<Corpus, Corpus> split_corpus_by_speakers(const Corpus& corpus,
                                                   double first_fraction,
                                                   std::uint64_t seed) {
  std::vector<std::string> speakers = corpus.speakers();
  if (speakers.size() < 2)
    throw DataError("split_corpus_by_speakers needs >= 2 speakers");
  Rng rng(seed);
  rng.shuffle(&speakers);
  std::size_t n_first = std::max(
      std::size_t{1},
      std::min(speakers.size() - 1,
               static_cast<std::size_t>(std::lround(
                   first_fraction * static_cast<double>(speakers.size())))));
  std::set<std::string> first_set(speakers.begin(),
                                  speakers.begin() + static_cast<long>(n_first));
  Corpus a, b;
  a.id = corpus.id + "#a";
  b.id = corpus.id + "#b";
  a.language = b.language = corpus.language;
  a.feature_dim = b.feature_dim = corpus.feature_dim;
  for (const auto& u : corpus.utterances) {
    Corpus& dst = first_set.count(u.speaker_id) ? a : b;
    Utterance copy = u;
    copy.corpus_id = dst.id;
    dst.utterances.push_back(std::move(copy));
  }
  return {std::move(a), std::move(b)};
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "source,target,scheme,condition,fold,test_speakers,"
         "n_test_utterances,uar,recall_negative,recall_positive,tn,fp,fn,tp\n";
  char buf[256];
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      std::string speakers;
      for (const auto& s : f.test_speakers) {
        if (!speakers.empty()) speakers += ";";
        speakers += s;
      }
      std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.6f,%.6f,%.6f,%ld,%ld,%ld,%ld\n",
                    f.fold_index, speakers.c_str(), f.n_test_utterances, f.uar,
                    f.recall_negative, f.recall_positive, f.tn, f.fp, f.fn, f.tp);
      out << r.source_ids << "," << r.target_id << "," << r.scheme << ","
          << condition_name(r.condition) << "," << buf;
    }
    long total = r.tn + r.fp + r.fn + r.tp;
    std::snprintf(buf, sizeof(buf), "mean,,%ld,%.6f,,,%ld,%ld,%ld,%ld\n",
                  total, r.mean_uar, r.tn, r.fp, r.fn, r.tp);
    out << r.source_ids << "," << r.target_id << "," << r.scheme << ","
        << condition_name(r.condition) << "," << buf;
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_reports_table(const std::vector<EvalReport>& reports,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-12s %-12s %-10s %8s\n", "Source",
                "Target", "Scheme", "Condition", "UAR(%)");
  out << buf;
  out << std::string(66, '-') << "\n";
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-20s %-12s %-12s %-10s %8.2f\n",
                  r.source_ids.c_str(), r.target_id.c_str(), r.scheme.c_str(),
                  condition_name(r.condition).c_str(), 100.0 * r.mean_uar);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace xser
