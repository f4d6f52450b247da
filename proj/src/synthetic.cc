// src/synthetic.cc

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

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "xser/corpus.h"

namespace xser {

namespace {

using nlohmann::json;

// A vector field may be written as a scalar (constant vector), an explicit
// array, or {"value": v, "dims": [...], "base": b} for sparse patterns.
Vector parse_vector_spec(const json& j, int dim, const std::string& what) {
  if (j.is_number()) return Vector::Constant(dim, j.get<double>());
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != dim)
      throw DataError(what + ": array length " + std::to_string(j.size()) +
                      " does not match feature_dim " + std::to_string(dim));
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v[k] = j[static_cast<std::size_t>(k)].get<double>();
    return v;
  }
  if (j.is_object()) {
    double base = j.value("base", 0.0);
    Vector v = Vector::Constant(dim, base);
    if (j.contains("dims")) {
      double value = j.at("value").get<double>();
      for (const auto& d : j.at("dims")) {
        int k = d.get<int>();
        if (k < 0 || k >= dim)
          throw DataError(what + ": dim index " + std::to_string(k) +
                          " out of range");
        v[k] = value;
      }
    }
    return v;
  }
  throw DataError(what + ": expected number, array, or object");
}

ClassSpec parse_class_spec(const json& j, int dim, const std::string& what) {
  ClassSpec spec;
  spec.mean = j.contains("mean") ? parse_vector_spec(j.at("mean"), dim, what + ".mean")
                                 : Vector::Zero(dim);
  spec.diag_variance =
      j.contains("diag_variance")
          ? parse_vector_spec(j.at("diag_variance"), dim, what + ".diag_variance")
          : Vector::Ones(dim);
  spec.factor_rank = j.value("factor_rank", 0);
  spec.factor_scale = j.value("factor_scale", 1.0);
  if (spec.factor_rank < 0)
    throw DataError(what + ": factor_rank must be >= 0");
  for (int k = 0; k < dim; ++k)
    if (spec.diag_variance[k] < 0.0)
      throw DataError(what + ": non-positive-definite covariance (variance " +
                      std::to_string(spec.diag_variance[k]) + " at dim " +
                      std::to_string(k) + ")");
  return spec;
}

}  // namespace

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open synthetic spec: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    SyntheticSpec spec;
    spec.feature_dim = j.value("feature_dim", 88);
    if (spec.feature_dim < 1) throw DataError(path + ": feature_dim must be positive");
    const json& classes = j.at("classes");
    spec.negative = parse_class_spec(classes.at("negative"), spec.feature_dim,
                                     path + ": classes.negative");
    spec.positive = parse_class_spec(classes.at("positive"), spec.feature_dim,
                                     path + ": classes.positive");
    for (const auto& cj : j.at("corpora")) {
      SyntheticCorpusSpec c;
      c.id = cj.at("id").get<std::string>();
      c.language = cj.value("language", c.id);
      c.n_speakers = cj.at("n_speakers").get<int>();
      c.utterances_per_speaker = cj.at("utterances_per_speaker").get<int>();
      c.segments_per_utterance = cj.at("segments_per_utterance").get<int>();
      c.speaker_sigma = cj.value("speaker_sigma", 0.0);
      c.positive_fraction = cj.value("positive_fraction", 0.5);
      if (cj.contains("shift")) {
        const json& s = cj.at("shift");
        c.shift.scale = s.contains("scale")
                            ? parse_vector_spec(s.at("scale"), spec.feature_dim,
                                                path + ": shift.scale")
                            : Vector::Ones(spec.feature_dim);
        c.shift.offset = s.contains("offset")
                             ? parse_vector_spec(s.at("offset"), spec.feature_dim,
                                                 path + ": shift.offset")
                             : Vector::Zero(spec.feature_dim);
      } else {
        c.shift.scale = Vector::Ones(spec.feature_dim);
        c.shift.offset = Vector::Zero(spec.feature_dim);
      }
      spec.corpora.push_back(std::move(c));
    }
    if (spec.corpora.empty()) throw DataError(path + ": no corpora declared");
    return spec;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

Matrix draw_factors(const ClassSpec& cls, int dim, Rng* rng) {
  Matrix f(dim, std::max(cls.factor_rank, 1));
  f.setZero();
  for (int c = 0; c < cls.factor_rank; ++c)
    for (int r = 0; r < dim; ++r) f(r, c) = cls.factor_scale * rng->normal();
  return f;
}

Vector sample_class(const ClassSpec& cls, const Matrix& factors, Rng* rng) {
  const int dim = static_cast<int>(cls.mean.size());
  Vector x = cls.mean;
  if (cls.factor_rank > 0) {
    Vector z(cls.factor_rank);
    for (int k = 0; k < cls.factor_rank; ++k) z[k] = rng->normal();
    x += factors.leftCols(cls.factor_rank) * z;
  }
  for (int k = 0; k < dim; ++k)
    x[k] += std::sqrt(cls.diag_variance[k]) * rng->normal();
  return x;
}

}  // namespace

Corpus generate_synthetic_corpus(const SyntheticSpec& spec, int corpus_index,
                                 std::uint64_t seed) {
  if (corpus_index < 0 || corpus_index >= static_cast<int>(spec.corpora.size()))
    throw ConfigError("corpus_index out of range");
  const SyntheticCorpusSpec& cs = spec.corpora[static_cast<std::size_t>(corpus_index)];
  if (cs.n_speakers < 1 || cs.utterances_per_speaker < 1 ||
      cs.segments_per_utterance < 1)
    throw DataError("synthetic corpus '" + cs.id + "': counts must be positive");
  if (cs.positive_fraction < 0.0 || cs.positive_fraction > 1.0)
    throw DataError("synthetic corpus '" + cs.id +
                    "': positive_fraction must lie in [0, 1]");
  const int dim = spec.feature_dim;
  for (const ClassSpec* cls : {&spec.negative, &spec.positive}) {
    if (cls->mean.size() != dim || cls->diag_variance.size() != dim)
      throw ShapeError("synthetic class spec dims do not match feature_dim");
    for (int k = 0; k < dim; ++k)
      if (cls->diag_variance[k] < 0.0)
        throw DataError("non-positive-definite covariance in synthetic spec");
  }

  Rng root(seed);
  // Class structure comes from the spec-level stream so corpus files produced
  // from one spec share it exactly.
  Rng class_rng = root.spawn(0);
  Matrix neg_factors = draw_factors(spec.negative, dim, &class_rng);
  Matrix pos_factors = draw_factors(spec.positive, dim, &class_rng);
  Rng rng = root.spawn(1000 + static_cast<std::uint64_t>(corpus_index));

  Corpus corpus;
  corpus.id = cs.id;
  corpus.language = cs.language;
  corpus.feature_dim = dim;

  int n_pos = static_cast<int>(
      std::lround(cs.positive_fraction * cs.utterances_per_speaker));
  char buf[64];
  for (int s = 0; s < cs.n_speakers; ++s) {
    std::snprintf(buf, sizeof(buf), "s%03d", s);
    std::string speaker_id = buf;
    Vector speaker_offset = Vector::Zero(dim);
    for (int k = 0; k < dim; ++k)
      speaker_offset[k] = cs.speaker_sigma * rng.normal();

    std::vector<Valence> plan;
    for (int u = 0; u < cs.utterances_per_speaker; ++u)
      plan.push_back(u < n_pos ? Valence::kPositive : Valence::kNegative);
    rng.shuffle(&plan);

    for (int u = 0; u < cs.utterances_per_speaker; ++u) {
      Utterance utt;
      std::snprintf(buf, sizeof(buf), "%s-s%03d-u%04d", cs.id.c_str(), s, u);
      utt.id = buf;
      utt.speaker_id = speaker_id;
      utt.corpus_id = cs.id;
      utt.valence = plan[static_cast<std::size_t>(u)];
      utt.emotion = valence_name(utt.valence);
      const ClassSpec& cls =
          utt.valence == Valence::kPositive ? spec.positive : spec.negative;
      const Matrix& factors =
          utt.valence == Valence::kPositive ? pos_factors : neg_factors;
      for (int g = 0; g < cs.segments_per_utterance; ++g) {
        SegmentFeature seg;
        seg.segment_index = g;
        Vector x = sample_class(cls, factors, &rng) + speaker_offset;
        seg.values = cs.shift.scale.cwiseProduct(x) + cs.shift.offset;
        utt.segments.push_back(std::move(seg));
      }
      corpus.utterances.push_back(std::move(utt));
    }
  }
  return corpus;
}

}  // namespace xser
