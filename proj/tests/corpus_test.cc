// tests/corpus_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "xser/corpus.h"

using namespace xser;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

SyntheticSpec tiny_spec(int n_speakers, int utts, int segs) {
  SyntheticSpec spec;
  spec.feature_dim = 6;
  spec.negative.mean = Vector::Constant(6, -1.0);
  spec.negative.diag_variance = Vector::Ones(6);
  spec.positive.mean = Vector::Constant(6, 1.0);
  spec.positive.diag_variance = Vector::Ones(6);
  SyntheticCorpusSpec c;
  c.id = "SYN";
  c.language = "syn";
  c.n_speakers = n_speakers;
  c.utterances_per_speaker = utts;
  c.segments_per_utterance = segs;
  c.shift.scale = Vector::Ones(6);
  c.shift.offset = Vector::Zero(6);
  c.speaker_sigma = 0.2;
  spec.corpora.push_back(c);
  return spec;
}

bool corpora_equal(const Corpus& a, const Corpus& b) {
  if (a.id != b.id || a.feature_dim != b.feature_dim ||
      a.utterances.size() != b.utterances.size())
    return false;
  for (std::size_t i = 0; i < a.utterances.size(); ++i) {
    const Utterance& u = a.utterances[i];
    const Utterance& v = b.utterances[i];
    if (u.id != v.id || u.speaker_id != v.speaker_id ||
        u.corpus_id != v.corpus_id || u.emotion != v.emotion ||
        u.valence != v.valence || u.segments.size() != v.segments.size())
      return false;
    for (std::size_t s = 0; s < u.segments.size(); ++s) {
      if (u.segments[s].segment_index != v.segments[s].segment_index) return false;
      if (u.segments[s].values != v.segments[s].values) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("map_valence: every registered (corpus, emotion) pair is verbatim") {
  struct Row {
    const char* corpus;
    const char* emotion;
    Valence valence;
  };
  const Row rows[] = {
      {"EMO-DB", "Anger", Valence::kNegative},
      {"EMO-DB", "Sadness", Valence::kNegative},
      {"EMO-DB", "Fear", Valence::kNegative},
      {"EMO-DB", "Disgust", Valence::kNegative},
      {"EMO-DB", "Boredom", Valence::kNegative},
      {"EMO-DB", "Neutral", Valence::kPositive},
      {"EMO-DB", "Happiness", Valence::kPositive},
      {"SAVEE", "Anger", Valence::kNegative},
      {"SAVEE", "Sadness", Valence::kNegative},
      {"SAVEE", "Fear", Valence::kNegative},
      {"SAVEE", "Disgust", Valence::kNegative},
      {"SAVEE", "Neutral", Valence::kPositive},
      {"SAVEE", "Happiness", Valence::kPositive},
      {"SAVEE", "Surprise", Valence::kPositive},
      {"EMOVO", "Anger", Valence::kNegative},
      {"EMOVO", "Sadness", Valence::kNegative},
      {"EMOVO", "Fear", Valence::kNegative},
      {"EMOVO", "Disgust", Valence::kNegative},
      {"EMOVO", "Neutral", Valence::kPositive},
      {"EMOVO", "Joy", Valence::kPositive},
      {"EMOVO", "Surprise", Valence::kPositive},
      {"URDU", "Angry", Valence::kNegative},
      {"URDU", "Sad", Valence::kNegative},
      {"URDU", "Neutral", Valence::kPositive},
      {"URDU", "Happy", Valence::kPositive},
  };
  for (const Row& r : rows) CHECK(map_valence(r.corpus, r.emotion) == r.valence);
}

TEST_CASE("map_valence: matching is case-insensitive and id-normalized") {
  CHECK(map_valence("emo-db", "  boredom ") == Valence::kNegative);
  CHECK(map_valence("EMODB", "HAPPINESS") == Valence::kPositive);
  CHECK(map_valence("urdu", "HAPPY") == Valence::kPositive);
}

TEST_CASE("map_valence: unknown pair names the corpus and label") {
  bool threw = false;
  try {
    map_valence("SAVEE", "Boredom");  // Boredom is EMO-DB only
  } catch (const DataError& e) {
    threw = true;
    std::string msg = e.what();
    CHECK(msg.find("SAVEE") != std::string::npos);
    CHECK(msg.find("Boredom") != std::string::npos);
  }
  CHECK(threw);
  CHECK_THROWS_AS(map_valence("SYN", "Elated"), DataError);
}

TEST_CASE("map_valence: literal valence labels work for any corpus id") {
  CHECK(map_valence("SYN-A", "Positive") == Valence::kPositive);
  CHECK(map_valence("whatever", "negative") == Valence::kNegative);
}

TEST_CASE("load_corpus: two rows become one utterance with two segments") {
  std::string path = temp_path("xser_two_rows.csv");
  write_file(path,
             "corpus_id,speaker_id,utterance_id,segment_index,emotion,f000,f001\n"
             "URDU,s1,u1,0,Happy,0.5,1.5\n"
             "URDU,s1,u1,1,Happy,-0.5,2.5\n");
  Corpus corpus = load_corpus(path);
  CHECK(corpus.id == "URDU");
  CHECK(corpus.feature_dim == 2);
  REQUIRE(corpus.utterances.size() == 1);
  const Utterance& u = corpus.utterances[0];
  CHECK(u.valence == Valence::kPositive);
  REQUIRE(u.segments.size() == 2);
  CHECK(u.segments[0].segment_index == 0);
  CHECK(u.segments[1].values[1] == doctest::Approx(2.5));
}

TEST_CASE("load_corpus: a short row raises dimension drift naming the line") {
  std::string path = temp_path("xser_drift.csv");
  write_file(path,
             "corpus_id,speaker_id,utterance_id,segment_index,emotion,f000,f001\n"
             "URDU,s1,u1,0,Happy,0.5,1.5\n"
             "URDU,s1,u1,1,Happy,-0.5\n");
  bool threw = false;
  try {
    load_corpus(path);
  } catch (const DataError& e) {
    threw = true;
    std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("drift") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("load_corpus: duplicate (utterance, segment_index) raises") {
  std::string path = temp_path("xser_dup.csv");
  write_file(path,
             "corpus_id,speaker_id,utterance_id,segment_index,emotion,f000\n"
             "URDU,s1,u1,0,Happy,0.5\n"
             "URDU,s1,u1,0,Happy,0.7\n");
  CHECK_THROWS_AS(load_corpus(path), DataError);
}

TEST_CASE("load_corpus: valence column contradicting Table I raises") {
  std::string path = temp_path("xser_valence.csv");
  write_file(path,
             "corpus_id,speaker_id,utterance_id,segment_index,emotion,valence,f000\n"
             "URDU,s1,u1,0,Happy,Negative,0.5\n");
  CHECK_THROWS_AS(load_corpus(path), DataError);
}

TEST_CASE("load_corpus: declared feature_dim mismatch raises") {
  std::string path = temp_path("xser_dim.csv");
  write_file(path,
             "corpus_id,speaker_id,utterance_id,segment_index,emotion,f000,f001\n"
             "URDU,s1,u1,0,Happy,0.5,1.5\n");
  LoadOptions options;
  options.expected_feature_dim = 88;
  CHECK_THROWS_AS(load_corpus(path, options), DataError);
}

TEST_CASE("round trip: write_corpus then load_corpus is the identity") {
  SyntheticSpec spec = tiny_spec(3, 4, 2);
  Corpus corpus = generate_synthetic_corpus(spec, 0, 99);
  std::string path = temp_path("xser_roundtrip.csv");
  write_corpus(corpus, path);
  Corpus loaded = load_corpus(path);
  CHECK(corpora_equal(corpus, loaded));
}

TEST_CASE("standardizer: constant dimension floors the std and maps to zero") {
  std::vector<Vector> data{Vector::Constant(3, 2.0), Vector::Constant(3, 2.0),
                           Vector::Constant(3, 2.0)};
  Standardizer std_;
  std_.fit(data);
  Vector out = std_.apply(Vector::Constant(3, 2.0));
  for (int k = 0; k < 3; ++k) CHECK(out[k] == doctest::Approx(0.0));
}

TEST_CASE("standardizer: two points {0,2} map to {-1,+1}") {
  std::vector<Vector> data{Vector::Zero(2), Vector::Constant(2, 2.0)};
  Standardizer std_;
  std_.fit(data);
  CHECK(std_.apply(Vector::Zero(2))[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std_.apply(Vector::Constant(2, 2.0))[1] ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("standardizer: output moments match a scalar recomputation") {
  Rng rng(3);
  std::vector<Vector> data;
  for (int i = 0; i < 50; ++i) {
    Vector x(4);
    for (int k = 0; k < 4; ++k) x[k] = rng.uniform(-3.0, 7.0);
    data.push_back(x);
  }
  Standardizer std_;
  std_.fit(data);
  for (int k = 0; k < 4; ++k) {
    double mean = 0.0;
    for (const auto& x : data) mean += std_.apply(x)[k];
    mean /= 50.0;
    double var = 0.0;
    for (const auto& x : data) {
      double d = std_.apply(x)[k] - mean;
      var += d * d;
    }
    var /= 50.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("standardizer: fewer than two segments raises") {
  Standardizer std_;
  std::vector<Vector> one{Vector::Ones(2)};
  CHECK_THROWS_AS(std_.fit(one), DataError);
}

TEST_CASE("synthetic: generation is seed-deterministic") {
  SyntheticSpec spec = tiny_spec(4, 6, 3);
  Corpus a = generate_synthetic_corpus(spec, 0, 7);
  Corpus b = generate_synthetic_corpus(spec, 0, 7);
  Corpus c = generate_synthetic_corpus(spec, 0, 8);
  CHECK(corpora_equal(a, b));
  CHECK(!corpora_equal(a, c));
}

TEST_CASE("synthetic: URDU-sized spec matches Table I row counts exactly") {
  // 38 speakers; 400 utterances total.
  SyntheticSpec spec = tiny_spec(38, 400 / 38, 2);
  spec.corpora[0].utterances_per_speaker = 10;  // 38 * 10 = 380
  Corpus corpus = generate_synthetic_corpus(spec, 0, 1);
  CHECK(corpus.speakers().size() == 38);
  CHECK(corpus.utterances.size() == 380);
  // Exact per-spec utterance count: every speaker contributes its quota.
  std::map<std::string, int> per_speaker;
  for (const auto& u : corpus.utterances) per_speaker[u.speaker_id]++;
  for (const auto& [spk, n] : per_speaker) CHECK(n == 10);
}

TEST_CASE("synthetic: negative variance raises the covariance error") {
  SyntheticSpec spec = tiny_spec(2, 2, 1);
  spec.negative.diag_variance[1] = -0.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec, 0, 1), DataError);
  SyntheticSpec bad_counts = tiny_spec(0, 2, 1);
  CHECK_THROWS_AS(generate_synthetic_corpus(bad_counts, 0, 1), DataError);
}

TEST_CASE("synthetic spec: JSON round-trip with sparse means and shift") {
  std::string path = temp_path("xser_spec.json");
  write_file(path, R"({
    "feature_dim": 8,
    "classes": {
      "negative": {"mean": {"dims": [0,1], "value": -1.0}, "diag_variance": 1.0},
      "positive": {"mean": {"dims": [0,1], "value": 1.0}, "diag_variance": 1.0,
                    "factor_rank": 2, "factor_scale": 0.5}
    },
    "corpora": [
      {"id": "A", "n_speakers": 3, "utterances_per_speaker": 4,
       "segments_per_utterance": 2, "speaker_sigma": 0.1},
      {"id": "B", "n_speakers": 3, "utterances_per_speaker": 4,
       "segments_per_utterance": 2,
       "shift": {"offset": {"dims": [2,3], "value": 2.0}}}
    ]
  })");
  SyntheticSpec spec = load_synthetic_spec(path);
  CHECK(spec.feature_dim == 8);
  CHECK(spec.negative.mean[0] == doctest::Approx(-1.0));
  CHECK(spec.negative.mean[7] == doctest::Approx(0.0));
  CHECK(spec.positive.factor_rank == 2);
  REQUIRE(spec.corpora.size() == 2);
  CHECK(spec.corpora[1].shift.offset[2] == doctest::Approx(2.0));
  CHECK(spec.corpora[1].shift.offset[0] == doctest::Approx(0.0));
  Corpus b = generate_synthetic_corpus(spec, 1, 3);
  CHECK(b.id == "B");
  CHECK(b.utterances.size() == 12);
}

TEST_CASE("synthetic spec: negative variance in the file raises") {
  std::string path = temp_path("xser_spec_bad.json");
  write_file(path, R"({
    "feature_dim": 4,
    "classes": {
      "negative": {"diag_variance": -1.0},
      "positive": {"diag_variance": 1.0}
    },
    "corpora": [{"id": "A", "n_speakers": 2, "utterances_per_speaker": 2,
                 "segments_per_utterance": 1}]
  })");
  CHECK_THROWS_AS(load_synthetic_spec(path), DataError);
}

TEST_CASE("synthetic: 6-sigma class separation is linearly separable") {
  // Class means +-1 on 9 dims: distance 6 with unit variances. A test-side
  // nearest-centroid rule on utterance means must be near perfect.
  SyntheticSpec spec;
  spec.feature_dim = 20;
  spec.negative.mean = Vector::Zero(20);
  spec.positive.mean = Vector::Zero(20);
  for (int k = 0; k < 9; ++k) {
    spec.negative.mean[k] = -1.0;
    spec.positive.mean[k] = 1.0;
  }
  spec.negative.diag_variance = Vector::Ones(20);
  spec.positive.diag_variance = Vector::Ones(20);
  SyntheticCorpusSpec c;
  c.id = "SEP";
  c.n_speakers = 10;
  c.utterances_per_speaker = 20;
  c.segments_per_utterance = 4;
  c.speaker_sigma = 0.2;
  c.shift.scale = Vector::Ones(20);
  c.shift.offset = Vector::Zero(20);
  spec.corpora.push_back(c);
  Corpus corpus = generate_synthetic_corpus(spec, 0, 5);

  // Train centroids on speakers s000..s004, classify the rest.
  Vector pos_centroid = Vector::Zero(20), neg_centroid = Vector::Zero(20);
  int n_pos = 0, n_neg = 0;
  auto utt_mean = [](const Utterance& u) {
    Vector m = Vector::Zero(u.segments[0].values.size());
    for (const auto& s : u.segments) m += s.values;
    return Vector(m / static_cast<double>(u.segments.size()));
  };
  for (const auto& u : corpus.utterances) {
    if (u.speaker_id > "s004") continue;
    if (u.valence == Valence::kPositive) {
      pos_centroid += utt_mean(u);
      ++n_pos;
    } else {
      neg_centroid += utt_mean(u);
      ++n_neg;
    }
  }
  pos_centroid /= n_pos;
  neg_centroid /= n_neg;
  long tp = 0, fn = 0, tn = 0, fp = 0;
  for (const auto& u : corpus.utterances) {
    if (u.speaker_id <= "s004") continue;
    Vector m = utt_mean(u);
    bool pred_pos = (m - pos_centroid).squaredNorm() < (m - neg_centroid).squaredNorm();
    if (u.valence == Valence::kPositive) (pred_pos ? tp : fn)++;
    else (pred_pos ? fp : tn)++;
  }
  double recall_pos = static_cast<double>(tp) / (tp + fn);
  double recall_neg = static_cast<double>(tn) / (tn + fp);
  CHECK(0.5 * (recall_pos + recall_neg) > 0.99);
}
