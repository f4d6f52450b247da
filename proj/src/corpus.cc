// src/corpus.cc

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

#include "xser/corpus.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace xser {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Corpus ids compare case-insensitively with '-' and '_' ignored, so
// "EMO-DB" and "EMODB" name the same registry row.
std::string corpus_key(const std::string& id) {
  std::string key;
  for (char c : id)
    if (c != '-' && c != '_')
      key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return key;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

}  // namespace

std::vector<std::string> Corpus::speakers() const {
  std::set<std::string> set;
  for (const auto& u : utterances) set.insert(u.speaker_id);
  return {set.begin(), set.end()};
}

int Corpus::total_segments() const {
  int n = 0;
  for (const auto& u : utterances) n += static_cast<int>(u.segments.size());
  return n;
}

Valence map_valence(const std::string& corpus_id, const std::string& emotion) {
  static const std::map<std::string, std::map<std::string, Valence>> registry = {
      {"EMODB",
       {{"anger", Valence::kNegative},
        {"sadness", Valence::kNegative},
        {"fear", Valence::kNegative},
        {"disgust", Valence::kNegative},
        {"boredom", Valence::kNegative},
        {"neutral", Valence::kPositive},
        {"happiness", Valence::kPositive}}},
      {"SAVEE",
       {{"anger", Valence::kNegative},
        {"sadness", Valence::kNegative},
        {"fear", Valence::kNegative},
        {"disgust", Valence::kNegative},
        {"neutral", Valence::kPositive},
        {"happiness", Valence::kPositive},
        {"surprise", Valence::kPositive}}},
      {"EMOVO",
       {{"anger", Valence::kNegative},
        {"sadness", Valence::kNegative},
        {"fear", Valence::kNegative},
        {"disgust", Valence::kNegative},
        {"neutral", Valence::kPositive},
        {"joy", Valence::kPositive},
        {"surprise", Valence::kPositive}}},
      {"URDU",
       {{"angry", Valence::kNegative},
        {"sad", Valence::kNegative},
        {"neutral", Valence::kPositive},
        {"happy", Valence::kPositive}}}};

  std::string emo = lower(trim(emotion));
  auto corpus_it = registry.find(corpus_key(corpus_id));
  if (corpus_it != registry.end()) {
    auto it = corpus_it->second.find(emo);
    if (it != corpus_it->second.end()) return it->second;
  }
  // Synthetic corpora label utterances with the valence name directly.
  if (emo == "positive") return Valence::kPositive;
  if (emo == "negative") return Valence::kNegative;
  throw DataError("unmapped emotion '" + emotion + "' for corpus '" + corpus_id +
                  "'");
}

Corpus load_corpus(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty corpus file: " + path);
  std::vector<std::string> header = split_csv_line(line);

  static const char* kFixed[] = {"corpus_id", "speaker_id", "utterance_id",
                                 "segment_index", "emotion"};
  if (header.size() < 6)
    throw DataError(path + ": header too short");
  for (int i = 0; i < 5; ++i)
    if (header[static_cast<std::size_t>(i)] != kFixed[i])
      throw DataError(path + ": header column " + std::to_string(i + 1) +
                      " must be '" + kFixed[i] + "', got '" +
                      header[static_cast<std::size_t>(i)] + "'");
  std::size_t col = 5;
  bool has_valence = header[col] == "valence";
  if (has_valence) ++col;
  std::size_t first_feature = col;
  int feature_dim = 0;
  for (; col < header.size(); ++col, ++feature_dim) {
    char expected[16];
    std::snprintf(expected, sizeof(expected), "f%03d", feature_dim);
    if (header[col] != expected)
      throw DataError(path + ": feature column " + std::to_string(col + 1) +
                      " must be '" + expected + "', got '" + header[col] + "'");
  }
  if (feature_dim < 1) throw DataError(path + ": no feature columns");
  if (options.expected_feature_dim > 0 &&
      options.expected_feature_dim != feature_dim)
    throw DataError(path + ": feature_dim " + std::to_string(feature_dim) +
                    " does not match declared " +
                    std::to_string(options.expected_feature_dim));

  Corpus corpus;
  corpus.feature_dim = feature_dim;
  corpus.language = options.language;

  std::map<std::string, std::size_t> utt_index;
  std::set<std::pair<std::string, int>> seen_segments;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": dimension drift (" + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()) +
                      ")");
    const std::string& corpus_id = fields[0];
    const std::string& speaker_id = fields[1];
    const std::string& utt_id = fields[2];
    if (speaker_id.empty())
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": empty speaker_id");
    if (corpus.id.empty()) {
      corpus.id = corpus_id;
    } else if (corpus.id != corpus_id) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": corpus_id changed from '" + corpus.id + "' to '" +
                      corpus_id + "'");
    }
    int segment_index;
    try {
      segment_index = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": bad segment_index '" + fields[3] + "'");
    }
    if (segment_index < 0)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": negative segment_index");
    if (!seen_segments.insert({utt_id, segment_index}).second)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": duplicate segment " + std::to_string(segment_index) +
                      " for utterance '" + utt_id + "'");

    const std::string& emotion = fields[4];
    Valence valence = map_valence(corpus_id, emotion);
    if (has_valence) {
      std::string declared = lower(fields[5]);
      Valence from_file;
      if (declared == "positive") from_file = Valence::kPositive;
      else if (declared == "negative") from_file = Valence::kNegative;
      else
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": bad valence '" + fields[5] + "'");
      if (from_file != valence)
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": valence '" + fields[5] +
                        "' contradicts the registry mapping for emotion '" +
                        emotion + "'");
    }

    SegmentFeature seg;
    seg.segment_index = segment_index;
    seg.values = Vector(feature_dim);
    for (int k = 0; k < feature_dim; ++k) {
      double v = parse_double(fields[first_feature + static_cast<std::size_t>(k)],
                              (path + ": line " + std::to_string(line_no)).c_str());
      if (!std::isfinite(v))
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": non-finite feature value");
      seg.values[k] = v;
    }

    auto it = utt_index.find(utt_id);
    if (it == utt_index.end()) {
      Utterance u;
      u.id = utt_id;
      u.speaker_id = speaker_id;
      u.corpus_id = corpus_id;
      u.emotion = emotion;
      u.valence = valence;
      corpus.utterances.push_back(std::move(u));
      utt_index.emplace(utt_id, corpus.utterances.size() - 1);
      it = utt_index.find(utt_id);
    } else {
      const Utterance& u = corpus.utterances[it->second];
      if (u.speaker_id != speaker_id || lower(u.emotion) != lower(emotion))
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": utterance '" + utt_id +
                        "' has inconsistent speaker or emotion across rows");
    }
    corpus.utterances[it->second].segments.push_back(std::move(seg));
  }
  if (corpus.utterances.empty()) throw DataError(path + ": no data rows");
  for (auto& u : corpus.utterances)
    std::sort(u.segments.begin(), u.segments.end(),
              [](const SegmentFeature& a, const SegmentFeature& b) {
                return a.segment_index < b.segment_index;
              });
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "corpus_id,speaker_id,utterance_id,segment_index,emotion,valence";
  for (int k = 0; k < corpus.feature_dim; ++k) {
    char col[16];
    std::snprintf(col, sizeof(col), "f%03d", k);
    out << "," << col;
  }
  out << "\n";
  char num[40];
  for (const auto& u : corpus.utterances) {
    for (const auto& seg : u.segments) {
      out << u.corpus_id << "," << u.speaker_id << "," << u.id << ","
          << seg.segment_index << "," << u.emotion << ","
          << valence_name(u.valence);
      for (int k = 0; k < corpus.feature_dim; ++k) {
        std::snprintf(num, sizeof(num), "%.17g", seg.values[k]);
        out << "," << num;
      }
      out << "\n";
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

void Standardizer::fit(const std::vector<Vector>& train_segments) {
  if (train_segments.size() < 2)
    throw DataError("Standardizer::fit needs at least 2 segments");
  const int dim = static_cast<int>(train_segments[0].size());
  mean_ = Vector::Zero(dim);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Vector& x : train_segments) {
    if (x.size() != dim) throw ShapeError("Standardizer::fit: ragged dims");
    mean_ += x;
    h = fnv1a64(x, h);
  }
  mean_ /= static_cast<double>(train_segments.size());
  Vector var = Vector::Zero(dim);
  for (const Vector& x : train_segments) {
    Vector d = x - mean_;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(train_segments.size());
  std_ = var.cwiseSqrt().cwiseMax(1e-8);
  fitted_ = true;
  fit_fingerprint_ = h;
}

Vector Standardizer::apply(const Vector& x) const {
  if (!fitted_) throw ConfigError("Standardizer::apply before fit");
  if (x.size() != mean_.size())
    throw ShapeError("Standardizer::apply: dimension mismatch");
  return (x - mean_).cwiseQuotient(std_);
}

}  // namespace xser
