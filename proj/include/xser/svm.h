// xser/svm.h

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

// Binary RBF-kernel SVM: SMO dual solver with maximal-violating-pair
// selection, plus Platt sigmoid calibration so decision values become
// posterior probabilities (needed for segment-posterior averaging).
// Labels are +/-1 with +1 = positive valence.

#ifndef XSER_SVM_H_
#define XSER_SVM_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "xser/common.h"

namespace xser {

struct SvmModel {
  std::vector<Vector> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0.0;
  double gamma = 0.0;
  // p(+1 | f) = 1 / (1 + exp(platt_a * f + platt_b)), platt_a <= 0.
  double platt_a = 0.0;
  double platt_b = 0.0;
  bool calibrated = false;

  int feature_dim() const {
    return support_vectors.empty() ? 0
                                   : static_cast<int>(support_vectors[0].size());
  }
};

struct SvmTrainConfig {
  double c_reg = 1.0;
  double gamma = 0.0;  // 0 means auto: 1 / feature_dim
  double kkt_tolerance = 1e-3;
  int max_iterations = 200000;  // hard cap on SMO pair updates
};

// exp(-gamma * ||x - y||^2), in (0, 1].
double rbf_kernel(const Vector& x, const Vector& y, double gamma);

// Trains the dual with SMO. Labels must be +/-1 and both classes present.
// On return every training point satisfies its KKT case within
// cfg.kkt_tolerance.
SvmModel train_smo(const std::vector<Vector>& data,
                   const std::vector<int>& labels, const SvmTrainConfig& cfg);

// Decision value f(x) = sum_i dual_coef_i * K(sv_i, x) + bias.
double decision_value(const SvmModel& model, const Vector& x);

// Max KKT violation over the training set; tests assert <= tolerance.
double kkt_violation(const SvmModel& model, const std::vector<Vector>& data,
                     const std::vector<int>& labels, double c_reg);

// Fits (platt_a, platt_b) by Newton's method with backtracking on the
// held-out negative log-likelihood. Targets are raw 0/1 labels, so equal
// scores calibrate to the positive-class base rate. platt_a <= 0 is enforced.
SvmModel platt_calibrate(SvmModel model, const std::vector<Vector>& held_out,
                         const std::vector<int>& labels);

// Posterior probability of positive valence; requires a calibrated model.
double predict_proba(const SvmModel& model, const Vector& x);

// Structured-text serialization, bit-exact round trip.
void save_svm(const SvmModel& model, std::ostream& out);
SvmModel load_svm(std::istream& in);
void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm_file(const std::string& path);

}  // namespace xser

#endif  // XSER_SVM_H_
