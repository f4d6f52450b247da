// src/svm.cc

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

#include "xser/svm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace xser {

namespace {
constexpr double kTau = 1e-12;       // floor for the pair curvature
constexpr double kAlphaZero = 1e-12; // below this an alpha counts as zero
}  // namespace

double rbf_kernel(const Vector& x, const Vector& y, double gamma) {
  if (x.size() != y.size())
    throw ShapeError("rbf_kernel: dimension mismatch " +
                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (gamma <= 0.0) throw ConfigError("rbf_kernel: gamma must be positive");
  return std::exp(-gamma * (x - y).squaredNorm());
}

double decision_value(const SvmModel& model, const Vector& x) {
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    f += model.dual_coefs[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
  return f;
}

SvmModel train_smo(const std::vector<Vector>& data,
                   const std::vector<int>& labels, const SvmTrainConfig& cfg) {
  const int n = static_cast<int>(data.size());
  if (n < 2) throw DataError("train_smo: need at least two examples");
  if (labels.size() != data.size())
    throw ShapeError("train_smo: label count does not match data");
  if (cfg.c_reg <= 0.0) throw ConfigError("c_reg must be positive");
  if (cfg.kkt_tolerance <= 0.0) throw ConfigError("kkt_tolerance must be positive");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw DataError("train_smo: labels must be +/-1");
  }
  if (!has_pos || !has_neg)
    throw DataError("train_smo: degenerate data, both classes required");

  const int dim = static_cast<int>(data[0].size());
  for (const Vector& x : data)
    if (x.size() != dim) throw ShapeError("train_smo: ragged feature dims");
  const double gamma = cfg.gamma > 0.0 ? cfg.gamma : 1.0 / dim;
  const double c = cfg.c_reg;

  // Q_ij = y_i y_j K(x_i, x_j), dense. Desk-scale solver: the full Gram
  // matrix is kept in memory.
  Matrix q(n, n);
  for (int i = 0; i < n; ++i) {
    q(i, i) = 1.0;  // exp(0) = 1
    for (int j = i + 1; j < n; ++j) {
      double k = std::exp(-gamma * (data[static_cast<std::size_t>(i)] -
                                    data[static_cast<std::size_t>(j)]).squaredNorm());
      double v = k * labels[static_cast<std::size_t>(i)] *
                 labels[static_cast<std::size_t>(j)];
      q(i, j) = v;
      q(j, i) = v;
    }
  }

  // Minimize 1/2 a'Qa - e'a subject to 0 <= a <= C, y'a = 0.
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  const double stop_tol = 0.5 * cfg.kkt_tolerance;

  auto in_up = [&](int t) {
    return (labels[static_cast<std::size_t>(t)] == 1 && alpha[t] < c) ||
           (labels[static_cast<std::size_t>(t)] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](int t) {
    return (labels[static_cast<std::size_t>(t)] == 1 && alpha[t] > 0.0) ||
           (labels[static_cast<std::size_t>(t)] == -1 && alpha[t] < c);
  };

  int iterations = 0;
  while (true) {
    // Maximal violating pair.
    int i = -1, j = -1;
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      double v = -labels[static_cast<std::size_t>(t)] * grad[t];
      if (in_up(t) && v > m_up) {
        m_up = v;
        i = t;
      }
      if (in_low(t) && v < m_low) {
        m_low = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= stop_tol) break;
    if (++iterations > cfg.max_iterations)
      throw NumericError("SMO did not converge within " +
                         std::to_string(cfg.max_iterations) + " iterations");

    const int yi = labels[static_cast<std::size_t>(i)];
    const int yj = labels[static_cast<std::size_t>(j)];
    double old_ai = alpha[i], old_aj = alpha[j];

    if (yi != yj) {
      double quad = std::max(q(i, i) + q(j, j) + 2.0 * q(i, j), kTau);
      double delta = (-grad[i] - grad[j]) / quad;
      double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = std::max(q(i, i) + q(j, j) - 2.0 * q(i, j), kTau);
      double delta = (grad[i] - grad[j]) / quad;
      double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    double dai = alpha[i] - old_ai;
    double daj = alpha[j] - old_aj;
    if (dai == 0.0 && daj == 0.0) break;  // numerically stuck pair
    grad += q.col(i) * dai + q.col(j) * daj;
  }

  // Bias from the KKT midpoint (average over free vectors when any exist).
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (int t = 0; t < n; ++t) {
    double yg = labels[static_cast<std::size_t>(t)] * grad[t];
    if (alpha[t] >= c - kAlphaZero) {
      if (labels[static_cast<std::size_t>(t)] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= kAlphaZero) {
      if (labels[static_cast<std::size_t>(t)] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2.0;

  SvmModel model;
  model.gamma = gamma;
  model.bias = -rho;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > kAlphaZero) {
      model.support_vectors.push_back(data[static_cast<std::size_t>(t)]);
      model.dual_coefs.push_back(alpha[t] * labels[static_cast<std::size_t>(t)]);
    }
  }
  return model;
}

double kkt_violation(const SvmModel& model, const std::vector<Vector>& data,
                     const std::vector<int>& labels, double c_reg) {
  if (data.size() != labels.size())
    throw ShapeError("kkt_violation: label count mismatch");

  // Recover each point's alpha from the model (zero when not a support
  // vector). Points are matched by value.
  double worst = 0.0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    double alpha = 0.0;
    for (std::size_t s = 0; s < model.support_vectors.size(); ++s) {
      if (model.support_vectors[s].size() == data[t].size() &&
          model.support_vectors[s] == data[t]) {
        alpha = std::abs(model.dual_coefs[s]);
        break;
      }
    }
    double yf = labels[t] * decision_value(model, data[t]);
    double v;
    if (alpha <= kAlphaZero) {
      v = std::max(0.0, 1.0 - yf);
    } else if (alpha >= c_reg - kAlphaZero) {
      v = std::max(0.0, yf - 1.0);
    } else {
      v = std::abs(yf - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

double stable_platt_prob(double z) {
  double p = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z))
                      : 1.0 / (1.0 + std::exp(z));
  return std::min(1.0 - 1e-15, std::max(1e-15, p));
}

double platt_nll(const std::vector<double>& scores, const std::vector<int>& labels,
                 double a, double b) {
  double nll = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double p = stable_platt_prob(a * scores[i] + b);
    nll -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return nll;
}

}  // namespace

SvmModel platt_calibrate(SvmModel model, const std::vector<Vector>& held_out,
                         const std::vector<int>& labels) {
  if (held_out.size() != labels.size())
    throw ShapeError("platt_calibrate: label count mismatch");
  if (held_out.empty()) throw DataError("platt_calibrate: empty held-out set");
  int n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("platt_calibrate: held-out set must contain both classes");

  std::vector<double> scores;
  scores.reserve(held_out.size());
  for (const Vector& x : held_out) scores.push_back(decision_value(model, x));

  double f_min = *std::min_element(scores.begin(), scores.end());
  double f_max = *std::max_element(scores.begin(), scores.end());
  double base_b = std::log(static_cast<double>(n_neg) / n_pos);
  if (f_max - f_min < 1e-12) {
    // No score information: calibrated posterior is the base rate.
    model.platt_a = 0.0;
    model.platt_b = base_b;
    model.calibrated = true;
    return model;
  }

  double a = 0.0, b = base_b;
  double nll = platt_nll(scores, labels, a, b);
  const int max_iters = 200;
  bool converged = false;
  for (int iter = 0; iter < max_iters; ++iter) {
    // dNLL/dz = t - p with z = a*f + b, p = 1/(1+exp(z)).
    double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      double p = stable_platt_prob(a * scores[i] + b);
      double t = labels[i] == 1 ? 1.0 : 0.0;
      double r = t - p;
      double w = p * (1.0 - p);
      ga += r * scores[i];
      gb += r;
      haa += w * scores[i] * scores[i];
      hab += w * scores[i];
      hbb += w;
    }
    if (std::max(std::abs(ga), std::abs(gb)) < 1e-8 * scores.size()) {
      converged = true;
      break;
    }
    double det = haa * hbb - hab * hab;
    double da = -(hbb * ga - hab * gb) / det;
    double db = -(haa * gb - hab * ga) / det;
    double step = 1.0;
    double slope = ga * da + gb * db;  // < 0 for a descent direction
    bool accepted = false;
    while (step >= 1e-10) {
      double trial = platt_nll(scores, labels, a + step * da, b + step * db);
      if (trial <= nll + 1e-4 * step * slope) {
        a += step * da;
        b += step * db;
        nll = trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no descent possible: at a numerical optimum
      break;
    }
  }
  if (!converged)
    throw NumericError("Platt calibration did not converge; last a=" +
                       std::to_string(a) + " b=" + std::to_string(b));
  if (a > 0.0) {
    // Anti-ordered scores: fall back to the base-rate constant model so the
    // probability stays non-decreasing in the margin.
    a = 0.0;
    b = base_b;
  }
  model.platt_a = a;
  model.platt_b = b;
  model.calibrated = true;
  return model;
}

double predict_proba(const SvmModel& model, const Vector& x) {
  if (!model.calibrated)
    throw ConfigError("predict_proba: model is not calibrated");
  return stable_platt_prob(model.platt_a * decision_value(model, x) +
                           model.platt_b);
}

void save_svm(const SvmModel& model, std::ostream& out) {
  out << "xser-svm v1\n";
  out << "gamma " << format_exact(model.gamma) << " bias "
      << format_exact(model.bias) << "\n";
  out << "platt " << (model.calibrated ? 1 : 0) << " a "
      << format_exact(model.platt_a) << " b " << format_exact(model.platt_b)
      << "\n";
  out << "nsv " << model.support_vectors.size() << " dim "
      << model.feature_dim() << "\n";
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    out << "sv " << format_exact(model.dual_coefs[i]);
    for (int k = 0; k < model.support_vectors[i].size(); ++k)
      out << " " << format_exact(model.support_vectors[i][k]);
    out << "\n";
  }
  out << "end\n";
}

SvmModel load_svm(std::istream& in) {
  auto next = [&](const char* what) {
    std::string tok;
    if (!(in >> tok)) throw DataError(std::string("truncated svm model at ") + what);
    return tok;
  };
  auto expect = [&](const std::string& want) {
    std::string tok = next(want.c_str());
    if (tok != want)
      throw DataError("svm model: expected '" + want + "', got '" + tok + "'");
  };
  expect("xser-svm");
  std::string version = next("version");
  if (version != "v1") throw DataError("unsupported svm model version " + version);
  SvmModel model;
  expect("gamma");
  model.gamma = parse_double(next("gamma"), "svm gamma");
  expect("bias");
  model.bias = parse_double(next("bias"), "svm bias");
  expect("platt");
  model.calibrated = next("platt flag") == "1";
  expect("a");
  model.platt_a = parse_double(next("platt a"), "platt a");
  expect("b");
  model.platt_b = parse_double(next("platt b"), "platt b");
  expect("nsv");
  int nsv = std::stoi(next("nsv"));
  expect("dim");
  int dim = std::stoi(next("dim"));
  if (nsv < 0 || dim < 0) throw DataError("svm model: bad sv header");
  for (int i = 0; i < nsv; ++i) {
    expect("sv");
    model.dual_coefs.push_back(parse_double(next("dual coef"), "dual coef"));
    Vector sv(dim);
    for (int k = 0; k < dim; ++k)
      sv[k] = parse_double(next("sv value"), "sv value");
    model.support_vectors.push_back(std::move(sv));
  }
  expect("end");
  return model;
}

void save_svm(const SvmModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  save_svm(model, out);
  if (!out) throw DataError("write failed: " + path);
}

SvmModel load_svm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open svm model: " + path);
  return load_svm(in);
}

}  // namespace xser
