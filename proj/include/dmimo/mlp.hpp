// SPDX-License-Identifier: Apache-2.0
//
// dmimo-workbench: distributed-MIMO power allocation and robustness toolkit
// Copyright (C) 2026 the dmimo-workbench contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Dense feed-forward allocator. Inputs are standardized large-scale-fading
// features in dB; outputs are per-RU load shares nu_mk = eta_mk beta_mk in
// (0, 1) through a logistic head, so an untrained or saturated model still
// maps into the constraint-relevant range. Training is Adam on MSE against
// solver-produced loads; the small analytic core (forward, backprop, and
// the input gradient used by the attacks) is written out directly so the
// gradients are auditable against finite differences.

#ifndef DMIMO_MLP_HPP
#define DMIMO_MLP_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmimo/core.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

enum class Activation { kSoftplus, kLogistic, kIdentity };

inline const char* activation_tag(Activation a) {
  switch (a) {
    case Activation::kSoftplus: return "softplus";
    case Activation::kLogistic: return "logistic";
    case Activation::kIdentity: return "identity";
  }
  throw BadConfig("activation_tag: unknown activation");
}

inline Activation activation_from_tag(const std::string& tag) {
  if (tag == "softplus") return Activation::kSoftplus;
  if (tag == "logistic") return Activation::kLogistic;
  if (tag == "identity") return Activation::kIdentity;
  throw BadConfig("activation_from_tag: unknown tag '" + tag + "'");
}

namespace detail {

// softplus(z) = log(1 + exp(z)), evaluated as max(z,0) + log1p(exp(-|z|))
// so neither branch overflows.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline void apply_activation(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kSoftplus:
      z = z.unaryExpr([](double v) { return softplus(v); });
      return;
    case Activation::kLogistic:
      z = z.unaryExpr([](double v) { return logistic(v); });
      return;
    case Activation::kIdentity:
      return;
  }
}

// Derivative from the pre-activation. softplus' = logistic.
inline Matrix activation_deriv(const Matrix& z, Activation a) {
  switch (a) {
    case Activation::kSoftplus:
      return z.unaryExpr([](double v) { return logistic(v); });
    case Activation::kLogistic:
      return z.unaryExpr([](double v) {
        double s = logistic(v);
        return s * (1.0 - s);
      });
    case Activation::kIdentity:
      return Matrix::Ones(z.rows(), z.cols());
  }
  throw BadConfig("activation_deriv: unknown activation");
}

}  // namespace detail

struct MlpLayer {
  Matrix w;  // out x in
  Vector b;  // out
  Activation act = Activation::kSoftplus;
};

struct MlpModel {
  std::vector<MlpLayer> layers;
  FeatureStats stats;  // dB-domain standardization frozen at training time

  int input_dim() const {
    if (layers.empty()) throw BadConfig("MlpModel: no layers");
    return static_cast<int>(layers.front().w.cols());
  }
  int output_dim() const {
    if (layers.empty()) throw BadConfig("MlpModel: no layers");
    return static_cast<int>(layers.back().w.rows());
  }

  void validate() const {
    if (layers.empty()) throw BadConfig("MlpModel: no layers");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i)
      if (layers[i + 1].w.cols() != layers[i].w.rows())
        throw ShapeMismatch("MlpModel: layer dimension chain broken");
    for (const auto& l : layers)
      if (l.b.size() != l.w.rows()) throw ShapeMismatch("MlpModel: bias length mismatch");
    if (stats.dim() != input_dim()) throw ShapeMismatch("MlpModel: feature stats dim mismatch");
  }
};

// Glorot-uniform weights, zero biases. Hidden layers use softplus, the
// output layer a logistic head. stream_index separates the deployed model
// from the adversary's surrogate under one master seed.
inline MlpModel make_mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
                         const FeatureStats& stats, std::uint64_t master_seed,
                         std::uint64_t stream_index = 0,
                         Activation hidden_act = Activation::kSoftplus) {
  if (input_dim < 1 || output_dim < 1) throw BadConfig("make_mlp: dims must be >= 1");
  for (int h : hidden)
    if (h < 1) throw BadConfig("make_mlp: hidden widths must be >= 1");
  if (stats.dim() != input_dim) throw ShapeMismatch("make_mlp: stats dim != input_dim");
  RngStream rng(master_seed, StreamPurpose::kWeightInit, stream_index);
  MlpModel model;
  model.stats = stats;
  int prev = input_dim;
  std::vector<int> widths = hidden;
  widths.push_back(output_dim);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    MlpLayer layer;
    int out = widths[i];
    double limit = std::sqrt(6.0 / static_cast<double>(prev + out));
    layer.w.resize(out, prev);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < prev; ++c) layer.w(r, c) = rng.uniform(-limit, limit);
    layer.b = Vector::Zero(out);
    layer.act = (i + 1 == widths.size()) ? Activation::kLogistic : hidden_act;
    model.layers.push_back(std::move(layer));
    prev = out;
  }
  return model;
}

// Forward pass over a batch, samples in rows.
inline Matrix forward(const MlpModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) throw ShapeMismatch("forward: input dim mismatch");
  Matrix a = x;
  for (const auto& layer : model.layers) {
    Matrix z = a * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    detail::apply_activation(z, layer.act);
    a = std::move(z);
  }
  return a;
}

// Forward pass that keeps the pre-activations, for backprop.
struct ForwardCache {
  std::vector<Matrix> z;  // pre-activation per layer
  std::vector<Matrix> a;  // a[0] = input, a[i+1] = activation of layer i
};

inline Matrix forward_cached(const MlpModel& model, const Matrix& x, ForwardCache& cache) {
  if (x.cols() != model.input_dim()) throw ShapeMismatch("forward_cached: input dim mismatch");
  cache.z.clear();
  cache.a.clear();
  cache.a.push_back(x);
  for (const auto& layer : model.layers) {
    Matrix z = cache.a.back() * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    cache.z.push_back(z);
    detail::apply_activation(z, layer.act);
    cache.a.push_back(std::move(z));
  }
  return cache.a.back();
}

// Pulls an output-space gradient back to the input of the network.
// grad_out is dJ/d(output), same shape as the output batch.
inline Matrix backprop_to_input(const MlpModel& model, const ForwardCache& cache,
                                const Matrix& grad_out) {
  if (cache.z.size() != model.layers.size())
    throw ShapeMismatch("backprop_to_input: cache does not match model");
  Matrix g = grad_out;
  for (int i = static_cast<int>(model.layers.size()) - 1; i >= 0; --i) {
    g = g.cwiseProduct(detail::activation_deriv(cache.z[static_cast<std::size_t>(i)],
                                                model.layers[static_cast<std::size_t>(i)].act));
    g = g * model.layers[static_cast<std::size_t>(i)].w;
  }
  return g;
}

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 256;
  int max_epochs = 200;
  int patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t master_seed = 1;
  std::uint64_t stream_index = 0;  // 0 deployed model, 1 surrogate

  void validate() const {
    if (!(learning_rate > 0)) throw BadConfig("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1 || max_epochs < 1 || patience < 1)
      throw BadConfig("TrainConfig: batch_size, max_epochs, patience must be >= 1");
  }
};

struct TrainResult {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  double final_train_mse = 0.0;
  std::vector<double> val_mse_history;
};

namespace detail {

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long step = 0;

  explicit AdamState(const MlpModel& model) {
    for (const auto& l : model.layers) {
      mw.push_back(Matrix::Zero(l.w.rows(), l.w.cols()));
      vw.push_back(Matrix::Zero(l.w.rows(), l.w.cols()));
      mb.push_back(Vector::Zero(l.b.size()));
      vb.push_back(Vector::Zero(l.b.size()));
    }
  }

  void update(MlpModel& model, const std::vector<Matrix>& gw, const std::vector<Vector>& gb,
              double lr) {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++step;
    double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      mw[i] = b1 * mw[i] + (1 - b1) * gw[i];
      vw[i] = b2 * vw[i] + (1 - b2) * gw[i].cwiseProduct(gw[i]);
      model.layers[i].w.array() -=
          lr * (mw[i].array() / c1) / ((vw[i].array() / c2).sqrt() + eps);
      mb[i] = b1 * mb[i] + (1 - b1) * gb[i];
      vb[i] = b2 * vb[i] + (1 - b2) * gb[i].cwiseProduct(gb[i]);
      model.layers[i].b.array() -=
          lr * (mb[i].array() / c1) / ((vb[i].array() / c2).sqrt() + eps);
    }
  }
};

inline double mse(const Matrix& pred, const Matrix& target) {
  return (pred - target).squaredNorm() /
         static_cast<double>(pred.rows() * pred.cols());
}

}  // namespace detail

// Minimizes MSE between predicted and reference load shares. Rows of x/y
// are samples; x is already standardized. Early stopping tracks validation
// MSE and the best-epoch weights are restored before returning.
inline TrainResult train(MlpModel& model, const Matrix& x_train, const Matrix& y_train,
                         const Matrix& x_val, const Matrix& y_val, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (x_train.rows() != y_train.rows() || x_val.rows() != y_val.rows())
    throw ShapeMismatch("train: sample count mismatch between inputs and targets");
  if (x_train.rows() == 0 || x_val.rows() == 0) throw EmptySamples("train: empty split");
  if (x_train.cols() != model.input_dim() || y_train.cols() != model.output_dim())
    throw ShapeMismatch("train: dataset dims do not match model");

  const auto n = static_cast<std::size_t>(x_train.rows());
  RngStream shuffle_rng(cfg.master_seed, StreamPurpose::kShuffle, cfg.stream_index);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  detail::AdamState adam(model);
  TrainResult result;
  MlpModel best = model;
  result.best_val_mse = detail::mse(forward(model, x_val), y_val);
  int since_best = 0;

  std::vector<Matrix> gw(model.layers.size());
  std::vector<Vector> gb(model.layers.size());
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t len = std::min(static_cast<std::size_t>(cfg.batch_size), n - start);
      Matrix xb(static_cast<Eigen::Index>(len), x_train.cols());
      Matrix yb(static_cast<Eigen::Index>(len), y_train.cols());
      for (std::size_t i = 0; i < len; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) =
            x_train.row(static_cast<Eigen::Index>(order[start + i]));
        yb.row(static_cast<Eigen::Index>(i)) =
            y_train.row(static_cast<Eigen::Index>(order[start + i]));
      }
      ForwardCache cache;
      Matrix pred = forward_cached(model, xb, cache);
      double loss = detail::mse(pred, yb);
      if (!std::isfinite(loss)) throw DivergedLoss("train: loss is not finite");
      train_loss += loss;
      ++batches;

      Matrix g = (2.0 / static_cast<double>(pred.rows() * pred.cols())) * (pred - yb);
      for (int li = static_cast<int>(model.layers.size()) - 1; li >= 0; --li) {
        auto i = static_cast<std::size_t>(li);
        g = g.cwiseProduct(detail::activation_deriv(cache.z[i], model.layers[i].act));
        gw[i] = g.transpose() * cache.a[i];
        gb[i] = g.colwise().sum().transpose();
        if (li > 0) g = g * model.layers[i].w;
      }
      adam.update(model, gw, gb, cfg.learning_rate);
    }
    result.final_train_mse = train_loss / static_cast<double>(batches);

    double val_loss = detail::mse(forward(model, x_val), y_val);
    if (!std::isfinite(val_loss)) throw DivergedLoss("train: validation loss is not finite");
    result.val_mse_history.push_back(val_loss);
    result.epochs_run = epoch;
    if (val_loss < result.best_val_mse) {
      result.best_val_mse = val_loss;
      result.best_epoch = epoch;
      best = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  model = std::move(best);
  return result;
}

// Inference path of the control point: standardize the reported fading,
// run the network, undo the load-share encoding (eta = nu / beta_reported),
// then project onto the per-RU budget set. The report is all the CP knows,
// so both the recovery and the projection use it, perturbed or not.
inline PowerCoefficients predict_allocation(const MlpModel& model,
                                            const BetaMatrix& beta_reported) {
  beta_reported.validate();
  Vector x_db = flatten(beta_reported.to_db());
  if (x_db.size() != model.input_dim())
    throw ShapeMismatch("predict_allocation: feature length mismatch");
  Vector x = standardize_db(x_db, model.stats);
  Matrix nu_row = forward(model, x.transpose());
  Matrix nu = unflatten(nu_row.row(0).transpose(), beta_reported.num_rus(),
                        beta_reported.num_ues());
  PowerCoefficients eta;
  eta.values = nu.array() / beta_reported.values.array();
  return project_feasible(beta_reported.values, eta.values);
}

// Adversarial objective J(x) = sum_k SE_k where the allocation comes from
// the network fed with report x and the rate is evaluated at a fixed
// believed channel: eta(x) = nu(x)/beta_belief without projection, so J is
// smooth in x. Only the network path is differentiated; beta_belief is a
// constant both in the recovery and the SINR formula, which makes the
// analytic gradient the exact derivative of this function.
struct GradientRequest {
  Vector x_db;        // report fed to the model, flat dB, index = m*K + k
  BetaMatrix belief;  // adversary's stand-in for the physical channel
};

struct SumSeObjective {
  double sum_se = 0.0;
  Vector grad_db;  // dJ/dx_db, filled on request
};

inline SumSeObjective sum_se_objective(const MlpModel& model, const GradientRequest& req,
                                       double total_power_w, double noise_power_w,
                                       bool want_grad) {
  req.belief.validate();
  const int num_rus = req.belief.num_rus();
  const int num_ues = req.belief.num_ues();
  if (req.x_db.size() != model.input_dim())
    throw ShapeMismatch("sum_se_objective: feature length mismatch");
  if (static_cast<Eigen::Index>(num_rus) * num_ues != req.x_db.size())
    throw ShapeMismatch("sum_se_objective: belief shape does not match features");
  if (!(total_power_w > 0)) throw ZeroPower("sum_se_objective: total power must be > 0");

  Vector x_std = standardize_db(req.x_db, model.stats);
  ForwardCache cache;
  Matrix nu_row = forward_cached(model, x_std.transpose(), cache);
  Matrix nu = unflatten(nu_row.row(0).transpose(), num_rus, num_ues);
  const Matrix& beta = req.belief.values;

  // With nu = eta beta: SINR_k = P_t G_k^2 / den_k, G_k = sum_m
  // sqrt(nu_mk beta_mk), den_k = P_t sum_m S_m beta_mk + sigma^2 and
  // S_m = sum_l nu_ml. The logistic head keeps nu in (0,1); the floor
  // only guards the sqrt against underflow.
  const double floor_nu = 1e-12;
  Matrix nu_safe = nu.cwiseMax(floor_nu);
  Eigen::ArrayXd gain = (nu_safe.array() * beta.array()).sqrt().colwise().sum().transpose();
  Vector load = nu_safe.rowwise().sum();
  Eigen::ArrayXd den = total_power_w * (beta.transpose() * load).array() + noise_power_w;
  Eigen::ArrayXd sinr = total_power_w * gain.square() / den;

  SumSeObjective out;
  out.sum_se = (sinr + 1.0).log().sum() / std::log(2.0);
  if (!want_grad) return out;

  // dJ/dnu_mj = q_j P_t G_j / den_j sqrt(beta_mj / nu_mj)
  //             - sum_k q_k SINR_k P_t beta_mk / den_k
  // with q_k = 1 / ((1 + SINR_k) ln 2).
  const double ln2 = std::log(2.0);
  Eigen::ArrayXd q = 1.0 / ((1.0 + sinr) * ln2);
  Eigen::ArrayXd coef = q * total_power_w * gain / den;
  Vector pull = beta * (q * total_power_w * sinr / den).matrix();
  Matrix d_nu = ((beta.array() / nu_safe.array()).sqrt().rowwise() * coef.transpose()).matrix() -
                pull.replicate(1, num_ues);

  Matrix grad_std = backprop_to_input(model, cache, flatten(d_nu).transpose());
  out.grad_db =
      (grad_std.row(0).transpose().array() / model.stats.std_db.array()).matrix();
  return out;
}

inline Vector input_gradient(const MlpModel& model, const GradientRequest& req,
                             double total_power_w, double noise_power_w) {
  return sum_se_objective(model, req, total_power_w, noise_power_w, true).grad_db;
}

// FNV-1a over the little-endian weight and bias bytes, layer by layer.
// Stable across runs; used to pin a trained model in reports.
inline std::string model_fingerprint(const MlpModel& model) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &data[i], sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ULL;
      }
    }
  };
  for (const auto& l : model.layers) {
    // Row-major traversal regardless of Eigen's storage order.
    for (Eigen::Index r = 0; r < l.w.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
        double v = l.w(r, c);
        mix(&v, 1);
      }
    mix(l.b.data(), static_cast<std::size_t>(l.b.size()));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace detail {

constexpr char kModelMagic[8] = {'D', 'M', 'M', 'L', '0', '0', '0', '1'};

}  // namespace detail

// Model file: 8-byte magic, u64 LE header length, JSON header, then per
// layer the row-major weight block followed by the bias block, all f64 LE.
inline void save_model(const MlpModel& model, const std::string& path) {
  model.validate();
  nlohmann::json header;
  header["format"] = "dmimo-mlp";
  header["fingerprint"] = model_fingerprint(model);
  header["feature_stats"]["mean_db"] =
      std::vector<double>(model.stats.mean_db.data(),
                          model.stats.mean_db.data() + model.stats.mean_db.size());
  header["feature_stats"]["std_db"] =
      std::vector<double>(model.stats.std_db.data(),
                          model.stats.std_db.data() + model.stats.std_db.size());
  header["layers"] = nlohmann::json::array();
  for (const auto& l : model.layers) {
    header["layers"].push_back({{"in", l.w.cols()},
                                {"out", l.w.rows()},
                                {"activation", activation_tag(l.act)}});
  }
  std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_model: cannot open '" + path + "'");
  out.write(detail::kModelMagic, sizeof detail::kModelMagic);
  std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& l : model.layers) {
    for (Eigen::Index r = 0; r < l.w.rows(); ++r)
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) {
        double v = l.w(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    out.write(reinterpret_cast<const char*>(l.b.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(l.b.size())));
  }
  if (!out) throw IoError("save_model: write failed for '" + path + "'");
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_model: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::kModelMagic, sizeof magic) != 0)
    throw IoError("load_model: bad magic in '" + path + "'");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  if (!in || hlen == 0 || hlen > (1u << 20)) throw IoError("load_model: bad header length");
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw IoError("load_model: truncated header");
  nlohmann::json header = nlohmann::json::parse(htext, nullptr, false);
  if (header.is_discarded()) throw IoError("load_model: header is not valid JSON");

  MlpModel model;
  auto mean = header.at("feature_stats").at("mean_db").get<std::vector<double>>();
  auto stdv = header.at("feature_stats").at("std_db").get<std::vector<double>>();
  model.stats.mean_db = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  model.stats.std_db = Eigen::Map<const Vector>(stdv.data(), static_cast<Eigen::Index>(stdv.size()));
  for (const auto& lj : header.at("layers")) {
    MlpLayer l;
    auto in_dim = lj.at("in").get<Eigen::Index>();
    auto out_dim = lj.at("out").get<Eigen::Index>();
    l.act = activation_from_tag(lj.at("activation").get<std::string>());
    l.w.resize(out_dim, in_dim);
    for (Eigen::Index r = 0; r < out_dim; ++r)
      for (Eigen::Index c = 0; c < in_dim; ++c) {
        double v;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        l.w(r, c) = v;
      }
    l.b.resize(out_dim);
    in.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(out_dim)));
    if (!in) throw IoError("load_model: truncated weights");
    model.layers.push_back(std::move(l));
  }
  model.validate();
  auto expect = header.at("fingerprint").get<std::string>();
  if (model_fingerprint(model) != expect)
    throw IoError("load_model: fingerprint mismatch, file corrupted");
  return model;
}

}  // namespace dmimo

#endif  // DMIMO_MLP_HPP
