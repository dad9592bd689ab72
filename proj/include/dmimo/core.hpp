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
// Closed-form physical-layer arithmetic for MRT downlink with statistical
// CSI at the users:
//
//   SINR_k = P_t (sum_m sqrt(eta_mk) beta_mk)^2
//            / (P_t sum_l sum_m eta_ml beta_ml beta_mk + sigma^2)
//   SE_k   = log2(1 + SINR_k)
//   EE     = sum_k BW_k SE_k / (P_t sum_m sum_k eta_mk beta_mk)
//
// The l = k self-term stays in the SINR denominator: it carries the
// coherent-gain uncertainty and is not subtracted.

#ifndef DMIMO_CORE_HPP
#define DMIMO_CORE_HPP

#include <cmath>

#include "dmimo/types.hpp"

namespace dmimo {

inline void check_same_shape(const Matrix& beta, const Matrix& eta) {
  if (beta.rows() != eta.rows() || beta.cols() != eta.cols())
    throw ShapeMismatch("beta and eta shapes differ");
}

// Per-user SINR for a given allocation. eta entries must be >= 0.
inline Vector compute_sinr(const Matrix& beta, const Matrix& eta, double total_power_w,
                           double noise_power_w) {
  check_same_shape(beta, eta);
  if ((eta.array() < 0.0).any()) throw Error("compute_sinr: eta must be non-negative");
  const int K = static_cast<int>(beta.cols());
  // w_m = sum_l eta_ml beta_ml, shared across users
  Vector w = (eta.cwiseProduct(beta)).rowwise().sum();
  Vector gain = (eta.cwiseSqrt().cwiseProduct(beta)).colwise().sum().transpose();
  Vector sinr(K);
  for (int k = 0; k < K; ++k) {
    double interference = beta.col(k).dot(w);
    sinr[k] = total_power_w * gain[k] * gain[k] /
              (total_power_w * interference + noise_power_w);
  }
  return sinr;
}

inline Vector compute_se(const Vector& sinr) {
  if ((sinr.array() < 0.0).any()) throw NegativeSinr("compute_se: sinr must be non-negative");
  return (sinr.array() + 1.0).log().matrix() / std::log(2.0);
}

// Energy efficiency of the access link, bits per joule.
inline double compute_ee(const Matrix& beta, const Matrix& eta, const Vector& se,
                         double bandwidth_hz, double total_power_w) {
  check_same_shape(beta, eta);
  double spent = (eta.cwiseProduct(beta)).sum();
  if (!(spent > 0.0)) throw ZeroPower("compute_ee: total allocated power is zero");
  return bandwidth_hz * se.sum() / (total_power_w * spent);
}

// Per-RU load v_m = sum_k eta_mk beta_mk; the allocation is feasible iff
// max_m v_m <= 1.
inline Vector power_violation(const Matrix& beta, const Matrix& eta) {
  check_same_shape(beta, eta);
  return (eta.cwiseProduct(beta)).rowwise().sum();
}

// Clamp negatives to zero, then scale any overloaded RU row back onto its
// budget. Feasible rows pass through untouched, so the map is idempotent
// and never increases an entry.
inline PowerCoefficients project_feasible(const Matrix& beta, const Matrix& eta) {
  check_same_shape(beta, eta);
  PowerCoefficients out;
  out.values = eta.cwiseMax(0.0);
  Vector v = power_violation(beta, out.values);
  for (Eigen::Index m = 0; m < v.size(); ++m)
    if (v[m] > 1.0) out.values.row(m) /= v[m];
  return out;
}

inline SpectralMetrics compute_metrics(const Matrix& beta, const Matrix& eta,
                                       const NetworkConfig& cfg) {
  SpectralMetrics m;
  m.sinr = compute_sinr(beta, eta, cfg.total_power_w, cfg.noise_power_w);
  m.se = compute_se(m.sinr);
  m.min_se = m.se.minCoeff();
  m.sum_se = m.se.sum();
  double spent = (eta.cwiseProduct(beta)).sum();
  m.ee = spent > 0.0 ? compute_ee(beta, eta, m.se, cfg.bandwidth_hz, cfg.total_power_w) : 0.0;
  return m;
}

// --- feature transforms -----------------------------------------------------

inline void check_stats(const FeatureStats& stats) {
  if ((stats.std_db.array() < 1e-12).any())
    throw DegenerateStd("feature std below 1e-12");
  if (stats.mean_db.size() != stats.std_db.size())
    throw ShapeMismatch("feature stats mean/std length mismatch");
}

// dB-domain vector -> standardized feature vector.
inline Vector standardize_db(const Vector& x_db, const FeatureStats& stats) {
  check_stats(stats);
  if (x_db.size() != stats.mean_db.size())
    throw ShapeMismatch("standardize_db: input length does not match stats");
  return ((x_db - stats.mean_db).array() / stats.std_db.array()).matrix();
}

inline Vector destandardize_db(const Vector& x, const FeatureStats& stats) {
  check_stats(stats);
  if (x.size() != stats.mean_db.size())
    throw ShapeMismatch("destandardize_db: input length does not match stats");
  return (x.array() * stats.std_db.array()).matrix() + stats.mean_db;
}

inline Vector standardize(const BetaMatrix& beta, const FeatureStats& stats) {
  return standardize_db(flatten(beta.to_db()), stats);
}

inline BetaMatrix destandardize(const Vector& x, const FeatureStats& stats, int num_rus,
                                int num_ues) {
  return BetaMatrix::from_db(unflatten(destandardize_db(x, stats), num_rus, num_ues));
}

}  // namespace dmimo

#endif  // DMIMO_CORE_HPP
