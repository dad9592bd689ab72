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
// The adversary's toolbox: gradient-sign attacks (single step and
// iterative), a Gaussian noise baseline, and a masked universal
// perturbation built from the singular structure of accumulated
// gradients. All perturbations live in the dB domain of the fading
// report, are confined to an infinity-norm ball of radius epsilon around
// the clean report, and may only touch entries the attacker controls:
// links of compromised RUs (rows) or compromised UEs (columns). The
// gradient attacks ascend the attack loss L = -sum_k SE_k; the rate is
// evaluated under the attacker's fixed believed channel, so the gradient
// is exact and finite-difference checkable.

#ifndef DMIMO_ATTACK_HPP
#define DMIMO_ATTACK_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "dmimo/core.hpp"
#include "dmimo/mlp.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

enum class ThreatTag { kFull, kMaliciousRus, kMaliciousUes };

inline const char* threat_tag_name(ThreatTag t) {
  switch (t) {
    case ThreatTag::kFull: return "full";
    case ThreatTag::kMaliciousRus: return "malicious_rus";
    case ThreatTag::kMaliciousUes: return "malicious_ues";
  }
  throw BadConfig("threat_tag_name: unknown tag");
}

// What the adversary can see and what it can change. In the threat models
// here the two coincide (a compromised node's links are both observable
// and forgeable), but the fields stay separate because the universal
// attack consumes "known" while the budget contract constrains
// "modifiable", and modifiable must never exceed known.
struct AttackMask {
  ThreatTag tag = ThreatTag::kFull;
  Matrix known;       // M x K, entries 0 or 1
  Matrix modifiable;  // M x K, entries 0 or 1, subset of known

  int num_rus() const { return static_cast<int>(known.rows()); }
  int num_ues() const { return static_cast<int>(known.cols()); }
  int num_modifiable() const { return static_cast<int>(modifiable.sum()); }
  Vector known_flat() const { return flatten(known); }
  Vector modifiable_flat() const { return flatten(modifiable); }

  void validate() const {
    if (known.rows() != modifiable.rows() || known.cols() != modifiable.cols())
      throw ShapeMismatch("AttackMask: known/modifiable shape mismatch");
    if (((modifiable.array() == 1.0) && (known.array() == 0.0)).any())
      throw BadConfig("AttackMask: modifiable entries must be known");
  }
};

// MALICIOUS_RUS marks whole rows, MALICIOUS_UES whole columns, FULL
// everything; marked entries are both known and modifiable.
inline AttackMask make_mask(ThreatTag tag, const std::vector<int>& malicious_indices,
                            int num_rus, int num_ues) {
  if (num_rus < 1 || num_ues < 1) throw BadConfig("make_mask: dims must be >= 1");
  AttackMask mask;
  mask.tag = tag;
  mask.known = Matrix::Zero(num_rus, num_ues);
  switch (tag) {
    case ThreatTag::kFull:
      mask.known.setOnes();
      break;
    case ThreatTag::kMaliciousRus:
      for (int m : malicious_indices) {
        if (m < 0 || m >= num_rus) throw IndexOutOfRange("make_mask: RU index out of range");
        mask.known.row(m).setOnes();
      }
      break;
    case ThreatTag::kMaliciousUes:
      for (int k : malicious_indices) {
        if (k < 0 || k >= num_ues) throw IndexOutOfRange("make_mask: UE index out of range");
        mask.known.col(k).setOnes();
      }
      break;
  }
  mask.modifiable = mask.known;
  return mask;
}

struct AttackConfig {
  double epsilon_db = 8.0;  // infinity-norm budget per entry
  double alpha_db = 1.0;    // per-iteration step, at most epsilon
  int num_iters = 10;
  int uap_pool_size = 32;  // surrogate reports drawn from the test split

  void validate() const {
    if (!(epsilon_db > 0)) throw BadConfig("AttackConfig: epsilon_db must be > 0");
    if (!(alpha_db > 0) || alpha_db > epsilon_db)
      throw BadConfig("AttackConfig: need 0 < alpha_db <= epsilon_db");
    if (num_iters < 1) throw BadConfig("AttackConfig: num_iters must be >= 1");
    if (uap_pool_size < 1) throw BadConfig("AttackConfig: uap_pool_size must be >= 1");
  }
};

struct Perturbation {
  Vector delta_db;  // flat MK, zero off-mask, |entry| <= epsilon
};

// Hard invariant every attack must satisfy on exit. A violation is a bug
// in the attack implementation, not a recoverable condition.
inline void check_perturbation(const Perturbation& p, const AttackMask& mask,
                               double epsilon_db) {
  Vector mf = mask.modifiable_flat();
  if (p.delta_db.size() != mf.size())
    throw ShapeMismatch("check_perturbation: delta length does not match mask");
  const double slack = 1e-12;
  for (Eigen::Index i = 0; i < p.delta_db.size(); ++i) {
    if (!(std::abs(p.delta_db[i]) <= epsilon_db + slack))
      throw BudgetViolation("perturbation exceeds the epsilon budget");
    if (mf[i] == 0.0 && p.delta_db[i] != 0.0)
      throw BudgetViolation("perturbation touches an entry outside the mask");
  }
}

// The forged report: clean dB values plus the perturbation, back in
// linear scale for the control point.
inline BetaMatrix apply_attack(const BetaMatrix& beta_true, const Perturbation& delta) {
  beta_true.validate();
  Vector db = flatten(beta_true.to_db());
  if (delta.delta_db.size() != db.size())
    throw ShapeMismatch("apply_attack: delta length does not match beta");
  return BetaMatrix::from_db(
      unflatten(db + delta.delta_db, beta_true.num_rus(), beta_true.num_ues()));
}

namespace detail {

// Deterministic sign with the tie at zero broken upward.
inline double sign_up(double v) { return v >= 0.0 ? 1.0 : -1.0; }

}  // namespace detail

struct BimResult {
  Perturbation perturbation;
  Vector x_adv_db;
  Vector rho;  // accumulated masked attack-loss gradients, one per iteration
  double loss_before = 0.0;  // -sum SE under the belief at the clean report
  double loss_after = 0.0;
  int iters_run = 0;
};

// Iterative gradient-sign ascent on L = -sum_k SE_k. Each step masks the
// gradient, moves modifiable entries by alpha in its sign direction, and
// re-clips to the epsilon box around the start. Off-mask entries never
// move because the step is gated by the mask, not by sign(0).
inline BimResult bim_attack(const MlpModel& model, const Vector& x_start_db,
                            const BetaMatrix& belief, const AttackMask& mask,
                            const AttackConfig& cfg, double total_power_w,
                            double noise_power_w) {
  cfg.validate();
  mask.validate();
  Vector mf = mask.modifiable_flat();
  if (x_start_db.size() != mf.size()) throw ShapeMismatch("bim_attack: feature/mask mismatch");

  BimResult res;
  res.rho = Vector::Zero(x_start_db.size());
  Vector x = x_start_db;
  GradientRequest req;
  req.belief = belief;
  for (int it = 0; it < cfg.num_iters; ++it) {
    req.x_db = x;
    auto obj = sum_se_objective(model, req, total_power_w, noise_power_w, true);
    if (it == 0) res.loss_before = -obj.sum_se;
    Vector g = ((-obj.grad_db.array()) * mf.array()).matrix();
    res.rho += g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (mf[i] == 0.0) continue;
      double v = x[i] + cfg.alpha_db * detail::sign_up(g[i]);
      x[i] = std::clamp(v, x_start_db[i] - cfg.epsilon_db, x_start_db[i] + cfg.epsilon_db);
    }
    res.iters_run = it + 1;
  }
  req.x_db = x;
  res.loss_after = -sum_se_objective(model, req, total_power_w, noise_power_w, false).sum_se;
  res.x_adv_db = x;
  res.perturbation.delta_db = x - x_start_db;
  check_perturbation(res.perturbation, mask, cfg.epsilon_db);
  return res;
}

// Single sign step of size epsilon: bim_attack with one iteration and
// alpha = epsilon.
inline BimResult fgsm_attack(const MlpModel& model, const Vector& x_start_db,
                             const BetaMatrix& belief, const AttackMask& mask,
                             double epsilon_db, double total_power_w,
                             double noise_power_w) {
  AttackConfig cfg;
  cfg.epsilon_db = epsilon_db;
  cfg.alpha_db = epsilon_db;
  cfg.num_iters = 1;
  return bim_attack(model, x_start_db, belief, mask, cfg, total_power_w, noise_power_w);
}

// Model-free baseline with the same worst-case budget: independent
// N(0, epsilon^2) noise on the modifiable entries, clipped to the box.
inline Perturbation gaussian_attack(const AttackMask& mask, double epsilon_db,
                                    RngStream& rng) {
  if (!(epsilon_db > 0)) throw BadConfig("gaussian_attack: epsilon_db must be > 0");
  mask.validate();
  Vector mf = mask.modifiable_flat();
  Perturbation p;
  p.delta_db = Vector::Zero(mf.size());
  for (Eigen::Index i = 0; i < mf.size(); ++i) {
    if (mf[i] == 0.0) continue;
    p.delta_db[i] = std::clamp(epsilon_db * rng.normal(), -epsilon_db, epsilon_db);
  }
  check_perturbation(p, mask, epsilon_db);
  return p;
}

struct UapResult {
  Perturbation perturbation;
  double chosen_sign = 1.0;
  double singular_gap = 0.0;
  bool degenerate_spectrum = false;  // top two singular values coincide
};

// Universal perturbation for an adversary that sees only part of the live
// report. Pool rows (drawn from the test split) stand in for the unknown
// entries: each row's known entries are overwritten with the live values,
// the iterative attack runs on every such surrogate report, and the
// accumulated gradients are stacked into a matrix whose principal right
// singular vector is the shared direction. Since the opposite vector is
// equally valid, the sign whose epsilon-scaled step hurts the summed
// believed rate of the surrogates more is selected, and only then is the
// direction restricted to the modifiable mask.
inline UapResult m_uap_attack(const MlpModel& model, const Vector& x_live_db,
                              const AttackMask& mask, const Matrix& pool_db,
                              const AttackConfig& cfg, double total_power_w,
                              double noise_power_w) {
  cfg.validate();
  mask.validate();
  Vector kf = mask.known_flat();
  Vector mf = mask.modifiable_flat();
  if (x_live_db.size() != kf.size()) throw ShapeMismatch("m_uap_attack: feature/mask mismatch");
  if (pool_db.cols() != x_live_db.size())
    throw ShapeMismatch("m_uap_attack: pool feature length mismatch");
  if (pool_db.rows() < 1) throw EmptySamples("m_uap_attack: empty pool");

  const int m = mask.num_rus();
  const int k = mask.num_ues();
  const auto n = pool_db.rows();
  Matrix surrogates(n, pool_db.cols());
  Matrix stacked(n, pool_db.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector xi = pool_db.row(i).transpose();
    for (Eigen::Index j = 0; j < xi.size(); ++j)
      if (kf[j] != 0.0) xi[j] = x_live_db[j];
    surrogates.row(i) = xi.transpose();
    BetaMatrix belief_i = BetaMatrix::from_db(unflatten(xi, m, k));
    auto bim = bim_attack(model, xi, belief_i, mask, cfg, total_power_w, noise_power_w);
    stacked.row(i) = bim.rho.transpose();
  }

  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
  UapResult out;
  const auto& sv = svd.singularValues();
  if (sv.size() > 1) {
    out.singular_gap = sv[0] - sv[1];
    out.degenerate_spectrum = out.singular_gap <= 1e-9 * std::max(sv[0], 1e-300);
  }
  Vector v1 = svd.matrixV().col(0);
  Vector delta(v1.size());
  for (Eigen::Index i = 0; i < v1.size(); ++i)
    delta[i] = cfg.epsilon_db * detail::sign_up(v1[i]);

  // Either orientation of v1 is a valid singular vector; evaluate the
  // summed believed rate of the surrogate reports under both and keep the
  // more damaging one, ties to +.
  double sum_se_pos = 0, sum_se_neg = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    GradientRequest req;
    req.belief = BetaMatrix::from_db(unflatten(surrogates.row(i).transpose(), m, k));
    req.x_db = surrogates.row(i).transpose() + delta;
    sum_se_pos += sum_se_objective(model, req, total_power_w, noise_power_w, false).sum_se;
    req.x_db = surrogates.row(i).transpose() - delta;
    sum_se_neg += sum_se_objective(model, req, total_power_w, noise_power_w, false).sum_se;
  }
  out.chosen_sign = sum_se_pos <= sum_se_neg ? 1.0 : -1.0;
  out.perturbation.delta_db = ((out.chosen_sign * delta.array()) * mf.array()).matrix();
  check_perturbation(out.perturbation, mask, cfg.epsilon_db);
  return out;
}

}  // namespace dmimo

#endif  // DMIMO_ATTACK_HPP
