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

#ifndef DMIMO_BENCH_HPP
#define DMIMO_BENCH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dmimo/attack.hpp"
#include "dmimo/core.hpp"
#include "dmimo/dataset.hpp"
#include "dmimo/errors.hpp"
#include "dmimo/mlp.hpp"
#include "dmimo/mmf.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/scenario.hpp"
#include "dmimo/stats.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

// Which rule turns a (possibly forged) report into power coefficients.
enum class Allocator { kAnalytic, kOriginal, kSurrogate };

// Which perturbation is injected into the report before allocation.
enum class AttackKind { kNone, kGaussian, kFgsm, kBim, kMuap };

// Which model the adversary differentiates to craft the perturbation.
enum class Crafter { kNone, kOriginal, kSurrogate };

inline const char* allocator_name(Allocator a) {
  switch (a) {
    case Allocator::kAnalytic: return "analytic";
    case Allocator::kOriginal: return "original";
    case Allocator::kSurrogate: return "surrogate";
  }
  throw BadConfig("allocator_name: unknown value");
}

inline const char* attack_kind_name(AttackKind a) {
  switch (a) {
    case AttackKind::kNone: return "clean";
    case AttackKind::kGaussian: return "gaussian";
    case AttackKind::kFgsm: return "fgsm";
    case AttackKind::kBim: return "bim";
    case AttackKind::kMuap: return "muap";
  }
  throw BadConfig("attack_kind_name: unknown value");
}

inline const char* crafter_name(Crafter c) {
  switch (c) {
    case Crafter::kNone: return "none";
    case Crafter::kOriginal: return "original";
    case Crafter::kSurrogate: return "surrogate";
  }
  throw BadConfig("crafter_name: unknown value");
}

inline Allocator allocator_from_name(const std::string& s) {
  if (s == "analytic") return Allocator::kAnalytic;
  if (s == "original") return Allocator::kOriginal;
  if (s == "surrogate") return Allocator::kSurrogate;
  throw BadConfig("allocator_from_name: " + s);
}

inline AttackKind attack_kind_from_name(const std::string& s) {
  if (s == "clean") return AttackKind::kNone;
  if (s == "gaussian") return AttackKind::kGaussian;
  if (s == "fgsm") return AttackKind::kFgsm;
  if (s == "bim") return AttackKind::kBim;
  if (s == "muap") return AttackKind::kMuap;
  throw BadConfig("attack_kind_from_name: " + s);
}

inline Crafter crafter_from_name(const std::string& s) {
  if (s == "none") return Crafter::kNone;
  if (s == "original") return Crafter::kOriginal;
  if (s == "surrogate") return Crafter::kSurrogate;
  throw BadConfig("crafter_from_name: " + s);
}

inline ThreatTag threat_tag_from_name(const std::string& s) {
  if (s == "full") return ThreatTag::kFull;
  if (s == "malicious_rus") return ThreatTag::kMaliciousRus;
  if (s == "malicious_ues") return ThreatTag::kMaliciousUes;
  throw BadConfig("threat_tag_from_name: " + s);
}

// One evaluation arm: an allocator judged at the true channel after a
// chosen perturbation of the report it sees.
struct ScenarioSpec {
  Allocator allocator = Allocator::kOriginal;
  AttackKind attack = AttackKind::kNone;
  Crafter crafter = Crafter::kNone;
  ThreatTag threat = ThreatTag::kFull;
  double malicious_fraction = 1.0;  // of RUs or UEs, ignored for FULL
  AttackConfig attack_cfg;          // ignored for the clean arm

  void validate() const {
    bool gradient_attack = attack == AttackKind::kFgsm || attack == AttackKind::kBim ||
                           attack == AttackKind::kMuap;
    if (gradient_attack && crafter == Crafter::kNone)
      throw BadConfig("ScenarioSpec: gradient attack needs a crafter");
    if (!gradient_attack && crafter != Crafter::kNone)
      throw BadConfig("ScenarioSpec: crafter given for a model-free arm");
    if (attack != AttackKind::kNone) {
      attack_cfg.validate();
      if (threat != ThreatTag::kFull &&
          (!(malicious_fraction > 0.0) || malicious_fraction > 1.0))
        throw BadConfig("ScenarioSpec: malicious_fraction must be in (0, 1]");
    }
  }

  std::string label() const {
    std::ostringstream os;
    os << allocator_name(allocator) << '-' << attack_kind_name(attack);
    if (crafter != Crafter::kNone) os << "-by-" << crafter_name(crafter);
    if (attack != AttackKind::kNone) {
      switch (threat) {
        case ThreatTag::kFull: os << "-full"; break;
        case ThreatTag::kMaliciousRus:
          os << "-ru-f" << static_cast<int>(std::lround(100.0 * malicious_fraction));
          break;
        case ThreatTag::kMaliciousUes:
          os << "-ue-f" << static_cast<int>(std::lround(100.0 * malicious_fraction));
          break;
      }
      os << "-eps" << attack_cfg.epsilon_db << "db";
    }
    return os.str();
  }
};

// Point estimate plus its bootstrap standard error under the shared plan.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct ScenarioResult {
  ScenarioSpec spec;
  std::string label;
  std::size_t num_instances = 0;

  // Instance i owns per_user_se[i*K .. (i+1)*K) and entry i of the rest.
  std::vector<double> per_user_se;
  std::vector<double> min_se;
  std::vector<double> sum_se;
  std::vector<double> ee;

  Estimate median_per_user_se;
  Estimate p5_per_user_se;
  Estimate median_min_se;
  Estimate mean_sum_se;
  Estimate mean_ee;

  std::size_t budget_checks = 0;      // crafted perturbations revalidated
  std::size_t degenerate_spectra = 0;  // universal attacks with a tied top pair
  double max_abs_delta_db = 0.0;
};

// Shared evaluation state: frozen held-out instances, their analytic
// solutions, per-instance compromise orders, the surrogate report pool,
// and memoized bootstrap plans. Instance i is identical across arms, so
// every comparison is paired by construction.
struct EvalContext {
  NetworkConfig config;
  SolverConfig solver;
  const MlpModel* original = nullptr;
  const MlpModel* surrogate = nullptr;
  int bootstrap_replicates = 1000;

  std::vector<BetaMatrix> beta_true;
  std::vector<Vector> clean_db;  // flat dB features of beta_true
  std::vector<SpectralMetrics> analytic_clean;
  std::vector<std::vector<int>> ru_order;  // compromise order, prefix = malicious set
  std::vector<std::vector<int>> ue_order;
  Matrix pool_db;  // universal-attack surrogate reports, one per row
  std::vector<std::size_t> pool_rows;  // dataset row ids behind pool_db

  std::size_t max_instances() const { return beta_true.size(); }

  const BootstrapPlan& plan(std::size_t n) const {
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    RngStream rng(config.master_seed, StreamPurpose::kBootstrap, n);
    auto ins = plans_.emplace(n, make_bootstrap_plan(n, bootstrap_replicates, rng));
    return ins.first->second;
  }

 private:
  mutable std::map<std::size_t, BootstrapPlan> plans_;
};

// Builds the held-out evaluation set on its own scenario streams (never
// the dataset generation streams), solves the analytic baseline once per
// instance, fixes one compromise order per instance and side, and draws
// the universal-attack pool from the dataset's validation split.
inline EvalContext make_eval_context(
    const NetworkConfig& cfg, std::size_t num_instances, const Dataset& dataset,
    const MlpModel* original, const MlpModel* surrogate, int pool_size,
    int bootstrap_replicates, const SolverConfig& solver = {},
    const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  cfg.validate();
  solver.validate();
  dataset.validate();
  if (num_instances < 1) throw BadConfig("make_eval_context: need >= 1 instance");
  if (pool_size < 1) throw BadConfig("make_eval_context: pool_size must be >= 1");
  if (static_cast<Eigen::Index>(pool_size) > dataset.val_count())
    throw BadConfig("make_eval_context: pool larger than the validation split");
  if (bootstrap_replicates < 2)
    throw BadConfig("make_eval_context: need >= 2 bootstrap replicates");

  EvalContext ctx;
  ctx.config = cfg;
  ctx.solver = solver;
  ctx.original = original;
  ctx.surrogate = surrogate;
  ctx.bootstrap_replicates = bootstrap_replicates;
  ctx.beta_true.reserve(num_instances);
  ctx.clean_db.reserve(num_instances);
  ctx.analytic_clean.reserve(num_instances);
  ctx.ru_order.reserve(num_instances);
  ctx.ue_order.reserve(num_instances);

  for (std::size_t i = 0; i < num_instances; ++i) {
    BetaMatrix beta = sample_scenario(cfg, cfg.master_seed, i,
                                      StreamPurpose::kEvalUePositions,
                                      StreamPurpose::kEvalShadowing);
    MmfSolution sol;
    try {
      sol = solve_mmf(beta, cfg.total_power_w, cfg.noise_power_w, solver);
    } catch (const Error& e) {
      throw SolverFailure("make_eval_context: analytic solve failed at instance " +
                              std::to_string(i) + ": " + e.what(),
                          beta);
    }
    ctx.analytic_clean.push_back(
        compute_metrics(beta.values, sol.eta.values, cfg));
    ctx.clean_db.push_back(flatten(beta.to_db()));
    ctx.beta_true.push_back(std::move(beta));

    std::vector<int> rus(static_cast<std::size_t>(cfg.num_rus));
    std::iota(rus.begin(), rus.end(), 0);
    RngStream ru_rng(cfg.master_seed, StreamPurpose::kMaskPerm, 2 * i);
    ru_rng.shuffle(rus);
    ctx.ru_order.push_back(std::move(rus));

    std::vector<int> ues(static_cast<std::size_t>(cfg.num_ues));
    std::iota(ues.begin(), ues.end(), 0);
    RngStream ue_rng(cfg.master_seed, StreamPurpose::kMaskPerm, 2 * i + 1);
    ue_rng.shuffle(ues);
    ctx.ue_order.push_back(std::move(ues));

    if (progress) progress(i + 1, num_instances);
  }

  std::vector<std::size_t> val_rows(static_cast<std::size_t>(dataset.val_count()));
  std::iota(val_rows.begin(), val_rows.end(),
            static_cast<std::size_t>(dataset.train_count));
  RngStream pool_rng(cfg.master_seed, StreamPurpose::kUapPool, 0);
  pool_rng.shuffle(val_rows);
  val_rows.resize(static_cast<std::size_t>(pool_size));
  ctx.pool_rows = val_rows;
  ctx.pool_db.resize(pool_size, dataset.beta_db.cols());
  for (int p = 0; p < pool_size; ++p)
    ctx.pool_db.row(p) = dataset.beta_db.row(static_cast<Eigen::Index>(val_rows[p]));
  return ctx;
}

namespace detail {

// Malicious set for one instance: the first ceil-rounded fraction of that
// instance's fixed compromise order, so sets nest as the fraction grows.
inline AttackMask instance_mask(const EvalContext& ctx, const ScenarioSpec& spec,
                                std::size_t instance) {
  int m = ctx.config.num_rus;
  int k = ctx.config.num_ues;
  if (spec.threat == ThreatTag::kFull) return make_mask(ThreatTag::kFull, {}, m, k);
  int total = spec.threat == ThreatTag::kMaliciousRus ? m : k;
  auto count = static_cast<int>(std::lround(spec.malicious_fraction * total));
  count = std::clamp(count, 1, total);
  const auto& order = spec.threat == ThreatTag::kMaliciousRus ? ctx.ru_order[instance]
                                                              : ctx.ue_order[instance];
  std::vector<int> malicious(order.begin(), order.begin() + count);
  return make_mask(spec.threat, malicious, m, k);
}

inline const MlpModel& crafter_model(const EvalContext& ctx, Crafter c) {
  const MlpModel* model = c == Crafter::kOriginal ? ctx.original : ctx.surrogate;
  if (model == nullptr) throw BadConfig("evaluate_scenario: crafter model not loaded");
  return *model;
}

inline std::function<double(const std::vector<std::size_t>&)> pooled_percentile_stat(
    const std::vector<double>& samples, std::size_t block, double p) {
  return [&samples, block, p](const std::vector<std::size_t>& rep) {
    std::vector<double> scratch;
    scratch.reserve(rep.size() * block);
    for (std::size_t ix : rep)
      for (std::size_t j = 0; j < block; ++j) scratch.push_back(samples[ix * block + j]);
    return percentile_inplace(scratch, p);
  };
}

inline std::function<double(const std::vector<std::size_t>&)> series_percentile_stat(
    const std::vector<double>& series, double p) {
  return [&series, p](const std::vector<std::size_t>& rep) {
    std::vector<double> scratch;
    scratch.reserve(rep.size());
    for (std::size_t ix : rep) scratch.push_back(series[ix]);
    return percentile_inplace(scratch, p);
  };
}

}  // namespace detail

// Runs one arm over the first num_instances held-out instances. The
// perturbation is crafted against the clean report, applied to it, and the
// resulting allocation is scored at the true channel.
inline ScenarioResult evaluate_scenario(const EvalContext& ctx, const ScenarioSpec& spec,
                                        std::size_t num_instances) {
  spec.validate();
  if (num_instances < 1 || num_instances > ctx.max_instances())
    throw BadConfig("evaluate_scenario: instance count out of range");
  const NetworkConfig& cfg = ctx.config;
  const auto k_ues = static_cast<std::size_t>(cfg.num_ues);

  ScenarioResult res;
  res.spec = spec;
  res.label = spec.label();
  res.num_instances = num_instances;
  res.per_user_se.reserve(num_instances * k_ues);
  res.min_se.reserve(num_instances);
  res.sum_se.reserve(num_instances);
  res.ee.reserve(num_instances);

  for (std::size_t i = 0; i < num_instances; ++i) {
    const BetaMatrix& beta_true = ctx.beta_true[i];
    SpectralMetrics metrics;
    if (spec.attack == AttackKind::kNone && spec.allocator == Allocator::kAnalytic) {
      metrics = ctx.analytic_clean[i];
    } else {
      Perturbation delta;
      delta.delta_db = Vector::Zero(static_cast<Eigen::Index>(k_ues) * cfg.num_rus);
      if (spec.attack != AttackKind::kNone) {
        AttackMask mask = detail::instance_mask(ctx, spec, i);
        const Vector& x0 = ctx.clean_db[i];
        switch (spec.attack) {
          case AttackKind::kGaussian: {
            RngStream rng(cfg.master_seed, StreamPurpose::kGaussianAttack, i);
            delta = gaussian_attack(mask, spec.attack_cfg.epsilon_db, rng);
            break;
          }
          case AttackKind::kFgsm: {
            auto bim = fgsm_attack(detail::crafter_model(ctx, spec.crafter), x0, beta_true,
                                   mask, spec.attack_cfg.epsilon_db, cfg.total_power_w,
                                   cfg.noise_power_w);
            delta = bim.perturbation;
            break;
          }
          case AttackKind::kBim: {
            auto bim = bim_attack(detail::crafter_model(ctx, spec.crafter), x0, beta_true,
                                  mask, spec.attack_cfg, cfg.total_power_w,
                                  cfg.noise_power_w);
            delta = bim.perturbation;
            break;
          }
          case AttackKind::kMuap: {
            auto uap = m_uap_attack(detail::crafter_model(ctx, spec.crafter), x0, mask,
                                    ctx.pool_db, spec.attack_cfg, cfg.total_power_w,
                                    cfg.noise_power_w);
            delta = uap.perturbation;
            if (uap.degenerate_spectrum) ++res.degenerate_spectra;
            break;
          }
          case AttackKind::kNone:
            break;
        }
        check_perturbation(delta, mask, spec.attack_cfg.epsilon_db);
        ++res.budget_checks;
        res.max_abs_delta_db =
            std::max(res.max_abs_delta_db, delta.delta_db.cwiseAbs().maxCoeff());
      }
      BetaMatrix reported = apply_attack(beta_true, delta);
      PowerCoefficients eta;
      switch (spec.allocator) {
        case Allocator::kAnalytic: {
          MmfSolution sol =
              solve_mmf(reported, cfg.total_power_w, cfg.noise_power_w, ctx.solver);
          eta = sol.eta;
          break;
        }
        case Allocator::kOriginal:
          if (ctx.original == nullptr)
            throw BadConfig("evaluate_scenario: original model not loaded");
          eta = predict_allocation(*ctx.original, reported);
          break;
        case Allocator::kSurrogate:
          if (ctx.surrogate == nullptr)
            throw BadConfig("evaluate_scenario: surrogate model not loaded");
          eta = predict_allocation(*ctx.surrogate, reported);
          break;
      }
      metrics = compute_metrics(beta_true.values, eta.values, cfg);
    }
    for (Eigen::Index u = 0; u < metrics.se.size(); ++u)
      res.per_user_se.push_back(metrics.se[u]);
    res.min_se.push_back(metrics.min_se);
    res.sum_se.push_back(metrics.sum_se);
    res.ee.push_back(metrics.ee);
  }

  const BootstrapPlan& plan = ctx.plan(num_instances);
  res.median_per_user_se.value = percentile(res.per_user_se, 0.5);
  res.median_per_user_se.se =
      bootstrap_stat_se(plan, detail::pooled_percentile_stat(res.per_user_se, k_ues, 0.5));
  res.p5_per_user_se.value = percentile(res.per_user_se, 0.05);
  res.p5_per_user_se.se =
      bootstrap_stat_se(plan, detail::pooled_percentile_stat(res.per_user_se, k_ues, 0.05));
  res.median_min_se.value = percentile(res.min_se, 0.5);
  res.median_min_se.se =
      bootstrap_stat_se(plan, detail::series_percentile_stat(res.min_se, 0.5));
  res.mean_sum_se.value = mean(res.sum_se);
  res.mean_sum_se.se = bootstrap_se_mean(res.sum_se, plan);
  res.mean_ee.value = mean(res.ee);
  res.mean_ee.se = bootstrap_se_mean(res.ee, plan);
  return res;
}

// Paired bootstrap SE of the difference of pooled per-user percentiles
// between two arms evaluated on the same instances.
inline double paired_percentile_diff_se(const EvalContext& ctx, const ScenarioResult& a,
                                        const ScenarioResult& b, double p) {
  if (a.num_instances != b.num_instances)
    throw ShapeMismatch("paired_percentile_diff_se: instance count mismatch");
  auto block = static_cast<std::size_t>(ctx.config.num_ues);
  auto stat_a = detail::pooled_percentile_stat(a.per_user_se, block, p);
  auto stat_b = detail::pooled_percentile_stat(b.per_user_se, block, p);
  return bootstrap_stat_se(ctx.plan(a.num_instances),
                           [&](const std::vector<std::size_t>& rep) {
                             return stat_a(rep) - stat_b(rep);
                           });
}

// Paired bootstrap SE of the difference of per-instance series means.
inline double paired_mean_diff_se(const EvalContext& ctx, const std::vector<double>& a,
                                  const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("paired_mean_diff_se: length mismatch");
  return bootstrap_se_mean(difference(a, b), ctx.plan(a.size()));
}

// Canned experiment rows.

inline std::vector<ScenarioSpec> clean_rows() {
  std::vector<ScenarioSpec> rows(3);
  rows[0].allocator = Allocator::kAnalytic;
  rows[1].allocator = Allocator::kOriginal;
  rows[2].allocator = Allocator::kSurrogate;
  return rows;
}

// Fully compromised report, one budget: the model-free baseline against
// gradient attacks crafted on the deployed model and on the adversary's
// surrogate, plus the analytic allocator fed the same forged report.
inline std::vector<ScenarioSpec> attack_comparison_rows(const AttackConfig& atk) {
  std::vector<ScenarioSpec> rows;
  ScenarioSpec base;
  base.allocator = Allocator::kOriginal;
  base.threat = ThreatTag::kFull;
  base.attack_cfg = atk;

  ScenarioSpec s = base;
  s.attack = AttackKind::kGaussian;
  rows.push_back(s);

  s = base;
  s.attack = AttackKind::kFgsm;
  s.crafter = Crafter::kSurrogate;
  rows.push_back(s);

  s = base;
  s.attack = AttackKind::kBim;
  s.crafter = Crafter::kOriginal;
  rows.push_back(s);

  s = base;
  s.attack = AttackKind::kBim;
  s.crafter = Crafter::kSurrogate;
  rows.push_back(s);

  s = base;
  s.attack = AttackKind::kMuap;
  s.crafter = Crafter::kOriginal;
  rows.push_back(s);

  s = base;
  s.attack = AttackKind::kMuap;
  s.crafter = Crafter::kSurrogate;
  rows.push_back(s);

  s = base;
  s.allocator = Allocator::kAnalytic;
  s.attack = AttackKind::kMuap;
  s.crafter = Crafter::kSurrogate;
  rows.push_back(s);
  return rows;
}

// Compromised-fraction sweep for one side of the network: the universal
// attack from the adversary's surrogate against the matched-budget noise
// baseline at each fraction.
inline std::vector<ScenarioSpec> fraction_sweep_rows(ThreatTag threat,
                                                     const AttackConfig& atk,
                                                     const std::vector<double>& fractions) {
  if (threat == ThreatTag::kFull)
    throw BadConfig("fraction_sweep_rows: sweep needs a partial threat model");
  std::vector<ScenarioSpec> rows;
  for (double f : fractions) {
    ScenarioSpec s;
    s.allocator = Allocator::kOriginal;
    s.threat = threat;
    s.malicious_fraction = f;
    s.attack_cfg = atk;
    s.attack = AttackKind::kMuap;
    s.crafter = Crafter::kSurrogate;
    rows.push_back(s);
    s.attack = AttackKind::kGaussian;
    s.crafter = Crafter::kNone;
    rows.push_back(s);
  }
  return rows;
}

// Budget sweep with half the RUs compromised. The iteration step scales
// with the budget so the iterative inner attack can reach the box edge at
// every budget.
inline std::vector<ScenarioSpec> epsilon_sweep_rows(const std::vector<double>& eps_grid_db,
                                                    const AttackConfig& base,
                                                    double fraction = 0.5) {
  std::vector<ScenarioSpec> rows;
  for (double eps : eps_grid_db) {
    if (eps <= 0.0) {
      ScenarioSpec clean;
      clean.allocator = Allocator::kOriginal;
      rows.push_back(clean);
      continue;
    }
    AttackConfig atk = base;
    atk.epsilon_db = eps;
    atk.alpha_db = eps / 8.0;
    ScenarioSpec s;
    s.allocator = Allocator::kOriginal;
    s.threat = ThreatTag::kMaliciousRus;
    s.malicious_fraction = fraction;
    s.attack_cfg = atk;
    s.attack = AttackKind::kMuap;
    s.crafter = Crafter::kSurrogate;
    rows.push_back(s);
    s.attack = AttackKind::kGaussian;
    s.crafter = Crafter::kNone;
    rows.push_back(s);
  }
  return rows;
}

struct EvalReport {
  NetworkConfig config;
  int bootstrap_replicates = 0;
  std::string original_fingerprint;
  std::string surrogate_fingerprint;
  std::vector<std::size_t> uap_pool_rows;
  std::vector<ScenarioResult> rows;

  const ScenarioResult& row(const std::string& label) const {
    for (const auto& r : rows)
      if (r.label == label) return r;
    throw BadConfig("EvalReport: no row labeled " + label);
  }
  bool has_row(const std::string& label) const {
    for (const auto& r : rows)
      if (r.label == label) return true;
    return false;
  }
};

namespace detail {

inline nlohmann::json estimate_to_json(const Estimate& e) {
  return {{"value", e.value}, {"se", e.se}};
}

inline Estimate estimate_from_json(const nlohmann::json& j) {
  Estimate e;
  e.value = j.at("value").get<double>();
  e.se = j.at("se").get<double>();
  return e;
}

inline nlohmann::json result_to_json(const ScenarioResult& r) {
  nlohmann::json j;
  j["label"] = r.label;
  j["spec"] = {{"allocator", allocator_name(r.spec.allocator)},
               {"attack", attack_kind_name(r.spec.attack)},
               {"crafter", crafter_name(r.spec.crafter)},
               {"threat", threat_tag_name(r.spec.threat)},
               {"malicious_fraction", r.spec.malicious_fraction},
               {"epsilon_db", r.spec.attack_cfg.epsilon_db},
               {"alpha_db", r.spec.attack_cfg.alpha_db},
               {"num_iters", r.spec.attack_cfg.num_iters},
               {"uap_pool_size", r.spec.attack_cfg.uap_pool_size}};
  j["num_instances"] = r.num_instances;
  j["summary"] = {{"median_per_user_se", estimate_to_json(r.median_per_user_se)},
                  {"p5_per_user_se", estimate_to_json(r.p5_per_user_se)},
                  {"median_min_se", estimate_to_json(r.median_min_se)},
                  {"mean_sum_se", estimate_to_json(r.mean_sum_se)},
                  {"mean_ee", estimate_to_json(r.mean_ee)}};
  j["diagnostics"] = {{"budget_checks", r.budget_checks},
                      {"degenerate_spectra", r.degenerate_spectra},
                      {"max_abs_delta_db", r.max_abs_delta_db}};
  j["samples"] = {{"per_user_se", r.per_user_se},
                  {"min_se", r.min_se},
                  {"sum_se", r.sum_se},
                  {"ee", r.ee}};
  return j;
}

inline ScenarioResult result_from_json(const nlohmann::json& j) {
  ScenarioResult r;
  r.label = j.at("label").get<std::string>();
  const auto& s = j.at("spec");
  r.spec.allocator = allocator_from_name(s.at("allocator").get<std::string>());
  r.spec.attack = attack_kind_from_name(s.at("attack").get<std::string>());
  r.spec.crafter = crafter_from_name(s.at("crafter").get<std::string>());
  r.spec.threat = threat_tag_from_name(s.at("threat").get<std::string>());
  r.spec.malicious_fraction = s.at("malicious_fraction").get<double>();
  r.spec.attack_cfg.epsilon_db = s.at("epsilon_db").get<double>();
  r.spec.attack_cfg.alpha_db = s.at("alpha_db").get<double>();
  r.spec.attack_cfg.num_iters = s.at("num_iters").get<int>();
  r.spec.attack_cfg.uap_pool_size = s.at("uap_pool_size").get<int>();
  r.num_instances = j.at("num_instances").get<std::size_t>();
  const auto& sm = j.at("summary");
  r.median_per_user_se = estimate_from_json(sm.at("median_per_user_se"));
  r.p5_per_user_se = estimate_from_json(sm.at("p5_per_user_se"));
  r.median_min_se = estimate_from_json(sm.at("median_min_se"));
  r.mean_sum_se = estimate_from_json(sm.at("mean_sum_se"));
  r.mean_ee = estimate_from_json(sm.at("mean_ee"));
  const auto& d = j.at("diagnostics");
  r.budget_checks = d.at("budget_checks").get<std::size_t>();
  r.degenerate_spectra = d.at("degenerate_spectra").get<std::size_t>();
  r.max_abs_delta_db = d.at("max_abs_delta_db").get<double>();
  const auto& sa = j.at("samples");
  r.per_user_se = sa.at("per_user_se").get<std::vector<double>>();
  r.min_se = sa.at("min_se").get<std::vector<double>>();
  r.sum_se = sa.at("sum_se").get<std::vector<double>>();
  r.ee = sa.at("ee").get<std::vector<double>>();
  return r;
}

}  // namespace detail

inline nlohmann::json report_to_json(const EvalReport& rep) {
  nlohmann::json j;
  j["format"] = "dmimo-report-1";
  j["config"] = config_to_json(rep.config);
  j["bootstrap_replicates"] = rep.bootstrap_replicates;
  j["models"] = {{"original_fingerprint", rep.original_fingerprint},
                 {"surrogate_fingerprint", rep.surrogate_fingerprint}};
  j["uap_pool_rows"] = rep.uap_pool_rows;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rep.rows) j["rows"].push_back(detail::result_to_json(r));
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != "dmimo-report-1")
    throw IoError("report_from_json: unknown format tag");
  EvalReport rep;
  rep.config = config_from_json(j.at("config"));
  rep.bootstrap_replicates = j.at("bootstrap_replicates").get<int>();
  rep.original_fingerprint = j.at("models").at("original_fingerprint").get<std::string>();
  rep.surrogate_fingerprint = j.at("models").at("surrogate_fingerprint").get<std::string>();
  rep.uap_pool_rows = j.at("uap_pool_rows").get<std::vector<std::size_t>>();
  for (const auto& rj : j.at("rows")) rep.rows.push_back(detail::result_from_json(rj));
  return rep;
}

inline void export_report_json(const EvalReport& rep, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("export_report_json: cannot open " + path);
  out << report_to_json(rep).dump(2) << '\n';
  if (!out) throw IoError("export_report_json: write failed for " + path);
}

inline EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_report: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return report_from_json(j);
}

// Writes <prefix>_summary.csv (one row per arm) and <prefix>_cdf.csv
// (empirical CDFs of the per-user and per-instance-minimum SE).
inline void export_report_csv(const EvalReport& rep, const std::string& prefix) {
  std::ofstream sum(prefix + "_summary.csv", std::ios::binary);
  if (!sum) throw IoError("export_report_csv: cannot open " + prefix + "_summary.csv");
  sum.precision(17);
  sum << "label,allocator,attack,crafter,threat,malicious_fraction,epsilon_db,"
         "num_instances,median_per_user_se,median_per_user_se_se,p5_per_user_se,"
         "p5_per_user_se_se,median_min_se,median_min_se_se,mean_sum_se,mean_sum_se_se,"
         "mean_ee,mean_ee_se,budget_checks,degenerate_spectra,max_abs_delta_db\n";
  for (const auto& r : rep.rows) {
    sum << r.label << ',' << allocator_name(r.spec.allocator) << ','
        << attack_kind_name(r.spec.attack) << ',' << crafter_name(r.spec.crafter) << ','
        << threat_tag_name(r.spec.threat) << ',' << r.spec.malicious_fraction << ','
        << r.spec.attack_cfg.epsilon_db << ',' << r.num_instances << ','
        << r.median_per_user_se.value << ',' << r.median_per_user_se.se << ','
        << r.p5_per_user_se.value << ',' << r.p5_per_user_se.se << ','
        << r.median_min_se.value << ',' << r.median_min_se.se << ','
        << r.mean_sum_se.value << ',' << r.mean_sum_se.se << ','
        << r.mean_ee.value << ',' << r.mean_ee.se << ','
        << r.budget_checks << ',' << r.degenerate_spectra << ','
        << r.max_abs_delta_db << '\n';
  }
  if (!sum) throw IoError("export_report_csv: write failed for " + prefix + "_summary.csv");

  std::ofstream cdf(prefix + "_cdf.csv", std::ios::binary);
  if (!cdf) throw IoError("export_report_csv: cannot open " + prefix + "_cdf.csv");
  cdf.precision(17);
  cdf << "label,series,value,probability\n";
  for (const auto& r : rep.rows) {
    for (const auto& pt : ecdf(r.per_user_se))
      cdf << r.label << ",per_user_se," << pt.value << ',' << pt.probability << '\n';
    for (const auto& pt : ecdf(r.min_se))
      cdf << r.label << ",min_se," << pt.value << ',' << pt.probability << '\n';
  }
  if (!cdf) throw IoError("export_report_csv: write failed for " + prefix + "_cdf.csv");
}

// Everything needed to reproduce the study end to end from one seed.
struct PipelineSpec {
  NetworkConfig config;
  SolverConfig solver;
  std::size_t num_samples = 20000;
  double train_fraction = 0.975;
  std::vector<int> hidden_original = {512, 256, 128};
  std::vector<int> hidden_surrogate = {256, 128};
  TrainConfig train_original;
  TrainConfig train_surrogate;
  std::uint64_t init_stream_original = 0;  // weight-init and shuffle draw
  std::uint64_t init_stream_surrogate = 1;
  std::size_t eval_instances = 2000;    // clean-quality arms
  std::size_t attack_instances = 400;   // attacked arms
  int bootstrap_replicates = 1000;
  AttackConfig attack;  // nominal budget for the comparison and fraction sweeps
  std::vector<double> epsilon_grid_db = {2, 4, 8, 12, 16};
  std::vector<double> fraction_grid = {0.25, 0.5, 0.75, 1.0};

  void validate() const {
    config.validate();
    solver.validate();
    train_original.validate();
    train_surrogate.validate();
    attack.validate();
    if (eval_instances < 1 || attack_instances < 1)
      throw BadConfig("PipelineSpec: instance counts must be >= 1");
    if (attack_instances > eval_instances)
      throw BadConfig("PipelineSpec: attacked arms must reuse clean-arm instances");
    if (hidden_original.empty() || hidden_surrogate.empty())
      throw BadConfig("PipelineSpec: hidden layer lists must be nonempty");
    if (epsilon_grid_db.empty() || fraction_grid.empty())
      throw BadConfig("PipelineSpec: sweep grids must be nonempty");
  }
};

struct PipelineResult {
  Dataset dataset;
  MlpModel original;
  MlpModel surrogate;
  TrainResult original_training;
  TrainResult surrogate_training;
  EvalReport report;
};

// Dataset, both models, and the full evaluation grid in one deterministic
// pass. The seed and stream-index discipline lives below this call: two
// runs from the same spec produce byte-identical reports.
inline PipelineResult run_pipeline(const PipelineSpec& ps,
                                   const std::function<void(const std::string&)>& log = {}) {
  ps.validate();
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };

  say("generating dataset (" + std::to_string(ps.num_samples) + " samples)");
  PipelineResult out;
  out.dataset = gen_dataset(ps.config, ps.num_samples, ps.train_fraction, ps.solver);
  const Dataset& ds = out.dataset;
  const auto mk = static_cast<int>(ds.beta_db.cols());

  Matrix x_train = ds.train_features_std();
  Matrix y_train = ds.train_targets_nu();
  Matrix x_val = ds.val_features_std();
  Matrix y_val = ds.val_targets_nu();

  TrainConfig to = ps.train_original;
  to.master_seed = ps.config.master_seed;
  to.stream_index = ps.init_stream_original;
  say("training deployed model");
  out.original = make_mlp(mk, ps.hidden_original, mk, ds.stats, to.master_seed,
                          ps.init_stream_original);
  out.original_training = train(out.original, x_train, y_train, x_val, y_val, to);

  TrainConfig ts = ps.train_surrogate;
  ts.master_seed = ps.config.master_seed;
  ts.stream_index = ps.init_stream_surrogate;
  say("training adversary surrogate");
  out.surrogate = make_mlp(mk, ps.hidden_surrogate, mk, ds.stats, ts.master_seed,
                           ps.init_stream_surrogate);
  out.surrogate_training = train(out.surrogate, x_train, y_train, x_val, y_val, ts);

  say("building evaluation context (" + std::to_string(ps.eval_instances) + " instances)");
  EvalContext ctx = make_eval_context(ps.config, ps.eval_instances, ds, &out.original,
                                      &out.surrogate, ps.attack.uap_pool_size,
                                      ps.bootstrap_replicates, ps.solver);

  std::vector<std::pair<ScenarioSpec, std::size_t>> grid;
  for (const auto& s : clean_rows()) grid.emplace_back(s, ps.eval_instances);
  for (const auto& s : attack_comparison_rows(ps.attack))
    grid.emplace_back(s, ps.attack_instances);
  for (const auto& s :
       fraction_sweep_rows(ThreatTag::kMaliciousRus, ps.attack, ps.fraction_grid))
    grid.emplace_back(s, ps.attack_instances);
  for (const auto& s :
       fraction_sweep_rows(ThreatTag::kMaliciousUes, ps.attack, ps.fraction_grid))
    grid.emplace_back(s, ps.attack_instances);
  for (const auto& s : epsilon_sweep_rows(ps.epsilon_grid_db, ps.attack))
    grid.emplace_back(s, ps.attack_instances);

  EvalReport& rep = out.report;
  rep.config = ps.config;
  rep.bootstrap_replicates = ps.bootstrap_replicates;
  rep.original_fingerprint = model_fingerprint(out.original);
  rep.surrogate_fingerprint = model_fingerprint(out.surrogate);
  rep.uap_pool_rows = ctx.pool_rows;
  for (const auto& [spec, count] : grid) {
    std::string label = spec.label();
    if (rep.has_row(label)) continue;
    say("evaluating " + label + " (" + std::to_string(count) + " instances)");
    rep.rows.push_back(evaluate_scenario(ctx, spec, count));
  }
  say("pipeline complete: " + std::to_string(rep.rows.size()) + " rows");
  return out;
}

}  // namespace dmimo

#endif  // DMIMO_BENCH_HPP
