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

#ifndef DMIMO_STATS_HPP
#define DMIMO_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "dmimo/errors.hpp"
#include "dmimo/rng.hpp"

namespace dmimo {

// Empirical CDF as (value, probability) pairs, one step per sample.
struct EcdfPoint {
  double value;
  double probability;
};

inline std::vector<EcdfPoint> ecdf(std::vector<double> samples) {
  if (samples.empty()) throw EmptySamples("ecdf: no samples");
  std::sort(samples.begin(), samples.end());
  std::vector<EcdfPoint> out(samples.size());
  double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    out[i] = {samples[i], static_cast<double>(i + 1) / n};
  return out;
}

// Nearest-rank percentile: smallest sample with at least a fraction p of
// the data at or below it (rank ceil(p n), 1-based).
inline double percentile(std::vector<double> samples, double p) {
  if (samples.empty()) throw EmptySamples("percentile: no samples");
  if (!(p > 0.0) || p > 1.0) throw BadConfig("percentile: p must be in (0, 1]");
  std::sort(samples.begin(), samples.end());
  auto n = samples.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::min(std::max<std::size_t>(rank, 1), n);
  return samples[rank - 1];
}

// Same order statistic as percentile(), but scrambles its scratch argument
// instead of sorting a copy. For the hot bootstrap loops.
inline double percentile_inplace(std::vector<double>& scratch, double p) {
  if (scratch.empty()) throw EmptySamples("percentile_inplace: no samples");
  if (!(p > 0.0) || p > 1.0) throw BadConfig("percentile_inplace: p must be in (0, 1]");
  auto n = scratch.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::min(std::max<std::size_t>(rank, 1), n);
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   scratch.end());
  return scratch[rank - 1];
}

inline double mean(const std::vector<double>& samples) {
  if (samples.empty()) throw EmptySamples("mean: no samples");
  double s = 0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

// One shared set of bootstrap resamples, so statistics computed for
// different arms on the same instances stay paired: replicate b uses the
// same instance indices for every series it is applied to.
struct BootstrapPlan {
  std::size_t num_instances = 0;
  std::vector<std::vector<std::size_t>> replicates;
};

inline BootstrapPlan make_bootstrap_plan(std::size_t num_instances, int num_replicates,
                                         RngStream& rng) {
  if (num_instances == 0) throw EmptySamples("make_bootstrap_plan: no instances");
  if (num_replicates < 1) throw BadConfig("make_bootstrap_plan: need >= 1 replicate");
  BootstrapPlan plan;
  plan.num_instances = num_instances;
  plan.replicates.resize(static_cast<std::size_t>(num_replicates));
  for (auto& rep : plan.replicates) {
    rep.resize(num_instances);
    for (auto& ix : rep) ix = rng.uniform_index(num_instances);
  }
  return plan;
}

// Bootstrap standard error of the mean of a per-instance series under a
// shared plan. Feeding two arms' series through the same plan and
// differencing the series first gives the paired SE of the difference.
inline double bootstrap_se_mean(const std::vector<double>& series, const BootstrapPlan& plan) {
  if (series.size() != plan.num_instances)
    throw ShapeMismatch("bootstrap_se_mean: series length does not match plan");
  std::vector<double> stats;
  stats.reserve(plan.replicates.size());
  for (const auto& rep : plan.replicates) {
    double s = 0;
    for (std::size_t ix : rep) s += series[ix];
    stats.push_back(s / static_cast<double>(rep.size()));
  }
  double mu = mean(stats);
  double ss = 0;
  for (double v : stats) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(stats.size() - 1));
}

// Bootstrap standard error of an arbitrary statistic of resampled
// instances. The callback receives the instance indices of one replicate
// and returns the statistic; differencing two arms inside the callback
// yields a paired SE because both see identical resamples.
inline double bootstrap_stat_se(
    const BootstrapPlan& plan,
    const std::function<double(const std::vector<std::size_t>&)>& stat) {
  std::vector<double> stats;
  stats.reserve(plan.replicates.size());
  for (const auto& rep : plan.replicates) stats.push_back(stat(rep));
  double mu = mean(stats);
  double ss = 0;
  for (double v : stats) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(stats.size() - 1));
}

inline std::vector<double> difference(const std::vector<double>& a,
                                      const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeMismatch("difference: length mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Two-sample Kolmogorov-Smirnov statistic, max |F_a - F_b| over the pooled
// support. Used by the distribution-match checks in the test suite.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EmptySamples("ks_statistic: no samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace dmimo

#endif  // DMIMO_STATS_HPP
