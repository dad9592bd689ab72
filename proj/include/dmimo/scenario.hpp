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
// Scenario generation: RU grid placement, uniform UE drops, 3-slope path
// loss with log-normal shadowing. Everything is a pure function of
// (config, stream index), so scenario generation parallelizes without
// shared state.

#ifndef DMIMO_SCENARIO_HPP
#define DMIMO_SCENARIO_HPP

#include <cmath>

#include "dmimo/rng.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

// RUs sit on a centered sqrt(M) x sqrt(M) grid; M must be a perfect square.
inline Placement place_rus(const NetworkConfig& cfg) {
  cfg.validate();
  int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.num_rus))));
  if (side * side != cfg.num_rus)
    throw NonSquareRuCount("num_rus must be a perfect square for grid placement");
  Placement p;
  double spacing = cfg.area_side_m / side;
  p.ru_positions.reserve(cfg.num_rus);
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      p.ru_positions.emplace_back(spacing * (0.5 + i), spacing * (0.5 + j));
  return p;
}

inline void sample_ue_positions(const NetworkConfig& cfg, RngStream& stream, Placement& p) {
  p.ue_positions.clear();
  p.ue_positions.reserve(cfg.num_ues);
  for (int k = 0; k < cfg.num_ues; ++k) {
    double x = stream.uniform(0.0, cfg.area_side_m);
    double y = stream.uniform(0.0, cfg.area_side_m);
    p.ue_positions.emplace_back(x, y);
  }
}

// COST231-Hata fixed term of the 3-slope model, in dB.
inline double pathloss_fixed_term_db(const PathlossParams& pl) {
  double lf = std::log10(pl.carrier_mhz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(pl.ru_height_m) -
         (1.1 * lf - 0.7) * pl.ue_height_m + (1.56 * lf - 0.8);
}

// Channel gain (negative dB) at distance d:
//   35 log10(d) roll-off past d1, 20 log10(d) between d0 and d1, flat
//   below d0. Continuous at both breakpoints. A 1 m floor keeps the log
//   finite when a UE drop lands on an RU.
inline double pathloss_db(double distance_m, const NetworkConfig& cfg) {
  const PathlossParams& pl = cfg.pathloss;
  double L = pathloss_fixed_term_db(pl);
  double d_km = std::max(distance_m, 1.0) / 1000.0;
  double d0_km = pl.d0_m / 1000.0;
  double d1_km = pl.d1_m / 1000.0;
  if (d_km > d1_km) return -L - 35.0 * std::log10(d_km);
  if (d_km > d0_km) return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d_km);
  return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d0_km);
}

// beta_mk(dB) = pathloss(dist) + shadow, shadow ~ N(0, shadowing_std^2)
// i.i.d. per link; returned in linear scale.
inline BetaMatrix gen_beta(const NetworkConfig& cfg, const Placement& p, RngStream& shadow_stream) {
  BetaMatrix beta;
  beta.values.resize(cfg.num_rus, cfg.num_ues);
  for (int m = 0; m < cfg.num_rus; ++m) {
    for (int k = 0; k < cfg.num_ues; ++k) {
      double d = (p.ru_positions[m] - p.ue_positions[k]).norm();
      double db = pathloss_db(d, cfg) + shadow_stream.normal(0.0, cfg.shadowing_std_db);
      beta.values(m, k) = std::pow(10.0, db / 10.0);
    }
  }
  return beta;
}

// One full scenario draw keyed by (seed, purpose, index). Training data and
// evaluation instances use different purposes so their streams never collide.
inline BetaMatrix sample_scenario(const NetworkConfig& cfg, std::uint64_t seed,
                                  std::uint64_t index,
                                  StreamPurpose ue_purpose = StreamPurpose::kUePositions,
                                  StreamPurpose shadow_purpose = StreamPurpose::kShadowing) {
  Placement p = place_rus(cfg);
  RngStream ue_stream(seed, ue_purpose, index);
  sample_ue_positions(cfg, ue_stream, p);
  RngStream shadow_stream(seed, shadow_purpose, index);
  return gen_beta(cfg, p, shadow_stream);
}

}  // namespace dmimo

#endif  // DMIMO_SCENARIO_HPP
