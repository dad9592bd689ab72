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

#ifndef DMIMO_TYPES_HPP
#define DMIMO_TYPES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dmimo/errors.hpp"

namespace dmimo {

using Matrix = Eigen::MatrixXd;  // RU-by-UE quantities (M x K)
using Vector = Eigen::VectorXd;

struct PathlossParams {
  double d0_m = 10.0;        // inner breakpoint of the 3-slope model
  double d1_m = 50.0;        // outer breakpoint
  double carrier_mhz = 1900.0;
  double ru_height_m = 15.0;
  double ue_height_m = 1.65;
};

// Static description of one network: geometry, link budget, channel
// statistics, and the master seed every derived stream hangs off.
struct NetworkConfig {
  int num_rus = 16;                    // M, must be a perfect square for the grid
  int num_ues = 4;                     // K
  double area_side_m = 500.0;
  double total_power_w = 0.2;          // P_t per RU
  double noise_power_w = 6.309573444801930e-13;  // sigma^2 per UE (-92 dBm)
  double bandwidth_hz = 20.0e6;        // BW per UE
  double shadowing_std_db = 8.0;
  PathlossParams pathloss;
  std::uint64_t master_seed = 1;

  void validate() const {
    if (num_rus < 1) throw BadConfig("num_rus must be >= 1");
    if (num_ues < 1) throw BadConfig("num_ues must be >= 1");
    if (!(area_side_m > 0)) throw BadConfig("area_side_m must be > 0");
    if (!(total_power_w > 0)) throw BadConfig("total_power_w must be > 0");
    if (!(noise_power_w > 0)) throw BadConfig("noise_power_w must be > 0");
    if (!(bandwidth_hz > 0)) throw BadConfig("bandwidth_hz must be > 0");
    if (shadowing_std_db < 0) throw BadConfig("shadowing_std_db must be >= 0");
    if (!(pathloss.d0_m > 0) || !(pathloss.d0_m < pathloss.d1_m))
      throw BadConfig("pathloss breakpoints must satisfy 0 < d0 < d1");
  }
};

struct Placement {
  std::vector<Eigen::Vector2d> ru_positions;  // size M
  std::vector<Eigen::Vector2d> ue_positions;  // size K
};

// Large-scale fading coefficients in linear power gain, M x K.
struct BetaMatrix {
  Matrix values;

  int num_rus() const { return static_cast<int>(values.rows()); }
  int num_ues() const { return static_cast<int>(values.cols()); }

  Matrix to_db() const { return 10.0 * values.array().log10().matrix(); }

  static BetaMatrix from_db(const Matrix& db) {
    BetaMatrix b;
    b.values = Eigen::pow(10.0, (db / 10.0).array()).matrix();
    return b;
  }

  void validate() const {
    if (!values.array().isFinite().all() || (values.array() <= 0.0).any())
      throw Error("BetaMatrix entries must be strictly positive and finite");
  }
};

// Power control coefficients eta, M x K, non-negative.
struct PowerCoefficients {
  Matrix values;
};

// Per-entry statistics of beta in dB over a training split; the model input
// is (beta_db - mean) / std, flattened with index = m*K + k.
struct FeatureStats {
  Vector mean_db;
  Vector std_db;

  int dim() const { return static_cast<int>(mean_db.size()); }
};

struct SpectralMetrics {
  Vector sinr;    // K
  Vector se;      // K, bits/s/Hz
  double min_se = 0.0;
  double sum_se = 0.0;
  double ee = 0.0;  // bits/joule
};

// Flattening helpers. All vectors that cross the model boundary use
// row-major order: index = m*K + k.
inline Vector flatten(const Matrix& a) {
  const auto rows = a.rows(), cols = a.cols();
  Vector x(rows * cols);
  for (Eigen::Index m = 0; m < rows; ++m)
    for (Eigen::Index k = 0; k < cols; ++k) x[m * cols + k] = a(m, k);
  return x;
}

inline Matrix unflatten(const Vector& x, int rows, int cols) {
  if (x.size() != static_cast<Eigen::Index>(rows) * cols)
    throw ShapeMismatch("unflatten: vector length does not match rows*cols");
  Matrix a(rows, cols);
  for (int m = 0; m < rows; ++m)
    for (int k = 0; k < cols; ++k) a(m, k) = x[static_cast<Eigen::Index>(m) * cols + k];
  return a;
}

}  // namespace dmimo

#endif  // DMIMO_TYPES_HPP
