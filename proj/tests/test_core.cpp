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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dmimo/core.hpp"
#include "dmimo/rng.hpp"
#include "support/oracles.hpp"

using namespace dmimo;

namespace {

Matrix random_positive(int rows, int cols, RngStream& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("single-link SINR matches the closed form", "[core]") {
  Matrix beta = Matrix::Constant(1, 1, 1.0);
  Matrix eta = Matrix::Constant(1, 1, 1.0);
  Vector sinr = compute_sinr(beta, eta, 1.0, 1.0);
  REQUIRE(sinr[0] == Catch::Approx(0.5).margin(1e-15));
  Vector se = compute_se(sinr);
  REQUIRE(se[0] == Catch::Approx(0.584962500721156).margin(1e-12));
}

TEST_CASE("symmetric two-user split has SINR one quarter", "[core]") {
  Matrix beta = Matrix::Constant(1, 2, 1.0);
  Matrix eta = Matrix::Constant(1, 2, 0.5);
  Vector sinr = compute_sinr(beta, eta, 1.0, 1.0);
  REQUIRE(sinr[0] == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(sinr[1] == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(compute_se(sinr)[0] == Catch::Approx(0.32192809488736235).margin(1e-12));
}

TEST_CASE("vectorized SINR agrees with the scalar-loop reference", "[core]") {
  RngStream rng(17, StreamPurpose::kShuffle, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int m = 1 + static_cast<int>(rng.uniform_index(8));
    int k = 1 + static_cast<int>(rng.uniform_index(5));
    Matrix beta = random_positive(m, k, rng, 1e-12, 1e-7);
    Matrix eta = random_positive(m, k, rng, 0.0, 1e9);
    double p = rng.uniform(0.05, 1.0);
    double n0 = rng.uniform(1e-13, 1e-11);
    Vector sinr = compute_sinr(beta, eta, p, n0);
    for (int u = 0; u < k; ++u) {
      double ref = oracles::sinr_user(beta, eta, p, n0, u);
      REQUIRE(sinr[u] == Catch::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy efficiency follows its definition", "[core]") {
  Matrix beta(1, 2);
  beta << 2.0, 0.5;
  Matrix eta(1, 2);
  eta << 0.25, 1.0;
  Vector se(2);
  se << 1.5, 0.5;
  // Spent fraction = 0.25*2 + 1*0.5 = 1.0, so EE = BW * sum(se) / P.
  double ee = compute_ee(beta, eta, se, 20e6, 0.2);
  REQUIRE(ee == Catch::Approx(20e6 * 2.0 / 0.2).epsilon(1e-12));

  Matrix zeta = Matrix::Zero(1, 2);
  REQUIRE_THROWS_AS(compute_ee(beta, zeta, se, 20e6, 0.2), ZeroPower);
}

TEST_CASE("metrics bundle is self-consistent and guards zero power", "[core]") {
  NetworkConfig cfg;
  cfg.num_rus = 2;
  cfg.num_ues = 2;
  RngStream rng(23, StreamPurpose::kShuffle, 1);
  Matrix beta = random_positive(2, 2, rng, 1e-10, 1e-8);
  Matrix eta = random_positive(2, 2, rng, 0.0, 1.0 / beta.maxCoeff() / 4);
  SpectralMetrics m = compute_metrics(beta, eta, cfg);
  REQUIRE(m.min_se == Catch::Approx(m.se.minCoeff()));
  REQUIRE(m.sum_se == Catch::Approx(m.se.sum()));
  REQUIRE(m.ee > 0.0);

  SpectralMetrics z = compute_metrics(beta, Matrix::Zero(2, 2), cfg);
  REQUIRE(z.ee == 0.0);
  REQUIRE(z.sum_se == 0.0);
}

TEST_CASE("power_violation reports per-RU spent budget shares", "[core]") {
  Matrix beta(2, 2);
  beta << 1.0, 2.0, 4.0, 0.5;
  Matrix eta(2, 2);
  eta << 0.25, 0.25, 0.125, 1.0;
  Vector v = power_violation(beta, eta);
  REQUIRE(v[0] == Catch::Approx(0.75));
  REQUIRE(v[1] == Catch::Approx(1.0));
}

TEST_CASE("project_feasible clamps, rescales, and is idempotent", "[core]") {
  RngStream rng(29, StreamPurpose::kShuffle, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix beta = random_positive(3, 2, rng, 0.5, 2.0);
    Matrix eta = random_positive(3, 2, rng, -1.0, 3.0);
    PowerCoefficients p = project_feasible(beta, eta);
    REQUIRE(p.values.minCoeff() >= 0.0);
    Vector v = power_violation(beta, p.values);
    REQUIRE(v.maxCoeff() <= 1.0 + 1e-12);
    // Idempotence and never increasing an entry.
    PowerCoefficients q = project_feasible(beta, p.values);
    REQUIRE((q.values - p.values).cwiseAbs().maxCoeff() <= 1e-15);
    REQUIRE(((p.values.array() - eta.array().max(0.0)) <= 1e-15).all());
  }
}

TEST_CASE("shape mismatches are rejected", "[core]") {
  Matrix a = Matrix::Ones(2, 2);
  Matrix b = Matrix::Ones(2, 3);
  REQUIRE_THROWS_AS(compute_sinr(a, b, 1.0, 1.0), ShapeMismatch);
  REQUIRE_THROWS_AS(power_violation(a, b), ShapeMismatch);
}

TEST_CASE("dB standardization round-trips", "[core]") {
  FeatureStats stats;
  stats.mean_db = Vector::Constant(4, -80.0);
  stats.std_db = Vector::Constant(4, 7.5);
  Vector x(4);
  x << -92.0, -85.0, -71.0, -60.0;
  Vector z = standardize_db(x, stats);
  Vector back = destandardize_db(z, stats);
  REQUIRE((back - x).cwiseAbs().maxCoeff() < 1e-12);

  FeatureStats degenerate = stats;
  degenerate.std_db[2] = 0.0;
  REQUIRE_THROWS_AS(check_stats(degenerate), DegenerateStd);
}

TEST_CASE("flatten and unflatten use row-major link order", "[core]") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  Vector f = flatten(m);
  REQUIRE(f[0] == 1);
  REQUIRE(f[1] == 2);
  REQUIRE(f[2] == 3);
  REQUIRE(f[3] == 4);
  Matrix back = unflatten(f, 2, 3);
  REQUIRE((back - m).cwiseAbs().maxCoeff() == 0.0);
}
