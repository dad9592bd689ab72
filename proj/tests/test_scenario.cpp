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
#include <vector>

#include "dmimo/scenario.hpp"

using namespace dmimo;

TEST_CASE("RU grid is centered with half-spacing margins", "[scenario]") {
  NetworkConfig cfg;
  cfg.num_rus = 16;
  cfg.num_ues = 4;
  cfg.area_side_m = 500.0;
  Placement p = place_rus(cfg);
  REQUIRE(p.ru_positions.size() == 16);
  REQUIRE(p.ru_positions[0].x() == Catch::Approx(62.5));
  REQUIRE(p.ru_positions[0].y() == Catch::Approx(62.5));
  REQUIRE(p.ru_positions[15].x() == Catch::Approx(437.5));
  REQUIRE(p.ru_positions[15].y() == Catch::Approx(437.5));

  NetworkConfig one = cfg;
  one.num_rus = 1;
  one.num_ues = 1;
  Placement p1 = place_rus(one);
  REQUIRE(p1.ru_positions[0].x() == Catch::Approx(250.0));
  REQUIRE(p1.ru_positions[0].y() == Catch::Approx(250.0));

  NetworkConfig bad = cfg;
  bad.num_rus = 15;
  REQUIRE_THROWS_AS(place_rus(bad), NonSquareRuCount);
}

TEST_CASE("UE positions stay inside the service area", "[scenario]") {
  NetworkConfig cfg;
  cfg.num_rus = 4;
  cfg.num_ues = 64;
  Placement p = place_rus(cfg);
  RngStream rng(1, StreamPurpose::kUePositions, 0);
  sample_ue_positions(cfg, rng, p);
  REQUIRE(p.ue_positions.size() == 64);
  for (const auto& pos : p.ue_positions) {
    REQUIRE(pos.x() >= 0.0);
    REQUIRE(pos.x() < cfg.area_side_m);
    REQUIRE(pos.y() >= 0.0);
    REQUIRE(pos.y() < cfg.area_side_m);
  }
}

TEST_CASE("path loss is continuous across slope breakpoints", "[scenario]") {
  NetworkConfig cfg;
  double d0 = cfg.pathloss.d0_m;
  double d1 = cfg.pathloss.d1_m;
  double eps = 1e-9;
  REQUIRE(pathloss_db(d0 - eps, cfg) ==
          Catch::Approx(pathloss_db(d0 + eps, cfg)).margin(1e-6));
  REQUIRE(pathloss_db(d1 - eps, cfg) ==
          Catch::Approx(pathloss_db(d1 + eps, cfg)).margin(1e-6));
}

TEST_CASE("path loss never increases with distance and floors below 1 m", "[scenario]") {
  NetworkConfig cfg;
  double prev = pathloss_db(0.01, cfg);
  REQUIRE(prev == pathloss_db(1.0, cfg));
  for (double d = 1.0; d < 800.0; d *= 1.1) {
    double cur = pathloss_db(d, cfg);
    REQUIRE(cur <= prev + 1e-12);
    prev = cur;
  }
  // Far-field slope: 35 dB per decade beyond d1.
  REQUIRE(pathloss_db(1000.0, cfg) - pathloss_db(100.0, cfg) == Catch::Approx(-35.0));
}

TEST_CASE("shadowing adds zero-mean log-normal scatter at the configured spread",
          "[scenario]") {
  NetworkConfig cfg;
  cfg.num_rus = 1;
  cfg.num_ues = 1;
  Placement p = place_rus(cfg);
  p.ue_positions = {Eigen::Vector2d(100.0, 250.0)};
  double dist = std::hypot(250.0 - 100.0, 0.0);
  double pl = pathloss_db(dist, cfg);

  const int n = 20000;
  double sum = 0, sumsq = 0;
  RngStream shadow(7, StreamPurpose::kShadowing, 0);
  for (int i = 0; i < n; ++i) {
    BetaMatrix beta = gen_beta(cfg, p, shadow);
    double s = beta.to_db()(0, 0) - pl;
    sum += s;
    sumsq += s * s;
  }
  double mu = sum / n;
  double sd = std::sqrt(sumsq / n - mu * mu);
  REQUIRE(std::abs(mu) < 0.2);
  REQUIRE(sd == Catch::Approx(cfg.shadowing_std_db).epsilon(0.02));
}

TEST_CASE("a +8 dB shift multiplies the linear gain by 10^0.8", "[scenario]") {
  Matrix db = Matrix::Constant(1, 1, -80.0);
  BetaMatrix a = BetaMatrix::from_db(db);
  BetaMatrix b = BetaMatrix::from_db((db.array() + 8.0).matrix());
  REQUIRE(b.values(0, 0) / a.values(0, 0) ==
          Catch::Approx(6.309573444801933).epsilon(1e-12));
  REQUIRE((a.to_db() - db).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scenario sampling is deterministic per seed and index", "[scenario]") {
  NetworkConfig cfg;
  cfg.num_rus = 4;
  cfg.num_ues = 3;
  BetaMatrix a = sample_scenario(cfg, 5, 12);
  BetaMatrix b = sample_scenario(cfg, 5, 12);
  REQUIRE((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);

  BetaMatrix c = sample_scenario(cfg, 5, 13);
  REQUIRE((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);

  // Evaluation streams are disjoint from generation streams.
  BetaMatrix d = sample_scenario(cfg, 5, 12, StreamPurpose::kEvalUePositions,
                                 StreamPurpose::kEvalShadowing);
  REQUIRE((a.values - d.values).cwiseAbs().maxCoeff() > 0.0);
  a.validate();
  d.validate();
}
