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

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dmimo/dataset.hpp"
#include "dmimo/scenario.hpp"

using namespace dmimo;

namespace {

NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.num_rus = 4;
  cfg.num_ues = 2;
  cfg.area_side_m = 250.0;
  cfg.master_seed = 77;
  return cfg;
}

const Dataset& shared_dataset() {
  static Dataset ds = gen_dataset(tiny_config(), 40, 0.8);
  return ds;
}

}  // namespace

TEST_CASE("generated datasets have aligned shapes and splits", "[dataset]") {
  const Dataset& ds = shared_dataset();
  ds.validate();
  REQUIRE(ds.samples() == 40);
  REQUIRE(ds.train_count == 32);
  REQUIRE(ds.val_count() == 8);
  REQUIRE(ds.beta_db.cols() == 8);
  REQUIRE(ds.stats.dim() == 8);
}

TEST_CASE("features reproduce the per-sample scenario stream", "[dataset]") {
  const Dataset& ds = shared_dataset();
  NetworkConfig cfg = tiny_config();
  BetaMatrix b0 = sample_scenario(cfg, cfg.master_seed, 0);
  BetaMatrix b7 = sample_scenario(cfg, cfg.master_seed, 7);
  REQUIRE((ds.beta_db.row(0).transpose() - flatten(b0.to_db())).cwiseAbs().maxCoeff() <
          1e-12);
  REQUIRE((ds.beta_db.row(7).transpose() - flatten(b7.to_db())).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("targets are feasible analytic load shares", "[dataset]") {
  const Dataset& ds = shared_dataset();
  Matrix nu = ds.train_targets_nu();
  REQUIRE(nu.minCoeff() >= 0.0);
  REQUIRE(nu.maxCoeff() <= 1.0 + 1e-9);
  // Per-RU load = sum over that RU's links; row-major order groups K links
  // per RU.
  int k = tiny_config().num_ues;
  for (Eigen::Index s = 0; s < nu.rows(); ++s) {
    for (int m = 0; m < tiny_config().num_rus; ++m) {
      double load = 0;
      for (int u = 0; u < k; ++u) load += nu(s, m * k + u);
      REQUIRE(load <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("standardized training features have unit statistics", "[dataset]") {
  const Dataset& ds = shared_dataset();
  Matrix x = ds.train_features_std();
  Vector mean = x.colwise().mean();
  REQUIRE(mean.cwiseAbs().maxCoeff() < 1e-6);
  Matrix centered = x.rowwise() - mean.transpose();
  Vector var = centered.array().square().colwise().sum().transpose() /
               static_cast<double>(x.rows());
  REQUIRE((var.array() - 1.0).abs().maxCoeff() < 1e-6);
}

TEST_CASE("dataset files round-trip bit-exactly", "[dataset]") {
  const Dataset& ds = shared_dataset();
  std::string path = "test_dataset_roundtrip.bin";
  save_dataset(ds, path);
  Dataset loaded = load_dataset(path);
  REQUIRE(loaded.train_count == ds.train_count);
  REQUIRE((loaded.beta_db - ds.beta_db).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((loaded.eta - ds.eta).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((loaded.stats.mean_db - ds.stats.mean_db).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(loaded.config.num_rus == ds.config.num_rus);
  REQUIRE(loaded.config.master_seed == ds.config.master_seed);
  std::remove(path.c_str());
}

TEST_CASE("corrupted dataset files are rejected", "[dataset]") {
  const Dataset& ds = shared_dataset();
  std::string path = "test_dataset_corrupt.bin";
  save_dataset(ds, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
  }
  REQUIRE_THROWS_AS(load_dataset(path), IoError);

  save_dataset(ds, path);
  {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string all = buf.str();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(all.data(), static_cast<std::streamsize>(all.size() - 16));
  }
  REQUIRE_THROWS_AS(load_dataset(path), IoError);
  std::remove(path.c_str());
}

TEST_CASE("CSV export writes one labeled row per sample", "[dataset]") {
  const Dataset& ds = shared_dataset();
  std::string path = "test_dataset_export.csv";
  export_dataset_csv(ds, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  int lines = 0;
  std::string header;
  while (std::getline(in, line)) {
    if (lines == 0) header = line;
    ++lines;
  }
  REQUIRE(lines == 41);
  REQUIRE(header.rfind("sample,split,", 0) == 0);
  std::remove(path.c_str());
}

TEST_CASE("network config JSON round-trips including the seed", "[dataset]") {
  NetworkConfig cfg = tiny_config();
  cfg.shadowing_std_db = 6.5;
  cfg.master_seed = 12345;
  NetworkConfig back = config_from_json(config_to_json(cfg));
  REQUIRE(back.num_rus == cfg.num_rus);
  REQUIRE(back.num_ues == cfg.num_ues);
  REQUIRE(back.area_side_m == cfg.area_side_m);
  REQUIRE(back.total_power_w == cfg.total_power_w);
  REQUIRE(back.noise_power_w == cfg.noise_power_w);
  REQUIRE(back.shadowing_std_db == cfg.shadowing_std_db);
  REQUIRE(back.master_seed == cfg.master_seed);
  REQUIRE(back.pathloss.d1_m == cfg.pathloss.d1_m);
}
