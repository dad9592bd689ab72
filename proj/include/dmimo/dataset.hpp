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
// Supervised dataset for the allocator: rows pair a flattened
// large-scale-fading report in dB with the max-min fair power
// coefficients the analytic solver produced for it. Feature
// standardization statistics are frozen over the training split at
// generation time and travel with the file, so every later consumer
// (training, attacks, evaluation) standardizes identically.

#ifndef DMIMO_DATASET_HPP
#define DMIMO_DATASET_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmimo/mmf.hpp"
#include "dmimo/scenario.hpp"
#include "dmimo/types.hpp"

namespace dmimo {

inline nlohmann::json config_to_json(const NetworkConfig& cfg) {
  nlohmann::json j;
  j["num_rus"] = cfg.num_rus;
  j["num_ues"] = cfg.num_ues;
  j["area_side_m"] = cfg.area_side_m;
  j["total_power_w"] = cfg.total_power_w;
  j["noise_power_w"] = cfg.noise_power_w;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["shadowing_std_db"] = cfg.shadowing_std_db;
  j["master_seed"] = cfg.master_seed;
  j["pathloss"]["d0_m"] = cfg.pathloss.d0_m;
  j["pathloss"]["d1_m"] = cfg.pathloss.d1_m;
  j["pathloss"]["carrier_mhz"] = cfg.pathloss.carrier_mhz;
  j["pathloss"]["ru_height_m"] = cfg.pathloss.ru_height_m;
  j["pathloss"]["ue_height_m"] = cfg.pathloss.ue_height_m;
  return j;
}

// Missing keys fall back to the defaults, so config files only need to
// state what they change.
inline NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig cfg;
  cfg.num_rus = j.value("num_rus", cfg.num_rus);
  cfg.num_ues = j.value("num_ues", cfg.num_ues);
  cfg.area_side_m = j.value("area_side_m", cfg.area_side_m);
  cfg.total_power_w = j.value("total_power_w", cfg.total_power_w);
  cfg.noise_power_w = j.value("noise_power_w", cfg.noise_power_w);
  cfg.bandwidth_hz = j.value("bandwidth_hz", cfg.bandwidth_hz);
  cfg.shadowing_std_db = j.value("shadowing_std_db", cfg.shadowing_std_db);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("pathloss")) {
    const auto& p = j.at("pathloss");
    cfg.pathloss.d0_m = p.value("d0_m", cfg.pathloss.d0_m);
    cfg.pathloss.d1_m = p.value("d1_m", cfg.pathloss.d1_m);
    cfg.pathloss.carrier_mhz = p.value("carrier_mhz", cfg.pathloss.carrier_mhz);
    cfg.pathloss.ru_height_m = p.value("ru_height_m", cfg.pathloss.ru_height_m);
    cfg.pathloss.ue_height_m = p.value("ue_height_m", cfg.pathloss.ue_height_m);
  }
  cfg.validate();
  return cfg;
}

struct Dataset {
  NetworkConfig config;
  Eigen::Index train_count = 0;
  Matrix beta_db;  // samples x MK, row-major link order (index = m*K + k)
  Matrix eta;      // samples x MK, linear power coefficients
  FeatureStats stats;  // over the training rows of beta_db

  Eigen::Index samples() const { return beta_db.rows(); }
  Eigen::Index val_count() const { return samples() - train_count; }

  void validate() const {
    config.validate();
    if (beta_db.rows() != eta.rows() || beta_db.cols() != eta.cols())
      throw ShapeMismatch("Dataset: feature/target shape mismatch");
    if (beta_db.cols() != static_cast<Eigen::Index>(config.num_rus) * config.num_ues)
      throw ShapeMismatch("Dataset: feature width does not match config dims");
    if (train_count < 1 || train_count >= samples())
      throw BadConfig("Dataset: train_count must leave a nonempty validation split");
    if (stats.dim() != beta_db.cols()) throw ShapeMismatch("Dataset: stats width mismatch");
  }

  Matrix train_features_std() const {
    Matrix x = beta_db.topRows(train_count);
    x = (x.rowwise() - stats.mean_db.transpose()).array().rowwise() /
        stats.std_db.transpose().array();
    return x;
  }
  Matrix val_features_std() const {
    Matrix x = beta_db.bottomRows(val_count());
    x = (x.rowwise() - stats.mean_db.transpose()).array().rowwise() /
        stats.std_db.transpose().array();
    return x;
  }

  // Training target is the per-RU load share nu = eta * beta, the
  // quantity the network's logistic head emits directly.
  Matrix train_targets_nu() const { return nu_rows(0, train_count); }
  Matrix val_targets_nu() const { return nu_rows(train_count, val_count()); }

 private:
  Matrix nu_rows(Eigen::Index start, Eigen::Index count) const {
    Matrix beta_lin =
        beta_db.middleRows(start, count).unaryExpr([](double db) { return std::pow(10.0, db / 10.0); });
    return eta.middleRows(start, count).cwiseProduct(beta_lin);
  }
};

// Population mean and standard deviation per feature column.
inline FeatureStats compute_feature_stats(const Matrix& rows) {
  if (rows.rows() < 2) throw EmptySamples("compute_feature_stats: need >= 2 rows");
  FeatureStats stats;
  stats.mean_db = rows.colwise().mean();
  Matrix centered = rows.rowwise() - stats.mean_db.transpose();
  stats.std_db =
      (centered.array().square().colwise().sum() / static_cast<double>(rows.rows())).sqrt();
  check_stats(stats);
  return stats;
}

// Draws scenarios on the per-sample generation streams and labels each
// with the analytic max-min solution. A solver breakdown is surfaced with
// the offending fading matrix attached; it is not skipped, because a
// silently thinned dataset would bias the imitation target.
inline Dataset gen_dataset(const NetworkConfig& cfg, std::size_t num_samples,
                           double train_fraction, const SolverConfig& solver_cfg = {},
                           const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  cfg.validate();
  solver_cfg.validate();
  if (num_samples < 2) throw BadConfig("gen_dataset: need >= 2 samples");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw BadConfig("gen_dataset: train_fraction must be in (0, 1)");

  Dataset ds;
  ds.config = cfg;
  const auto mk = static_cast<Eigen::Index>(cfg.num_rus) * cfg.num_ues;
  ds.beta_db.resize(static_cast<Eigen::Index>(num_samples), mk);
  ds.eta.resize(static_cast<Eigen::Index>(num_samples), mk);
  for (std::size_t i = 0; i < num_samples; ++i) {
    BetaMatrix beta = sample_scenario(cfg, cfg.master_seed, i);
    MmfSolution sol;
    try {
      sol = solve_mmf(beta, cfg.total_power_w, cfg.noise_power_w, solver_cfg);
    } catch (const NoConvergence& e) {
      throw SolverFailure("gen_dataset: sample " + std::to_string(i) + ": " + e.what(), beta);
    } catch (const InfeasibleModel& e) {
      throw SolverFailure("gen_dataset: sample " + std::to_string(i) + ": " + e.what(), beta);
    }
    ds.beta_db.row(static_cast<Eigen::Index>(i)) = flatten(beta.to_db()).transpose();
    ds.eta.row(static_cast<Eigen::Index>(i)) = flatten(sol.eta.values).transpose();
    if (progress && ((i + 1) % 500 == 0 || i + 1 == num_samples)) progress(i + 1, num_samples);
  }
  ds.train_count = static_cast<Eigen::Index>(
      std::llround(train_fraction * static_cast<double>(num_samples)));
  ds.train_count = std::min(std::max<Eigen::Index>(ds.train_count, 1),
                            static_cast<Eigen::Index>(num_samples) - 1);
  ds.stats = compute_feature_stats(ds.beta_db.topRows(ds.train_count));
  ds.validate();
  return ds;
}

namespace detail {

constexpr char kDatasetMagic[8] = {'D', 'M', 'D', 'S', '0', '0', '0', '1'};

}  // namespace detail

// Dataset file: 8-byte magic, u64 LE header length, JSON header, then per
// sample the dB features followed by the linear coefficients, all f64 LE.
inline void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  nlohmann::json header;
  header["format"] = "dmimo-dataset";
  header["config"] = config_to_json(ds.config);
  header["samples"] = ds.samples();
  header["num_rus"] = ds.config.num_rus;
  header["num_ues"] = ds.config.num_ues;
  header["ordering"] = "row-major, index = m*K + k";
  header["train_count"] = ds.train_count;
  header["feature_stats"]["mean_db"] = std::vector<double>(
      ds.stats.mean_db.data(), ds.stats.mean_db.data() + ds.stats.mean_db.size());
  header["feature_stats"]["std_db"] = std::vector<double>(
      ds.stats.std_db.data(), ds.stats.std_db.data() + ds.stats.std_db.size());
  std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_dataset: cannot open '" + path + "'");
  out.write(detail::kDatasetMagic, sizeof detail::kDatasetMagic);
  std::uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  std::vector<double> row(static_cast<std::size_t>(ds.beta_db.cols()));
  for (Eigen::Index i = 0; i < ds.samples(); ++i) {
    for (Eigen::Index j = 0; j < ds.beta_db.cols(); ++j) row[static_cast<std::size_t>(j)] = ds.beta_db(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
    for (Eigen::Index j = 0; j < ds.eta.cols(); ++j) row[static_cast<std::size_t>(j)] = ds.eta(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
  }
  if (!out) throw IoError("save_dataset: write failed for '" + path + "'");
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_dataset: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::kDatasetMagic, sizeof magic) != 0)
    throw IoError("load_dataset: bad magic in '" + path + "'");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  if (!in || hlen == 0 || hlen > (1u << 20)) throw IoError("load_dataset: bad header length");
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw IoError("load_dataset: truncated header");
  nlohmann::json header = nlohmann::json::parse(htext, nullptr, false);
  if (header.is_discarded()) throw IoError("load_dataset: header is not valid JSON");

  Dataset ds;
  ds.config = config_from_json(header.at("config"));
  auto n = header.at("samples").get<Eigen::Index>();
  ds.train_count = header.at("train_count").get<Eigen::Index>();
  auto mean = header.at("feature_stats").at("mean_db").get<std::vector<double>>();
  auto stdv = header.at("feature_stats").at("std_db").get<std::vector<double>>();
  ds.stats.mean_db = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  ds.stats.std_db = Eigen::Map<const Vector>(stdv.data(), static_cast<Eigen::Index>(stdv.size()));
  const auto mk = static_cast<Eigen::Index>(ds.config.num_rus) * ds.config.num_ues;
  ds.beta_db.resize(n, mk);
  ds.eta.resize(n, mk);
  std::vector<double> row(static_cast<std::size_t>(mk));
  for (Eigen::Index i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * row.size()));
    for (Eigen::Index j = 0; j < mk; ++j) ds.beta_db(i, j) = row[static_cast<std::size_t>(j)];
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * row.size()));
    for (Eigen::Index j = 0; j < mk; ++j) ds.eta(i, j) = row[static_cast<std::size_t>(j)];
    if (!in) throw IoError("load_dataset: truncated records");
  }
  if (!ds.beta_db.allFinite() || !ds.eta.allFinite())
    throw IoError("load_dataset: non-finite values in '" + path + "'");
  ds.validate();
  return ds;
}

inline void export_dataset_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw IoError("export_dataset_csv: cannot open '" + path + "'");
  const int m = ds.config.num_rus;
  const int k = ds.config.num_ues;
  out << "sample,split";
  for (int mi = 0; mi < m; ++mi)
    for (int ki = 0; ki < k; ++ki) out << ",beta_db_" << mi << '_' << ki;
  for (int mi = 0; mi < m; ++mi)
    for (int ki = 0; ki < k; ++ki) out << ",eta_" << mi << '_' << ki;
  out << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < ds.samples(); ++i) {
    out << i << ',' << (i < ds.train_count ? "train" : "val");
    for (Eigen::Index j = 0; j < ds.beta_db.cols(); ++j) out << ',' << ds.beta_db(i, j);
    for (Eigen::Index j = 0; j < ds.eta.cols(); ++j) out << ',' << ds.eta(i, j);
    out << '\n';
  }
  if (!out) throw IoError("export_dataset_csv: write failed for '" + path + "'");
}

}  // namespace dmimo

#endif  // DMIMO_DATASET_HPP
