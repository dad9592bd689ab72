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
//
// Command line front end. Exit codes: 0 success, 1 usage error, 2 runtime
// failure. Every stage is seeded from the network config, so rerunning a
// command with the same inputs reproduces its outputs byte for byte.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmimo/dmimo.hpp"

using namespace dmimo;

namespace {

NetworkConfig load_config(const std::string& path) {
  if (path.empty()) return NetworkConfig{};
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return config_from_json(j);
}

void progress_line(std::size_t done, std::size_t total, std::size_t every) {
  if (done % every == 0 || done == total)
    std::cerr << "  " << done << " / " << total << "\n";
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

struct CampaignIo {
  std::string dataset_path;
  std::string original_path;
  std::string surrogate_path;
  std::size_t eval_instances = 2000;
  std::size_t attack_instances = 400;
  int pool = 32;
  int boot = 1000;
  std::string out_path;
  std::string csv_prefix;
};

void add_campaign_options(CLI::App* cmd, CampaignIo& io) {
  cmd->add_option("--dataset", io.dataset_path, "dataset file from gen-data")
      ->required();
  cmd->add_option("--original", io.original_path, "deployed allocator model file")
      ->required();
  cmd->add_option("--surrogate", io.surrogate_path, "adversary surrogate model file")
      ->required();
  cmd->add_option("--instances", io.eval_instances,
                  "held-out instances for clean baselines");
  cmd->add_option("--attack-instances", io.attack_instances,
                  "held-out instances per attacked arm");
  cmd->add_option("--pool", io.pool, "universal-attack report pool size");
  cmd->add_option("--boot", io.boot, "bootstrap replicates");
  cmd->add_option("--out", io.out_path, "report JSON path")->required();
  cmd->add_option("--csv", io.csv_prefix, "also export CSV files with this prefix");
}

struct Campaign {
  Dataset ds;
  MlpModel original;
  MlpModel surrogate;
  EvalContext ctx;
};

Campaign load_campaign(const CampaignIo& io) {
  Campaign camp;
  camp.ds = load_dataset(io.dataset_path);
  camp.original = load_model(io.original_path);
  camp.surrogate = load_model(io.surrogate_path);
  std::cerr << "solving " << io.eval_instances << " held-out instances\n";
  camp.ctx = make_eval_context(
      camp.ds.config, io.eval_instances, camp.ds, &camp.original, &camp.surrogate,
      io.pool, io.boot, SolverConfig{},
      [&](std::size_t done, std::size_t total) { progress_line(done, total, 500); });
  return camp;
}

void run_campaign(const Campaign& camp, const CampaignIo& io,
                  const std::vector<std::pair<ScenarioSpec, std::size_t>>& grid) {
  EvalReport rep;
  rep.config = camp.ds.config;
  rep.bootstrap_replicates = io.boot;
  rep.original_fingerprint = model_fingerprint(camp.original);
  rep.surrogate_fingerprint = model_fingerprint(camp.surrogate);
  rep.uap_pool_rows = camp.ctx.pool_rows;
  for (const auto& [spec, count] : grid) {
    if (rep.has_row(spec.label())) continue;
    std::cerr << "evaluating " << spec.label() << " (" << count << " instances)\n";
    rep.rows.push_back(evaluate_scenario(camp.ctx, spec, count));
  }
  export_report_json(rep, io.out_path);
  std::cerr << "report written to " << io.out_path << "\n";
  if (!io.csv_prefix.empty()) export_report_csv(rep, io.csv_prefix);
}

void print_report_table(const EvalReport& rep) {
  std::printf("%-52s %6s %12s %12s %12s %14s\n", "arm", "n", "med SE/user",
              "p5 SE/user", "med min-SE", "mean EE");
  for (const auto& row : rep.rows) {
    std::printf("%-52s %6zu %12.4f %12.4f %12.4f %14.4g\n", row.label.c_str(),
                row.num_instances, row.median_per_user_se.value,
                row.p5_per_user_se.value, row.median_min_se.value, row.mean_ee.value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed-MIMO power allocation and robustness toolkit"};
  app.require_subcommand(1);

  // gen-data
  std::string gd_config, gd_out, gd_csv;
  std::size_t gd_samples = 20000;
  double gd_fraction = 0.975;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "sample fading scenarios and label them with analytic allocations");
  gen->add_option("--config", gd_config, "network config JSON");
  gen->add_option("--samples", gd_samples, "number of labeled samples");
  gen->add_option("--train-fraction", gd_fraction, "fraction used for training");
  gen->add_option("--out", gd_out, "dataset output path")->required();
  gen->add_option("--csv", gd_csv, "also export the dataset as CSV");

  // solve
  std::string sv_config, sv_out;
  std::size_t sv_index = 0;
  bool sv_eval = false;
  CLI::App* solve = app.add_subcommand(
      "solve", "solve one sampled instance and print the allocation as JSON");
  solve->add_option("--config", sv_config, "network config JSON");
  solve->add_option("--index", sv_index, "instance index on the sampling stream");
  solve->add_flag("--eval", sv_eval, "draw from the held-out streams instead");
  solve->add_option("--out", sv_out, "output path (default stdout)");

  // train
  std::string tr_dataset, tr_out;
  std::vector<int> tr_hidden = {512, 256, 128};
  std::uint64_t tr_stream = 0;
  TrainConfig tr_cfg;
  CLI::App* trn = app.add_subcommand("train", "fit an allocator model to a dataset");
  trn->add_option("--dataset", tr_dataset, "dataset file from gen-data")->required();
  trn->add_option("--hidden", tr_hidden, "hidden layer widths")->delimiter(',');
  trn->add_option("--stream", tr_stream, "weight stream: 0 deployed, 1 surrogate");
  trn->add_option("--lr", tr_cfg.learning_rate, "Adam learning rate");
  trn->add_option("--batch", tr_cfg.batch_size, "minibatch size");
  trn->add_option("--epochs", tr_cfg.max_epochs, "epoch limit");
  trn->add_option("--patience", tr_cfg.patience, "early stopping patience");
  trn->add_option("--out", tr_out, "model output path")->required();

  // attack
  CampaignIo at_io;
  AttackConfig at_cfg;
  CLI::App* atk = app.add_subcommand(
      "attack", "compare attack arms against clean baselines, full knowledge");
  add_campaign_options(atk, at_io);
  atk->add_option("--epsilon", at_cfg.epsilon_db, "perturbation budget in dB");
  atk->add_option("--alpha", at_cfg.alpha_db, "iterative step in dB");
  atk->add_option("--iters", at_cfg.num_iters, "iterative attack steps");

  // sweep
  CampaignIo sw_io;
  AttackConfig sw_cfg;
  std::string sw_axis = "epsilon";
  std::string sw_threat = "ru";
  std::vector<double> sw_grid;
  double sw_fraction = 0.5;
  CLI::App* swp = app.add_subcommand(
      "sweep", "sweep the perturbation budget or the compromised fraction");
  add_campaign_options(swp, sw_io);
  swp->add_option("--axis", sw_axis, "epsilon or fraction")
      ->check(CLI::IsMember({"epsilon", "fraction"}));
  swp->add_option("--grid", sw_grid, "sweep values")->delimiter(',')->required();
  swp->add_option("--threat", sw_threat, "fraction axis side: ru or ue")
      ->check(CLI::IsMember({"ru", "ue"}));
  swp->add_option("--fraction", sw_fraction, "compromised fraction for the budget axis");
  swp->add_option("--epsilon", sw_cfg.epsilon_db, "budget in dB for the fraction axis");
  swp->add_option("--alpha", sw_cfg.alpha_db, "iterative step in dB");
  swp->add_option("--iters", sw_cfg.num_iters, "iterative attack steps");

  // report
  std::string rp_in, rp_csv;
  CLI::App* rpt = app.add_subcommand("report",
                                     "print a report summary and export CSV files");
  rpt->add_option("--in", rp_in, "report JSON path")->required();
  rpt->add_option("--csv", rp_csv, "CSV export prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(gen)) {
      NetworkConfig cfg = load_config(gd_config);
      Dataset ds = gen_dataset(cfg, gd_samples, gd_fraction, SolverConfig{},
                               [&](std::size_t done, std::size_t total) {
                                 progress_line(done, total, 2000);
                               });
      save_dataset(ds, gd_out);
      std::cerr << "dataset written to " << gd_out << " (" << ds.train_count
                << " train, " << ds.val_count() << " validation)\n";
      if (!gd_csv.empty()) export_dataset_csv(ds, gd_csv);
    } else if (app.got_subcommand(solve)) {
      NetworkConfig cfg = load_config(sv_config);
      BetaMatrix beta =
          sv_eval ? sample_scenario(cfg, cfg.master_seed, sv_index,
                                    StreamPurpose::kEvalUePositions,
                                    StreamPurpose::kEvalShadowing)
                  : sample_scenario(cfg, cfg.master_seed, sv_index);
      MmfSolution sol = solve_mmf(beta, cfg.total_power_w, cfg.noise_power_w);
      SpectralMetrics met = compute_metrics(beta.values, sol.eta.values, cfg);
      nlohmann::json j;
      j["index"] = sv_index;
      j["held_out_streams"] = sv_eval;
      j["beta_db"] = matrix_to_json(beta.to_db());
      j["eta"] = matrix_to_json(sol.eta.values);
      j["ru_load"] = vector_to_json(power_violation(beta.values, sol.eta.values));
      j["sinr"] = vector_to_json(met.sinr);
      j["se"] = vector_to_json(met.se);
      j["min_se"] = met.min_se;
      j["sum_se"] = met.sum_se;
      j["ee"] = met.ee;
      j["bisection_iters"] = sol.bisection_iters;
      write_text(sv_out, j.dump(2) + "\n");
    } else if (app.got_subcommand(trn)) {
      Dataset ds = load_dataset(tr_dataset);
      tr_cfg.master_seed = ds.config.master_seed;
      tr_cfg.stream_index = tr_stream;
      const auto mk = static_cast<int>(ds.beta_db.cols());
      MlpModel model =
          make_mlp(mk, tr_hidden, mk, ds.stats, tr_cfg.master_seed, tr_stream);
      TrainResult res = train(model, ds.train_features_std(), ds.train_targets_nu(),
                              ds.val_features_std(), ds.val_targets_nu(), tr_cfg);
      save_model(model, tr_out);
      std::cerr << "model written to " << tr_out << " after " << res.epochs_run
                << " epochs (best " << res.best_epoch << ", val mse "
                << res.best_val_mse << ", fingerprint " << model_fingerprint(model)
                << ")\n";
    } else if (app.got_subcommand(atk)) {
      Campaign camp = load_campaign(at_io);
      std::vector<std::pair<ScenarioSpec, std::size_t>> grid;
      for (const auto& s : clean_rows()) grid.emplace_back(s, at_io.eval_instances);
      for (const auto& s : attack_comparison_rows(at_cfg))
        grid.emplace_back(s, at_io.attack_instances);
      run_campaign(camp, at_io, grid);
    } else if (app.got_subcommand(swp)) {
      Campaign camp = load_campaign(sw_io);
      std::vector<std::pair<ScenarioSpec, std::size_t>> grid;
      ScenarioSpec clean;
      clean.allocator = Allocator::kOriginal;
      grid.emplace_back(clean, sw_io.attack_instances);
      if (sw_axis == "epsilon") {
        for (const auto& s : epsilon_sweep_rows(sw_grid, sw_cfg, sw_fraction))
          grid.emplace_back(s, sw_io.attack_instances);
      } else {
        ThreatTag tag =
            sw_threat == "ru" ? ThreatTag::kMaliciousRus : ThreatTag::kMaliciousUes;
        for (const auto& s : fraction_sweep_rows(tag, sw_cfg, sw_grid))
          grid.emplace_back(s, sw_io.attack_instances);
      }
      run_campaign(camp, sw_io, grid);
    } else if (app.got_subcommand(rpt)) {
      EvalReport rep = load_report(rp_in);
      print_report_table(rep);
      if (!rp_csv.empty()) export_report_csv(rep, rp_csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
