// infpos: indoor-factory positioning laboratory.
// Pipeline: generate -> split -> train -> eval, plus classical baselines and
// LR-schedule inspection. All stages are driven by a JSON config; flags
// override the config where noted.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "infpos/baseline.hpp"
#include "infpos/config.hpp"
#include "infpos/error.hpp"
#include "infpos/eval.hpp"
#include "infpos/generate.hpp"
#include "infpos/model.hpp"
#include "infpos/train.hpp"

namespace {

using infpos::Errc;
using infpos::Error;
using nlohmann::json;

constexpr const char* kExitCodeDoc =
    "Exit codes: 0 success, 64 usage, 65 config error, 66 data/format error,\n"
    "69 no-fix, 70 numeric error, 74 I/O error.";

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::usage: return 64;
    case Errc::config: return 65;
    case Errc::domain:
    case Errc::data:
    case Errc::format_magic:
    case Errc::format_version:
    case Errc::format_truncated:
    case Errc::format_count: return 66;
    case Errc::no_fix: return 69;
    case Errc::numeric: return 70;
    case Errc::io: return 74;
  }
  return 1;
}

infpos::RunConfig load_config(const std::string& path) {
  if (path.empty()) return infpos::parse_config_json(json::object());
  return infpos::parse_config(path);
}

infpos::Splits load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open manifest " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(Errc::data, "manifest: " + std::string(e.what()));
  }
  infpos::Splits s;
  try {
    s.fit = j.at("fit").get<std::vector<std::size_t>>();
    s.validation = j.at("validation").get<std::vector<std::size_t>>();
    s.test = j.at("test").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw Error(Errc::data, "manifest: " + std::string(e.what()));
  }
  return s;
}

void attach_provenance(const std::string& summary_path, const infpos::RunConfig& cfg) {
  std::ifstream is(summary_path);
  json j = json::parse(is);
  is.close();
  j["config"] = infpos::config_to_json(cfg);
  std::ofstream os(summary_path);
  os << j.dump(2) << '\n';
}

// Inference over record ids in batches; returns horizontal errors.
std::vector<double> model_errors(infpos::nn::Model<float>& model,
                                 const infpos::Dataset& data,
                                 const infpos::NormalizationSpec& norm,
                                 const std::vector<std::size_t>& ids, int batch_size) {
  std::vector<double> errors;
  errors.reserve(ids.size());
  infpos::nn::Tensor<float> x, y;
  for (std::size_t begin = 0; begin < ids.size();
       begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(begin + static_cast<std::size_t>(batch_size), ids.size());
    infpos::fill_batch(data, norm, ids, begin, end, x, y);
    infpos::nn::Tensor<float> pred = model.forward(x, /*training=*/false);
    for (std::size_t s = 0; s < end - begin; ++s) {
      errors.push_back(infpos::horizontal_error(pred.data[2 * s], pred.data[2 * s + 1],
                                                y.data[2 * s], y.data[2 * s + 1]));
    }
  }
  return errors;
}

int run(int argc, char** argv) {
  CLI::App app{"infpos: indoor-factory positioning laboratory"};
  app.footer(kExitCodeDoc);
  app.require_subcommand(1);

  std::string config_path, data_path, manifest_path, checkpoint_path, out_path;
  std::string report_path = "report.csv", summary_path, history_path, method = "tdoa";
  std::size_t count = 0;
  std::uint64_t seed = 0;
  bool seed_set = false, count_set = false;
  int workers = 1, epochs_override = 0, knn_k = 5;
  double toa_threshold_db = 20.0;

  auto* gen = app.add_subcommand("generate", "Synthesize a CIR+RSRP dataset file");
  gen->add_option("--config", config_path, "JSON config file");
  gen->add_option("--out", out_path, "Output dataset path")->required();
  gen->add_option("--count", count, "Record count (overrides config)")
      ->each([&](const std::string&) { count_set = true; });
  gen->add_option("--seed", seed, "Master seed (overrides config)")
      ->each([&](const std::string&) { seed_set = true; });
  gen->add_option("--workers", workers, "Parallel generation workers")
      ->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Write a fit/validation/test manifest");
  split->add_option("--config", config_path, "JSON config file");
  split->add_option("--data", data_path, "Dataset file")->required();
  split->add_option("--out-manifest", manifest_path, "Manifest output path")->required();

  auto* train = app.add_subcommand("train", "Train the residual CNN");
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--data", data_path, "Dataset file")->required();
  train->add_option("--manifest", manifest_path, "Split manifest")->required();
  train->add_option("--checkpoint", checkpoint_path, "Checkpoint output path")->required();
  train->add_option("--history", history_path, "Training history CSV output");
  train->add_option("--epochs", epochs_override, "Epoch count (overrides config)");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval->add_option("--config", config_path, "JSON config file");
  eval->add_option("--data", data_path, "Dataset file")->required();
  eval->add_option("--manifest", manifest_path, "Split manifest")->required();
  eval->add_option("--checkpoint", checkpoint_path, "Trained checkpoint")->required();
  eval->add_option("--report", report_path, "CDF report CSV path");
  eval->add_option("--summary", summary_path, "Summary JSON path");

  auto* baseline = app.add_subcommand("baseline", "Classical positioning baselines");
  baseline->add_option("--method", method, "tdoa or knn")
      ->check(CLI::IsMember({"tdoa", "knn"}));
  baseline->add_option("--config", config_path, "JSON config file");
  baseline->add_option("--data", data_path, "Dataset file")->required();
  baseline->add_option("--manifest", manifest_path, "Split manifest")->required();
  baseline->add_option("--report", report_path, "CDF report CSV path");
  baseline->add_option("--summary", summary_path, "Summary JSON path");
  baseline->add_option("--k", knn_k, "Neighbor count for knn")->check(CLI::PositiveNumber);
  baseline->add_option("--toa-threshold-db", toa_threshold_db,
                       "First-peak threshold below peak, dB");

  auto* sched = app.add_subcommand("schedule", "Dump the LR schedule as CSV");
  sched->add_option("--config", config_path, "JSON config file");
  sched->add_option("--out", out_path, "CSV output path")->required();

  auto* info = app.add_subcommand("info", "Print a dataset file header");
  info->add_option("--data", data_path, "Dataset file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  const infpos::RunConfig cfg = load_config(config_path);
  if (summary_path.empty()) summary_path = cfg.eval.summary_json;

  if (gen->parsed()) {
    const infpos::Scenario scenario = infpos::build_scenario(cfg.scenario);
    const std::size_t n = count_set ? count : cfg.dataset.record_count;
    const std::uint64_t s = seed_set ? seed : cfg.dataset.master_seed;
    infpos::Dataset d = infpos::generate_dataset(scenario, cfg.channel, n, s, workers);
    infpos::save_dataset(out_path, d);
    std::cout << "wrote " << d.records.size() << " records to " << out_path << "\n";
    return 0;
  }

  if (split->parsed()) {
    const infpos::DatasetHeader h = infpos::read_dataset_header(data_path);
    const infpos::Splits s = infpos::split_dataset(h.record_count, cfg.dataset.split);
    json j{{"n", h.record_count},
           {"seed", cfg.dataset.split.seed},
           {"fit", s.fit},
           {"validation", s.validation},
           {"test", s.test}};
    std::ofstream os(manifest_path);
    if (!os) throw Error(Errc::io, "cannot open " + manifest_path);
    os << j.dump() << '\n';
    std::cout << "split " << h.record_count << " -> fit " << s.fit.size() << ", validation "
              << s.validation.size() << ", test " << s.test.size() << "\n";
    return 0;
  }

  if (train->parsed()) {
    const infpos::Dataset data = infpos::load_dataset(data_path, cfg.channel.tap_spacing);
    const infpos::Splits splits = load_manifest(manifest_path);
    infpos::nn::ModelArch base;
    base.in_h = 2 * static_cast<int>(data.trp_count);
    base.in_w = static_cast<int>(data.tap_count);
    const infpos::nn::ModelArch arch =
        infpos::nn::scaled_arch(base, cfg.model.width_multiplier);
    infpos::nn::Model<float> model(arch);
    model.init(cfg.model.init_seed);
    infpos::TrainConfig tc = cfg.train;
    if (epochs_override > 0) tc.epochs = epochs_override;
    infpos::TrainResult result = infpos::train(
        model, data, cfg.dataset.normalization, splits.fit, splits.validation, tc,
        [](const infpos::TrainHistoryRow& r) {
          std::printf("epoch %3d  lr %.3e  fit %.4f  val %.4f\n", r.epoch, r.lr,
                      r.fit_loss, r.val_loss);
          std::fflush(stdout);
        });
    infpos::nn::save_checkpoint(checkpoint_path, arch, result.best_params);
    if (!history_path.empty()) infpos::write_history_csv(history_path, result.history);
    std::cout << "best validation loss " << result.best_val_loss << " at epoch "
              << result.best_epoch << "; checkpoint " << checkpoint_path << "\n";
    return 0;
  }

  if (eval->parsed()) {
    const infpos::Dataset data = infpos::load_dataset(data_path, cfg.channel.tap_spacing);
    const infpos::Splits splits = load_manifest(manifest_path);
    auto [arch, flat] = infpos::nn::load_checkpoint(checkpoint_path);
    infpos::nn::Model<float> model(arch);
    model.set_flat_params(flat);
    const std::vector<double> errors =
        model_errors(model, data, cfg.dataset.normalization, splits.test, cfg.train.batch_size);
    const infpos::EvalReport report = infpos::make_report(errors);
    infpos::write_report(report, report_path, summary_path);
    attach_provenance(summary_path, cfg);
    std::printf("n=%zu  p50 %.3f m  p90 %.3f m  p95 %.3f m\n", report.count, report.p50,
                report.p90, report.p95);
    return 0;
  }

  if (baseline->parsed()) {
    const infpos::Dataset data = infpos::load_dataset(data_path, cfg.channel.tap_spacing);
    const infpos::Splits splits = load_manifest(manifest_path);
    const infpos::Scenario scenario = infpos::build_scenario(cfg.scenario);
    std::vector<double> errors;
    errors.reserve(splits.test.size());

    double cx = 0.0, cy = 0.0;  // hull centroid: TDoA initial guess
    for (const auto& v : scenario.hull) {
      cx += v[0];
      cy += v[1];
    }
    cx /= static_cast<double>(scenario.hull.size());
    cy /= static_cast<double>(scenario.hull.size());

    if (method == "knn") {
      infpos::FingerprintDb db;
      auto add = [&](const std::vector<std::size_t>& ids) {
        for (std::size_t i : ids) {
          const auto& rec = data.records[i];
          infpos::FingerprintEntry e;
          e.rsrp.assign(rec.rsrp.begin(), rec.rsrp.end());
          e.x = rec.ue_x;
          e.y = rec.ue_y;
          db.entries.push_back(std::move(e));
        }
      };
      add(splits.fit);
      add(splits.validation);
      for (std::size_t i : splits.test) {
        const auto& rec = data.records[i];
        std::vector<double> q(rec.rsrp.begin(), rec.rsrp.end());
        const infpos::KnnResult r = infpos::knn_fingerprint(db, q, knn_k);
        errors.push_back(infpos::horizontal_error(r.x, r.y, rec.ue_x, rec.ue_y));
      }
    } else {
      for (std::size_t i : splits.test) {
        const auto& rec = data.records[i];
        std::vector<infpos::ToaMeasurement> toas;
        int ref = 0;
        for (std::size_t j = 0; j < rec.cir.size(); ++j) {
          toas.push_back(infpos::estimate_toa(rec.cir[j], toa_threshold_db,
                                              static_cast<int>(j)));
          if (rec.rsrp[j] > rec.rsrp[ref]) ref = static_cast<int>(j);
        }
        double px = cx, py = cy;
        try {
          std::tie(px, py) = infpos::tdoa_solve(toas, scenario.trp_positions, ref,
                                                {cx, cy}, scenario.config.ue_height);
        } catch (const Error& e) {
          if (e.code() != Errc::no_fix) throw;  // no fix: fall back to the centroid
        }
        errors.push_back(infpos::horizontal_error(px, py, rec.ue_x, rec.ue_y));
      }
    }
    const infpos::EvalReport report = infpos::make_report(errors);
    infpos::write_report(report, report_path, summary_path);
    attach_provenance(summary_path, cfg);
    std::printf("%s baseline: n=%zu  p50 %.3f m  p90 %.3f m\n", method.c_str(),
                report.count, report.p50, report.p90);
    return 0;
  }

  if (sched->parsed()) {
    std::ofstream os(out_path);
    if (!os) throw Error(Errc::io, "cannot open " + out_path);
    os << "epoch,lr\n";
    os.precision(17);
    for (int e = 0; e < cfg.train.schedule.total_epochs; ++e)
      os << e << ',' << infpos::lr_at_epoch(e, cfg.train.schedule) << '\n';
    std::cout << "wrote " << cfg.train.schedule.total_epochs << " rows to " << out_path
              << "\n";
    return 0;
  }

  if (info->parsed()) {
    const infpos::DatasetHeader h = infpos::read_dataset_header(data_path);
    std::cout << "version " << h.version << "\nrecord_count " << h.record_count
              << "\ntrp_count " << h.trp_count << "\ntap_count " << h.tap_count << "\n";
    return 0;
  }

  return 64;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
