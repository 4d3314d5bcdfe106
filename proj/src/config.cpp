#include "infpos/config.hpp"

#include <fstream>
#include <set>

#include "infpos/error.hpp"

namespace infpos {

namespace {

using nlohmann::json;

// Tracks which keys were consumed so leftovers can be rejected by name.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object())
      throw Error(Errc::config, path_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw Error(Errc::config, path_ + "." + key + ": wrong type");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& sub(const char* key) { return j_.at(key); }

  void finish() {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key))
        throw Error(Errc::config, path_ + "." + key + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_scenario(const json& j, ScenarioConfig& c) {
  StrictObject o(j, "scenario");
  o.get("hall_length", c.hall_length);
  o.get("hall_width", c.hall_width);
  o.get("trp_rows", c.trp_rows);
  o.get("trp_cols", c.trp_cols);
  o.get("trp_height", c.trp_height);
  o.get("ue_height", c.ue_height);
  o.get("clutter_density", c.clutter_density);
  o.get("clutter_height", c.clutter_height);
  o.get("clutter_size", c.clutter_size);
  o.get("carrier_freq_ghz", c.carrier_freq_ghz);
  o.get("tx_power_dbm", c.tx_power_dbm);
  o.finish();
  c.validate();
}

void parse_channel(const json& j, ChannelParams& c) {
  StrictObject o(j, "channel");
  o.get("pl_los_intercept", c.pl_los_intercept);
  o.get("pl_los_slope", c.pl_los_slope);
  o.get("pl_nlos_intercept", c.pl_nlos_intercept);
  o.get("pl_nlos_slope", c.pl_nlos_slope);
  o.get("shadow_sigma_los", c.shadow_sigma_los);
  o.get("shadow_sigma_nlos", c.shadow_sigma_nlos);
  o.get("rician_k_db", c.rician_k_db);
  o.get("rms_delay_spread_los", c.rms_delay_spread_los);
  o.get("rms_delay_spread_nlos", c.rms_delay_spread_nlos);
  o.get("n_paths", c.n_paths);
  o.get("tap_spacing", c.tap_spacing);
  o.get("tap_count", c.tap_count);
  o.finish();
  c.validate();
}

void parse_dataset(const json& j, DatasetConfig& c) {
  StrictObject o(j, "dataset");
  o.get("record_count", c.record_count);
  o.get("master_seed", c.master_seed);
  if (o.has("split")) {
    StrictObject s(o.sub("split"), "dataset.split");
    s.get("test_fraction", c.split.test_fraction);
    s.get("validation_fraction_of_train", c.split.validation_fraction_of_train);
    s.get("seed", c.split.seed);
    s.finish();
  }
  if (o.has("normalization")) {
    StrictObject s(o.sub("normalization"), "dataset.normalization");
    s.get("rsrp_min_dbm", c.normalization.rsrp_min_dbm);
    s.get("rsrp_max_dbm", c.normalization.rsrp_max_dbm);
    s.finish();
  }
  o.finish();
  c.split.validate();
  c.normalization.validate();
}

void parse_model(const json& j, ModelConfig& c) {
  StrictObject o(j, "model");
  o.get("width_multiplier", c.width_multiplier);
  o.get("init_seed", c.init_seed);
  o.finish();
  if (!(c.width_multiplier > 0.0))
    throw Error(Errc::config, "model.width_multiplier: must be > 0");
}

void parse_train(const json& j, TrainConfig& c) {
  StrictObject o(j, "train");
  o.get("batch_size", c.batch_size);
  o.get("shuffle_seed", c.shuffle_seed);
  o.get("epochs", c.epochs);
  if (o.has("schedule")) {
    StrictObject s(o.sub("schedule"), "train.schedule");
    s.get("initial", c.schedule.initial);
    s.get("decay", c.schedule.decay);
    s.get("decay_every", c.schedule.decay_every);
    s.get("floor", c.schedule.floor);
    s.get("ramp_period", c.schedule.ramp_period);
    s.get("ramp_step", c.schedule.ramp_step);
    s.get("ramp_cap", c.schedule.ramp_cap);
    s.get("total_epochs", c.schedule.total_epochs);
    s.finish();
  }
  o.finish();
  c.validate();
}

void parse_eval(const json& j, EvalConfig& c) {
  StrictObject o(j, "eval");
  o.get("report_csv", c.report_csv);
  o.get("summary_json", c.summary_json);
  o.finish();
}

}  // namespace

RunConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::config, "config: top level must be a JSON object");
  RunConfig c;
  c.train.epochs = c.train.schedule.total_epochs;
  StrictObject o(j, "config");
  if (o.has("scenario")) parse_scenario(o.sub("scenario"), c.scenario);
  if (o.has("channel")) parse_channel(o.sub("channel"), c.channel);
  if (o.has("dataset")) parse_dataset(o.sub("dataset"), c.dataset);
  if (o.has("model")) parse_model(o.sub("model"), c.model);
  if (o.has("train")) parse_train(o.sub("train"), c.train);
  if (o.has("eval")) parse_eval(o.sub("eval"), c.eval);
  o.finish();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "parse_config: cannot open " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config, "parse_config: " + std::string(e.what()));
  }
  return parse_config_json(j);
}

nlohmann::json config_to_json(const RunConfig& c) {
  return json{
      {"scenario",
       {{"hall_length", c.scenario.hall_length},
        {"hall_width", c.scenario.hall_width},
        {"trp_rows", c.scenario.trp_rows},
        {"trp_cols", c.scenario.trp_cols},
        {"trp_height", c.scenario.trp_height},
        {"ue_height", c.scenario.ue_height},
        {"clutter_density", c.scenario.clutter_density},
        {"clutter_height", c.scenario.clutter_height},
        {"clutter_size", c.scenario.clutter_size},
        {"carrier_freq_ghz", c.scenario.carrier_freq_ghz},
        {"tx_power_dbm", c.scenario.tx_power_dbm}}},
      {"channel",
       {{"pl_los_intercept", c.channel.pl_los_intercept},
        {"pl_los_slope", c.channel.pl_los_slope},
        {"pl_nlos_intercept", c.channel.pl_nlos_intercept},
        {"pl_nlos_slope", c.channel.pl_nlos_slope},
        {"shadow_sigma_los", c.channel.shadow_sigma_los},
        {"shadow_sigma_nlos", c.channel.shadow_sigma_nlos},
        {"rician_k_db", c.channel.rician_k_db},
        {"rms_delay_spread_los", c.channel.rms_delay_spread_los},
        {"rms_delay_spread_nlos", c.channel.rms_delay_spread_nlos},
        {"n_paths", c.channel.n_paths},
        {"tap_spacing", c.channel.tap_spacing},
        {"tap_count", c.channel.tap_count}}},
      {"dataset",
       {{"record_count", c.dataset.record_count},
        {"master_seed", c.dataset.master_seed},
        {"split",
         {{"test_fraction", c.dataset.split.test_fraction},
          {"validation_fraction_of_train", c.dataset.split.validation_fraction_of_train},
          {"seed", c.dataset.split.seed}}},
        {"normalization",
         {{"rsrp_min_dbm", c.dataset.normalization.rsrp_min_dbm},
          {"rsrp_max_dbm", c.dataset.normalization.rsrp_max_dbm}}}}},
      {"model",
       {{"width_multiplier", c.model.width_multiplier},
        {"init_seed", c.model.init_seed}}},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"shuffle_seed", c.train.shuffle_seed},
        {"epochs", c.train.epochs},
        {"schedule",
         {{"initial", c.train.schedule.initial},
          {"decay", c.train.schedule.decay},
          {"decay_every", c.train.schedule.decay_every},
          {"floor", c.train.schedule.floor},
          {"ramp_period", c.train.schedule.ramp_period},
          {"ramp_step", c.train.schedule.ramp_step},
          {"ramp_cap", c.train.schedule.ramp_cap},
          {"total_epochs", c.train.schedule.total_epochs}}}}},
      {"eval",
       {{"report_csv", c.eval.report_csv}, {"summary_json", c.eval.summary_json}}},
  };
}

}  // namespace infpos
