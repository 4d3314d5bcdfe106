#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "infpos/adam.hpp"
#include "infpos/dataset.hpp"
#include "infpos/model.hpp"
#include "infpos/schedule.hpp"

namespace infpos {

struct TrainConfig {
  int batch_size = 64;
  std::uint64_t shuffle_seed = 1;
  int epochs = 300;  // must not exceed schedule.total_epochs
  LrSchedule schedule;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (batch_size < 1) throw Error(Errc::config, "train.batch_size: must be >= 1");
    if (epochs < 1) throw Error(Errc::config, "train.epochs: must be >= 1");
    if (epochs > schedule.total_epochs)
      throw Error(Errc::config, "train.epochs: exceeds schedule.total_epochs");
    schedule.validate();
  }
};

struct TrainHistoryRow {
  int epoch;
  double lr;
  double fit_loss;
  double val_loss;
};

struct TrainResult {
  std::vector<TrainHistoryRow> history;
  std::vector<float> best_params;  // validation-best snapshot (flat)
  double best_val_loss = 0.0;
  int best_epoch = -1;
};

// Packs records into the model layout: channel 0/1 are the real/imag planes
// of the interleaved input tensor; targets are ground-truth (x, y) meters.
template <typename T>
void fill_batch(const Dataset& data, const NormalizationSpec& norm,
                const std::vector<std::size_t>& ids, std::size_t begin, std::size_t end,
                nn::Tensor<T>& x, nn::Tensor<T>& y) {
  const int b = static_cast<int>(end - begin);
  const int rows = 2 * static_cast<int>(data.trp_count);
  const int taps = static_cast<int>(data.tap_count);
  x = nn::Tensor<T>({b, 2, rows, taps});
  y = nn::Tensor<T>({b, 2});
  const std::size_t plane = static_cast<std::size_t>(rows) * taps;
  for (int s = 0; s < b; ++s) {
    const DatasetRecord& rec = data.records[ids[begin + s]];
    const InputTensor in = assemble_input(rec, norm);
    T* re_plane = x.data.data() + static_cast<std::size_t>(s) * 2 * plane;
    T* im_plane = re_plane + plane;
    for (std::size_t i = 0; i < plane; ++i) {
      re_plane[i] = static_cast<T>(in.values[2 * i]);
      im_plane[i] = static_cast<T>(in.values[2 * i + 1]);
    }
    y.data[2 * s] = static_cast<T>(rec.ue_x);
    y.data[2 * s + 1] = static_cast<T>(rec.ue_y);
  }
}

template <typename T>
double dataset_loss(nn::Model<T>& model, const Dataset& data, const NormalizationSpec& norm,
                    const std::vector<std::size_t>& ids, int batch_size) {
  double total = 0.0;
  nn::Tensor<T> x, y;
  for (std::size_t begin = 0; begin < ids.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, ids.size());
    fill_batch(data, norm, ids, begin, end, x, y);
    nn::Tensor<T> pred = model.forward(x, /*training=*/false);
    total += nn::mse_loss(pred, y).first * static_cast<double>(end - begin);
  }
  return total / static_cast<double>(ids.size());
}

// Deterministic epoch loop: per-epoch Fisher-Yates shuffle from
// (shuffle_seed, epoch), fixed batch order, Adam at lr_at_epoch. The model is
// left holding the validation-best parameters.
template <typename T>
TrainResult train(nn::Model<T>& model, const Dataset& data, const NormalizationSpec& norm,
                  const std::vector<std::size_t>& fit_ids,
                  const std::vector<std::size_t>& val_ids, const TrainConfig& cfg,
                  const std::function<void(const TrainHistoryRow&)>& on_epoch = {}) {
  cfg.validate();
  if (fit_ids.empty()) throw Error(Errc::config, "train: empty fit set");
  if (val_ids.empty()) throw Error(Errc::config, "train: empty validation set");

  nn::Adam<T> adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::vector<nn::Param<T>> params = model.params();
  std::vector<std::size_t> order = fit_ids;
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  nn::Tensor<T> x, y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at_epoch(epoch, cfg.schedule);
    RngStream shuffle = substream(cfg.shuffle_seed, epoch, 0, rng_purpose::kShuffle);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle.bounded(i + 1));
      std::swap(order[i], order[j]);
    }

    double fit_loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(begin + static_cast<std::size_t>(cfg.batch_size), order.size());
      fill_batch(data, norm, order, begin, end, x, y);
      nn::Tensor<T> pred = model.forward(x, /*training=*/true);
      auto [loss, dpred] = nn::mse_loss(pred, y);
      if (!std::isfinite(loss))
        throw Error(Errc::numeric, "train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(begin / cfg.batch_size));
      fit_loss_sum += loss * static_cast<double>(end - begin);
      model.zero_grads();
      model.backward(dpred);
      adam.step(params, lr);
    }
    const double fit_loss = fit_loss_sum / static_cast<double>(order.size());
    const double val_loss = dataset_loss(model, data, norm, val_ids, cfg.batch_size);

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.best_params = model.flat_params();
    }
    TrainHistoryRow row{epoch, lr, fit_loss, val_loss};
    result.history.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  model.set_flat_params(result.best_params);
  return result;
}

void write_history_csv(const std::string& path, const std::vector<TrainHistoryRow>& rows);

}  // namespace infpos
