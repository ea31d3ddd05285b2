#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace pglake::train {

namespace {

ad::Tensor row_block(const ad::Tensor& t, std::size_t r0, std::size_t r1) {
  ad::Tensor out(r1 - r0, t.cols());
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out(r - r0, c) = t(r, c);
  return out;
}

nn::Normalization compute_normalization(const Dataset& ds) {
  const std::size_t d = ds.inputs.cols(), n_out = ds.targets.cols();
  nn::Normalization norm = nn::Normalization::identity(d, n_out);
  const double rows = static_cast<double>(ds.train_end);

  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t t = 0; t < ds.train_end; ++t) mean += ds.inputs(t, j);
    mean /= rows;
    double var = 0.0;
    for (std::size_t t = 0; t < ds.train_end; ++t) {
      const double dv = ds.inputs(t, j) - mean;
      var += dv * dv;
    }
    const double sd = std::sqrt(var / rows);
    norm.x_mean[j] = mean;
    norm.x_std[j] = sd > 1e-8 ? sd : 1.0;
  }

  for (std::size_t j = 0; j < n_out; ++j) {
    double mean = 0.0, count = 0.0;
    for (std::size_t t = 0; t < ds.train_end; ++t)
      if (ds.weights(t, j) > 0.0) {
        mean += ds.targets(t, j);
        count += 1.0;
      }
    if (count == 0.0) continue;  // unsupervised column keeps identity stats
    mean /= count;
    double var = 0.0;
    for (std::size_t t = 0; t < ds.train_end; ++t)
      if (ds.weights(t, j) > 0.0) {
        const double dv = ds.targets(t, j) - mean;
        var += dv * dv;
      }
    const double sd = std::sqrt(var / count);
    norm.y_mean[j] = mean;
    norm.y_std[j] = sd > 1e-8 ? sd : 1.0;
  }
  return norm;
}

ad::Tensor normalize_inputs(const ad::Tensor& x, const nn::Normalization& norm) {
  ad::Tensor out = x;
  for (std::size_t t = 0; t < out.rows(); ++t)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(t, j) = (out(t, j) - norm.x_mean[j]) / norm.x_std[j];
  return out;
}

double window_weight_sum(const ad::Tensor& weights, std::size_t r0, std::size_t r1) {
  double s = 0.0;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = 0; c < weights.cols(); ++c) s += weights(r, c);
  return s;
}

}  // namespace

EnergyCalibration calibrate_energy(const physics::TempField& reference, std::size_t train_end,
                                   double slack_fraction) {
  const std::size_t steps = std::min<std::size_t>(train_end, reference.steps());
  if (steps < 2) throw ConfigError("energy calibration needs at least two training rows");
  std::vector<double> deltas;
  deltas.reserve(steps - 1);
  double h_prev = physics::heat_content_row(reference.values, 0, reference.grid);
  for (std::size_t t = 1; t < steps; ++t) {
    const double h = physics::heat_content_row(reference.values, t, reference.grid);
    deltas.push_back(std::fabs(h - h_prev));
    h_prev = h;
  }
  std::sort(deltas.begin(), deltas.end());
  const double median = deltas[deltas.size() / 2];
  if (!(median > 0.0)) throw NumericError("energy calibration: degenerate reference field");
  return {slack_fraction * median, median};
}

Dataset prepare_field_dataset(nn::Variant v, const sim::DriverSeries& drivers,
                              const physics::TempField* y_phy, const sim::ObservationSet& obs,
                              const physics::DepthGrid& grid, const LossConfig& cfg,
                              std::size_t train_end, LossWeights& out_weights) {
  const std::size_t steps = drivers.steps();
  const bool needs_phy = nn::variant_uses_hpd(v);
  if (needs_phy && !y_phy)
    throw ConfigError(std::string("variant '") + nn::variant_name(v) +
                      "' needs the physics model output");
  if ((y_phy && y_phy->steps() != steps) || obs.steps != steps)
    throw ShapeError("field dataset: drivers (" + std::to_string(steps) + "), physics field and " +
                     "observations (" + std::to_string(obs.steps) +
                     ") must cover the same days");
  if (train_end < 2 || train_end > steps)
    throw ConfigError("train_end must lie in [2, total days]");

  Dataset ds;
  ds.timestamps = drivers.timestamps;
  ds.grid = grid;
  ds.obs = &obs;
  ds.train_end = train_end;

  out_weights = LossWeights{};
  out_weights.w_obs = cfg.w_obs;
  if (needs_phy) {
    ds.inputs = hybrid::augment_features(drivers.values, y_phy->values);
    const auto filled =
        hybrid::fill_pseudo_labels(obs, y_phy->values, cfg.w_obs, cfg.w_phy * cfg.w_obs);
    ds.targets = filled.targets;
    ds.weights = filled.weights;
    out_weights.w_phy = cfg.w_phy * cfg.w_obs;
  } else {
    ds.inputs = drivers.values;
    const auto filled = hybrid::observed_targets(obs, cfg.w_obs);
    ds.targets = filled.targets;
    ds.weights = filled.weights;
  }

  if (v == nn::Variant::kPgrnn) {
    out_weights.lambda_dp = cfg.lambda_dp;
    out_weights.lambda_ec = cfg.lambda_ec;
    if (cfg.lambda_ec != 0.0) {
      const EnergyCalibration cal = calibrate_energy(*y_phy, train_end);
      out_weights.tau_joules = cfg.tau_joules.value_or(cal.tau_joules);
      out_weights.energy_scale = cal.scale;
      ds.met = drivers.met_rows();
    }
  }
  return ds;
}

Dataset prepare_scalar_dataset(nn::Variant v, const sim::DriverSeries& drivers,
                               const std::vector<double>& phy, const sim::ObservationSet& obs,
                               const LossConfig& cfg, std::size_t train_end,
                               LossWeights& out_weights) {
  const std::size_t steps = drivers.steps();
  if (phy.size() != steps || obs.steps != steps || obs.depths != 1)
    throw ShapeError("scalar dataset: drivers, physics series and observations must align");
  if (train_end < 2 || train_end > steps)
    throw ConfigError("train_end must lie in [2, total days]");

  Dataset ds;
  ds.timestamps = drivers.timestamps;
  ds.obs = &obs;
  ds.train_end = train_end;

  ad::Tensor phy_col(steps, 1);
  for (std::size_t t = 0; t < steps; ++t) phy_col(t, 0) = phy[t];

  out_weights = LossWeights{};
  out_weights.w_obs = cfg.w_obs;
  if (nn::variant_uses_hpd(v)) {
    ds.inputs = hybrid::augment_features(drivers.values, phy_col);
    const auto filled =
        hybrid::fill_pseudo_labels(obs, phy_col, cfg.w_obs, cfg.w_phy * cfg.w_obs);
    ds.targets = filled.targets;
    ds.weights = filled.weights;
    out_weights.w_phy = cfg.w_phy * cfg.w_obs;
  } else {
    ds.inputs = drivers.values;
    const auto filled = hybrid::observed_targets(obs, cfg.w_obs);
    ds.targets = filled.targets;
    ds.weights = filled.weights;
  }
  return ds;
}

TrainResult train_model(nn::Variant v, const Dataset& ds, const LossWeights& lw,
                        const TrainHyper& hyper, std::uint64_t seed) {
  if (!nn::variant_is_recurrent(v) && v != nn::Variant::kAnn)
    throw ConfigError(std::string("variant '") + nn::variant_name(v) + "' is not trainable");
  if (ds.train_end < 2 || ds.train_end > ds.steps())
    throw ConfigError("train_end must lie in [2, total days]");
  if (hyper.epochs == 0 || hyper.window == 0 || hyper.batch_windows == 0)
    throw ConfigError("epochs, window and batch_windows must be positive");

  const std::size_t n_out = ds.targets.cols();
  Rng rng(seed);
  TrainResult result;
  result.model.variant = v;
  if (v == nn::Variant::kAnn)
    result.model.ann = nn::AnnParams::init(hyper.hidden, ds.inputs.cols(), n_out, rng);
  else
    result.model.lstm = nn::LstmParams::init(hyper.hidden, ds.inputs.cols(), n_out, rng);
  result.model.norm = compute_normalization(ds);

  const ad::Tensor x_norm = normalize_inputs(ds.inputs, result.model.norm);

  // Chronological layout: windows over the core, validation on the tail of
  // the training period, test beyond train_end untouched here.
  const auto val_len = static_cast<std::size_t>(hyper.val_fraction *
                                                static_cast<double>(ds.train_end));
  const std::size_t core_end = ds.train_end - val_len;
  const std::size_t window = std::min(hyper.window, core_end);
  if (window < 2) throw ConfigError("training window is too short");
  const std::size_t stride = std::max<std::size_t>(1, window / 2);

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= core_end; s += stride)
    if (window_weight_sum(ds.weights, s, s + window) > 0.0) starts.push_back(s);
  if (starts.empty()) throw ConfigError("no training window contains a supervised cell");

  bool has_val = false;
  if (val_len > 0 && ds.obs)
    for (const auto& e : ds.obs->entries)
      if (e.t >= core_end && e.t < ds.train_end) {
        has_val = true;
        break;
      }

  std::vector<ad::Tensor*> params = result.model.tensors();
  AdamState opt = AdamState::init(params);
  std::vector<ad::Tensor> grads;
  grads.reserve(params.size());
  for (auto* p : params) grads.emplace_back(p->rows(), p->cols());

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<ad::Tensor> best_params;

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    // Fisher-Yates on the window order, same stream as the init draws.
    for (std::size_t i = starts.size(); i > 1; --i)
      std::swap(starts[i - 1], starts[rng.index(i)]);

    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < starts.size(); b += hyper.batch_windows) {
      const std::size_t batch = std::min(hyper.batch_windows, starts.size() - b);
      for (auto& gt : grads)
        for (auto& x : gt.data()) x = 0.0;

      for (std::size_t k = 0; k < batch; ++k) {
        const std::size_t s = starts[b + k];
        ad::Graph g;
        ad::Graph::NodeId pred_norm;
        if (v == nn::Variant::kAnn) {
          const nn::AnnNodes nodes = register_ann(g, result.model.ann, true);
          pred_norm = ann_forward_node(g, nodes, row_block(x_norm, s, s + window));
        } else {
          const nn::LstmNodes nodes = register_lstm(g, result.model.lstm, true);
          pred_norm = unroll_lstm(g, nodes, row_block(x_norm, s, s + window)).pred_norm;
        }
        const auto pred_c = denormalize_node(g, pred_norm, result.model.norm);

        std::vector<physics::MetRow> met;
        if (lw.lambda_ec != 0.0) {
          if (ds.met.size() < s + window - 1)
            throw ShapeError("training window reaches past the driver series");
          met.assign(ds.met.begin() + static_cast<std::ptrdiff_t>(s),
                     ds.met.begin() + static_cast<std::ptrdiff_t>(s + window - 1));
        }
        ad::Graph::NodeId loss;
        try {
          loss = total_loss_node(g, pred_c, row_block(ds.targets, s, s + window),
                                 row_block(ds.weights, s, s + window), met,
                                 ds.grid ? &*ds.grid : nullptr, lw);
          g.backward(loss);
        } catch (const NumericError& e) {
          throw NumericError("epoch " + std::to_string(epoch) + ", window at day " +
                             std::to_string(s) + ": " + e.what());
        }
        epoch_loss += g.value(loss).item();
        const auto& ids = g.parameters();
        for (std::size_t i = 0; i < params.size(); ++i) {
          const ad::Tensor& gi = g.grad(ids[i]);
          for (std::size_t j = 0; j < gi.size(); ++j) grads[i][j] += gi[j];
        }
      }
      if (batch > 1)
        for (auto& gt : grads)
          for (auto& x : gt.data()) x /= static_cast<double>(batch);
      adam_step(params, grads, opt, hyper.adam);
    }
    epoch_loss /= static_cast<double>(starts.size());

    double val_metric = epoch_loss;
    if (has_val) {
      ad::Tensor val_pred = predict_span(result.model, ds, core_end, ds.train_end);
      val_metric = rmse_observed(val_pred, core_end, *ds.obs, core_end, ds.train_end);
    }
    result.history.push_back({epoch, epoch_loss, val_metric});
    if (val_metric < best_val) {
      best_val = val_metric;
      best_params.clear();
      for (auto* p : params) best_params.push_back(*p);
    }
  }

  if (!best_params.empty())
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] = best_params[i];
  return result;
}

ad::Tensor predict_span(nn::Model& model, const Dataset& ds, std::size_t begin,
                        std::size_t end) {
  if (begin >= end || end > ds.steps()) throw ConfigError("invalid prediction span");
  return nn::predict_matrix(model, row_block(ds.inputs, begin, end));
}

}  // namespace pglake::train
