#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "../causal.hpp"
#include "../forecast_distribution.hpp"
#include "distribution.hpp"
#include "gru.hpp"

namespace stoat {

struct ModelConfig {
  std::size_t hidden_size = 16;
  std::size_t num_layers = 1;
  Family distribution = Family::kGaussian;
  std::size_t context_len = 50;
  std::size_t horizon = 10;
  double learning_rate = 0.01;
  std::size_t epochs = 20;
  double grad_clip = 5.0;
  std::size_t num_samples = 100;
  std::uint64_t seed = 0;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t window_stride = 1;

  void validate() const;
  // Non-fatal notes, e.g. a context:horizon ratio other than 5:1.
  std::vector<std::string> warnings() const;
};

struct ParamBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index offset = 0;
};

// Per-region standardisation of the (z, y) inputs, fitted at train time.
struct InputScaler {
  Eigen::VectorXd z_mean, z_scale, y_mean, y_scale;

  static InputScaler identity(std::size_t regions);
  static InputScaler fit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y);
};

// Shared-parameter stacked GRU encoder plus affine distribution head. All
// parameters live in one flat vector; `layout()` names the tensors in it.
class ForecastModel {
 public:
  ForecastModel(ModelConfig config, std::vector<std::string> region_ids);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& region_ids() const { return region_ids_; }
  const std::vector<ParamBlock>& layout() const { return layout_; }

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  const ParamBlock& block(const std::string& name) const;
  Eigen::Map<Eigen::MatrixXd> tensor(const std::string& name);
  Eigen::Map<const Eigen::MatrixXd> tensor(const std::string& name) const;

  GruWeights layer(std::size_t l) const;
  std::size_t input_size(std::size_t l) const { return l == 0 ? 2 : config_.hidden_size; }

  InputScaler scaler;

 private:
  ModelConfig config_;
  std::vector<std::string> region_ids_;
  std::vector<ParamBlock> layout_;
  Eigen::VectorXd params_;
};

// Number of parameters for a configuration.
std::size_t parameter_count(const ModelConfig& config);

// Hidden state, one vector per layer.
using HiddenState = std::vector<Eigen::VectorXd>;

HiddenState zero_state(const ForecastModel& model);

// One encoder step on standardised inputs. Throws ErrorCode::kInvalidInput
// for non-finite input.
HiddenState encode_step(const ForecastModel& model, const HiddenState& prev, double z, double y);

// Raw head outputs for the top-layer hidden state.
Eigen::VectorXd project_raw(const ForecastModel& model, const Eigen::VectorXd& hidden);
DistributionParams project(const ForecastModel& model, const Eigen::VectorXd& hidden);

struct Window {
  std::size_t region = 0;
  std::size_t start = 0;
};

// Training windows of context_len + horizon periods, advanced by window_stride.
std::vector<Window> make_windows(std::size_t regions, std::size_t length, const ModelConfig& config);

// Series on the standardised scale the network consumes.
struct ScaledSeries {
  Eigen::MatrixXd z;
  Eigen::MatrixXd y;
};

ScaledSeries scale_series(const InputScaler& scaler, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y);

// Summed NLL over the horizon steps of one window. The encoder is teacher
// forced with observed y; z is held at its last context value over the
// horizon. When `grad` is non-null the exact gradient is accumulated into it.
double window_loss(const ForecastModel& model, const ScaledSeries& series, const Window& window,
                   Eigen::VectorXd* grad = nullptr);

// Per-step NLL terms of one window, computed without caching (reference path).
std::vector<double> window_step_nll(const ForecastModel& model, const ScaledSeries& series,
                                    const Window& window);

double total_loss(const ForecastModel& model, const ScaledSeries& series,
                  std::span<const Window> windows);

struct TrainResult {
  ForecastModel model;
  std::vector<double> loss_trace;  // mean per-step NLL for each epoch
  std::vector<std::string> warnings;
};

// SGD with momentum and global-norm clipping over shuffled windows. `z` and
// `y` are regions x periods.
TrainResult train(ForecastModel model, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y);
TrainResult train(ForecastModel model, const AdjustedPanel& adjusted, const Panel& panel);

// Autoregressive decoder: yields the next-step distribution and consumes the
// value fed back for it.
class Decoder {
 public:
  Decoder(const ForecastModel& model, HiddenState state, double held_z);

  DistributionParams params() const;
  void advance(double y_scaled);

 private:
  const ForecastModel* model_;
  HiddenState state_;
  double held_z_;
};

// Encoder state after consuming the last context_len periods of one region's
// standardised history.
HiddenState encode_history(const ForecastModel& model, std::span<const double> z_scaled,
                           std::span<const double> y_scaled);

// Ancestral sampling. Histories are regions x periods on the training scale;
// the result is on the same scale. Region i draws from generator seed + i.
ForecastDistribution forecast(const ForecastModel& model, const Eigen::MatrixXd& z_history,
                              const Eigen::MatrixXd& y_history, std::size_t horizon,
                              std::size_t num_samples, std::uint64_t seed);

void save_checkpoint(const ForecastModel& model, const std::string& path);
ForecastModel load_checkpoint(const std::string& path);

}  // namespace stoat
