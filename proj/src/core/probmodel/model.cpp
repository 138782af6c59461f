#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "../error.hpp"

namespace stoat {

namespace {

// Layout order: per layer [wx, wh, bx, bh], then [head.w, head.b].
std::size_t layer_block(std::size_t layer, std::size_t k) { return 4 * layer + k; }

Eigen::Map<Eigen::MatrixXd> view(Eigen::VectorXd& flat, const ParamBlock& b) {
  return {flat.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::MatrixXd> view(const Eigen::VectorXd& flat, const ParamBlock& b) {
  return {flat.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<Eigen::VectorXd> vec_view(Eigen::VectorXd& flat, const ParamBlock& b) {
  return {flat.data() + b.offset, b.rows};
}

GruGrads layer_grads(const ForecastModel& model, Eigen::VectorXd& grad, std::size_t l) {
  const auto& lay = model.layout();
  return GruGrads{view(grad, lay[layer_block(l, 0)]), view(grad, lay[layer_block(l, 1)]),
                  vec_view(grad, lay[layer_block(l, 2)]), vec_view(grad, lay[layer_block(l, 3)])};
}

const ParamBlock& head_weight(const ForecastModel& m) { return m.layout()[4 * m.config().num_layers]; }
const ParamBlock& head_bias(const ForecastModel& m) { return m.layout()[4 * m.config().num_layers + 1]; }

double scale_of(double var) { return var > 1e-24 ? std::sqrt(var) : 1.0; }

}  // namespace

void ModelConfig::validate() const {
  require(hidden_size > 0, ErrorCode::kInvalidInput, "hidden_size must be positive");
  require(num_layers > 0, ErrorCode::kInvalidInput, "num_layers must be positive");
  require(context_len > 0, ErrorCode::kInvalidInput, "context_len must be positive");
  require(horizon > 0, ErrorCode::kInvalidInput, "horizon must be positive");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, ErrorCode::kInvalidInput,
          "learning_rate must be >= 0");
  require(grad_clip > 0.0, ErrorCode::kInvalidInput, "grad_clip must be positive");
  require(num_samples > 0, ErrorCode::kInvalidInput, "num_samples must be positive");
  require(momentum >= 0.0 && momentum < 1.0, ErrorCode::kInvalidInput, "momentum must lie in [0, 1)");
  require(batch_size > 0, ErrorCode::kInvalidInput, "batch_size must be positive");
  require(window_stride > 0, ErrorCode::kInvalidInput, "window_stride must be positive");
}

std::vector<std::string> ModelConfig::warnings() const {
  std::vector<std::string> out;
  if (context_len != 5 * horizon) {
    std::ostringstream msg;
    msg << "context_len:horizon is " << context_len << ":" << horizon << ", not the default 5:1";
    out.push_back(msg.str());
  }
  return out;
}

InputScaler InputScaler::identity(std::size_t regions) {
  const auto n = static_cast<Eigen::Index>(regions);
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Ones(n)};
}

InputScaler InputScaler::fit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  InputScaler s = identity(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    s.z_mean(i) = z.row(i).mean();
    s.z_scale(i) = scale_of((z.row(i).array() - s.z_mean(i)).square().mean());
    s.y_mean(i) = y.row(i).mean();
    s.y_scale(i) = scale_of((y.row(i).array() - s.y_mean(i)).square().mean());
  }
  return s;
}

std::size_t parameter_count(const ModelConfig& c) {
  std::size_t total = 0;
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::size_t in = l == 0 ? 2 : c.hidden_size;
    total += 3 * c.hidden_size * (in + c.hidden_size + 2);
  }
  const std::size_t p = family_arity(c.distribution);
  return total + p * (c.hidden_size + 1);
}

ForecastModel::ForecastModel(ModelConfig config, std::vector<std::string> region_ids)
    : scaler(InputScaler::identity(region_ids.size())),
      config_(config),
      region_ids_(std::move(region_ids)) {
  config_.validate();
  const auto h = static_cast<Eigen::Index>(config_.hidden_size);
  Eigen::Index offset = 0;
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    layout_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
  };
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const auto in = static_cast<Eigen::Index>(input_size(l));
    const std::string p = "gru" + std::to_string(l) + ".";
    add(p + "wx", 3 * h, in);
    add(p + "wh", 3 * h, h);
    add(p + "bx", 3 * h, 1);
    add(p + "bh", 3 * h, 1);
  }
  const auto arity = static_cast<Eigen::Index>(family_arity(config_.distribution));
  add("head.w", arity, h);
  add("head.b", arity, 1);
  params_.resize(offset);

  // Uniform(+-1/sqrt(fan_in)); fan_in is the input width of each matrix and
  // the hidden width for biases.
  std::mt19937_64 rng(config_.seed);
  for (const auto& b : layout_) {
    const double fan_in = b.cols > 1 ? static_cast<double>(b.cols) : static_cast<double>(h);
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index k = 0; k < b.rows * b.cols; ++k) params_(b.offset + k) = dist(rng);
  }
}

const ParamBlock& ForecastModel::block(const std::string& name) const {
  for (const auto& b : layout_)
    if (b.name == name) return b;
  fail(ErrorCode::kInvalidInput, "unknown parameter tensor '" + name + "'");
}

Eigen::Map<Eigen::MatrixXd> ForecastModel::tensor(const std::string& name) {
  return view(params_, block(name));
}

Eigen::Map<const Eigen::MatrixXd> ForecastModel::tensor(const std::string& name) const {
  return view(params_, block(name));
}

GruWeights ForecastModel::layer(std::size_t l) const {
  const auto& wx = layout_[layer_block(l, 0)];
  const auto& wh = layout_[layer_block(l, 1)];
  const auto& bx = layout_[layer_block(l, 2)];
  const auto& bh = layout_[layer_block(l, 3)];
  return GruWeights{view(params_, wx), view(params_, wh),
                    Eigen::Map<const Eigen::VectorXd>(params_.data() + bx.offset, bx.rows),
                    Eigen::Map<const Eigen::VectorXd>(params_.data() + bh.offset, bh.rows)};
}

HiddenState zero_state(const ForecastModel& model) {
  return HiddenState(model.config().num_layers,
                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.config().hidden_size)));
}

HiddenState encode_step(const ForecastModel& model, const HiddenState& prev, double z, double y) {
  require(std::isfinite(z) && std::isfinite(y), ErrorCode::kInvalidInput,
          "encode_step: non-finite input");
  require(prev.size() == model.config().num_layers, ErrorCode::kInvalidInput,
          "encode_step: hidden state layer count mismatch");
  HiddenState next(prev.size());
  Eigen::VectorXd input(2);
  input << z, y;
  for (std::size_t l = 0; l < prev.size(); ++l) {
    require(prev[l].size() == static_cast<Eigen::Index>(model.config().hidden_size),
            ErrorCode::kInvalidInput, "encode_step: hidden dimension mismatch");
    next[l] = gru_forward(model.layer(l), prev[l], input);
    input = next[l];
  }
  return next;
}

Eigen::VectorXd project_raw(const ForecastModel& model, const Eigen::VectorXd& hidden) {
  const auto& p = model.parameters();
  return view(p, head_weight(model)) * hidden + view(p, head_bias(model));
}

DistributionParams project(const ForecastModel& model, const Eigen::VectorXd& hidden) {
  require(hidden.allFinite(), ErrorCode::kInvalidInput, "project: non-finite hidden state");
  const Eigen::VectorXd raw = project_raw(model, hidden);
  return link(model.config().distribution, {raw.data(), static_cast<std::size_t>(raw.size())});
}

std::vector<Window> make_windows(std::size_t regions, std::size_t length, const ModelConfig& c) {
  const std::size_t span = c.context_len + c.horizon;
  require(length >= span, ErrorCode::kInsufficientData,
          "training needs T >= context_len + horizon (" + std::to_string(span) + "), got " +
              std::to_string(length));
  std::vector<Window> out;
  for (std::size_t i = 0; i < regions; ++i)
    for (std::size_t s = 0; s + span <= length; s += c.window_stride) out.push_back({i, s});
  return out;
}

ScaledSeries scale_series(const InputScaler& s, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  require(z.rows() == y.rows() && z.cols() == y.cols(), ErrorCode::kInvalidInput,
          "z and y histories must have the same shape");
  require(s.y_mean.size() == y.rows(), ErrorCode::kInvalidInput,
          "history region count does not match the model");
  for (Eigen::Index t = 0; t < y.cols(); ++t)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      if (!std::isfinite(z(i, t)) || !std::isfinite(y(i, t)))
        fail(ErrorCode::kInvalidInput, "non-finite model input at region " + std::to_string(i) +
                                           ", time index " + std::to_string(t));
  ScaledSeries out{z, y};
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    out.z.row(i) = (z.row(i).array() - s.z_mean(i)) / s.z_scale(i);
    out.y.row(i) = (y.row(i).array() - s.y_mean(i)) / s.y_scale(i);
  }
  return out;
}

double window_loss(const ForecastModel& model, const ScaledSeries& series, const Window& w,
                   Eigen::VectorXd* grad) {
  const auto& cfg = model.config();
  const std::size_t ctx = cfg.context_len;
  const std::size_t steps = ctx + cfg.horizon - 1;
  const std::size_t layers = cfg.num_layers;
  const auto i = static_cast<Eigen::Index>(w.region);
  require(w.start + steps + 1 <= static_cast<std::size_t>(series.y.cols()),
          ErrorCode::kInvalidInput, "window exceeds series length");
  const Family family = cfg.distribution;
  const std::size_t arity = family_arity(family);
  const auto h_dim = static_cast<Eigen::Index>(cfg.hidden_size);

  std::vector<std::vector<GruStepCache>> caches;
  if (grad) caches.assign(layers, std::vector<GruStepCache>(steps));
  std::vector<Eigen::VectorXd> d_top(steps);

  HiddenState h = zero_state(model);
  Eigen::VectorXd input(2);
  std::vector<double> g_raw(arity);
  double loss = 0.0;
  for (std::size_t p = 0; p < steps; ++p) {
    const auto col = static_cast<Eigen::Index>(w.start + p);
    const auto zcol = static_cast<Eigen::Index>(w.start + std::min(p, ctx - 1));
    input.resize(2);
    input << series.z(i, zcol), series.y(i, col);
    for (std::size_t l = 0; l < layers; ++l) {
      h[l] = gru_forward(model.layer(l), h[l], input, grad ? &caches[l][p] : nullptr);
      input = h[l];
    }
    if (p + 1 < ctx) continue;
    const Eigen::VectorXd raw = project_raw(model, h.back());
    loss += nll_with_grad(family, {raw.data(), arity}, series.y(i, col + 1), g_raw);
    if (grad) {
      const Eigen::Map<const Eigen::VectorXd> g(g_raw.data(), static_cast<Eigen::Index>(arity));
      view(*grad, head_weight(model)).noalias() += g * h.back().transpose();
      vec_view(*grad, head_bias(model)) += g;
      d_top[p] = view(model.parameters(), head_weight(model)).transpose() * g;
    }
  }
  if (!grad) return loss;

  std::vector<Eigen::VectorXd> carry(layers, Eigen::VectorXd::Zero(h_dim));
  Eigen::VectorXd dx;
  Eigen::VectorXd dh_prev;
  for (std::size_t p = steps; p-- > 0;) {
    Eigen::VectorXd from_above = d_top[p].size() ? d_top[p] : Eigen::VectorXd::Zero(h_dim);
    for (std::size_t l = layers; l-- > 0;) {
      const Eigen::VectorXd dh = carry[l] + from_above;
      GruGrads g = layer_grads(model, *grad, l);
      gru_backward(model.layer(l), caches[l][p], dh, g, dx, dh_prev);
      carry[l] = dh_prev;
      from_above = dx;
    }
  }
  return loss;
}

std::vector<double> window_step_nll(const ForecastModel& model, const ScaledSeries& series,
                                    const Window& w) {
  const auto& cfg = model.config();
  const auto i = static_cast<Eigen::Index>(w.region);
  std::vector<double> out;
  HiddenState h = zero_state(model);
  for (std::size_t p = 0; p + 1 < cfg.context_len + cfg.horizon; ++p) {
    const auto col = static_cast<Eigen::Index>(w.start + p);
    const auto zcol = static_cast<Eigen::Index>(w.start + std::min(p, cfg.context_len - 1));
    h = encode_step(model, h, series.z(i, zcol), series.y(i, col));
    if (p + 1 >= cfg.context_len) out.push_back(nll(project(model, h.back()), series.y(i, col + 1)));
  }
  return out;
}

double total_loss(const ForecastModel& model, const ScaledSeries& series,
                  std::span<const Window> windows) {
  double total = 0.0;
  for (const auto& w : windows) total += window_loss(model, series, w);
  return total;
}

TrainResult train(ForecastModel model, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  const auto& cfg = model.config();
  require(static_cast<std::size_t>(y.rows()) == model.region_ids().size(), ErrorCode::kInvalidInput,
          "training data region count does not match the model");
  const auto windows_all = make_windows(static_cast<std::size_t>(y.rows()),
                                        static_cast<std::size_t>(y.cols()), cfg);
  model.scaler = InputScaler::fit(z, y);
  const ScaledSeries series = scale_series(model.scaler, z, y);

  TrainResult result{model, {}, cfg.warnings()};
  ForecastModel& m = result.model;
  std::vector<Window> windows = windows_all;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(m.parameters().size());
  Eigen::VectorXd grad(m.parameters().size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(windows.begin(), windows.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t first = 0; first < windows.size(); first += cfg.batch_size) {
      const std::size_t last = std::min(first + cfg.batch_size, windows.size());
      grad.setZero();
      double batch_loss = 0.0;
      for (std::size_t k = first; k < last; ++k) batch_loss += window_loss(m, series, windows[k], &grad);
      const auto batch_steps = static_cast<double>((last - first) * cfg.horizon);
      grad /= batch_steps;
      epoch_loss += batch_loss;
      epoch_steps += (last - first) * cfg.horizon;
      if (!std::isfinite(batch_loss) || !grad.allFinite()) break;
      const double norm = grad.norm();
      if (norm > cfg.grad_clip) grad *= cfg.grad_clip / norm;
      velocity = cfg.momentum * velocity + grad;
      m.parameters() -= cfg.learning_rate * velocity;
    }
    const double mean = epoch_loss / static_cast<double>(epoch_steps);
    if (!std::isfinite(mean) || !m.parameters().allFinite()) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch + 1 << " (learning_rate=" << cfg.learning_rate
          << ")";
      fail(ErrorCode::kDivergence, msg.str());
    }
    result.loss_trace.push_back(mean);
  }
  return result;
}

TrainResult train(ForecastModel model, const AdjustedPanel& adjusted, const Panel& panel) {
  return train(std::move(model), adjusted.z, panel.y);
}

Decoder::Decoder(const ForecastModel& model, HiddenState state, double held_z)
    : model_(&model), state_(std::move(state)), held_z_(held_z) {}

DistributionParams Decoder::params() const { return project(*model_, state_.back()); }

void Decoder::advance(double y_scaled) { state_ = encode_step(*model_, state_, held_z_, y_scaled); }

HiddenState encode_history(const ForecastModel& model, std::span<const double> z_scaled,
                           std::span<const double> y_scaled) {
  const std::size_t ctx = model.config().context_len;
  require(z_scaled.size() == y_scaled.size(), ErrorCode::kInvalidInput,
          "history z/y length mismatch");
  require(y_scaled.size() >= ctx, ErrorCode::kInsufficientData,
          "forecast history shorter than context_len (" + std::to_string(ctx) + ")");
  HiddenState h = zero_state(model);
  for (std::size_t p = y_scaled.size() - ctx; p < y_scaled.size(); ++p)
    h = encode_step(model, h, z_scaled[p], y_scaled[p]);
  return h;
}

ForecastDistribution forecast(const ForecastModel& model, const Eigen::MatrixXd& z_history,
                              const Eigen::MatrixXd& y_history, std::size_t horizon,
                              std::size_t num_samples, std::uint64_t seed) {
  require(horizon > 0 && num_samples > 0, ErrorCode::kInvalidInput,
          "forecast: horizon and num_samples must be positive");
  require(static_cast<std::size_t>(y_history.cols()) >= model.config().context_len,
          ErrorCode::kInsufficientData,
          "forecast history shorter than context_len (" +
              std::to_string(model.config().context_len) + ")");
  const ScaledSeries s = scale_series(model.scaler, z_history, y_history);
  const std::size_t n = static_cast<std::size_t>(y_history.rows());
  std::vector<double> values(n * horizon * num_samples);
  std::vector<double> z_row;
  std::vector<double> y_row;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    z_row.resize(static_cast<std::size_t>(s.z.cols()));
    y_row.resize(static_cast<std::size_t>(s.y.cols()));
    for (Eigen::Index t = 0; t < s.z.cols(); ++t) {
      z_row[static_cast<std::size_t>(t)] = s.z(ii, t);
      y_row[static_cast<std::size_t>(t)] = s.y(ii, t);
    }
    const HiddenState h0 = encode_history(model, z_row, y_row);
    const double held_z = z_row.back();
    std::mt19937_64 rng(seed + i);
    for (std::size_t smp = 0; smp < num_samples; ++smp) {
      Decoder dec(model, h0, held_z);
      for (std::size_t k = 0; k < horizon; ++k) {
        const double v = draw(dec.params(), rng);
        values[(i * horizon + k) * num_samples + smp] =
            v * model.scaler.y_scale(ii) + model.scaler.y_mean(ii);
        if (k + 1 < horizon) dec.advance(v);
      }
    }
  }
  return ForecastDistribution(n, horizon, num_samples, std::move(values));
}

}  // namespace stoat
