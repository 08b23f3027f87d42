#include "irbfn/training.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

void require_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
}

// Fisher-Yates driven by raw mt19937_64 output so the permutation is the same
// with every standard library.
void shuffle(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

double mse_loss(std::span<const OutputVector> pred, std::span<const OutputVector> target) {
  if (pred.size() != target.size()) {
    throw InvalidParameterError("mse_loss: prediction batch has " + std::to_string(pred.size()) +
                                " rows, target has " + std::to_string(target.size()));
  }
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t b = 0; b < pred.size(); ++b) {
    for (std::size_t j = 0; j < kOutputDim; ++j) {
      const double e = pred[b][j] - target[b][j];
      sum += e * e;
    }
  }
  return sum / static_cast<double>(pred.size() * kOutputDim);
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg, long t) {
  if (params.size() != grads.size()) throw InvalidParameterError("adam_step: shape mismatch");
  if (t < 1) throw InvalidParameterError("adam_step: step index must be >= 1");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidParameterError("adam_step: optimizer state does not match parameters");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("non-finite gradient at parameter " + std::to_string(i) + " on step " +
                          std::to_string(t) + " (value " + std::to_string(grads[i]) + ")");
    }
  }
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

std::vector<double> flatten_parameters(const IrbfnModel& model) {
  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  for (const auto& region : model.regions) {
    for (const auto& c : region.net.centers) flat.insert(flat.end(), c.begin(), c.end());
    for (const auto& k : region.net.weights) flat.insert(flat.end(), k.begin(), k.end());
  }
  return flat;
}

void assign_parameters(IrbfnModel& model, std::span<const double> flat) {
  if (flat.size() != model.parameter_count()) {
    throw InvalidParameterError("assign_parameters: expected " +
                                std::to_string(model.parameter_count()) + " values, got " +
                                std::to_string(flat.size()));
  }
  std::size_t p = 0;
  for (auto& region : model.regions) {
    for (auto& c : region.net.centers) {
      for (double& v : c) v = flat[p++];
    }
    for (auto& k : region.net.weights) {
      for (double& v : k) v = flat[p++];
    }
  }
}

double compute_gradients(const IrbfnModel& model, std::span<const TrainingSample> batch,
                         std::span<double> grad) {
  if (grad.size() != model.parameter_count()) {
    throw InvalidParameterError("compute_gradients: gradient buffer has the wrong size");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  if (batch.empty()) return 0.0;

  const double scale = 2.0 / static_cast<double>(batch.size() * kOutputDim);
  double loss = 0.0;
  std::vector<double> gammas(model.regions.size());
  for (const TrainingSample& sample : batch) {
    const InputVector& x = sample.input;
    for (std::size_t r = 0; r < model.regions.size(); ++r) {
      gammas[r] = indicator(x, model.regions[r].bounds, model.zeta);
    }
    const OutputVector pred = evaluate(model, x);
    OutputVector err{};
    for (std::size_t j = 0; j < kOutputDim; ++j) {
      err[j] = pred[j] - sample.target[j];
      loss += err[j] * err[j];
    }

    // dL/dpred_j = scale * err_j. For center i of region r:
    //   dL/dk_ij = scale err_j gamma_r rho_i
    //   dL/dc_i  = scale gamma_r (sum_j err_j k_ij) * 2 (x - c_i) rho_i^2
    std::size_t offset = 0;
    for (std::size_t r = 0; r < model.regions.size(); ++r) {
      const auto& net = model.regions[r].net;
      const std::size_t m = net.centers.size();
      const double g = scale * gammas[r];
      double* dcenters = grad.data() + offset;
      double* dweights = dcenters + m * kInputDim;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& c = net.centers[i];
        const double dx = x[0] - c[0];
        const double dy = x[1] - c[1];
        const double dt = x[2] - c[2];
        const double rho = inverse_quadratic(dx * dx + dy * dy + dt * dt);
        double err_dot_k = 0.0;
        for (std::size_t j = 0; j < kOutputDim; ++j) {
          dweights[i * kOutputDim + j] += g * err[j] * rho;
          err_dot_k += err[j] * net.weights[i][j];
        }
        const double common = g * err_dot_k * 2.0 * rho * rho;
        dcenters[i * kInputDim + 0] += common * dx;
        dcenters[i * kInputDim + 1] += common * dy;
        dcenters[i * kInputDim + 2] += common * dt;
      }
      offset += m * (kInputDim + kOutputDim);
    }
  }
  return loss / static_cast<double>(batch.size() * kOutputDim);
}

std::vector<double> compute_gradients(const IrbfnModel& model,
                                      std::span<const TrainingSample> batch) {
  std::vector<double> grad(model.parameter_count());
  compute_gradients(model, batch, grad);
  return grad;
}

std::vector<TrainingSample> training_set(const LookupTable& table) {
  std::vector<TrainingSample> data;
  for (std::uint64_t i = 0; i < table.records.size(); ++i) {
    const LutRecord& rec = table.records[i];
    if (!rec.valid) continue;
    data.push_back({to_input(table.spec.goal(i)), rec.params.to_array()});
  }
  return data;
}

double dataset_loss(const IrbfnModel& model, std::span<const TrainingSample> data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const TrainingSample& s : data) {
    const OutputVector pred = evaluate(model, s.input);
    for (std::size_t j = 0; j < kOutputDim; ++j) {
      const double e = pred[j] - s.target[j];
      sum += e * e;
    }
  }
  return sum / static_cast<double>(data.size() * kOutputDim);
}

std::pair<IrbfnModel, TrainHistory> train(const LookupTable& table, IrbfnModel model,
                                          const TrainConfig& cfg) {
  require_config(cfg);
  const std::vector<TrainingSample> data = training_set(table);
  if (data.empty()) throw TrainingError("lookup table has no valid record to train on");
  for (const TrainingSample& s : data) {
    if (!model.domain.contains_strict(s.input)) {
      throw DomainError("training goal (" + std::to_string(s.input[0]) + ", " +
                        std::to_string(s.input[1]) + ", " + std::to_string(s.input[2]) +
                        ") lies outside the model domain");
    }
  }

  std::vector<double> params = flatten_parameters(model);
  std::vector<double> grad(params.size());
  AdamState adam;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> batch;
  batch.reserve(std::min(cfg.batch_size, data.size()));

  TrainHistory history;
  history.loss.reserve(static_cast<std::size_t>(cfg.epochs));
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(data[order[i]]);
      compute_gradients(model, batch, grad);
      adam_step(params, grad, adam, cfg, ++step);
      assign_parameters(model, params);
    }
    const double loss = dataset_loss(model, data);
    if (!std::isfinite(loss)) {
      throw TrainingError("training loss became non-finite at epoch " + std::to_string(epoch));
    }
    history.loss.push_back(loss);
  }
  return {std::move(model), std::move(history)};
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,loss\n";
  char line[64];
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu,%.17g\n", i, history.loss[i]);
    out << line;
  }
}

}  // namespace irbfn
