#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "irbfn/lut.hpp"
#include "irbfn/network.hpp"

namespace irbfn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 2000;
  int epochs = 400;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> loss;  // full-dataset MSE after each epoch
};

struct TrainingSample {
  InputVector input{};
  OutputVector target{};
};

// Adam first and second moment estimates, one entry per trainable scalar.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// Mean over samples and components. Throws InvalidParameterError on a shape
// mismatch.
double mse_loss(std::span<const OutputVector> pred, std::span<const OutputVector> target);

// Bias-corrected Adam update at step t >= 1. The state is sized on first use.
// Throws TrainingError if any gradient is non-finite.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg, long t);

// Flat trainable vector: per region, centers (M x 3) then weights (M x 5).
std::vector<double> flatten_parameters(const IrbfnModel& model);
void assign_parameters(IrbfnModel& model, std::span<const double> flat);

// Batch MSE and its exact gradient with respect to every center and weight,
// laid out like flatten_parameters. Returns the loss.
double compute_gradients(const IrbfnModel& model, std::span<const TrainingSample> batch,
                         std::span<double> grad);

std::vector<double> compute_gradients(const IrbfnModel& model,
                                      std::span<const TrainingSample> batch);

// Valid records of the table paired with their grid goals.
std::vector<TrainingSample> training_set(const LookupTable& table);

double dataset_loss(const IrbfnModel& model, std::span<const TrainingSample> data);

// Seeded-shuffle minibatch Adam over the valid records. Throws TrainingError
// when the table has no valid record, DomainError when a record falls outside
// the model domain.
std::pair<IrbfnModel, TrainHistory> train(const LookupTable& table, IrbfnModel model,
                                          const TrainConfig& cfg);

// CSV with header `epoch,loss`.
void write_history_csv(std::ostream& out, const TrainHistory& history);

}  // namespace irbfn
