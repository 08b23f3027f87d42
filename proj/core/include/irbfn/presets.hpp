#pragma once

#include "irbfn/lut.hpp"
#include "irbfn/network.hpp"
#include "irbfn/training.hpp"

namespace irbfn {

// Architecture of a model built around a lookup table.
struct ModelConfig {
  InputVector region_sizes{2.5, 2.5, 0.8};
  InputVector zeta{15.0, 15.0, 100.0};
  std::size_t centers_per_region = 100;
  // Margin added around the table box so every grid goal is strictly inside
  // the model domain and away from the outer indicator fall-off.
  InputVector domain_pad{0.5, 0.5, 0.1};
};

// Box spanned by the grid points of a table.
Orthotope grid_box(const GridSpec& spec);

Orthotope padded_domain(const GridSpec& spec, const InputVector& pad);

// Four regions over the desk-scale grid.
ModelConfig desk_scale_model_config();

// Region sizes 1.0 m, 1.6 m, 0.39 rad and sharpness (15, 15, 100).
ModelConfig full_scale_model_config();

// Learning rate 1e-3, 400 epochs, batch of 32 so a 567-goal table still
// sees several Adam steps per epoch.
TrainConfig desk_scale_train_config();

IrbfnModel make_model(const GridSpec& spec, const ModelConfig& cfg, std::uint64_t seed);

}  // namespace irbfn
