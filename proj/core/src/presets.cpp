#include "irbfn/presets.hpp"

namespace irbfn {

Orthotope grid_box(const GridSpec& spec) {
  Orthotope box;
  for (std::size_t m = 0; m < kInputDim; ++m) {
    box.lower[m] = spec.axes[m].min;
    box.upper[m] = spec.axes[m].last();
  }
  return box;
}

Orthotope padded_domain(const GridSpec& spec, const InputVector& pad) {
  Orthotope box = grid_box(spec);
  for (std::size_t m = 0; m < kInputDim; ++m) {
    box.lower[m] -= pad[m];
    box.upper[m] += pad[m];
  }
  return box;
}

ModelConfig desk_scale_model_config() { return ModelConfig{}; }

ModelConfig full_scale_model_config() {
  ModelConfig cfg;
  cfg.region_sizes = {1.0, 1.6, 0.39};
  cfg.domain_pad = {0.0, 0.0, 0.0};
  return cfg;
}

TrainConfig desk_scale_train_config() {
  TrainConfig cfg;
  cfg.batch_size = 32;
  return cfg;
}

IrbfnModel make_model(const GridSpec& spec, const ModelConfig& cfg, std::uint64_t seed) {
  return make_model(padded_domain(spec, cfg.domain_pad), cfg.region_sizes, cfg.zeta,
                    cfg.centers_per_region, seed);
}

}  // namespace irbfn
