#include "stapwave/scenario.hpp"

namespace stapwave {

void RadarScenario::validate() const {
  array.validate();
  pulses.validate();
  target.validate();
  for (const auto& patch : clutter) patch.validate();
  if (rank_limit < 0) throw ModelError("rankdef: rank must be >= 0");
  if (rank_limit > 0 && rank_limit > dims().snapshot())
    throw ModelError("rankdef: rank exceeds snapshot dimension");
  if (rank_loading < 0.0) throw ModelError("rankdef: loading must be >= 0");
}

PreparedScenario prepare(const RadarScenario& scenario) {
  scenario.validate();
  PreparedScenario out;
  out.dims = scenario.dims();
  out.rank_limit = scenario.rank_limit;
  out.rank_loading = scenario.rank_loading;

  out.model.dims = out.dims;
  out.model.r_noise = cov::toeplitz_covariance(scenario.noise_law, out.dims.snapshot());
  out.model.r_interference =
      cov::interference_covariance(scenario.interferers, out.dims, scenario.array);
  out.model.clutter.reserve(scenario.clutter.size());
  for (const auto& patch : scenario.clutter)
    out.model.clutter.push_back(cov::clutter_basis(patch, scenario.array, scenario.pulses));

  VecC a = scene::spatial_steering(scenario.target.azimuth, scenario.target.elevation,
                                   scenario.array);
  VecC v = scene::temporal_steering(scenario.target.doppler_hz, scenario.pulses);
  out.steering = scene::build_replication(a, v, scenario.pulses.num_samples);
  return out;
}

}  // namespace stapwave
