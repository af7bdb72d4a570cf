#pragma once

#include <vector>

#include "stapwave/covariance.hpp"
#include "stapwave/scene.hpp"

namespace stapwave {

/// Full physical/statistical scene description. Configuration-level only;
/// prepare() assembles the numerical model.
struct RadarScenario {
  scene::ArrayGeometry array;
  scene::PulseTrain pulses;
  scene::Target target;
  cov::CorrelationLaw noise_law;
  std::vector<cov::InterferenceSource> interferers;
  std::vector<cov::ClutterPatch> clutter;

  // training-starved mode: the filter adapts against a sample covariance
  // estimated once from `rank_limit` snapshots (its rank), diagonally loaded
  // by `rank_loading` during the exact-AM phase; inactive at rank 0
  int rank_limit = 0;
  double rank_loading = 0.0;

  Dims dims() const {
    return {array.num_elements, pulses.num_pulses, pulses.num_samples};
  }
  void validate() const;
};

/// Immutable numerical model shared (read-only) by all trials of a run.
struct PreparedScenario {
  Dims dims;
  cov::CovarianceModel model;
  scene::SteeringSet steering;  // target-look replication set (a, v, A_t, G)
  double kappa_hint = 1.0;      // echoed from config by the drivers
  int rank_limit = 0;
  double rank_loading = 0.0;

  /// v(f_d) ⊗ s ⊗ a(θ_t, φ_t) for the target look.
  VecC target_composite(const VecC& s) const { return steering.g * s; }
};

PreparedScenario prepare(const RadarScenario& scenario);

}  // namespace stapwave
