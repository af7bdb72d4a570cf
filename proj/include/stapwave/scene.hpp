#pragma once

#include "stapwave/types.hpp"

namespace stapwave::scene {

struct ArrayGeometry {
  int num_elements = 1;          // M
  double element_spacing = 0.0;  // d, meters
  double carrier_hz = 0.0;       // f_o

  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  void validate() const;
};

struct PulseTrain {
  int num_pulses = 1;      // L
  double pri = 0.0;        // T_p, seconds
  double pulse_width = 0;  // T, seconds
  double bandwidth = 0.0;  // B, Hz
  int num_samples = 1;     // N

  double prf() const { return 1.0 / pri; }
  void validate() const;
};

struct Target {
  double azimuth = 0.0;    // theta_t, radians
  double elevation = 0.0;  // phi_t, radians
  double doppler_hz = 0.0;
  cxd reflectivity = {1.0, 0.0};

  void validate() const;
};

struct KinematicState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

/// Spatial/temporal steering vectors for one look direction together with the
/// replication matrices that carry the fast-time waveform into the composite
/// space-time steering vector: G s = v ⊗ s ⊗ a.
struct SteeringSet {
  VecC a;    // spatial, length M
  VecC v;    // temporal, length L
  MatC a_t;  // MN x N, block diagonal with a on each block (= I_N ⊗ a)
  MatC g;    // NML x N, v ⊗ A_t
};

/// a(θ, φ): element m carries phase exp(-j2π m ϑ) with ϑ = d sinθ sinφ / λ.
VecC spatial_steering(double azimuth, double elevation, const ArrayGeometry& geom);

/// v(f_d): pulse l carries phase exp(-j2π f_d l T_p).
VecC temporal_steering(double doppler_hz, const PulseTrain& pulses);

/// Two-way Doppler from radar/scatterer kinematics. A stationary scatterer
/// (scatterer_moving = false) contributes no own-motion term.
double doppler_shift(const KinematicState& radar, const KinematicState& scatterer,
                     double carrier_hz, bool scatterer_moving = true);

/// Element-m round-trip delay for the far-field linear array.
double element_delay(int element, const KinematicState& radar, const KinematicState& target,
                     double azimuth, double elevation, const ArrayGeometry& geom);

/// I_N ⊗ a, the (MN x N) matrix with A s = s ⊗ a for every s.
MatC replication_block(const VecC& a, int num_samples);

SteeringSet build_replication(const VecC& a, const VecC& v, int num_samples);

/// v ⊗ s ⊗ a (pulse-major, then fast time, then element).
VecC composite_steering(const VecC& v, const VecC& s, const VecC& a);

}  // namespace stapwave::scene
