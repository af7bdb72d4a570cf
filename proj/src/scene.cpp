#include "stapwave/scene.hpp"

#include <cmath>

namespace stapwave::scene {

namespace {
constexpr cxd kJ{0.0, 1.0};
}

void ArrayGeometry::validate() const {
  if (num_elements < 1) throw ModelError("array: num_elements must be >= 1");
  if (element_spacing <= 0.0) throw ModelError("array: element_spacing must be > 0");
  if (carrier_hz <= 0.0) throw ModelError("array: carrier frequency must be > 0");
}

void PulseTrain::validate() const {
  if (num_pulses < 1) throw ModelError("pulses: num_pulses must be >= 1");
  if (num_samples < 1) throw ModelError("pulses: num_samples must be >= 1");
  if (pri <= 0.0) throw ModelError("pulses: pri must be > 0");
  if (pulse_width <= 0.0 || pulse_width >= pri)
    throw ModelError("pulses: need pri > pulse_width > 0");
}

void Target::validate() const {
  if (azimuth < -M_PI_2 || azimuth > M_PI_2)
    throw ModelError("target: azimuth outside [-pi/2, pi/2]");
  if (elevation < 0.0 || elevation > M_PI_2)
    throw ModelError("target: elevation outside [0, pi/2]");
}

VecC spatial_steering(double azimuth, double elevation, const ArrayGeometry& geom) {
  double spatial_freq = geom.element_spacing * std::sin(azimuth) * std::sin(elevation) /
                        geom.wavelength();
  VecC a(geom.num_elements);
  for (int m = 0; m < geom.num_elements; ++m)
    a(m) = std::exp(-kJ * (2.0 * M_PI * m * spatial_freq));
  return a;
}

VecC temporal_steering(double doppler_hz, const PulseTrain& pulses) {
  VecC v(pulses.num_pulses);
  for (int l = 0; l < pulses.num_pulses; ++l)
    v(l) = std::exp(-kJ * (2.0 * M_PI * doppler_hz * l * pulses.pri));
  return v;
}

double doppler_shift(const KinematicState& radar, const KinematicState& scatterer,
                     double carrier_hz, bool scatterer_moving) {
  Eigen::Vector3d line = radar.position - scatterer.position;
  double range = line.norm();
  if (range <= 0.0) throw ModelError("doppler_shift: coincident radar and scatterer");
  Eigen::Vector3d rel_vel =
      scatterer_moving ? (radar.velocity - scatterer.velocity).eval() : radar.velocity;
  return 2.0 * carrier_hz * rel_vel.dot(line) / (kSpeedOfLight * range);
}

double element_delay(int element, const KinematicState& radar, const KinematicState& target,
                     double azimuth, double elevation, const ArrayGeometry& geom) {
  double range = (radar.position - target.position).norm();
  return 2.0 * range / kSpeedOfLight +
         element * geom.element_spacing * std::sin(elevation) * std::sin(azimuth) /
             kSpeedOfLight;
}

MatC replication_block(const VecC& a, int num_samples) {
  const int m = static_cast<int>(a.size());
  MatC block = MatC::Zero(m * num_samples, num_samples);
  for (int n = 0; n < num_samples; ++n) block.col(n).segment(n * m, m) = a;
  return block;
}

SteeringSet build_replication(const VecC& a, const VecC& v, int num_samples) {
  SteeringSet set;
  set.a = a;
  set.v = v;
  set.a_t = replication_block(a, num_samples);
  const Eigen::Index rows = set.a_t.rows();
  set.g.resize(v.size() * rows, num_samples);
  for (Eigen::Index l = 0; l < v.size(); ++l)
    set.g.middleRows(l * rows, rows) = v(l) * set.a_t;
  return set;
}

VecC composite_steering(const VecC& v, const VecC& s, const VecC& a) {
  return kron(v, kron(s, a));
}

}  // namespace stapwave::scene
