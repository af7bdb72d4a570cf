#pragma once

#include <vector>

#include "stapwave/scene.hpp"
#include "stapwave/types.hpp"

namespace stapwave::cov {

/// Stationary correlation law r(n) over integer lags, unit power at lag 0.
struct CorrelationLaw {
  enum class Kind { ExponentialAbs, Geometric, CustomSequence, Delta };
  Kind kind = Kind::Delta;
  double parameter = 0.0;
  std::vector<double> sequence;  // CustomSequence only

  double operator()(int lag) const;
};

struct InterferenceSource {
  double azimuth = 0.0;
  double elevation = 0.0;
  CorrelationLaw law;  // jammer waveform correlation over the NL stacked lags
  double power = 1.0;  // scales the jammer covariance
};

/// One clutter patch: P scatterers sharing a nominal center. Per-scatterer
/// angles/Dopplers may deviate from the nominal center (the arrays below);
/// identical entries recover the nominal-center simplification.
struct ClutterPatch {
  double azimuth = 0.0;
  double elevation = 0.0;
  double doppler_hz = 0.0;
  int num_scatterers = 1;              // P
  MatC scatterer_correlation;          // P x P Hermitian PSD
  std::vector<double> scatterer_azimuth;
  std::vector<double> scatterer_elevation;
  std::vector<double> scatterer_doppler;

  /// All scatterers collapsed onto the nominal center.
  static ClutterPatch nominal(double azimuth, double elevation, double doppler_hz,
                              const MatC& correlation);
  /// Scatterers spread uniformly over ±spread/2 in azimuth around the center.
  /// When doppler_per_hz_rad is nonzero each scatterer's Doppler follows its
  /// own azimuth offset at that slope (ridge-consistent spread).
  static ClutterPatch with_azimuth_spread(double azimuth, double elevation, double doppler_hz,
                                          const MatC& correlation, double spread,
                                          double doppler_per_hz_rad = 0.0);
  void validate() const;
};

/// Waveform-independent clutter factor B̆_q (NML x PN); column block p is
/// v(fc_pq) ⊗ A_pq so that B_q(s) = B̆_q (I_P ⊗ s) stacks the per-scatterer
/// composite steering vectors.
struct ClutterBasis {
  MatC breve;        // NML x PN
  MatC correlation;  // P x P
  MatC corr_half;    // P x P, correlation = corr_half corr_half^H
  int num_samples = 0;

  int num_scatterers() const { return static_cast<int>(correlation.rows()); }
  MatC b_of_s(const VecC& s) const;
};

/// Assembled second-order model of the undesired returns.
struct CovarianceModel {
  Dims dims;
  MatC r_noise;         // NML x NML
  MatC r_interference;  // NML x NML
  std::vector<ClutterBasis> clutter;

  MatC noise_plus_interference() const { return r_noise + r_interference; }
};

MatC toeplitz_covariance(const CorrelationLaw& law, int size);

/// Validates Hermitian structure and positive semidefiniteness; throws
/// ModelError carrying the offending minimum eigenvalue. Never projects.
void validate_covariance(const MatC& r, const std::string& name, double tol = 1e-9);

MatC interference_covariance(const std::vector<InterferenceSource>& sources, const Dims& dims,
                             const scene::ArrayGeometry& geom);

ClutterBasis clutter_basis(const ClutterPatch& patch, const scene::ArrayGeometry& geom,
                           const scene::PulseTrain& pulses);

/// R_c(s) = Σ_q B_q(s) R_γ^q B_q(s)^H; quadratic in s.
MatC clutter_covariance(const VecC& s, const CovarianceModel& model);

/// Per-patch N x N Hermitian PSD matrices Z_q(w) satisfying
/// w^H R_c(s) w = Σ_q s^H Z_q(w) s for every s.
std::vector<MatC> zq_matrices(const VecC& w, const CovarianceModel& model);
MatC zq_sum(const VecC& w, const CovarianceModel& model);

/// R_u(s) = R_i + R_c(s) + R_n.
MatC total_covariance(const VecC& s, const CovarianceModel& model);

/// (1/K) Σ y y^H + δ I.
MatC sample_covariance(const std::vector<VecC>& snapshots, double loading = 0.0);

/// 0/1 selection matrix H (P²N x N) with vec(I_P ⊗ s) = H s (column-major vec).
MatR selection_matrix(int num_scatterers, int num_samples);

/// Best rank-`rank` approximation plus δ I diagonal loading.
MatC rank_limited(const MatC& r, int rank, double loading);

}  // namespace stapwave::cov
