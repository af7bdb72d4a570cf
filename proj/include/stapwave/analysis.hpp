#pragma once

#include <string>
#include <vector>

#include "stapwave/scenario.hpp"

namespace stapwave::analysis {

struct PatternGrid {
  VecR doppler_norm;  // normalized Doppler axis f_d T_p
  VecR azimuth;       // radians
  double elevation = 0.0;
  MatR values;  // power, rows follow doppler_norm, cols follow azimuth
};

struct GapBoundsReport {
  double gap = 0.0;
  double lower[3] = {0.0, 0.0, 0.0};
  double upper[3] = {0.0, 0.0, 0.0};

  double max_lower() const;
  double min_upper() const;
  bool sandwich_ok(double slack) const;
};

struct RocCurve {
  VecR pfa;
  VecR pd;
  double sinr_db = 0.0;
  int trials = 0;
  std::string warning;  // set when trials are too few for the smallest pfa
};

struct SinrLossPoint {
  int sample_support = 0;  // K
  double mean_loss = 0.0;  // linear ratio
  double std_loss = 0.0;
  double mean_loss_db = 0.0;
};

/// w^H R_u(s) w; the imaginary residue of the quadratic form is discarded
/// after a sanity bound.
double objective(const VecC& w, const VecC& s, const cov::CovarianceModel& model);

/// Same value through the split w^H (R_n + R_i) w + Σ_q s^H Z_q(w) s.
double objective_split(const VecC& w, const VecC& s, const cov::CovarianceModel& model);

/// |w^H (v(f_d) ⊗ s ⊗ a(θ, φ))|² over a Doppler × azimuth grid at fixed
/// elevation.
PatternGrid adapted_pattern(const VecC& w, const VecC& s, const RadarScenario& scenario,
                            int doppler_bins = 64, int azimuth_bins = 64);

/// Single pattern value at exact coordinates.
double pattern_value(const VecC& w, const VecC& s, const RadarScenario& scenario,
                     double doppler_norm, double azimuth, double elevation);

/// Three lower/upper bound pairs for g(w_k, s_k) − g(w_{k+1}, s_k): the
/// quadratic-difference pair, the Rayleigh pair, and the trace pair built from
/// the rank-one-difference eigenvalues.
GapBoundsReport gap_bounds(const VecC& w_k, const VecC& w_k1, const MatC& r_u);

struct ConvexityProbeResult {
  int violations_in_s = 0;
  int violations_in_w = 0;
};

/// Jensen checks of the objective in s (fixed random w) and in w (fixed
/// random s); expected to report zero violations.
ConvexityProbeResult convexity_probe(const PreparedScenario& scenario, int trials,
                                     std::uint64_t seed, double slack = 1e-9);

/// Monte Carlo ROC of the |w^H y| detector with thresholds from the empirical
/// null distribution; the target amplitude is scaled to the requested output
/// SINR.
RocCurve roc_curve(const VecC& w, const VecC& s, const cov::CovarianceModel& model,
                   double sinr_db, int trials, const VecR& pfa_grid, std::uint64_t seed);

/// Output SINR |ρ κ|² / w^H R_u(s) w for a unit-amplitude target.
double output_sinr(const VecC& w, const VecC& s, const cov::CovarianceModel& model,
                   double kappa);

/// Oracle SINR-loss Monte Carlo: per sample support K, draw K snapshots from
/// CN(0, R_u(s_o)), refit the filter on the sample covariance (loaded when
/// K < dim), and average the loss ratio over trials.
std::vector<SinrLossPoint> sinr_loss_mc(const PreparedScenario& scenario, const VecC& w_o,
                                        const VecC& s_o, const std::vector<int>& supports,
                                        int trials, std::uint64_t seed, double kappa,
                                        double loading_when_deficient = 100.0);

}  // namespace stapwave::analysis
