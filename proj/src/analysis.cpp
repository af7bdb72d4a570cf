#include "stapwave/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "stapwave/driver.hpp"
#include "stapwave/optim.hpp"
#include "stapwave/rng.hpp"

namespace stapwave::analysis {

double GapBoundsReport::max_lower() const { return std::max({lower[0], lower[1], lower[2]}); }
double GapBoundsReport::min_upper() const { return std::min({upper[0], upper[1], upper[2]}); }
bool GapBoundsReport::sandwich_ok(double slack) const {
  return max_lower() <= gap + slack && gap <= min_upper() + slack;
}

double objective(const VecC& w, const VecC& s, const cov::CovarianceModel& model) {
  MatC r_u = cov::total_covariance(s, model);
  cxd value = (w.adjoint() * r_u * w).value();
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real())))
    throw SolverError("objective: quadratic form has a non-real residue", value.imag());
  return value.real();
}

double objective_split(const VecC& w, const VecC& s, const cov::CovarianceModel& model) {
  double base = (w.adjoint() * model.noise_plus_interference() * w).value().real();
  for (const auto& z : cov::zq_matrices(w, model))
    base += (s.adjoint() * z * s).value().real();
  return base;
}

double pattern_value(const VecC& w, const VecC& s, const RadarScenario& scenario,
                     double doppler_norm, double azimuth, double elevation) {
  VecC a = scene::spatial_steering(azimuth, elevation, scenario.array);
  VecC v = scene::temporal_steering(doppler_norm / scenario.pulses.pri, scenario.pulses);
  cxd response = (w.adjoint() * scene::composite_steering(v, s, a)).value();
  return std::norm(response);
}

PatternGrid adapted_pattern(const VecC& w, const VecC& s, const RadarScenario& scenario,
                            int doppler_bins, int azimuth_bins) {
  PatternGrid grid;
  grid.elevation = scenario.target.elevation;
  grid.doppler_norm = VecR::LinSpaced(doppler_bins, -0.5, 0.5);
  grid.azimuth = VecR::LinSpaced(azimuth_bins, -M_PI_2, M_PI_2);
  grid.values.resize(doppler_bins, azimuth_bins);
  for (int di = 0; di < doppler_bins; ++di)
    for (int ai = 0; ai < azimuth_bins; ++ai)
      grid.values(di, ai) =
          pattern_value(w, s, scenario, grid.doppler_norm(di), grid.azimuth(ai),
                        grid.elevation);
  return grid;
}

GapBoundsReport gap_bounds(const VecC& w_k, const VecC& w_k1, const MatC& r_u) {
  GapBoundsReport rep;
  double g_k = (w_k.adjoint() * r_u * w_k).value().real();
  double g_k1 = (w_k1.adjoint() * r_u * w_k1).value().real();
  rep.gap = g_k - g_k1;

  VecC diff = w_k - w_k1;
  rep.lower[0] = 0.0;
  rep.upper[0] = (diff.adjoint() * r_u * diff).value().real();

  Eigen::SelfAdjointEigenSolver<MatC> eig(r_u, Eigen::EigenvaluesOnly);
  double lam_min = eig.eigenvalues().minCoeff();
  double lam_max = eig.eigenvalues().maxCoeff();
  double nk = w_k.squaredNorm();
  double nk1 = w_k1.squaredNorm();
  rep.lower[1] = lam_min * nk - lam_max * nk1;
  rep.upper[1] = lam_max * nk - lam_min * nk1;

  auto [lam_plus, lam_minus] = optim::rank_one_diff_eigs(w_k, w_k1);
  rep.lower[2] = lam_max * lam_minus + lam_min * lam_plus;
  rep.upper[2] = lam_max * lam_plus + lam_min * lam_minus;
  return rep;
}

ConvexityProbeResult convexity_probe(const PreparedScenario& scenario, int trials,
                                     std::uint64_t seed, double slack) {
  ConvexityProbeResult result;
  const int dim = scenario.dims.snapshot();
  const int n = scenario.dims.num_samples;
  Rng rng(seed);

  // convexity in s at fixed w: base + s^H Z(w) s along a chord
  for (int t = 0; t < trials; ++t) {
    VecC w = rng.normal_complex_vector(dim);
    MatC z = cov::zq_sum(w, scenario.model);
    double base = (w.adjoint() * scenario.model.noise_plus_interference() * w).value().real();
    VecC s1 = rng.normal_complex_vector(n);
    VecC s2 = rng.normal_complex_vector(n);
    double mix = rng.uniform();
    VecC s_mix = mix * s1 + (1.0 - mix) * s2;
    auto value = [&](const VecC& s) {
      return base + (s.adjoint() * z * s).value().real();
    };
    double lhs = value(s_mix);
    double rhs = mix * value(s1) + (1.0 - mix) * value(s2);
    if (lhs > rhs + slack * std::max(1.0, std::abs(rhs))) ++result.violations_in_s;
  }

  // convexity in w at fixed s: w^H R_u(s) w along a chord
  for (int t = 0; t < trials; ++t) {
    VecC s = rng.normal_complex_vector(n);
    MatC r_u = cov::total_covariance(s, scenario.model);
    VecC w1 = rng.normal_complex_vector(dim);
    VecC w2 = rng.normal_complex_vector(dim);
    double mix = rng.uniform();
    VecC w_mix = mix * w1 + (1.0 - mix) * w2;
    auto value = [&](const VecC& w) { return (w.adjoint() * r_u * w).value().real(); };
    double lhs = value(w_mix);
    double rhs = mix * value(w1) + (1.0 - mix) * value(w2);
    if (lhs > rhs + slack * std::max(1.0, std::abs(rhs))) ++result.violations_in_w;
  }
  return result;
}

double output_sinr(const VecC& w, const VecC& s, const cov::CovarianceModel& model,
                   double kappa) {
  return kappa * kappa / objective(w, s, model);
}

RocCurve roc_curve(const VecC& w, const VecC& s, const cov::CovarianceModel& model,
                   double sinr_db, int trials, const VecR& pfa_grid, std::uint64_t seed) {
  RocCurve curve;
  curve.sinr_db = sinr_db;
  curve.trials = trials;
  curve.pfa = pfa_grid;
  curve.pd.resize(pfa_grid.size());

  // w^H y_u is scalar CN(0, w^H R_u w); simulate it directly
  double sigma2 = objective(w, s, model);
  double sigma = std::sqrt(sigma2);
  double amplitude = std::sqrt(std::pow(10.0, sinr_db / 10.0) * sigma2);  // |rho kappa|

  Rng rng(seed);
  std::vector<double> h0(trials);
  std::vector<double> h1(trials);
  for (int t = 0; t < trials; ++t) {
    h0[t] = std::abs(sigma * rng.normal_complex());
    h1[t] = std::abs(amplitude + sigma * rng.normal_complex());
  }
  std::sort(h0.begin(), h0.end(), std::greater<double>());

  double pfa_floor = 10.0 / trials;
  for (Eigen::Index i = 0; i < pfa_grid.size(); ++i) {
    double pfa = pfa_grid(i);
    if (pfa < pfa_floor && curve.warning.empty()) {
      std::ostringstream msg;
      msg << "pfa " << pfa << " below the resolvable floor " << pfa_floor << " at " << trials
          << " trials";
      curve.warning = msg.str();
    }
    int idx = std::min<int>(std::max<int>(static_cast<int>(pfa * trials), 1), trials) - 1;
    double threshold = h0[idx];
    int detections = 0;
    for (double stat : h1)
      if (stat > threshold) ++detections;
    curve.pd(i) = static_cast<double>(detections) / trials;
  }
  return curve;
}

std::vector<SinrLossPoint> sinr_loss_mc(const PreparedScenario& scenario, const VecC& w_o,
                                        const VecC& s_o, const std::vector<int>& supports,
                                        int trials, std::uint64_t seed, double kappa,
                                        double loading_when_deficient) {
  const int dim = scenario.dims.snapshot();
  MatC r_u = cov::total_covariance(s_o, scenario.model);
  Eigen::LLT<MatC> llt(r_u);
  if (llt.info() != Eigen::Success)
    throw SolverError("sinr_loss_mc: oracle covariance not positive definite");
  MatC chol = llt.matrixL();
  VecC g = scenario.target_composite(s_o);
  double obj_oracle = (w_o.adjoint() * r_u * w_o).value().real();

  std::vector<SinrLossPoint> points;
  for (std::size_t ki = 0; ki < supports.size(); ++ki) {
    int support = supports[ki];
    if (support < 1) throw ModelError("sinr_loss_mc: sample support must be >= 1");
    double loading = support < dim ? loading_when_deficient : 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(Rng::substream(seed, ki * 1000003ULL + t));
      std::vector<VecC> snapshots;
      snapshots.reserve(support);
      for (int k = 0; k < support; ++k)
        snapshots.push_back(chol * rng.normal_complex_vector(dim));
      MatC r_hat = cov::sample_covariance(snapshots, loading);
      VecC w_est = optim::mvdr_filter(r_hat, g, kappa);
      double obj_est = (w_est.adjoint() * r_hat * w_est).value().real();
      double loss = obj_oracle / obj_est;
      sum += loss;
      sum_sq += loss * loss;
    }
    SinrLossPoint point;
    point.sample_support = support;
    point.mean_loss = sum / trials;
    point.std_loss = std::sqrt(std::max(sum_sq / trials - point.mean_loss * point.mean_loss,
                                        0.0));
    point.mean_loss_db = 10.0 * std::log10(point.mean_loss);
    points.push_back(point);
  }
  return points;
}

}  // namespace stapwave::analysis
