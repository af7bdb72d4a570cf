#pragma once

#include <cstdint>
#include <utility>

#include "stapwave/types.hpp"

namespace stapwave::optim {

/// Knobs shared by every solver/driver; one instance fully determines a run.
struct AlgoConfig {
  double kappa = 1.0;       // Capon response level
  double power = 10.0;      // P_o, transmit energy budget
  double rho = 1.0;         // constant-modulus level (initial; Capon rescales)
  double alpha = 0.0;       // proximal weight, filter step
  double beta = 0.0;        // proximal weight, waveform step
  bool lipschitz_weights = false;  // derive alpha/beta from max eigenvalues per iteration
  double tol_obj = 1e-8;
  double tol_constraint = 1e-8;
  double tol_root = 1e-10;
  double tol_step = 1e-6;
  int max_iter = 100;
  int pam_iters = 200;
  int cm_max_sweeps = 2000;
  std::uint64_t seed = 1;
  bool power_stop = false;  // stop when the unconstrained waveform update breaks s^H s <= P_o

  void validate() const;
};

struct DualSolveReport {
  enum class Branch { AnalyticZero, Bisection };
  double gamma = 0.0;
  double residual = 0.0;  // relative power-constraint residual at the returned gamma
  Branch branch = Branch::AnalyticZero;
  int iterations = 0;
};

struct SpectralReport {
  VecR eigenvalues;  // descending
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  int rank_at(double relative_threshold) const;
};

struct WaveformSolution {
  VecC s;
  DualSolveReport dual;
};

struct MinEigReport {
  double min_eigenvalue = 0.0;
  double spectral_gap = 0.0;  // lambda_2 - lambda_1
  bool degenerate = false;    // gap below 1e-8 * lambda_max
};

struct CmResult {
  VecC s;
  double modulus = 0.0;       // common |s_i| after the Capon rescale
  double kkt_residual = 0.0;  // ||Im{(Z s) .* conj(s)}||_inf at the output
  int sweeps = 0;
  bool converged = true;
};

/// w = κ R⁻¹ g / (g^H R⁻¹ g). Throws SolverError carrying the minimum
/// eigenvalue when R is not positive definite.
VecC mvdr_filter(const MatC& r_u, const VecC& g, double kappa);

/// Scalar root function f(γ) = κ² u^H F⁻² u − P_o (u^H F⁻¹ u)² with
/// F = Z + γI, evaluated in the eigenbasis of Z. Also exposes the waveform
/// s(γ) and its power; power(γ) is strictly decreasing, f shares its sign.
class Gamma2Function {
 public:
  Gamma2Function(const MatC& z_sum, const VecC& u, double kappa, double power);
  /// Synthetic construction from eigenvalues d and coefficients z (root studies).
  Gamma2Function(VecR d, VecC z, double kappa, double power);

  double f(double gamma) const;
  double waveform_power(double gamma) const;
  VecC waveform(double gamma) const;
  double max_eigenvalue() const { return d_.maxCoeff(); }
  double min_eigenvalue() const { return d_.minCoeff(); }
  /// κ²/||u||², the power of the limiting (γ → ∞) minimum-norm waveform.
  double limit_power() const;

 private:
  VecR d_;      // eigenvalues of Z
  VecC z_;      // E^H u
  VecR a_;      // |z|²
  MatC basis_;  // E (empty in synthetic mode)
  double kappa_ = 1.0;
  double power_cap_ = 0.0;
};

/// s = κ Z⁻¹ u / (u^H Z⁻¹ u) with u = G^H w; the γ₂ = 0 waveform. Throws
/// SolverError naming the rank deficit when Z is singular.
VecC waveform_closed_form(const VecC& w, const MatC& g, const MatC& z_sum, double kappa);

/// Waveform step with the power constraint: γ₂ = 0 when the closed form
/// already satisfies s^H s <= P_o, otherwise bisection on the strictly
/// decreasing γ ↦ ||s(γ)||².
WaveformSolution dual_gamma2(const VecC& w, const MatC& g, const MatC& z_sum, double kappa,
                             double power, double tol_root = 1e-10, int max_iter = 200);

/// Least-squares waveform from the minimum eigenvector of r_u, computed via
/// the decoupled per-sample form and cross-checked against the full
/// normal-equation route; rescaled to ||s||² = P_o, global phase normalized.
VecC min_eig_waveform(const MatC& r_u, const VecC& v, const VecC& a, double power,
                      MinEigReport* report = nullptr);

/// Proximal filter step: w = (R + α/2 I)⁻¹ (α/2 w_prev − γ₄*/2 g) with γ₄
/// chosen so w^H g = κ. Reduces to mvdr_filter at α = 0; works on
/// rank-deficient R for α > 0.
VecC proximal_filter(const MatC& r_u, const VecC& w_prev, double alpha, const VecC& g,
                     double kappa);

/// Scalar root function r(γ) for the proximal waveform step's power
/// constraint; r(γ) = (u^H F⁻¹ u)² (P_o − ||s(γ)||²) with F = Z + (β/2 + γ)I.
class Gamma6Function {
 public:
  Gamma6Function(const MatC& z_sum, const VecC& u, const VecC& s_prev, double beta,
                 double kappa, double power);

  double r(double gamma) const;
  double waveform_power(double gamma) const;
  VecC waveform(double gamma) const;
  double max_eigenvalue() const { return d_.maxCoeff(); }
  double limit_power() const;

 private:
  VecR d_;  // eigenvalues of Z + β/2 I
  VecC u_tilde_, p_tilde_;
  MatC basis_;
  double beta_ = 0.0;
  double kappa_ = 1.0;
  double power_cap_ = 0.0;
};

/// Proximal waveform step; γ₆ = 0 accepted when the power constraint holds,
/// otherwise solved by bracketing. Reduces to the closed form at β = 0.
WaveformSolution proximal_waveform(const VecC& w, const VecC& s_prev, double beta,
                                   const MatC& z_sum, const MatC& g, double kappa, double power,
                                   double tol_root = 1e-10, int max_iter = 200);

/// Constant-modulus waveform: damped per-sample phase iteration on the
/// stationarity conditions Im{(Z s) .* conj(s)} = 0, then the modulus and a
/// global phase are set so w^H G s = κ exactly.
CmResult const_mod_waveform(const VecC& w, const MatC& g, const MatC& z_sum, double kappa,
                            const VecC& s_init, int max_sweeps = 2000, double tol = 1e-12);

/// [[Re B, -Im B], [Im B, Re B]], the real representation of a complex matrix.
MatR real_embedding(const MatC& b);

/// Gradient-Lipschitz constant of the real-equivalent quadratic ½ x̄ᵀ B̄ x̄:
/// the maximum eigenvalue of the embedding, equal to λ_max of B itself.
double lipschitz_constant(const MatC& b);

/// Largest eigenvalue by power iteration with a deterministic start vector.
double max_eigenvalue_estimate(const MatC& b, int iters = 200, double tol = 1e-10);

/// Closed-form nonzero eigenvalues of x x^H − y y^H, returned (λ₊, λ₋) with
/// λ₊ ≥ λ₋. Collinear y = βx collapses to ((1 − |β|²)||x||², 0), signed.
std::pair<double, double> rank_one_diff_eigs(const VecC& x, const VecC& y);

/// Lemma bounds Σ λ_i(A) λ_{N−i+1}(B) ≤ Tr{AB} ≤ Σ λ_i(A) λ_i(B) for
/// Hermitian A, B; returns (lower, upper).
std::pair<double, double> trace_product_bounds(const MatC& a, const MatC& b);

SpectralReport spectral_report(const MatC& hermitian);

/// Rotate so the first entry above a relative magnitude floor has phase 0.
VecC normalize_global_phase(const VecC& v);

}  // namespace stapwave::optim
