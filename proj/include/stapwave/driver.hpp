#pragma once

#include <string>
#include <vector>

#include "stapwave/optim.hpp"
#include "stapwave/scenario.hpp"

namespace stapwave::driver {

struct OptimState {
  int k = 0;
  double objective = 0.0;       // g(w_k, s_k)
  double objective_half = 0.0;  // g(w_k, s_{k-1}), after the filter half-step
  double constraint_residual = 0.0;
  double power = 0.0;
  double modulus_spread = 0.0;
  double wall_ms = 0.0;
};

enum class Termination { Converged, PowerViolation, MaxIter, SolverError };

const char* to_string(Termination t);

struct RunTrace {
  std::vector<OptimState> states;
  Termination termination = Termination::MaxIter;
  std::string termination_detail;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  VecC s_init;
  VecC final_w;
  VecC final_s;
  // populated only when RunOptions::record_iterates is set
  std::vector<VecC> iterates_w;
  std::vector<VecC> iterates_s;
};

struct RunOptions {
  bool record_iterates = false;
  VecC w_init;  // warm-start filter for the first proximal step (else loaded MVDR)
};

/// Constrained alternating minimization: exact filter and waveform steps.
/// Stops on objective stagnation, the optional power-violation rule, or
/// max_iter; singular solves terminate with a partial trace.
RunTrace run_am(const PreparedScenario& scenario, const VecC& s_init,
                const optim::AlgoConfig& config, const RunOptions& options = {});

/// Proximal alternating minimization for a fixed pam_iters budget. Steps with
/// alpha = beta = 0 delegate to the exact updates, so such a run bit-matches
/// run_am under the same stopping rule.
RunTrace run_pam(const PreparedScenario& scenario, const VecC& s_init,
                 const optim::AlgoConfig& config, const RunOptions& options = {});

/// Constant-modulus alternating minimization; trace rows carry the per-sample
/// modulus spread max|s_i| - min|s_i|.
RunTrace run_cm(const PreparedScenario& scenario, const VecC& s_init,
                const optim::AlgoConfig& config, const RunOptions& options = {});

struct MinEigBaseline {
  VecC s;
  VecC w;
  double objective = 0.0;  // g(w, s) with the full covariance model
  optim::MinEigReport report;
};

/// Minimum-eigenvector waveform from the clutter-free covariance R_i + R_n,
/// energy-scaled to `power`, paired with its adapted MVDR filter.
MinEigBaseline min_eig_baseline(const PreparedScenario& scenario, double power, double kappa);

/// i.i.d. CN(0,1) fast-time samples; expected energy N, no rescale. The
/// default initialization for the alternating-minimization experiments.
VecC gaussian_waveform(std::uint64_t seed, int num_samples);

/// i.i.d. CN(0,1) fast-time samples scaled to ||s||² = power.
VecC random_waveform(std::uint64_t seed, int num_samples, double power);

/// Unit-modulus discrete chirp scaled so each sample has modulus rho.
VecC chirp_waveform(int num_samples, double rho);

double modulus_spread(const VecC& s);

}  // namespace stapwave::driver
