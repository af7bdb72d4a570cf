#include "stapwave/driver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "stapwave/rng.hpp"

namespace stapwave::driver {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

enum class Mode { Exact, Proximal, ConstantModulus };

double quad_form(const MatC& r, const VecC& w) {
  return (w.adjoint() * r * w).value().real();
}

/// Rank-deficient sample covariance for the training-starved path: K =
/// rank_limit snapshots drawn once from the true covariance at the starting
/// waveform, so the filter adapts against a fixed rank-K estimate.
MatC training_estimate(const PreparedScenario& sc, const VecC& s_init, std::uint64_t seed) {
  MatC truth = cov::total_covariance(s_init, sc.model);
  Eigen::LLT<MatC> llt(truth);
  if (llt.info() != Eigen::Success)
    throw SolverError("training estimate: covariance at the start not positive definite");
  MatC chol = llt.matrixL();
  Rng rng(Rng::substream(seed, 0xE57));
  std::vector<VecC> snapshots;
  snapshots.reserve(sc.rank_limit);
  for (int k = 0; k < sc.rank_limit; ++k)
    snapshots.push_back(chol * rng.normal_complex_vector(sc.dims.snapshot()));
  return cov::sample_covariance(snapshots, 0.0);
}

struct ConvergenceTracker {
  double prev_objective = -1.0;
  int stagnant = 0;

  bool update(double objective, double displacement, const optim::AlgoConfig& cfg) {
    if (prev_objective >= 0.0) {
      double rel = std::abs(objective - prev_objective) / std::max(prev_objective, 1e-300);
      stagnant = rel < cfg.tol_obj ? stagnant + 1 : 0;
    }
    prev_objective = objective;
    return stagnant >= 3 && displacement < cfg.tol_step;
  }
};

RunTrace run_loop(const PreparedScenario& sc, const VecC& s_init,
                  const optim::AlgoConfig& cfg, const RunOptions& options, Mode mode,
                  int budget) {
  cfg.validate();
  RunTrace trace;
  trace.seed = cfg.seed;
  trace.s_init = s_init;
  trace.termination = Termination::MaxIter;

  ConvergenceTracker tracker;
  auto run_start = Clock::now();

  VecC s_prev = s_init;
  VecC w_prev = options.w_init;
  const bool rankdef = sc.rank_limit > 0;
  const double am_loading = rankdef && mode != Mode::Proximal ? sc.rank_loading : 0.0;
  MatC r_train;
  if (rankdef) {
    try {
      r_train = training_estimate(sc, s_init, cfg.seed);
    } catch (const SolverError& err) {
      trace.termination = Termination::SolverError;
      trace.termination_detail = err.what();
      return trace;
    }
  }
  auto objective_of = [&](const VecC& w, const VecC& s, double base, const MatC& z) {
    if (rankdef) return quad_form(r_train, w) + am_loading * w.squaredNorm();
    return base + (s.adjoint() * z * s).value().real();
  };

  for (int k = 1; k <= budget; ++k) {
    auto iter_start = Clock::now();
    try {
      double alpha = 0.0;
      double beta = 0.0;
      MatC r_filter;
      if (rankdef) {
        r_filter = r_train;
        if (am_loading > 0.0)
          r_filter += am_loading * MatC::Identity(r_train.rows(), r_train.cols());
      } else {
        r_filter = cov::total_covariance(s_prev, sc.model);
      }
      if (mode == Mode::Proximal)
        alpha = cfg.lipschitz_weights ? optim::max_eigenvalue_estimate(r_filter) : cfg.alpha;

      VecC g_s = sc.steering.g * s_prev;
      VecC w;
      if (mode == Mode::Proximal && alpha > 0.0) {
        VecC anchor = w_prev.size() > 0 ? w_prev : VecC::Zero(g_s.size()).eval();
        w = optim::proximal_filter(r_filter, anchor, alpha, g_s, cfg.kappa);
      } else {
        w = optim::mvdr_filter(r_filter, g_s, cfg.kappa);
      }

      MatC z = cov::zq_sum(w, sc.model);
      double base = quad_form(sc.model.noise_plus_interference(), w);
      double obj_half = stepper.objective_of(w, s_prev, base, z);

      VecC s_new;
      if (mode == Mode::ConstantModulus) {
        optim::CmResult cm = optim::const_mod_waveform(w, sc.steering.g, z, cfg.kappa, s_prev,
                                                       cfg.cm_max_sweeps, cfg.tol_root);
        if (!cm.converged) {
          std::ostringstream note;
          note << "inner phase iteration hit sweep cap at k=" << k
               << " (kkt residual " << cm.kkt_residual << "); ";
          trace.termination_detail += note.str();
        }
        s_new = cm.s;
      } else if (mode == Mode::Proximal) {
        beta = cfg.lipschitz_weights ? optim::lipschitz_constant(z) : cfg.beta;
        if (beta > 0.0) {
          s_new = optim::proximal_waveform(w, s_prev, beta, z, sc.steering.g, cfg.kappa,
                                           cfg.power, cfg.tol_root)
                      .s;
        } else {
          s_new = optim::dual_gamma2(w, sc.steering.g, z, cfg.kappa, cfg.power, cfg.tol_root).s;
        }
      } else if (cfg.power_stop) {
        s_new = optim::waveform_closed_form(w, sc.steering.g, z, cfg.kappa);
        if (s_new.squaredNorm() > cfg.power) {
          std::ostringstream note;
          note << "waveform iterate at k=" << k << " broke the power budget ("
               << s_new.squaredNorm() << " > " << cfg.power << ")";
          trace.termination = Termination::PowerViolation;
          trace.termination_detail += note.str();
          trace.final_w = w;
          trace.final_s = s_prev;
          break;
        }
      } else {
        s_new = optim::dual_gamma2(w, sc.steering.g, z, cfg.kappa, cfg.power, cfg.tol_root).s;
      }

      OptimState state;
      state.k = k;
      state.objective = stepper.objective_of(w, s_new, base, z);
      state.objective_half = obj_half;
      state.constraint_residual =
          std::abs((w.adjoint() * (sc.steering.g * s_new)).value() - cfg.kappa);
      state.power = s_new.squaredNorm();
      state.modulus_spread = modulus_spread(s_new);
      state.wall_ms = elapsed_ms(iter_start);
      trace.states.push_back(state);
      if (options.record_iterates) {
        trace.iterates_w.push_back(w);
        trace.iterates_s.push_back(s_new);
      }

      double displacement = (s_new - s_prev).norm();
      s_prev = s_new;
      w_prev = w;
      trace.final_w = w;
      trace.final_s = s_new;

      if (tracker.update(state.objective, displacement, cfg)) {
        trace.termination = Termination::Converged;
        break;
      }
    } catch (const SolverError& err) {
      trace.termination = Termination::SolverError;
      trace.termination_detail += err.what();
      break;
    }
  }

  trace.wall_ms = elapsed_ms(run_start);
  return trace;
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::PowerViolation:
      return "power-violation";
    case Termination::MaxIter:
      return "max-iter";
    case Termination::SolverError:
      return "solver-error";
  }
  return "unknown";
}

RunTrace run_am(const PreparedScenario& scenario, const VecC& s_init,
                const optim::AlgoConfig& config, const RunOptions& options) {
  return run_loop(scenario, s_init, config, options, Mode::Exact, config.max_iter);
}

RunTrace run_pam(const PreparedScenario& scenario, const VecC& s_init,
                 const optim::AlgoConfig& config, const RunOptions& options) {
  return run_loop(scenario, s_init, config, options, Mode::Proximal, config.pam_iters);
}

RunTrace run_cm(const PreparedScenario& scenario, const VecC& s_init,
                const optim::AlgoConfig& config, const RunOptions& options) {
  return run_loop(scenario, s_init, config, options, Mode::ConstantModulus, config.max_iter);
}

MinEigBaseline min_eig_baseline(const PreparedScenario& scenario, double power, double kappa) {
  MinEigBaseline out;
  MatC clutter_free = scenario.model.noise_plus_interference();
  out.s = optim::min_eig_waveform(clutter_free, scenario.steering.v, scenario.steering.a,
                                  power, &out.report);
  MatC r_u = cov::total_covariance(out.s, scenario.model);
  out.w = optim::mvdr_filter(r_u, scenario.target_composite(out.s), kappa);
  out.objective = (out.w.adjoint() * r_u * out.w).value().real();
  return out;
}

VecC gaussian_waveform(std::uint64_t seed, int num_samples) {
  Rng rng(seed);
  return rng.normal_complex_vector(num_samples);
}

VecC random_waveform(std::uint64_t seed, int num_samples, double power) {
  Rng rng(seed);
  VecC s = rng.normal_complex_vector(num_samples);
  return s * (std::sqrt(power) / s.norm());
}

VecC chirp_waveform(int num_samples, double rho) {
  VecC s(num_samples);
  for (int n = 0; n < num_samples; ++n) {
    double phase = M_PI * static_cast<double>(n) * n / num_samples;
    s(n) = rho * cxd(std::cos(phase), std::sin(phase));
  }
  return s;
}

double modulus_spread(const VecC& s) {
  VecR mags = s.cwiseAbs();
  return mags.maxCoeff() - mags.minCoeff();
}

}  // namespace stapwave::driver
