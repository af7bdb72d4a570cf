#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "stapwave/analysis.hpp"
#include "stapwave/driver.hpp"
#include "stapwave/scenario_io.hpp"
#include "stapwave/trace_io.hpp"
#include "support/oracles.hpp"

using namespace stapwave;

namespace {

const char* kRingScenario = R"json({
  "array": {"M": 3, "d_over_lambda": 0.5, "f_o": 1.0e9},
  "pulses": {"L": 8, "N": 4, "B": 5.0e7, "T_p": 1.0e-3},
  "target": {"theta": 0.7, "phi": 0.7853981633974483, "normalized_doppler": 0.31},
  "noise": {"law": "exponential-abs", "param": 0.005},
  "interferers": [
    {"theta": 0.3941, "phi": 0.3, "law": "geometric", "param": 0.2, "power": 100.0},
    {"theta": -0.4941, "phi": 0.3, "law": "geometric", "param": 0.2, "power": 100.0}
  ],
  "clutter": {"ring": {"start": -1.5707963267948966, "stop": 1.5707963267948966,
                       "step": 0.0314159265358979, "elevation": 0.7853981633974483,
                       "law": "delta", "beta": 1.0}},
  "algo": {"P_o": 50.0, "max_iter": 40, "pam_iters": 60, "seed": 5}
})json";

io::LoadedScenario ring_loaded() { return io::parse_scenario_text(kRingScenario); }

struct Fixture {
  io::LoadedScenario loaded = ring_loaded();
  PreparedScenario prepared = prepare(loaded.scenario);
};

void check_monotone(const driver::RunTrace& trace, double slack_scale) {
  REQUIRE(!trace.states.empty());
  double slack = slack_scale * trace.states.front().objective;
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const auto& st = trace.states[i];
    // half-chain: g(w_k, s_{k-1}) >= g(w_k, s_k)
    CHECK(st.objective <= st.objective_half + slack);
    if (i > 0) {
      // g(w_k, s_k) >= g(w_{k+1}, s_k)
      CHECK(trace.states[i].objective_half <= trace.states[i - 1].objective + slack);
      CHECK(trace.states[i].objective <= trace.states[i - 1].objective + slack);
    }
  }
}

}  // namespace

TEST_CASE("am objective traces are non-increasing from random starts") {
  Fixture fx;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    optim::AlgoConfig cfg = fx.loaded.algo;
    cfg.seed = seed;
    VecC s0 = driver::gaussian_waveform(seed, fx.prepared.dims.num_samples);
    driver::RunTrace trace = driver::run_am(fx.prepared, s0, cfg);
    CHECK(trace.termination != driver::Termination::SolverError);
    check_monotone(trace, 1e-10);
    for (const auto& st : trace.states) {
      CHECK(st.objective >= 0.0);
      CHECK(st.constraint_residual <= cfg.tol_constraint);
      CHECK(st.power <= cfg.power * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("single am iteration composes the two half-steps") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.max_iter = 1;
  VecC s0 = driver::gaussian_waveform(11, fx.prepared.dims.num_samples);
  driver::RunOptions options;
  options.record_iterates = true;
  driver::RunTrace trace = driver::run_am(fx.prepared, s0, cfg, options);
  REQUIRE(trace.states.size() == 1);

  MatC r_u = cov::total_covariance(s0, fx.prepared.model);
  VecC w_ref = optim::mvdr_filter(r_u, fx.prepared.steering.g * s0, cfg.kappa);
  MatC z = cov::zq_sum(w_ref, fx.prepared.model);
  VecC s_ref = optim::dual_gamma2(w_ref, fx.prepared.steering.g, z, cfg.kappa, cfg.power,
                                  cfg.tol_root)
                   .s;
  CHECK((trace.iterates_w[0] - w_ref).cwiseAbs().maxCoeff() == 0.0);
  CHECK((trace.iterates_s[0] - s_ref).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero clutter makes the waveform step fail as a solver error") {
  io::LoadedScenario loaded = ring_loaded();
  loaded.scenario.clutter.clear();
  PreparedScenario prepared = prepare(loaded.scenario);
  VecC s0 = driver::gaussian_waveform(1, prepared.dims.num_samples);
  driver::RunTrace trace = driver::run_am(prepared, s0, loaded.algo);
  CHECK(trace.termination == driver::Termination::SolverError);
  CHECK(trace.states.empty());
  CHECK(trace.termination_detail.find("singular") != std::string::npos);
}

TEST_CASE("power-stop mode terminates when the budget is exceeded") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.power_stop = true;
  cfg.power = 8.0;  // tight budget forces an early violation
  cfg.max_iter = 200;
  VecC s0 = driver::gaussian_waveform(2, fx.prepared.dims.num_samples);
  driver::RunTrace trace = driver::run_am(fx.prepared, s0, cfg);
  CHECK(trace.termination == driver::Termination::PowerViolation);
  for (const auto& st : trace.states) CHECK(st.power <= cfg.power * (1.0 + 1e-9));
  // the returned pair is still Capon-feasible
  cxd response =
      (trace.final_w.adjoint() * (fx.prepared.steering.g * trace.final_s)).value();
  CHECK(std::abs(response - cfg.kappa) < 1e-8);
}

TEST_CASE("pam with zero weights bit-matches am") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  cfg.tol_obj = 1e-30;  // keep both loops running the full budget
  cfg.max_iter = 12;
  cfg.pam_iters = 12;
  VecC s0 = driver::gaussian_waveform(7, fx.prepared.dims.num_samples);
  driver::RunTrace am = driver::run_am(fx.prepared, s0, cfg);
  driver::RunTrace pam = driver::run_pam(fx.prepared, s0, cfg);
  REQUIRE(am.states.size() == pam.states.size());
  for (std::size_t i = 0; i < am.states.size(); ++i) {
    CHECK(am.states[i].objective == pam.states[i].objective);
    CHECK(am.states[i].power == pam.states[i].power);
    CHECK(am.states[i].constraint_residual == pam.states[i].constraint_residual);
  }
  CHECK((am.final_s - pam.final_s).cwiseAbs().maxCoeff() == 0.0);
  CHECK((am.final_w - pam.final_w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pam iterate displacement shrinks to an accumulation point") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  cfg.pam_iters = 200;
  VecC s0 = driver::gaussian_waveform(9, fx.prepared.dims.num_samples);
  driver::RunOptions options;
  options.record_iterates = true;
  driver::RunTrace trace = driver::run_pam(fx.prepared, s0, cfg, options);
  CHECK(trace.termination != driver::Termination::SolverError);
  check_monotone(trace, 1e-10);
  const auto& its = trace.iterates_s;
  REQUIRE(its.size() >= 2);
  double tail_displacement = (its.back() - its[its.size() - 2]).norm();
  CHECK(tail_displacement < 1e-6);
}

TEST_CASE("pam supports lipschitz-derived weights") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.lipschitz_weights = true;
  cfg.pam_iters = 10;
  VecC s0 = driver::gaussian_waveform(13, fx.prepared.dims.num_samples);
  driver::RunTrace trace = driver::run_pam(fx.prepared, s0, cfg);
  CHECK(trace.termination != driver::Termination::SolverError);
  check_monotone(trace, 1e-10);
}

TEST_CASE("rank-deficient protocol: loaded am then pam") {
  io::LoadedScenario loaded = ring_loaded();
  loaded.scenario.rank_limit = 12;
  loaded.scenario.rank_loading = 100.0;
  PreparedScenario prepared = prepare(loaded.scenario);
  optim::AlgoConfig cfg = loaded.algo;
  cfg.max_iter = 20;
  cfg.pam_iters = 50;
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  cfg.tol_obj = 1e-30;  // run the full budgets, per the experiment protocol

  VecC s0 = driver::gaussian_waveform(3, prepared.dims.num_samples);
  driver::RunTrace am = driver::run_am(prepared, s0, cfg);
  CHECK(am.termination != driver::Termination::SolverError);
  REQUIRE(!am.states.empty());

  driver::RunOptions options;
  options.record_iterates = true;
  options.w_init = am.final_w;
  driver::RunTrace pam = driver::run_pam(prepared, am.final_s, cfg, options);
  CHECK(pam.termination != driver::Termination::SolverError);
  REQUIRE(pam.states.size() >= 10);
  for (const auto& st : pam.states) {
    CHECK(std::isfinite(st.objective));
    CHECK(st.objective >= 0.0);
  }
  // non-increasing tail and a settled iterate
  std::size_t tail_start = pam.states.size() - 10;
  for (std::size_t i = tail_start + 1; i < pam.states.size(); ++i)
    CHECK(pam.states[i].objective <=
          pam.states[i - 1].objective + 1e-9 * pam.states.front().objective);
  const auto& its = pam.iterates_s;
  CHECK((its.back() - its[its.size() - 2]).norm() < 1e-6);

  // lands near the clutter-free minimum-eigenvector baseline value
  driver::MinEigBaseline baseline = driver::min_eig_baseline(prepared, cfg.power, cfg.kappa);
  double final_obj = pam.states.back().objective;
  CHECK(final_obj <= 100.0 * baseline.objective);
  CHECK(final_obj >= 0.01 * baseline.objective);
}

TEST_CASE("constant-modulus runs") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.max_iter = 15;
  const int n = fx.prepared.dims.num_samples;

  SUBCASE("chirp start keeps every iterate at constant modulus") {
    driver::RunTrace trace = driver::run_cm(fx.prepared, driver::chirp_waveform(n, 1.0), cfg);
    CHECK(trace.termination != driver::Termination::SolverError);
    for (const auto& st : trace.states) {
      CHECK(st.modulus_spread <= 1e-8);
      CHECK(st.constraint_residual <= 1e-8);
    }
  }

  SUBCASE("gaussian start converges to constant modulus immediately") {
    VecC s0 = driver::gaussian_waveform(17, n);
    CHECK(driver::modulus_spread(s0) > 1e-3);
    driver::RunTrace trace = driver::run_cm(fx.prepared, s0, cfg);
    for (const auto& st : trace.states) CHECK(st.modulus_spread <= 1e-6);
  }

  SUBCASE("constant-modulus objective does not beat the unconstrained step") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      optim::AlgoConfig run_cfg = cfg;
      run_cfg.seed = seed;
      driver::RunTrace trace =
          driver::run_cm(fx.prepared, driver::chirp_waveform(n, 1.0), run_cfg);
      REQUIRE(!trace.states.empty());
      VecC w = trace.final_w;
      MatC z = cov::zq_sum(w, fx.prepared.model);
      VecC closed = optim::waveform_closed_form(w, fx.prepared.steering.g, z, run_cfg.kappa);
      double base =
          (w.adjoint() * fx.prepared.model.noise_plus_interference() * w).value().real();
      double obj_cm = base + (trace.final_s.adjoint() * z * trace.final_s).value().real();
      double obj_closed = base + (closed.adjoint() * z * closed).value().real();
      CHECK(obj_cm >= obj_closed - 1e-10 * std::max(1.0, obj_closed));
    }
  }
}

TEST_CASE("traces serialize losslessly and deterministically") {
  Fixture fx;
  optim::AlgoConfig cfg = fx.loaded.algo;
  cfg.max_iter = 6;
  VecC s0 = driver::gaussian_waveform(19, fx.prepared.dims.num_samples);
  driver::RunTrace trace = driver::run_am(fx.prepared, s0, cfg);
  io::Table table = io::trace_table(trace, "am", fx.loaded.hash, fx.loaded.canonical);

  const std::string path_a = "trace_roundtrip_a.csv";
  const std::string path_b = "trace_roundtrip_b.csv";
  io::write_csv(table, path_a);
  io::Table back = io::read_csv(path_a);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.rows[i].size(); ++j)
      CHECK(back.rows[i][j] == table.rows[i][j]);

  io::write_csv(back, path_b);
  std::ifstream a(path_a), b(path_b);
  std::string text_a((std::istreambuf_iterator<char>(a)), {});
  std::string text_b((std::istreambuf_iterator<char>(b)), {});
  CHECK(text_a == text_b);

  // identical seed, identical bytes
  driver::RunTrace again = driver::run_am(fx.prepared, s0, cfg);
  io::Table table2 = io::trace_table(again, "am", fx.loaded.hash, fx.loaded.canonical);
  io::write_csv(table2, path_b);
  std::ifstream b2(path_b);
  std::string text_c((std::istreambuf_iterator<char>(b2)), {});
  CHECK(text_a == text_c);
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("min-eig baseline on the clutter-free covariance") {
  Fixture fx;
  driver::MinEigBaseline baseline =
      driver::min_eig_baseline(fx.prepared, fx.loaded.algo.power, fx.loaded.algo.kappa);
  CHECK(baseline.s.squaredNorm() == doctest::Approx(fx.loaded.algo.power).epsilon(1e-10));
  CHECK(baseline.objective > 0.0);
  cxd response =
      (baseline.w.adjoint() * (fx.prepared.steering.g * baseline.s)).value();
  CHECK(std::abs(response - fx.loaded.algo.kappa) < 1e-8);
}
