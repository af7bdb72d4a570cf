#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "stapwave/covariance.hpp"
#include "stapwave/scenario_io.hpp"
#include "support/oracles.hpp"

using namespace stapwave;
using cov::CorrelationLaw;

namespace {

CorrelationLaw exp_law(double param) {
  return {CorrelationLaw::Kind::ExponentialAbs, param, {}};
}
CorrelationLaw geo_law(double param) {
  return {CorrelationLaw::Kind::Geometric, param, {}};
}

const char* kDeskScenario = R"json({
  "array": {"M": 3, "d_over_lambda": 0.5, "f_o": 1.0e9},
  "pulses": {"L": 4, "N": 3, "B": 5.0e7, "T_p": 1.0e-3},
  "target": {"theta": 0.7, "phi": 0.7853981633974483, "normalized_doppler": 0.31},
  "noise": {"law": "exponential-abs", "param": 0.005},
  "interferers": [
    {"theta": 0.3941, "phi": 0.3, "law": "geometric", "param": 0.2},
    {"theta": -0.4941, "phi": 0.3, "law": "geometric", "param": 0.2}
  ],
  "clutter": {"patches": [
    {"theta": -0.35, "phi": 0.78, "normalized_doppler": -0.12, "num_scatterers": 4,
     "law": "exponential-abs", "param": 0.2, "azimuth_spread": 0.3, "ridge_beta": 1.0},
    {"theta": 0.25, "phi": 0.78, "normalized_doppler": 0.087, "num_scatterers": 4,
     "law": "exponential-abs", "param": 0.1, "azimuth_spread": 0.3, "ridge_beta": 1.0},
    {"theta": 0.9, "phi": 0.78, "normalized_doppler": 0.27, "num_scatterers": 4,
     "law": "exponential-abs", "param": 0.15, "azimuth_spread": 0.3, "ridge_beta": 1.0}
  ]},
  "algo": {"P_o": 10.0, "seed": 3}
})json";

PreparedScenario desk_prepared() {
  return prepare(io::parse_scenario_text(kDeskScenario).scenario);
}

}  // namespace

TEST_CASE("toeplitz covariance") {
  MatC r = cov::toeplitz_covariance(exp_law(0.005), 4);
  for (int i = 0; i < 4; ++i) CHECK(r(i, i) == cxd(1.0, 0.0));
  CHECK(r(0, 1).real() == doctest::Approx(std::exp(-0.005)).epsilon(1e-15));
  CHECK(r(3, 0).real() == doctest::Approx(std::exp(-0.015)).epsilon(1e-15));

  MatC eye = cov::toeplitz_covariance({CorrelationLaw::Kind::Delta, 0.0, {}}, 5);
  CHECK((eye - MatC::Identity(5, 5)).norm() == 0.0);

  MatC geo = cov::toeplitz_covariance(geo_law(0.2), 64);
  Eigen::SelfAdjointEigenSolver<MatC> eig(geo, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("non-PSD correlation law rejected with the offending eigenvalue") {
  CorrelationLaw bad{CorrelationLaw::Kind::CustomSequence, 0.0, {1.0, 0.99, 0.2}};
  try {
    cov::toeplitz_covariance(bad, 3);
    FAIL("expected ModelError");
  } catch (const ModelError& err) {
    CHECK(std::string(err.what()).find("positive semidefinite") != std::string::npos);
    CHECK(std::string(err.what()).find("min eigenvalue") != std::string::npos);
  }
}

TEST_CASE("interference covariance") {
  Dims dims{3, 2, 2};  // M=3, L=2, N=2 -> NL=4, NML=12
  scene::ArrayGeometry geom{3, 0.5 * kSpeedOfLight / 1e9, 1e9};

  SUBCASE("no sources gives zero") {
    MatC r = cov::interference_covariance({}, dims, geom);
    CHECK(r.norm() == 0.0);
  }

  SUBCASE("single white source has rank NL") {
    cov::InterferenceSource src{0.3, 0.4, {CorrelationLaw::Kind::Delta, 0.0, {}}, 1.0};
    MatC r = cov::interference_covariance({src}, dims, geom);
    Eigen::JacobiSVD<MatC> svd(r);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-10 * svd.singularValues()(0)) ++rank;
    CHECK(rank == 4);
    // equals I_NL ⊗ a a^H for the white law
    VecC a = scene::spatial_steering(0.3, 0.4, geom);
    MatC expected = oracle::kron(MatC::Identity(4, 4), MatC(a * a.adjoint()));
    CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("two correlated sources match the Kronecker brute force") {
    std::vector<cov::InterferenceSource> sources = {
        {0.3941, 0.3, geo_law(0.2), 1.0}, {-0.4941, 0.3, geo_law(0.2), 1.0}};
    MatC r = cov::interference_covariance(sources, dims, geom);
    MatC expected = MatC::Zero(12, 12);
    for (const auto& src : sources) {
      VecC a = scene::spatial_steering(src.azimuth, src.elevation, geom);
      MatC r_alpha = cov::toeplitz_covariance(src.law, 4);
      expected += oracle::kron(r_alpha, MatC(a * a.adjoint()));
    }
    CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(hermitian_residual(r) < 1e-12 * r.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("clutter basis structure") {
  Rng rng(5);
  scene::ArrayGeometry geom{3, 0.5 * kSpeedOfLight / 1e9, 1e9};
  scene::PulseTrain pulses{4, 1e-3, 1e-7, 5e7, 3};

  SUBCASE("single scatterer column is the composite steering vector") {
    cov::ClutterPatch patch =
        cov::ClutterPatch::nominal(0.4, 0.7, 120.0, MatC::Identity(1, 1));
    cov::ClutterBasis basis = cov::clutter_basis(patch, geom, pulses);
    CHECK(basis.breve.rows() == 3 * 4 * 3);
    CHECK(basis.breve.cols() == 3);
    VecC s = rng.normal_complex_vector(3);
    VecC column = basis.b_of_s(s).col(0);
    VecC expected = scene::composite_steering(scene::temporal_steering(120.0, pulses), s,
                                              scene::spatial_steering(0.4, 0.7, geom));
    CHECK((column - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("spread scatterers stack their own composites") {
    MatC corr = cov::toeplitz_covariance(exp_law(0.2), 3);
    cov::ClutterPatch patch =
        cov::ClutterPatch::with_azimuth_spread(0.2, 0.7, 100.0, corr, 0.3, 50.0);
    cov::ClutterBasis basis = cov::clutter_basis(patch, geom, pulses);
    CHECK(basis.breve.cols() == 3 * 3);
    VecC s = rng.normal_complex_vector(3);
    MatC b = basis.b_of_s(s);
    for (int p = 0; p < 3; ++p) {
      VecC expected = scene::composite_steering(
          scene::temporal_steering(patch.scatterer_doppler[p], pulses), s,
          scene::spatial_steering(patch.scatterer_azimuth[p], patch.scatterer_elevation[p],
                                  geom));
      CHECK((b.col(p) - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("clutter covariance properties") {
  Rng rng(9);
  PreparedScenario sc = desk_prepared();
  const int n = sc.dims.num_samples;

  SUBCASE("zero waveform gives zero clutter") {
    CHECK(cov::clutter_covariance(VecC::Zero(n), sc.model).norm() == 0.0);
  }

  SUBCASE("quadratic homogeneity") {
    VecC s = rng.normal_complex_vector(n);
    cxd c(0.3, -1.1);
    MatC lhs = cov::clutter_covariance(VecC(c * s), sc.model);
    MatC rhs = std::norm(c) * cov::clutter_covariance(s, sc.model);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10 * rhs.cwiseAbs().maxCoeff());
  }

  SUBCASE("single unit scatterer is a rank-one outer product") {
    scene::ArrayGeometry geom{3, 0.5 * kSpeedOfLight / 1e9, 1e9};
    scene::PulseTrain pulses{4, 1e-3, 1e-7, 5e7, 3};
    cov::CovarianceModel tiny;
    tiny.dims = {3, 4, 3};
    tiny.r_noise = MatC::Identity(36, 36);
    tiny.r_interference = MatC::Zero(36, 36);
    tiny.clutter.push_back(cov::clutter_basis(
        cov::ClutterPatch::nominal(0.4, 0.7, 120.0, MatC::Identity(1, 1)), geom, pulses));
    VecC s = rng.normal_complex_vector(3);
    VecC c = tiny.clutter[0].b_of_s(s).col(0);
    MatC expected = c * c.adjoint();
    CHECK((cov::clutter_covariance(s, tiny) - expected).cwiseAbs().maxCoeff() <
          1e-12 * expected.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("Z_q matrices satisfy the defining quadratic identity") {
  Rng rng(13);
  PreparedScenario sc = desk_prepared();
  const int dim = sc.dims.snapshot();
  const int n = sc.dims.num_samples;

  SUBCASE("zero filter gives zero Z") {
    auto zq = cov::zq_matrices(VecC::Zero(dim), sc.model);
    for (const auto& z : zq) CHECK(z.norm() == 0.0);
  }

  SUBCASE("identity over random pairs, PSD, Hermitian") {
    for (int trial = 0; trial < 100; ++trial) {
      VecC w = rng.normal_complex_vector(dim);
      VecC s = rng.normal_complex_vector(n);
      auto zq = cov::zq_matrices(w, sc.model);
      double via_z = 0.0;
      for (const auto& z : zq) via_z += (s.adjoint() * z * s).value().real();
      double via_rc =
          (w.adjoint() * cov::clutter_covariance(s, sc.model) * w).value().real();
      CHECK(via_z == doctest::Approx(via_rc).epsilon(1e-10));
    }
    VecC w = rng.normal_complex_vector(dim);
    for (const auto& z : cov::zq_matrices(w, sc.model)) {
      CHECK(hermitian_residual(z) < 1e-12 * std::max(1.0, z.cwiseAbs().maxCoeff()));
      Eigen::SelfAdjointEigenSolver<MatC> eig(z, Eigen::EigenvaluesOnly);
      CHECK(eig.eigenvalues().minCoeff() > -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()));
    }
  }
}

TEST_CASE("selection matrix reproduces vec(I_P kron s)") {
  Rng rng(17);
  for (int p : {1, 2, 4}) {
    for (int n : {1, 3, 5}) {
      MatR h = cov::selection_matrix(p, n);
      CHECK(h.rows() == p * p * n);
      CHECK(h.cols() == n);
      CHECK(h.sum() == doctest::Approx(p * n));  // one 1 per defining row
      VecC s = rng.normal_complex_vector(n);
      MatC block = oracle::kron(MatC::Identity(p, p), MatC(s));
      VecC vec(Eigen::Map<VecC>(block.data(), block.size()));  // column-major vec
      VecC via_h = h.cast<cxd>() * s;
      CHECK((vec - via_h).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("total covariance") {
  Rng rng(21);
  PreparedScenario sc = desk_prepared();
  const int n = sc.dims.num_samples;

  MatC at_zero = cov::total_covariance(VecC::Zero(n), sc.model);
  CHECK((at_zero - sc.model.noise_plus_interference()).norm() == 0.0);

  VecC s = rng.normal_complex_vector(n);
  MatC r_u = cov::total_covariance(s, sc.model);
  CHECK(hermitian_residual(r_u) < 1e-12 * r_u.cwiseAbs().maxCoeff());

  Eigen::SelfAdjointEigenSolver<MatC> full(r_u, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatC> noise(sc.model.r_noise, Eigen::EigenvaluesOnly);
  CHECK(full.eigenvalues().minCoeff() >=
        noise.eigenvalues().minCoeff() - 1e-9 * full.eigenvalues().maxCoeff());
}

TEST_CASE("objective is convex in the waveform (chord witness)") {
  Rng rng(23);
  PreparedScenario sc = desk_prepared();
  const int dim = sc.dims.snapshot();
  const int n = sc.dims.num_samples;
  for (int trial = 0; trial < 50; ++trial) {
    VecC w = rng.normal_complex_vector(dim);
    MatC z = cov::zq_sum(w, sc.model);
    double base = (w.adjoint() * sc.model.noise_plus_interference() * w).value().real();
    VecC s1 = rng.normal_complex_vector(n);
    VecC s2 = rng.normal_complex_vector(n);
    double t = rng.uniform();
    auto value = [&](const VecC& s) { return base + (s.adjoint() * z * s).value().real(); };
    VecC mix = t * s1 + (1.0 - t) * s2;
    CHECK(value(mix) <= t * value(s1) + (1.0 - t) * value(s2) +
                            1e-9 * std::max(1.0, std::abs(value(mix))));
  }
}

TEST_CASE("sample covariance") {
  Rng rng(27);
  const int dim = 6;

  SUBCASE("empty snapshot list rejected") {
    CHECK_THROWS_AS(cov::sample_covariance({}, 0.0), ModelError);
  }

  SUBCASE("single snapshot outer product") {
    VecC y = rng.normal_complex_vector(dim);
    MatC r = cov::sample_covariance({y}, 0.0);
    CHECK((r - y * y.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::JacobiSVD<MatC> svd(r);
    CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
  }

  SUBCASE("loading bounds the minimum eigenvalue") {
    std::vector<VecC> snaps;
    for (int i = 0; i < 3; ++i) snaps.push_back(rng.normal_complex_vector(dim));
    MatC r = cov::sample_covariance(snaps, 100.0);
    Eigen::SelfAdjointEigenSolver<MatC> eig(r, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() >= 100.0 - 1e-9);
  }

  SUBCASE("Frobenius error decreases with sample support") {
    MatC truth = oracle::random_pd(rng, dim, 1.0);
    Eigen::LLT<MatC> llt(truth);
    MatC chol = llt.matrixL();
    double prev_err = 1e300;
    for (int support : {16, 128, 1024}) {
      std::vector<VecC> snaps;
      for (int k = 0; k < support; ++k)
        snaps.push_back(chol * rng.normal_complex_vector(dim));
      double err = (cov::sample_covariance(snaps, 0.0) - truth).norm() / truth.norm();
      CHECK(err < prev_err);
      prev_err = err;
    }
  }
}

TEST_CASE("rank limiting truncates and loads") {
  Rng rng(31);
  MatC r = oracle::random_psd(rng, 8);
  MatC limited = cov::rank_limited(r, 3, 0.5);
  Eigen::SelfAdjointEigenSolver<MatC> eig(limited, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(0.5).epsilon(1e-10));
  int above = 0;
  for (Eigen::Index i = 0; i < 8; ++i)
    if (eig.eigenvalues()(i) > 0.5 + 1e-9) ++above;
  CHECK(above == 3);
}
