#include "stapwave/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace stapwave::cov {

double CorrelationLaw::operator()(int lag) const {
  int n = std::abs(lag);
  switch (kind) {
    case Kind::ExponentialAbs:
      return std::exp(-parameter * n);
    case Kind::Geometric:
      return std::pow(parameter, n);
    case Kind::CustomSequence:
      return n < static_cast<int>(sequence.size()) ? sequence[n] : 0.0;
    case Kind::Delta:
      return n == 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

ClutterPatch ClutterPatch::nominal(double azimuth, double elevation, double doppler_hz,
                                   const MatC& correlation) {
  ClutterPatch patch;
  patch.azimuth = azimuth;
  patch.elevation = elevation;
  patch.doppler_hz = doppler_hz;
  patch.num_scatterers = static_cast<int>(correlation.rows());
  patch.scatterer_correlation = correlation;
  patch.scatterer_azimuth.assign(patch.num_scatterers, azimuth);
  patch.scatterer_elevation.assign(patch.num_scatterers, elevation);
  patch.scatterer_doppler.assign(patch.num_scatterers, doppler_hz);
  return patch;
}

ClutterPatch ClutterPatch::with_azimuth_spread(double azimuth, double elevation,
                                               double doppler_hz, const MatC& correlation,
                                               double spread, double doppler_per_hz_rad) {
  ClutterPatch patch = nominal(azimuth, elevation, doppler_hz, correlation);
  const int p = patch.num_scatterers;
  if (p > 1 && spread > 0.0) {
    for (int i = 0; i < p; ++i) {
      double offset = spread * (static_cast<double>(i) / (p - 1) - 0.5);
      patch.scatterer_azimuth[i] = azimuth + offset;
      patch.scatterer_doppler[i] = doppler_hz + doppler_per_hz_rad * offset;
    }
  }
  return patch;
}

void ClutterPatch::validate() const {
  if (num_scatterers < 1) throw ModelError("clutter patch: num_scatterers must be >= 1");
  if (scatterer_correlation.rows() != num_scatterers ||
      scatterer_correlation.cols() != num_scatterers)
    throw ModelError("clutter patch: correlation matrix size mismatch");
  if (static_cast<int>(scatterer_azimuth.size()) != num_scatterers ||
      static_cast<int>(scatterer_elevation.size()) != num_scatterers ||
      static_cast<int>(scatterer_doppler.size()) != num_scatterers)
    throw ModelError("clutter patch: per-scatterer arrays must have length P");
  validate_covariance(scatterer_correlation, "clutter patch correlation");
}

MatC ClutterBasis::b_of_s(const VecC& s) const {
  const int p = num_scatterers();
  const int n = num_samples;
  MatC b(breve.rows(), p);
  for (int i = 0; i < p; ++i) b.col(i) = breve.middleCols(i * n, n) * s;
  return b;
}

MatC toeplitz_covariance(const CorrelationLaw& law, int size) {
  if (size < 1) throw ModelError("toeplitz_covariance: size must be >= 1");
  MatC r(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) r(i, j) = law(i - j);
  validate_covariance(r, "toeplitz covariance");
  return r;
}

void validate_covariance(const MatC& r, const std::string& name, double tol) {
  double herm = hermitian_residual(r);
  double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if (herm > 1e-12 * scale) {
    std::ostringstream msg;
    msg << name << ": not Hermitian, residual " << herm;
    throw ModelError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<MatC> eig(r, Eigen::EigenvaluesOnly);
  double min_eig = eig.eigenvalues().minCoeff();
  double max_eig = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  if (min_eig < -tol * std::max(1.0, max_eig)) {
    std::ostringstream msg;
    msg << name << ": not positive semidefinite, min eigenvalue " << min_eig;
    throw ModelError(msg.str());
  }
}

MatC interference_covariance(const std::vector<InterferenceSource>& sources, const Dims& dims,
                             const scene::ArrayGeometry& geom) {
  const int nml = dims.snapshot();
  const int nl = dims.num_samples * dims.num_pulses;
  const int m = dims.num_elements;
  MatC r = MatC::Zero(nml, nml);
  for (const auto& src : sources) {
    VecC a = scene::spatial_steering(src.azimuth, src.elevation, geom);
    MatC outer = a * a.adjoint();
    MatC r_alpha = src.power * toeplitz_covariance(src.law, nl);
    // (I_NL ⊗ a) R_alpha (I_NL ⊗ a)^H accumulated blockwise
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) r.block(i * m, j * m, m, m) += r_alpha(i, j) * outer;
  }
  return r;
}

ClutterBasis clutter_basis(const ClutterPatch& patch, const scene::ArrayGeometry& geom,
                           const scene::PulseTrain& pulses) {
  patch.validate();
  const int p = patch.num_scatterers;
  const int n = pulses.num_samples;
  const int nml = geom.num_elements * pulses.num_pulses * n;
  ClutterBasis basis;
  basis.correlation = patch.scatterer_correlation;
  basis.num_samples = n;
  {
    Eigen::SelfAdjointEigenSolver<MatC> eig(basis.correlation);
    VecR lam = eig.eigenvalues().cwiseMax(0.0);  // clamp PSD rounding residue
    basis.corr_half = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  }
  basis.breve.resize(nml, p * n);
  for (int i = 0; i < p; ++i) {
    VecC a = scene::spatial_steering(patch.scatterer_azimuth[i], patch.scatterer_elevation[i],
                                     geom);
    VecC v = scene::temporal_steering(patch.scatterer_doppler[i], pulses);
    MatC a_pq = scene::replication_block(a, n);
    const Eigen::Index rows = a_pq.rows();
    for (Eigen::Index l = 0; l < v.size(); ++l)
      basis.breve.block(l * rows, i * n, rows, n) = v(l) * a_pq;
  }
  return basis;
}

MatC clutter_covariance(const VecC& s, const CovarianceModel& model) {
  const int nml = model.dims.snapshot();
  int total = 0;
  for (const auto& basis : model.clutter) total += basis.num_scatterers();
  if (total == 0) return MatC::Zero(nml, nml);
  // stack B_q(s) R_q^{1/2} over patches and apply one Hermitian rank update
  MatC stacked(nml, total);
  int col = 0;
  for (const auto& basis : model.clutter) {
    const int p = basis.num_scatterers();
    stacked.middleCols(col, p).noalias() = basis.b_of_s(s) * basis.corr_half;
    col += p;
  }
  MatC r = MatC::Zero(nml, nml);
  r.selfadjointView<Eigen::Lower>().rankUpdate(stacked);
  return r.selfadjointView<Eigen::Lower>();
}

std::vector<MatC> zq_matrices(const VecC& w, const CovarianceModel& model) {
  std::vector<MatC> zq;
  zq.reserve(model.clutter.size());
  const int n = model.dims.num_samples;
  for (const auto& basis : model.clutter) {
    const int p = basis.num_scatterers();
    VecC x = basis.breve.adjoint() * w;  // PN
    MatC z = MatC::Zero(n, n);
    for (int pi = 0; pi < p; ++pi)
      for (int pj = 0; pj < p; ++pj)
        z.noalias() += basis.correlation(pi, pj) * (x.segment(pj * n, n) *
                                                    x.segment(pi * n, n).adjoint());
    // symmetrize away rounding
    z = ((z + z.adjoint()) * 0.5).eval();
    zq.push_back(std::move(z));
  }
  return zq;
}

MatC zq_sum(const VecC& w, const CovarianceModel& model) {
  const int n = model.dims.num_samples;
  MatC sum = MatC::Zero(n, n);
  for (const auto& z : zq_matrices(w, model)) sum += z;
  return sum;
}

MatC total_covariance(const VecC& s, const CovarianceModel& model) {
  return model.r_noise + model.r_interference + clutter_covariance(s, model);
}

MatC sample_covariance(const std::vector<VecC>& snapshots, double loading) {
  if (snapshots.empty()) throw ModelError("sample_covariance: no snapshots");
  const Eigen::Index dim = snapshots.front().size();
  MatC r = MatC::Zero(dim, dim);
  for (const auto& y : snapshots) r.noalias() += y * y.adjoint();
  r /= static_cast<double>(snapshots.size());
  r += loading * MatC::Identity(dim, dim);
  return r;
}

MatR selection_matrix(int num_scatterers, int num_samples) {
  const int p = num_scatterers;
  const int n = num_samples;
  MatR h = MatR::Zero(p * p * n, n);
  // column k of I_P ⊗ s is e_k ⊗ s; column-major vec stacks those columns
  for (int k = 0; k < p; ++k)
    for (int i = 0; i < n; ++i) h(k * p * n + k * n + i, i) = 1.0;
  return h;
}

MatC rank_limited(const MatC& r, int rank, double loading) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(r);
  const Eigen::Index dim = r.rows();
  MatC out = loading * MatC::Identity(dim, dim);
  // eigenvalues ascend; keep the top `rank`
  for (Eigen::Index i = dim - 1; i >= std::max<Eigen::Index>(0, dim - rank); --i)
    out.noalias() += eig.eigenvalues()(i) * (eig.eigenvectors().col(i) *
                                             eig.eigenvectors().col(i).adjoint());
  return out;
}

}  // namespace stapwave::cov
