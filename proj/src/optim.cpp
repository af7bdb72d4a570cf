#include "stapwave/optim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <limits>
#include <cmath>
#include <sstream>

namespace stapwave::optim {

namespace {

constexpr cxd kJ{0.0, 1.0};

/// LLT solve with one step of iterative refinement; keeps Capon residuals
/// near machine precision on ill-conditioned covariances.
class HermitianSolver {
 public:
  HermitianSolver(const MatC& m, const char* context) : m_(m), llt_(m) {
    if (llt_.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<MatC> eig(m, Eigen::EigenvaluesOnly);
      double min_eig = eig.eigenvalues().minCoeff();
      std::ostringstream msg;
      msg << context << ": matrix not positive definite (min eigenvalue " << min_eig << ")";
      throw SolverError(msg.str(), min_eig);
    }
  }

  VecC solve(const VecC& b) const {
    VecC x = llt_.solve(b);
    x += llt_.solve(b - m_ * x);
    return x;
  }

 private:
  const MatC& m_;
  Eigen::LLT<MatC> llt_;
};

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

/// Bisection for a sign change of fn over [0, hi_seed·2^k]; fn must be
/// positive at 0 and negative for large arguments.
template <typename Fn>
double bisect_decreasing(Fn&& fn, double hi_seed, double tol, int max_iter, int* iterations) {
  double lo = 0.0;
  double hi = std::max(hi_seed, 1e-30);
  int it = 0;
  while (fn(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++it > 400) throw SolverError("dual root: bracketing failed (no sign change)");
  }
  for (; it < max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (fn(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= tol * std::max(1.0, hi)) break;
  }
  if (iterations) *iterations = it;
  return 0.5 * (lo + hi);
}

}  // namespace

void AlgoConfig::validate() const {
  if (kappa <= 0.0) throw ModelError("algo: kappa must be > 0");
  if (power <= 0.0) throw ModelError("algo: power must be > 0");
  if (rho <= 0.0) throw ModelError("algo: rho must be > 0");
  if (alpha < 0.0 || beta < 0.0) throw ModelError("algo: alpha/beta must be >= 0");
  if (tol_obj <= 0.0 || tol_constraint <= 0.0 || tol_root <= 0.0 || tol_step <= 0.0)
    throw ModelError("algo: tolerances must be > 0");
  if (max_iter < 1 || pam_iters < 1) throw ModelError("algo: iteration caps must be >= 1");
}

int SpectralReport::rank_at(double relative_threshold) const {
  double cut = relative_threshold * std::max(std::abs(max_eigenvalue), 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    if (std::abs(eigenvalues(i)) > cut) ++rank;
  return rank;
}

VecC mvdr_filter(const MatC& r_u, const VecC& g, double kappa) {
  if (g.norm() == 0.0) throw SolverError("mvdr_filter: zero steering vector");
  HermitianSolver solver(r_u, "mvdr_filter");
  VecC t = solver.solve(g);
  double denom = (g.adjoint() * t).value().real();
  if (!(denom > 0.0)) throw SolverError("mvdr_filter: g^H R^-1 g not positive", denom);
  return (kappa / denom) * t;
}

Gamma2Function::Gamma2Function(const MatC& z_sum, const VecC& u, double kappa, double power)
    : kappa_(kappa), power_cap_(power) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(z_sum);
  if (eig.info() != Eigen::Success) throw SolverError("gamma2: eigendecomposition failed");
  d_ = eig.eigenvalues();
  basis_ = eig.eigenvectors();
  z_ = basis_.adjoint() * u;
  a_ = z_.cwiseAbs2();
  // reject only a numerically exact null space; a deep-but-nonzero minimum
  // eigenvalue legitimately occurs once the filter nulls the current clutter,
  // and it is handled by the power budget (violation stop or gamma > 0)
  double d_max = d_.maxCoeff();
  double floor = static_cast<double>(d_.size()) *
                 std::numeric_limits<double>::epsilon() * std::max(d_max, 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < d_.size(); ++i)
    if (d_(i) > floor) ++rank;
  if (rank < d_.size()) {
    std::ostringstream msg;
    msg << "waveform design: sum of Z_q matrices is singular, rank deficit "
        << (d_.size() - rank) << " of " << d_.size()
        << " (need at least N distinct clutter contributions)";
    throw SolverError(msg.str(), d_.minCoeff());
  }
}

Gamma2Function::Gamma2Function(VecR d, VecC z, double kappa, double power)
    : d_(std::move(d)), z_(std::move(z)), kappa_(kappa), power_cap_(power) {
  a_ = z_.cwiseAbs2();
}

double Gamma2Function::f(double gamma) const {
  double quad = 0.0;   // u^H F^-2 u
  double lin = 0.0;    // u^H F^-1 u
  for (Eigen::Index i = 0; i < d_.size(); ++i) {
    double den = d_(i) + gamma;
    lin += a_(i) / den;
    quad += a_(i) / (den * den);
  }
  return kappa_ * kappa_ * quad - power_cap_ * lin * lin;
}

double Gamma2Function::waveform_power(double gamma) const {
  double quad = 0.0;
  double lin = 0.0;
  for (Eigen::Index i = 0; i < d_.size(); ++i) {
    double den = d_(i) + gamma;
    lin += a_(i) / den;
    quad += a_(i) / (den * den);
  }
  return kappa_ * kappa_ * quad / (lin * lin);
}

VecC Gamma2Function::waveform(double gamma) const {
  double lin = 0.0;
  for (Eigen::Index i = 0; i < d_.size(); ++i) lin += a_(i) / (d_(i) + gamma);
  VecC s_tilde(d_.size());
  for (Eigen::Index i = 0; i < d_.size(); ++i)
    s_tilde(i) = kappa_ * z_(i) / ((d_(i) + gamma) * lin);
  if (basis_.size() == 0) return s_tilde;
  return basis_ * s_tilde;
}

double Gamma2Function::limit_power() const {
  double norm2 = a_.sum();
  return kappa_ * kappa_ / norm2;
}

VecC waveform_closed_form(const VecC& w, const MatC& g, const MatC& z_sum, double kappa) {
  VecC u = g.adjoint() * w;
  Gamma2Function fn(z_sum, u, kappa, 0.0);
  return fn.waveform(0.0);
}

WaveformSolution dual_gamma2(const VecC& w, const MatC& g, const MatC& z_sum, double kappa,
                             double power, double tol_root, int max_iter) {
  VecC u = g.adjoint() * w;
  Gamma2Function fn(z_sum, u, kappa, power);
  WaveformSolution out;
  if (fn.waveform_power(0.0) <= power) {
    out.s = fn.waveform(0.0);
    out.dual = {0.0, 0.0, DualSolveReport::Branch::AnalyticZero, 0};
    return out;
  }
  if (fn.limit_power() >= power) {
    std::ostringstream msg;
    msg << "dual_gamma2: power budget " << power << " below the Capon-feasible minimum "
        << fn.limit_power();
    throw SolverError(msg.str(), fn.limit_power());
  }
  int iterations = 0;
  double gamma = bisect_decreasing(
      [&](double gm) { return fn.waveform_power(gm) - power; },
      std::max(fn.max_eigenvalue(), 1.0), tol_root, max_iter, &iterations);
  out.s = fn.waveform(gamma);
  out.dual = {gamma, std::abs(fn.waveform_power(gamma) - power) / power,
              DualSolveReport::Branch::Bisection, iterations};
  return out;
}

VecC min_eig_waveform(const MatC& r_u, const VecC& v, const VecC& a, double power,
                      MinEigReport* report) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(r_u);
  if (eig.info() != Eigen::Success)
    throw SolverError("min_eig_waveform: eigendecomposition failed");
  const VecR& lam = eig.eigenvalues();  // ascending
  VecC mu = eig.eigenvectors().col(0);

  MinEigReport rep;
  rep.min_eigenvalue = lam(0);
  rep.spectral_gap = lam.size() > 1 ? lam(1) - lam(0) : 0.0;
  rep.degenerate = rep.spectral_gap < 1e-8 * std::abs(lam(lam.size() - 1));

  const int m = static_cast<int>(a.size());
  const int l = static_cast<int>(v.size());
  const int n = static_cast<int>(mu.size()) / (m * l);
  const double denom = static_cast<double>(l) * static_cast<double>(m);  // ||v ⊗ a||²

  // decoupled least squares: s_n = (v ⊗ a)^H mu_n / ||v ⊗ a||²
  VecC s(n);
  for (int ni = 0; ni < n; ++ni) {
    cxd acc = 0.0;
    for (int li = 0; li < l; ++li)
      for (int mi = 0; mi < m; ++mi)
        acc += std::conj(v(li) * a(mi)) * mu((li * n + ni) * m + mi);
    s(ni) = acc / denom;
  }

  // cross-check against the normal-equation route G^H mu / (LM)
  VecC s_full(n);
  {
    VecC accum = VecC::Zero(n);
    for (int li = 0; li < l; ++li)
      for (int ni = 0; ni < n; ++ni)
        for (int mi = 0; mi < m; ++mi)
          accum(ni) += std::conj(v(li)) * std::conj(a(mi)) * mu((li * n + ni) * m + mi);
    s_full = accum / denom;
  }
  if ((s - s_full).norm() > 1e-10 * std::max(1.0, s.norm()))
    throw SolverError("min_eig_waveform: decoupled and full LS routes disagree");

  if (s.norm() == 0.0) throw SolverError("min_eig_waveform: zero projection");
  s *= std::sqrt(power) / s.norm();
  s = normalize_global_phase(s);
  if (report) *report = rep;
  return s;
}

VecC proximal_filter(const MatC& r_u, const VecC& w_prev, double alpha, const VecC& g,
                     double kappa) {
  const Eigen::Index dim = r_u.rows();
  MatC shifted = r_u + (0.5 * alpha) * MatC::Identity(dim, dim);
  HermitianSolver solver(shifted, "proximal_filter");
  VecC t_g = solver.solve(g);
  double denom = (g.adjoint() * t_g).value().real();
  if (!(denom > 0.0)) throw SolverError("proximal_filter: degenerate constraint scale", denom);
  if (alpha == 0.0) return (kappa / denom) * t_g;
  VecC t_w = solver.solve(w_prev);
  cxd c = (w_prev.adjoint() * t_g).value();
  cxd gamma4 = (alpha * c - 2.0 * kappa) / denom;
  return (0.5 * alpha) * t_w - (0.5 * std::conj(gamma4)) * t_g;
}

Gamma6Function::Gamma6Function(const MatC& z_sum, const VecC& u, const VecC& s_prev,
                               double beta, double kappa, double power)
    : beta_(beta), kappa_(kappa), power_cap_(power) {
  const Eigen::Index n = z_sum.rows();
  MatC shifted = z_sum + (0.5 * beta) * MatC::Identity(n, n);
  Eigen::SelfAdjointEigenSolver<MatC> eig(shifted);
  if (eig.info() != Eigen::Success) throw SolverError("gamma6: eigendecomposition failed");
  d_ = eig.eigenvalues();
  basis_ = eig.eigenvectors();
  if (d_.minCoeff() <= 1e-14 * std::max(d_.maxCoeff(), 1e-300))
    throw SolverError("proximal_waveform: Z + beta/2 I numerically singular (beta too small)",
                      d_.minCoeff());
  u_tilde_ = basis_.adjoint() * u;
  p_tilde_ = basis_.adjoint() * s_prev;
}

VecC Gamma6Function::waveform(double gamma) const {
  const Eigen::Index n = d_.size();
  double den_quad = 0.0;  // u^H F^-1 u
  cxd cross = 0.0;        // u^H F^-1 s_prev
  for (Eigen::Index i = 0; i < n; ++i) {
    double den = d_(i) + gamma;
    den_quad += std::norm(u_tilde_(i)) / den;
    cross += std::conj(u_tilde_(i)) * p_tilde_(i) / den;
  }
  cxd gamma5_half = (0.5 * beta_ * cross - kappa_) / den_quad;
  VecC s_tilde(n);
  for (Eigen::Index i = 0; i < n; ++i)
    s_tilde(i) = (0.5 * beta_ * p_tilde_(i) - gamma5_half * u_tilde_(i)) / (d_(i) + gamma);
  return basis_ * s_tilde;
}

double Gamma6Function::waveform_power(double gamma) const {
  const Eigen::Index n = d_.size();
  double den_quad = 0.0;
  cxd cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double den = d_(i) + gamma;
    den_quad += std::norm(u_tilde_(i)) / den;
    cross += std::conj(u_tilde_(i)) * p_tilde_(i) / den;
  }
  cxd gamma5_half = (0.5 * beta_ * cross - kappa_) / den_quad;
  double pw = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    pw += std::norm((0.5 * beta_ * p_tilde_(i) - gamma5_half * u_tilde_(i)) / (d_(i) + gamma));
  return pw;
}

double Gamma6Function::r(double gamma) const {
  double den_quad = 0.0;
  for (Eigen::Index i = 0; i < d_.size(); ++i)
    den_quad += std::norm(u_tilde_(i)) / (d_(i) + gamma);
  return den_quad * den_quad * (power_cap_ - waveform_power(gamma));
}

double Gamma6Function::limit_power() const {
  double norm2 = u_tilde_.cwiseAbs2().sum();
  return kappa_ * kappa_ / norm2;
}

WaveformSolution proximal_waveform(const VecC& w, const VecC& s_prev, double beta,
                                   const MatC& z_sum, const MatC& g, double kappa, double power,
                                   double tol_root, int max_iter) {
  VecC u = g.adjoint() * w;
  Gamma6Function fn(z_sum, u, s_prev, beta, kappa, power);
  WaveformSolution out;
  if (fn.waveform_power(0.0) <= power) {
    out.s = fn.waveform(0.0);
    out.dual = {0.0, 0.0, DualSolveReport::Branch::AnalyticZero, 0};
    return out;
  }
  if (fn.limit_power() >= power)
    throw SolverError("proximal_waveform: power budget below the Capon-feasible minimum",
                      fn.limit_power());
  int iterations = 0;
  double gamma = bisect_decreasing(
      [&](double gm) { return fn.waveform_power(gm) - power; },
      std::max(fn.max_eigenvalue(), 1.0), tol_root, max_iter, &iterations);
  out.s = fn.waveform(gamma);
  out.dual = {gamma, std::abs(fn.waveform_power(gamma) - power) / power,
              DualSolveReport::Branch::Bisection, iterations};
  return out;
}

CmResult const_mod_waveform(const VecC& w, const MatC& g, const MatC& z_sum, double kappa,
                            const VecC& s_init, int max_sweeps, double tol) {
  const Eigen::Index n = z_sum.rows();
  VecC u = g.adjoint() * w;

  // iterate at unit modulus; scale comes back at the end via the Capon rescale
  VecR phase(n);
  for (Eigen::Index i = 0; i < n; ++i)
    phase(i) = std::abs(s_init(i)) > 0.0 ? std::arg(s_init(i)) : 0.0;
  VecC s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = std::exp(kJ * phase(i));

  double z_scale = std::max(z_sum.cwiseAbs().maxCoeff(), 1e-300);
  double residual = 0.0;
  int sweep = 0;
  bool converged = false;
  for (; sweep < max_sweeps; ++sweep) {
    double max_move = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cxd c = (z_sum.row(i) * s).value() - z_sum(i, i) * s(i);
      if (std::abs(c) <= 1e-300) continue;  // any phase is stationary here
      double target = std::arg(-c);
      double move = 0.5 * wrap_angle(target - phase(i));
      phase(i) = wrap_angle(phase(i) + move);
      s(i) = std::exp(kJ * phase(i));
      max_move = std::max(max_move, std::abs(move));
    }
    residual = (z_sum * s).cwiseProduct(s.conjugate()).imag().cwiseAbs().maxCoeff();
    if (residual <= tol * z_scale || max_move < 1e-15) {
      converged = true;
      ++sweep;
      break;
    }
  }

  cxd zeta = (u.adjoint() * s).value();
  if (std::abs(zeta) <= 1e-300)
    throw SolverError("const_mod_waveform: steering response vanished, cannot meet constraint");
  double rho_out = kappa / std::abs(zeta);
  cxd rotation = std::conj(zeta) / std::abs(zeta);

  CmResult out;
  out.s = rho_out * rotation * s;
  out.modulus = rho_out;
  out.kkt_residual =
      (z_sum * out.s).cwiseProduct(out.s.conjugate()).imag().cwiseAbs().maxCoeff();
  out.sweeps = sweep;
  out.converged = converged;
  return out;
}

MatR real_embedding(const MatC& b) {
  const Eigen::Index n = b.rows();
  MatR e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = b.real();
  e.topRightCorner(n, n) = -b.imag();
  e.bottomLeftCorner(n, n) = b.imag();
  e.bottomRightCorner(n, n) = b.real();
  return e;
}

double lipschitz_constant(const MatC& b) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(b, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double max_eigenvalue_estimate(const MatC& b, int iters, double tol) {
  const Eigen::Index n = b.rows();
  VecC x = VecC::Constant(n, cxd(1.0, 0.0));
  for (Eigen::Index i = 0; i < n; ++i) x(i) += cxd(0.0, 1e-3 * static_cast<double>(i % 7));
  x /= x.norm();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    VecC y = b * x;
    double next = (x.adjoint() * y).value().real();
    double err = std::abs(next - lam);
    lam = next;
    double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 2 && err <= tol * std::max(1.0, std::abs(lam))) break;
  }
  return lam;
}

std::pair<double, double> rank_one_diff_eigs(const VecC& x, const VecC& y) {
  double nx = x.squaredNorm();
  double ny = y.squaredNorm();
  double cross = std::norm((x.adjoint() * y).value());
  double t = nx - ny;
  double disc = std::max(0.25 * t * t + (nx * ny - cross), 0.0);
  double root = std::sqrt(disc);
  return {0.5 * t + root, 0.5 * t - root};
}

std::pair<double, double> trace_product_bounds(const MatC& a, const MatC& b) {
  Eigen::SelfAdjointEigenSolver<MatC> ea(a, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<MatC> eb(b, Eigen::EigenvaluesOnly);
  const Eigen::Index n = a.rows();
  double lower = 0.0;
  double upper = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    // eigenvalues ascend: pairing i with i is sorted-same, i with n-1-i opposed
    upper += ea.eigenvalues()(i) * eb.eigenvalues()(i);
    lower += ea.eigenvalues()(i) * eb.eigenvalues()(n - 1 - i);
  }
  return {lower, upper};
}

SpectralReport spectral_report(const MatC& hermitian) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(hermitian, Eigen::EigenvaluesOnly);
  SpectralReport rep;
  rep.eigenvalues = eig.eigenvalues().reverse();
  rep.min_eigenvalue = eig.eigenvalues().minCoeff();
  rep.max_eigenvalue = eig.eigenvalues().maxCoeff();
  return rep;
}

VecC normalize_global_phase(const VecC& v) {
  double floor = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > floor) {
      cxd rot = std::conj(v(i)) / std::abs(v(i));
      return rot * v;
    }
  }
  return v;
}

}  // namespace stapwave::optim
