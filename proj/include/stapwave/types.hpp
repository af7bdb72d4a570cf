#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace stapwave {

using cxd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using MatR = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// Scene/configuration is physically or structurally invalid.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver could not produce a usable result (singularity, failed bracket, ...).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, double diagnostic = 0.0)
      : std::runtime_error(what), diagnostic_(diagnostic) {}
  /// Numeric context for the failure (e.g. offending minimum eigenvalue).
  double diagnostic() const { return diagnostic_; }

 private:
  double diagnostic_;
};

/// Dimensions of the space-time snapshot: M elements, L pulses, N fast-time samples.
struct Dims {
  int num_elements = 0;   // M
  int num_pulses = 0;     // L
  int num_samples = 0;    // N
  int snapshot() const { return num_elements * num_pulses * num_samples; }
};

inline double hermitian_residual(const MatC& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Kronecker product of two complex vectors, x ⊗ y.
inline VecC kron(const VecC& x, const VecC& y) {
  VecC out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out.segment(i * y.size(), y.size()) = x(i) * y;
  return out;
}

}  // namespace stapwave
