#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace opderiv {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr const char* kSchemaTag = "opderiv/1";
inline constexpr const char* kVersion = "0.1.0";

/// Input that violates a documented precondition or file schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to meet its contract (non-convergence, overflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// Entrywise Hermiticity defect relative to the largest entry.
inline double hermiticity_defect(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  const double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  return max_abs(a - a.adjoint()) / scale;
}

inline bool nearly_hermitian(const Matrix& a, double tol = 1e-12) {
  return hermiticity_defect(a) <= tol;
}

inline bool nearly_skew_hermitian(const Matrix& a, double tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  if (scale == 0.0) return true;
  return max_abs(a + a.adjoint()) / scale <= tol;
}

}  // namespace opderiv
