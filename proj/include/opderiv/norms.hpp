#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "opderiv/types.hpp"

namespace opderiv {

struct NormOptions {
  double rel_tol = 1e-9;     // stop when the extremal Ritz value stabilizes
  int max_matvecs = 10000;   // hard cap on operator applications
  Index dense_max_dim = 512; // exact dense solve at or below this dimension
};

/// Matrix-free linear map for norm estimation of operators too large to
/// materialize (y and y* applications).
struct LinearMap {
  Index rows = 0;
  Index cols = 0;
  std::function<void(const Vector&, Vector&)> apply;          // w = A v
  std::function<void(const Vector&, Vector&)> apply_adjoint;  // u = A* w
};

namespace detail {

/// Largest |eigenvalue| of a Hermitian operator by Lanczos with full
/// reorthogonalization.  Start vector is the normalized all-ones vector, so
/// runs are deterministic.  `psd` marks operators known to be positive
/// semidefinite (A*A), where the largest Ritz value is the answer directly.
inline double lanczos_extremal(const std::function<void(const Vector&, Vector&)>& apply,
                               Index n, const NormOptions& opt, int matvec_budget,
                               bool psd) {
  if (n == 0) return 0.0;
  const int max_steps = static_cast<int>(std::min<Index>(n, std::min(matvec_budget, 400)));
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(max_steps));
  std::vector<double> alpha, beta;  // tridiagonal entries
  Vector q = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  basis.push_back(q);
  Vector w(n);
  double prev = -1.0;
  int stable = 0;

  auto extremal_of_tridiag = [&]() {
    const Index k = static_cast<Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) {
        t(i, i + 1) = beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return psd ? std::max(ev(k - 1), 0.0) : std::max(std::abs(ev(0)), std::abs(ev(k - 1)));
  };

  for (int step = 0; step < max_steps; ++step) {
    apply(basis.back(), w);
    const double a = w.dot(basis.back()).real();
    alpha.push_back(a);
    w -= a * basis.back();
    if (basis.size() > 1) w -= beta.back() * basis[basis.size() - 2];
    // full reorthogonalization, two passes
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b.dot(w) * b;
    const double nb = w.norm();
    const double est = extremal_of_tridiag();
    if (est == 0.0 && nb <= 1e-300) return 0.0;
    if (prev >= 0.0 && std::abs(est - prev) <= opt.rel_tol * std::max(est, 1e-300)) {
      if (++stable >= 2) return est;
    } else {
      stable = 0;
    }
    prev = est;
    if (nb <= 1e-14 * std::max(1.0, std::abs(a))) return est;  // invariant subspace
    beta.push_back(nb);
    basis.push_back(w / nb);
  }
  return prev < 0.0 ? 0.0 : prev;
}

inline double dense_exact_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (nearly_hermitian(a)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  if (nearly_skew_hermitian(a)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((Complex(0, 1) * a).eval(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

}  // namespace detail

/// Operator norm (largest singular value).  Exact dense computation up to
/// NormOptions::dense_max_dim; Lanczos beyond that, on A itself when A is
/// (skew-)Hermitian and on A*A otherwise.
inline double operator_norm(const Matrix& a, const NormOptions& opt = {}) {
  if (a.size() == 0) return 0.0;
  const Index n = std::max(a.rows(), a.cols());
  if (n <= opt.dense_max_dim) return detail::dense_exact_norm(a);
  if (a.rows() == a.cols() && nearly_hermitian(a)) {
    auto apply = [&a](const Vector& v, Vector& w) { w.noalias() = a * v; };
    return detail::lanczos_extremal(apply, a.rows(), opt, opt.max_matvecs, false);
  }
  if (a.rows() == a.cols() && nearly_skew_hermitian(a)) {
    auto apply = [&a](const Vector& v, Vector& w) {
      w.noalias() = a * v;
      w *= Complex(0, 1);
    };
    return detail::lanczos_extremal(apply, a.rows(), opt, opt.max_matvecs, false);
  }
  Vector tmp(a.rows());
  auto gram = [&a, &tmp](const Vector& v, Vector& w) {
    tmp.noalias() = a * v;
    w.noalias() = a.adjoint() * tmp;
  };
  return std::sqrt(detail::lanczos_extremal(gram, a.cols(), opt, opt.max_matvecs / 2, true));
}

/// Matrix-free operator norm via Lanczos on A*A.
inline double operator_norm(const LinearMap& op, const NormOptions& opt = {}) {
  if (op.rows == 0 || op.cols == 0) return 0.0;
  Vector tmp(op.rows);
  auto gram = [&op, &tmp](const Vector& v, Vector& w) {
    op.apply(v, tmp);
    w.resize(op.cols);
    op.apply_adjoint(tmp, w);
  };
  return std::sqrt(detail::lanczos_extremal(gram, op.cols, opt, opt.max_matvecs / 2, true));
}

}  // namespace opderiv
