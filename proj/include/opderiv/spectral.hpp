#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "opderiv/model.hpp"
#include "opderiv/types.hpp"

namespace opderiv {

/// Eigenvalues within this distance of an integer are snapped to it before
/// the half-open (n-1, n] band assignment, so ties resolve deterministically.
inline constexpr double kBandSnapTol = 1e-12;

inline int band_of_eigenvalue(double lambda, double snap_tol = kBandSnapTol) {
  const double r = std::round(lambda);
  const double snapped = (std::abs(lambda - r) <= snap_tol) ? r : lambda;
  return static_cast<int>(std::ceil(snapped));
}

/// Spectral bands of a self-adjoint model: band n spans the eigenvectors with
/// eigenvalue in (n-1, n].  Finite dense models carry an explicit eigenbasis;
/// diagonal and circle kinds stay symbolic (the ambient basis is already the
/// eigenbasis), which is what lets circle bandlimits up to 4096 stay cheap.
class BandDecomposition {
 public:
  static BandDecomposition compute(const SelfAdjointModel& model, double snap_tol = kBandSnapTol);

  Index dim() const { return static_cast<Index>(eigs_.size()); }
  ModelKind model_kind() const { return kind_; }
  bool symbolic() const { return kind_ != ModelKind::DenseHermitian; }
  int bandlimit_hint() const { return bandlimit_; }

  const std::vector<long>& labels() const { return labels_; }
  const std::vector<double>& eigenvalues() const { return eigs_; }
  int band_of_position(Index i) const { return band_[static_cast<std::size_t>(i)]; }
  double eigenvalue_of_label(long label) const { return eigs_[position_of_label(label)]; }

  std::vector<int> band_indices() const {
    std::vector<int> out;
    out.reserve(bands_.size());
    for (const auto& [n, _] : bands_) out.push_back(n);
    return out;
  }
  bool has_band(int n) const { return bands_.count(n) != 0; }
  Index band_dim(int n) const {
    auto it = bands_.find(n);
    return it == bands_.end() ? 0 : static_cast<Index>(it->second.size());
  }
  const std::vector<Index>& band_positions(int n) const {
    static const std::vector<Index> empty;
    auto it = bands_.find(n);
    return it == bands_.end() ? empty : it->second;
  }

  /// Orthonormal column frame spanning e_n H (N x dim e_n H).
  Matrix frame(int n) const {
    const auto& pos = band_positions(n);
    Matrix f = Matrix::Zero(dim(), static_cast<Index>(pos.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) {
      if (symbolic())
        f(pos[k], static_cast<Index>(k)) = 1.0;
      else
        f.col(static_cast<Index>(k)) = vectors_.col(pos[k]);
    }
    return f;
  }

  /// d_n = D restricted to e_n H, expressed in the frame basis (diagonal).
  Matrix dblock(int n) const {
    const auto& pos = band_positions(n);
    Matrix d = Matrix::Zero(static_cast<Index>(pos.size()), static_cast<Index>(pos.size()));
    for (std::size_t k = 0; k < pos.size(); ++k)
      d(static_cast<Index>(k), static_cast<Index>(k)) = eigs_[static_cast<std::size_t>(pos[k])];
    return d;
  }

  /// Σ_n frame_n d_n frame_n*, i.e. D reassembled from bands.
  Matrix reassemble() const {
    Matrix out = Matrix::Zero(dim(), dim());
    for (const auto& [n, _] : bands_) {
      const Matrix f = frame(n);
      out += f * dblock(n) * f.adjoint();
    }
    return out;
  }

  /// Σ_n frame_n frame_n* (identity when the bands are complete).
  Matrix completeness() const {
    Matrix out = Matrix::Zero(dim(), dim());
    for (const auto& [n, _] : bands_) {
      const Matrix f = frame(n);
      out += f * f.adjoint();
    }
    return out;
  }

  /// Positions covered by the window E_n = Σ_{j=1-n}^{n} e_j, band-major.
  /// clipped is set when the requested window exceeds the available bands
  /// (spectral leakage at the model edge).
  std::vector<Index> window_positions(int n, bool* clipped = nullptr) const {
    if (n < 1) throw ValidationError("window index must be >= 1");
    std::vector<Index> pos;
    for (const auto& [b, p] : bands_) {
      if (b < 1 - n || b > n) continue;
      pos.insert(pos.end(), p.begin(), p.end());
    }
    // Spectral leakage: the untruncated circle operator has occupied bands
    // beyond the model edge, so windows past the bandlimit clip silently.
    if (clipped) *clipped = is_circle_kind(kind_) && n > bandlimit_;
    return pos;
  }

  /// Window frame for E_n (N x dim E_n H), band-major columns.
  Matrix window_frame(int n, bool* clipped = nullptr) const {
    const auto pos = window_positions(n, clipped);
    Matrix f = Matrix::Zero(dim(), static_cast<Index>(pos.size()));
    for (std::size_t k = 0; k < pos.size(); ++k) {
      if (symbolic())
        f(pos[k], static_cast<Index>(k)) = 1.0;
      else
        f.col(static_cast<Index>(k)) = vectors_.col(pos[k]);
    }
    return f;
  }

  /// Smallest window n with E_n covering band b: n >= b and n >= 1-b.
  static int window_covering_band(int b) { return std::max({1, b, 1 - b}); }

  /// Smallest window covering every occupied band.
  int full_window() const {
    int n = 1;
    for (const auto& [b, _] : bands_) n = std::max(n, window_covering_band(b));
    return n;
  }

  const Matrix& eigenvectors() const { return vectors_; }

  Index position_of_label(long label) const {
    auto it = label_pos_.find(label);
    if (it == label_pos_.end()) throw ValidationError("unknown ambient label");
    return it->second;
  }

  bool same_decomposition(const BandDecomposition& other) const {
    return kind_ == other.kind_ && labels_ == other.labels_ && eigs_ == other.eigs_;
  }

 private:
  ModelKind kind_ = ModelKind::Diagonal;
  int bandlimit_ = 0;
  std::vector<long> labels_;
  std::vector<double> eigs_;
  std::vector<int> band_;
  std::map<int, std::vector<Index>> bands_;
  std::unordered_map<long, Index> label_pos_;
  Matrix vectors_;  // dense kind only

  void index_bands() {
    label_pos_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i)
      label_pos_[labels_[i]] = static_cast<Index>(i);
    band_.resize(eigs_.size());
    for (std::size_t i = 0; i < eigs_.size(); ++i) {
      const int b = band_of_eigenvalue(eigs_[i]);
      band_[i] = b;
      bands_[b].push_back(static_cast<Index>(i));
    }
  }
};

inline BandDecomposition BandDecomposition::compute(const SelfAdjointModel& model,
                                                    double snap_tol) {
  BandDecomposition bd;
  bd.kind_ = model.kind();
  bd.bandlimit_ = model.bandlimit();
  bd.labels_ = model.labels();
  switch (model.kind()) {
    case ModelKind::DenseHermitian: {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(model.matrix());
      if (solver.info() != Eigen::Success)
        throw NumericalError("Hermitian eigendecomposition did not converge");
      bd.eigs_.assign(solver.eigenvalues().data(),
                      solver.eigenvalues().data() + solver.eigenvalues().size());
      bd.vectors_ = solver.eigenvectors();
      break;
    }
    case ModelKind::Diagonal:
      bd.eigs_ = model.eigenvalue_list();
      break;
    case ModelKind::Circle:
    case ModelKind::CircleAbs:
      bd.eigs_.reserve(static_cast<std::size_t>(model.dim()));
      for (long n : bd.labels_)
        bd.eigs_.push_back(model.kind() == ModelKind::Circle
                               ? static_cast<double>(n)
                               : static_cast<double>(std::labs(n)));
      break;
  }
  (void)snap_tol;
  bd.index_bands();
  return bd;
}

/// band_decompose(D): spectral projections for the intervals (n-1, n].
inline BandDecomposition band_decompose(const SelfAdjointModel& model) {
  return BandDecomposition::compute(model);
}

/// e^{itD} as a dense unitary, computed through the eigendecomposition.
inline Matrix unitary_group(const BandDecomposition& bd, double t) {
  const Index n = bd.dim();
  Vector phases(n);
  for (Index i = 0; i < n; ++i)
    phases(i) = std::exp(Complex(0.0, t * bd.eigenvalues()[static_cast<std::size_t>(i)]));
  if (bd.symbolic()) {
    Matrix u = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) u(i, i) = phases(i);
    return u;
  }
  const Matrix& v = bd.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

inline Matrix unitary_group(const SelfAdjointModel& model, double t) {
  return unitary_group(band_decompose(model), t);
}

/// |D| = (D^2)^{1/2}: same eigenvectors, absolute eigenvalues.
inline SelfAdjointModel abs_operator(const SelfAdjointModel& model) {
  switch (model.kind()) {
    case ModelKind::Circle:
    case ModelKind::CircleAbs:
      return SelfAdjointModel::circle_abs(model.bandlimit());
    case ModelKind::Diagonal: {
      std::vector<double> eigs = model.eigenvalue_list();
      for (double& x : eigs) x = std::abs(x);
      return SelfAdjointModel::diagonal(std::move(eigs));
    }
    case ModelKind::DenseHermitian:
    default: {
      const BandDecomposition bd = band_decompose(model);
      const Matrix& v = bd.eigenvectors();
      Vector mags(bd.dim());
      for (Index i = 0; i < bd.dim(); ++i)
        mags(i) = std::abs(bd.eigenvalues()[static_cast<std::size_t>(i)]);
      return SelfAdjointModel::dense(v * mags.asDiagonal() * v.adjoint(), 1e-10);
    }
  }
}

}  // namespace opderiv
