#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opderiv/types.hpp"

namespace opderiv {

/// How a self-adjoint operator is presented.
///
/// DenseHermitian and Diagonal are genuinely finite-dimensional models.
/// Circle is the truncation of the derivative (1/i) d/dθ on the circle to the
/// Fourier modes u_n = e^{inθ}, |n| ≤ L (eigenvalue n on u_n); CircleAbs is
/// its absolute value (eigenvalue |n| on u_n).  The circle kinds are kept
/// diagonal-symbolic so bandlimits up to 4096 never materialize a dense D.
enum class ModelKind { DenseHermitian, Diagonal, Circle, CircleAbs };

inline bool is_circle_kind(ModelKind k) {
  return k == ModelKind::Circle || k == ModelKind::CircleAbs;
}

class SelfAdjointModel {
 public:
  static SelfAdjointModel dense(Matrix a, double hermiticity_tol = 1e-12) {
    if (a.rows() != a.cols()) throw ValidationError("dense model: matrix must be square");
    if (a.rows() == 0) throw ValidationError("dense model: empty matrix");
    if (hermiticity_defect(a) > hermiticity_tol)
      throw ValidationError("dense model: matrix is not Hermitian to tolerance");
    SelfAdjointModel m;
    m.kind_ = ModelKind::DenseHermitian;
    m.dense_ = std::move(a);
    return m;
  }

  static SelfAdjointModel diagonal(std::vector<double> eigenvalues) {
    if (eigenvalues.empty()) throw ValidationError("diagonal model: empty eigenvalue list");
    SelfAdjointModel m;
    m.kind_ = ModelKind::Diagonal;
    m.eigs_ = std::move(eigenvalues);
    return m;
  }

  static SelfAdjointModel circle(int bandlimit) {
    if (bandlimit < 1) throw ValidationError("circle model: bandlimit must be >= 1");
    SelfAdjointModel m;
    m.kind_ = ModelKind::Circle;
    m.bandlimit_ = bandlimit;
    return m;
  }

  static SelfAdjointModel circle_abs(int bandlimit) {
    SelfAdjointModel m = circle(bandlimit);
    m.kind_ = ModelKind::CircleAbs;
    return m;
  }

  ModelKind kind() const { return kind_; }
  bool finite_kind() const { return !is_circle_kind(kind_); }
  int bandlimit() const { return bandlimit_; }

  Index dim() const {
    switch (kind_) {
      case ModelKind::DenseHermitian: return dense_.rows();
      case ModelKind::Diagonal: return static_cast<Index>(eigs_.size());
      default: return 2 * static_cast<Index>(bandlimit_) + 1;
    }
  }

  const Matrix& matrix() const { return dense_; }
  const std::vector<double>& eigenvalue_list() const { return eigs_; }

  /// Ambient basis labels.  Circle kinds use the Fourier index -L..L; finite
  /// kinds use 0..N-1.
  std::vector<long> labels() const {
    std::vector<long> out;
    out.reserve(static_cast<std::size_t>(dim()));
    if (is_circle_kind(kind_)) {
      for (long n = -bandlimit_; n <= bandlimit_; ++n) out.push_back(n);
    } else {
      for (long i = 0; i < dim(); ++i) out.push_back(i);
    }
    return out;
  }

  /// Dense realization; circle kinds give the diagonal matrix of eigenvalues.
  Matrix to_dense() const {
    switch (kind_) {
      case ModelKind::DenseHermitian: return dense_;
      case ModelKind::Diagonal: {
        Matrix d = Matrix::Zero(dim(), dim());
        for (Index i = 0; i < dim(); ++i) d(i, i) = eigs_[static_cast<std::size_t>(i)];
        return d;
      }
      default: {
        Matrix d = Matrix::Zero(dim(), dim());
        const auto lab = labels();
        for (Index i = 0; i < dim(); ++i) {
          const double n = static_cast<double>(lab[static_cast<std::size_t>(i)]);
          d(i, i) = (kind_ == ModelKind::Circle) ? n : std::abs(n);
        }
        return d;
      }
    }
  }

  static SelfAdjointModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  SelfAdjointModel() = default;

  ModelKind kind_ = ModelKind::Diagonal;
  Matrix dense_;
  std::vector<double> eigs_;
  int bandlimit_ = 0;
};

namespace detail {

inline Complex complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::json complex_to_json(const Complex& z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

inline void check_schema_tag(const nlohmann::json& j) {
  if (j.contains("schema") && j["schema"] != kSchemaTag)
    throw ValidationError("unsupported schema tag: " + j["schema"].dump());
}

}  // namespace detail

inline Matrix matrix_from_json_entries(const nlohmann::json& entries, Index n) {
  if (!entries.is_array() || static_cast<Index>(entries.size()) != n)
    throw ValidationError("entries must be an NxN array of [re, im] pairs");
  Matrix a(n, n);
  for (Index r = 0; r < n; ++r) {
    const auto& row = entries[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw ValidationError("entries must be an NxN array of [re, im] pairs");
    for (Index c = 0; c < n; ++c)
      a(r, c) = detail::complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return a;
}

inline nlohmann::json matrix_to_json_entries(const Matrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < a.cols(); ++c) row.push_back(detail::complex_to_json(a(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline SelfAdjointModel SelfAdjointModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ValidationError("self-adjoint model JSON needs a \"type\" field");
  detail::check_schema_tag(j);
  const std::string type = j["type"].get<std::string>();
  if (type == "hermitian") {
    if (!j.contains("dim") || !j.contains("entries"))
      throw ValidationError("hermitian model needs \"dim\" and \"entries\"");
    const Index n = j["dim"].get<Index>();
    if (n < 1) throw ValidationError("hermitian model: dim must be >= 1");
    return dense(matrix_from_json_entries(j["entries"], n));
  }
  if (type == "diagonal") {
    if (!j.contains("eigenvalues") || !j["eigenvalues"].is_array())
      throw ValidationError("diagonal model needs an \"eigenvalues\" array");
    return diagonal(j["eigenvalues"].get<std::vector<double>>());
  }
  if (type == "circle") {
    if (!j.contains("bandlimit")) throw ValidationError("circle model needs \"bandlimit\"");
    return circle(j["bandlimit"].get<int>());
  }
  if (type == "circle-abs") {
    if (!j.contains("bandlimit")) throw ValidationError("circle-abs model needs \"bandlimit\"");
    return circle_abs(j["bandlimit"].get<int>());
  }
  throw ValidationError("unknown self-adjoint model type: " + type);
}

inline nlohmann::json SelfAdjointModel::to_json() const {
  nlohmann::json j;
  j["schema"] = kSchemaTag;
  switch (kind_) {
    case ModelKind::DenseHermitian:
      j["type"] = "hermitian";
      j["dim"] = dense_.rows();
      j["entries"] = matrix_to_json_entries(dense_);
      break;
    case ModelKind::Diagonal:
      j["type"] = "diagonal";
      j["eigenvalues"] = eigs_;
      break;
    case ModelKind::Circle:
      j["type"] = "circle";
      j["bandlimit"] = bandlimit_;
      break;
    case ModelKind::CircleAbs:
      j["type"] = "circle-abs";
      j["bandlimit"] = bandlimit_;
      break;
  }
  return j;
}

}  // namespace opderiv
