#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opderiv/model.hpp"
#include "opderiv/norms.hpp"
#include "opderiv/spectral.hpp"
#include "opderiv/types.hpp"

namespace opderiv {

/// Entry generator for symbolic (diagonal-basis) models, indexed by ambient
/// labels.  Blocks of the band matrix are submatrices of this kernel.
using ScalarKernel = std::function<Complex(long, long)>;

/// Dense compression of a block matrix to a window E_n, band-major basis.
struct WindowedOperator {
  Matrix mat;
  int window = 0;
  bool clipped = false;           // spectral leakage at the model edge
  std::vector<long> labels;       // symbolic models: ambient label per column
  Matrix frame;                   // dense models: ambient window frame (N x d)

  Index dim() const { return mat.rows(); }
};

/// Vector in the core E: finitely many band coefficient blocks, each in the
/// band's frame basis.
struct CoreVector {
  std::map<int, Vector> blocks;

  int min_window() const {
    int n = 1;
    for (const auto& [b, _] : blocks) n = std::max(n, BandDecomposition::window_covering_band(b));
    return n;
  }
};

/// Stabilized sesquilinear-form value: equal to the window-m compression
/// pairing for every n >= m.
struct FormValue {
  Complex value;
  int stabilized_at = 0;
};

/// Element of the space M of band-indexed matrices of operators, tied to the
/// band decomposition it is expressed in.  Finite dense models store explicit
/// blocks; symbolic models store an entry kernel, optionally with Toeplitz
/// structure (coefficients of the label difference times a power of the
/// eigenvalue difference) that norm sweeps exploit without materializing.
class BlockMatrix {
 public:
  using BlockKey = std::pair<int, int>;
  using BlockMap = std::map<BlockKey, Matrix>;

  /// m(a)_{rc} = e_r a | e_c H.
  static BlockMatrix embed(const Matrix& a, std::shared_ptr<const BandDecomposition> bd) {
    require(bd);
    if (a.rows() != bd->dim() || a.cols() != bd->dim())
      throw ValidationError("embed: operator dimension does not match the decomposition");
    BlockMatrix y(std::move(bd));
    if (y.bd_->symbolic()) {
      auto dense = std::make_shared<Matrix>(a);
      const BandDecomposition* bd_raw = y.bd_.get();
      y.kernel_ = [dense, bd_raw](long i, long j) {
        return (*dense)(bd_raw->position_of_label(i), bd_raw->position_of_label(j));
      };
    } else {
      for (int r : y.bd_->band_indices()) {
        const Matrix fr = y.bd_->frame(r);
        for (int c : y.bd_->band_indices())
          y.blocks_[{r, c}] = fr.adjoint() * a * y.bd_->frame(c);
      }
    }
    return y;
  }

  /// m(D): diagonal of the d_n blocks.
  static BlockMatrix embed_diagonal(std::shared_ptr<const BandDecomposition> bd) {
    require(bd);
    BlockMatrix y(std::move(bd));
    if (y.bd_->symbolic()) {
      const BandDecomposition* bd_raw = y.bd_.get();
      y.kernel_ = [bd_raw](long i, long j) -> Complex {
        if (i != j) return 0.0;
        return bd_raw->eigenvalues()[static_cast<std::size_t>(bd_raw->position_of_label(i))];
      };
    } else {
      for (int n : y.bd_->band_indices()) y.blocks_[{n, n}] = y.bd_->dblock(n);
    }
    return y;
  }

  /// Toeplitz entries a_{rc} = sigma(r - c) over the ambient labels.
  static BlockMatrix from_laurent(std::shared_ptr<const BandDecomposition> bd,
                                  const std::function<Complex(long)>& sigma) {
    require(bd);
    if (!bd->symbolic())
      throw ValidationError("Toeplitz block matrices need a symbolic decomposition");
    BlockMatrix y(std::move(bd));
    const auto& labels = y.bd_->labels();
    const long span = labels.back() - labels.front();
    auto coeffs = std::make_shared<std::vector<Complex>>(static_cast<std::size_t>(2 * span + 1));
    for (long d = -span; d <= span; ++d)
      (*coeffs)[static_cast<std::size_t>(d + span)] = sigma(d);
    y.laurent_ = coeffs;
    y.laurent_span_ = span;
    y.comm_depth_ = 0;
    y.kernel_ = [coeffs, span](long i, long j) -> Complex {
      const long d = i - j;
      if (d < -span || d > span) return 0.0;
      return (*coeffs)[static_cast<std::size_t>(d + span)];
    };
    return y;
  }

  static BlockMatrix from_kernel(std::shared_ptr<const BandDecomposition> bd, ScalarKernel k) {
    require(bd);
    if (!bd->symbolic())
      throw ValidationError("kernel block matrices need a symbolic decomposition");
    BlockMatrix y(std::move(bd));
    y.kernel_ = std::move(k);
    return y;
  }

  static BlockMatrix from_blocks(std::shared_ptr<const BandDecomposition> bd, BlockMap blocks) {
    require(bd);
    BlockMatrix y(std::move(bd));
    for (const auto& [key, blk] : blocks) {
      if (blk.rows() != y.bd_->band_dim(key.first) || blk.cols() != y.bd_->band_dim(key.second))
        throw ValidationError("from_blocks: block shape does not match band dimensions");
    }
    y.blocks_ = std::move(blocks);
    return y;
  }

  const std::shared_ptr<const BandDecomposition>& decomposition() const { return bd_; }
  bool kernel_backed() const { return static_cast<bool>(kernel_); }

  /// [m(D), y]_{rc} = d_r y_{rc} - y_{rc} d_c.
  BlockMatrix commutator_with_d() const {
    BlockMatrix out(bd_);
    if (kernel_) {
      const BandDecomposition* bd_raw = bd_.get();
      if (laurent_ && bd_raw->model_kind() == ModelKind::Circle) {
        // eigenvalue == label on the plain circle, so the symbol stays Toeplitz
        auto next = std::make_shared<std::vector<Complex>>(*laurent_);
        const long span = laurent_span_;
        for (long d = -span; d <= span; ++d)
          (*next)[static_cast<std::size_t>(d + span)] *= static_cast<double>(d);
        out.laurent_ = next;
        out.laurent_span_ = span;
        out.comm_depth_ = 0;
        out.kernel_ = [next, span](long i, long j) -> Complex {
          const long d = i - j;
          if (d < -span || d > span) return 0.0;
          return (*next)[static_cast<std::size_t>(d + span)];
        };
        return out;
      }
      if (laurent_) {
        out.laurent_ = laurent_;
        out.laurent_span_ = laurent_span_;
        out.comm_depth_ = comm_depth_ + 1;
      }
      auto inner = kernel_;
      out.kernel_ = [inner, bd_raw](long i, long j) {
        const double di =
            bd_raw->eigenvalues()[static_cast<std::size_t>(bd_raw->position_of_label(i))];
        const double dj =
            bd_raw->eigenvalues()[static_cast<std::size_t>(bd_raw->position_of_label(j))];
        return (di - dj) * inner(i, j);
      };
      return out;
    }
    for (const auto& [key, blk] : blocks_) {
      const Matrix dr = bd_->dblock(key.first);
      const Matrix dc = bd_->dblock(key.second);
      out.blocks_[key] = dr * blk - blk * dc;
    }
    return out;
  }

  /// (y*)_{rc} = (y_{cr})*.
  BlockMatrix adjoint() const {
    BlockMatrix out(bd_);
    if (kernel_) {
      auto inner = kernel_;
      out.kernel_ = [inner](long i, long j) { return std::conj(inner(j, i)); };
      if (laurent_) {
        auto adj = std::make_shared<std::vector<Complex>>(laurent_->size());
        const long span = laurent_span_;
        const double sign = (comm_depth_ % 2 == 0) ? 1.0 : -1.0;
        for (long d = -span; d <= span; ++d)
          (*adj)[static_cast<std::size_t>(d + span)] =
              sign * std::conj((*laurent_)[static_cast<std::size_t>(-d + span)]);
        out.laurent_ = adj;
        out.laurent_span_ = span;
        out.comm_depth_ = comm_depth_;
      }
      return out;
    }
    for (const auto& [key, blk] : blocks_)
      out.blocks_[{key.second, key.first}] = blk.adjoint();
    return out;
  }

  /// alpha_t(y) = e^{itD} y e^{-itD}, entrywise phases e^{it(λ_r - λ_c)} on
  /// the blocks; with `diff` set, alpha_t(y) - y.  E_n commutes with e^{itD},
  /// so truncations of the result are the alpha-differences of truncations.
  BlockMatrix alpha_transform(double t, bool diff) const {
    BlockMatrix out(bd_);
    if (kernel_) {
      const BandDecomposition* bd_raw = bd_.get();
      if (laurent_ && bd_raw->model_kind() == ModelKind::Circle) {
        auto next = std::make_shared<std::vector<Complex>>(*laurent_);
        const long span = laurent_span_;
        for (long d = -span; d <= span; ++d) {
          const Complex phase = std::exp(Complex(0.0, t * static_cast<double>(d)));
          (*next)[static_cast<std::size_t>(d + span)] *= diff ? phase - 1.0 : phase;
        }
        out.laurent_ = next;
        out.laurent_span_ = span;
        out.comm_depth_ = 0;
        out.kernel_ = [next, span](long i, long j) -> Complex {
          const long d = i - j;
          if (d < -span || d > span) return 0.0;
          return (*next)[static_cast<std::size_t>(d + span)];
        };
        return out;
      }
      auto inner = kernel_;
      out.kernel_ = [inner, bd_raw, t, diff](long i, long j) {
        const double di =
            bd_raw->eigenvalues()[static_cast<std::size_t>(bd_raw->position_of_label(i))];
        const double dj =
            bd_raw->eigenvalues()[static_cast<std::size_t>(bd_raw->position_of_label(j))];
        const Complex phase = std::exp(Complex(0.0, t * (di - dj)));
        return (diff ? phase - 1.0 : phase) * inner(i, j);
      };
      return out;
    }
    for (const auto& [key, blk] : blocks_) {
      const Matrix dr = bd_->dblock(key.first);
      const Matrix dc = bd_->dblock(key.second);
      Matrix b = blk;
      for (Index i = 0; i < b.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j) {
          const Complex phase = std::exp(Complex(0.0, t * (dr(i, i).real() - dc(j, j).real())));
          b(i, j) *= diff ? phase - 1.0 : phase;
        }
      out.blocks_[key] = std::move(b);
    }
    return out;
  }

  /// y applied to an ambient vector.
  Vector apply_ambient(const Vector& v) const {
    if (v.size() != bd_->dim())
      throw ValidationError("apply_ambient: vector dimension mismatch");
    Vector out = Vector::Zero(bd_->dim());
    if (kernel_) {
      const auto& labels = bd_->labels();
      for (Index i = 0; i < out.size(); ++i) {
        Complex acc = 0.0;
        for (Index j = 0; j < v.size(); ++j)
          acc += kernel_(labels[static_cast<std::size_t>(i)],
                         labels[static_cast<std::size_t>(j)]) * v(j);
        out(i) = acc;
      }
      return out;
    }
    for (const auto& [key, blk] : blocks_) {
      const auto& pr = bd_->band_positions(key.first);
      const auto& pc = bd_->band_positions(key.second);
      if (bd_->symbolic()) {
        for (Index i = 0; i < blk.rows(); ++i) {
          Complex acc = 0.0;
          for (Index j = 0; j < blk.cols(); ++j)
            acc += blk(i, j) * v(pc[static_cast<std::size_t>(j)]);
          out(pr[static_cast<std::size_t>(i)]) += acc;
        }
      } else {
        out += bd_->frame(key.first) * (blk * (bd_->frame(key.second).adjoint() * v));
      }
    }
    return out;
  }

  BlockMatrix scaled(Complex factor) const {
    BlockMatrix out(bd_);
    if (kernel_) {
      auto inner = kernel_;
      out.kernel_ = [inner, factor](long i, long j) { return factor * inner(i, j); };
      return out;
    }
    for (const auto& [key, blk] : blocks_) out.blocks_[key] = factor * blk;
    return out;
  }

  BlockMatrix plus(const BlockMatrix& other) const {
    check_same_decomposition(other);
    BlockMatrix out(bd_);
    if (kernel_ || other.kernel_) {
      auto a = entry_fn();
      auto b = other.entry_fn();
      out.kernel_ = [a, b](long i, long j) { return a(i, j) + b(i, j); };
      return out;
    }
    out.blocks_ = blocks_;
    for (const auto& [key, blk] : other.blocks_) {
      auto it = out.blocks_.find(key);
      if (it == out.blocks_.end())
        out.blocks_[key] = blk;
      else
        it->second += blk;
    }
    return out;
  }

  /// Block product, defined here for finite supports (every block sum is a
  /// finite sum).
  BlockMatrix multiply(const BlockMatrix& other) const {
    check_same_decomposition(other);
    BlockMatrix out(bd_);
    if (kernel_ || other.kernel_) {
      if (bd_->dim() > kDenseAlgebraMaxDim)
        throw NumericalError("kernel product exceeds the dense-algebra dimension cap");
      auto prod = std::make_shared<Matrix>(reassemble() * other.reassemble());
      const BandDecomposition* bd_raw = bd_.get();
      out.kernel_ = [prod, bd_raw](long i, long j) {
        return (*prod)(bd_raw->position_of_label(i), bd_raw->position_of_label(j));
      };
      return out;
    }
    for (const auto& [ka, blka] : blocks_) {
      for (const auto& [kb, blkb] : other.blocks_) {
        if (ka.second != kb.first) continue;
        const BlockKey key{ka.first, kb.second};
        auto it = out.blocks_.find(key);
        if (it == out.blocks_.end())
          out.blocks_[key] = blka * blkb;
        else
          it->second += blka * blkb;
      }
    }
    return out;
  }

  /// Assembled block for a band pair (zeros when absent).
  Matrix block(int r, int c) const {
    const Index dr = bd_->band_dim(r), dc = bd_->band_dim(c);
    if (dr == 0 || dc == 0) throw ValidationError("block: unknown band index");
    if (kernel_) {
      const auto& pr = bd_->band_positions(r);
      const auto& pc = bd_->band_positions(c);
      Matrix blk(dr, dc);
      for (Index i = 0; i < dr; ++i)
        for (Index j = 0; j < dc; ++j)
          blk(i, j) = kernel_(bd_->labels()[static_cast<std::size_t>(pr[static_cast<std::size_t>(i)])],
                              bd_->labels()[static_cast<std::size_t>(pc[static_cast<std::size_t>(j)])]);
      return blk;
    }
    auto it = blocks_.find({r, c});
    return it == blocks_.end() ? Matrix::Zero(dr, dc).eval() : it->second;
  }

  /// pi_n(y): compression to the window E_n as a dense operator.
  WindowedOperator truncate(int n) const {
    WindowedOperator w;
    w.window = n;
    const auto pos = bd_->window_positions(n, &w.clipped);
    const Index d = static_cast<Index>(pos.size());
    if (kernel_) {
      w.labels.reserve(pos.size());
      for (Index p : pos) w.labels.push_back(bd_->labels()[static_cast<std::size_t>(p)]);
      w.mat.resize(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
          w.mat(i, j) = kernel_(w.labels[static_cast<std::size_t>(i)],
                                w.labels[static_cast<std::size_t>(j)]);
      return w;
    }
    w.mat = Matrix::Zero(d, d);
    // band-major offsets within the window
    std::map<int, Index> offset;
    Index acc = 0;
    for (int b : bd_->band_indices()) {
      if (b < 1 - n || b > n) continue;
      offset[b] = acc;
      acc += bd_->band_dim(b);
    }
    for (const auto& [key, blk] : blocks_) {
      auto r = offset.find(key.first);
      auto c = offset.find(key.second);
      if (r == offset.end() || c == offset.end()) continue;
      w.mat.block(r->second, c->second, blk.rows(), blk.cols()) = blk;
    }
    if (!bd_->symbolic()) w.frame = bd_->window_frame(n);
    else {
      w.labels.reserve(pos.size());
      for (Index p : pos) w.labels.push_back(bd_->labels()[static_cast<std::size_t>(p)]);
    }
    return w;
  }

  /// Matrix-free window compression for norm estimation (basis ordered by
  /// ambient label; norms are basis-order invariant).
  LinearMap window_norm_map(int n) const;

  /// Dense ambient operator Σ frame_r y_{rc} frame_c*.
  Matrix reassemble() const {
    if (bd_->dim() > kDenseAlgebraMaxDim)
      throw NumericalError("reassemble exceeds the dense-algebra dimension cap");
    const Index n = bd_->dim();
    Matrix out = Matrix::Zero(n, n);
    if (kernel_) {
      const auto& labels = bd_->labels();
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          out(i, j) = kernel_(labels[static_cast<std::size_t>(i)],
                              labels[static_cast<std::size_t>(j)]);
      return out;
    }
    for (const auto& [key, blk] : blocks_) {
      const auto& pr = bd_->band_positions(key.first);
      const auto& pc = bd_->band_positions(key.second);
      if (bd_->symbolic()) {
        for (Index i = 0; i < blk.rows(); ++i)
          for (Index j = 0; j < blk.cols(); ++j)
            out(pr[static_cast<std::size_t>(i)], pc[static_cast<std::size_t>(j)]) += blk(i, j);
      } else {
        out += bd_->frame(key.first) * blk * bd_->frame(key.second).adjoint();
      }
    }
    return out;
  }

  /// S(y)(xi, eta) evaluated at its stabilization window: the value equals
  /// the window-m pairing for every n >= m, m = smallest window containing
  /// both supports.
  FormValue form_eval(const CoreVector& xi, const CoreVector& eta) const {
    for (const auto& [b, _] : xi.blocks)
      if (!bd_->has_band(b)) throw ValidationError("form_eval: xi supported outside available bands");
    for (const auto& [b, _] : eta.blocks)
      if (!bd_->has_band(b)) throw ValidationError("form_eval: eta supported outside available bands");
    const int m = std::max(xi.min_window(), eta.min_window());
    const WindowedOperator w = truncate(m);
    const Vector xv = window_coordinates(xi, m);
    const Vector ev = window_coordinates(eta, m);
    return {ev.adjoint() * (w.mat * xv), m};
  }

  /// Window coordinates of a core vector (band-major, frame bases).
  Vector window_coordinates(const CoreVector& v, int n) const {
    Vector out = Vector::Zero(static_cast<Index>(bd_->window_positions(n).size()));
    Index acc = 0;
    for (int b : bd_->band_indices()) {
      if (b < 1 - n || b > n) continue;
      const Index dim_b = bd_->band_dim(b);
      auto it = v.blocks.find(b);
      if (it != v.blocks.end()) {
        if (it->second.size() != dim_b)
          throw ValidationError("core vector block size does not match band dimension");
        out.segment(acc, dim_b) = it->second;
      }
      acc += dim_b;
    }
    return out;
  }

  /// Debug dump {"(r,c)": [[[re,im],...],...]} of the nonzero blocks.
  nlohmann::json debug_dump() const {
    nlohmann::json blocks = nlohmann::json::object();
    for (int r : bd_->band_indices()) {
      for (int c : bd_->band_indices()) {
        const Matrix blk = block(r, c);
        if (max_abs(blk) == 0.0) continue;
        blocks["(" + std::to_string(r) + "," + std::to_string(c) + ")"] =
            matrix_to_json_entries(blk);
      }
    }
    return {{"schema", kSchemaTag}, {"blocks", std::move(blocks)}};
  }

  static constexpr Index kDenseAlgebraMaxDim = 8192;

 private:
  explicit BlockMatrix(std::shared_ptr<const BandDecomposition> bd) : bd_(std::move(bd)) {}

  static void require(const std::shared_ptr<const BandDecomposition>& bd) {
    if (!bd) throw ValidationError("block matrix needs a band decomposition");
  }

  void check_same_decomposition(const BlockMatrix& other) const {
    if (bd_ == other.bd_) return;
    if (!bd_->same_decomposition(*other.bd_))
      throw ValidationError("block matrices expressed in different band decompositions");
  }

  ScalarKernel entry_fn() const {
    if (kernel_) return kernel_;
    // band lookup through positions; adequate for the small dense models
    const BandDecomposition* bd_raw = bd_.get();
    auto blocks = std::make_shared<BlockMap>(blocks_);
    return [bd_raw, blocks](long i, long j) -> Complex {
      const Index pi = bd_raw->position_of_label(i);
      const Index pj = bd_raw->position_of_label(j);
      const int br = bd_raw->band_of_position(pi);
      const int bc = bd_raw->band_of_position(pj);
      auto it = blocks->find({br, bc});
      if (it == blocks->end()) return 0.0;
      const auto& pr = bd_raw->band_positions(br);
      const auto& pc = bd_raw->band_positions(bc);
      const auto ri = std::find(pr.begin(), pr.end(), pi) - pr.begin();
      const auto cj = std::find(pc.begin(), pc.end(), pj) - pc.begin();
      return it->second(static_cast<Index>(ri), static_cast<Index>(cj));
    };
  }

  std::shared_ptr<const BandDecomposition> bd_;
  BlockMap blocks_;      // explicit storage (dense models)
  ScalarKernel kernel_;  // symbolic storage
  // Toeplitz structure: entry(i,j) = (eig_i - eig_j)^depth * sigma(i - j)
  std::shared_ptr<const std::vector<Complex>> laurent_;
  long laurent_span_ = 0;
  int comm_depth_ = 0;
};

inline LinearMap BlockMatrix::window_norm_map(int n) const {
  if (!kernel_)
    throw ValidationError("window_norm_map is only available for kernel-backed matrices");
  bool clipped = false;
  const auto pos = bd_->window_positions(n, &clipped);
  auto labels = std::make_shared<std::vector<long>>();
  labels->reserve(pos.size());
  for (Index p : pos) labels->push_back(bd_->labels()[static_cast<std::size_t>(p)]);
  std::sort(labels->begin(), labels->end());
  const Index d = static_cast<Index>(labels->size());

  LinearMap map;
  map.rows = d;
  map.cols = d;

  const bool contiguous = d > 0 && labels->back() - labels->front() + 1 == d;
  if (laurent_ && contiguous) {
    auto eigs = std::make_shared<std::vector<double>>();
    eigs->reserve(labels->size());
    for (long lab : *labels)
      eigs->push_back(
          bd_->eigenvalues()[static_cast<std::size_t>(bd_->position_of_label(lab))]);
    auto sigma = laurent_;
    const long span = laurent_span_;
    const int depth = comm_depth_;
    const long lab0 = labels->front();

    // w_i = sum_j (e_i - e_j)^depth sigma(i - j) v_j, expanded binomially into
    // depth+1 plain Toeplitz passes.
    auto apply = [sigma, span, depth, eigs, lab0, d](const Vector& v, Vector& w) {
      w = Vector::Zero(d);
      Vector scaled(d), conv(d);
      double binom = 1.0;
      for (int m = 0; m <= depth; ++m) {
        if (m > 0) binom = binom * static_cast<double>(depth - m + 1) / static_cast<double>(m);
        for (Index j = 0; j < d; ++j) {
          const double e = (*eigs)[static_cast<std::size_t>(j)];
          double f = 1.0;
          for (int k = 0; k < depth - m; ++k) f *= -e;
          scaled(j) = f * v(j);
        }
        for (Index i = 0; i < d; ++i) {
          Complex acc = 0.0;
          const long base = i + span;  // label diff == position diff (contiguous)
          for (Index j = 0; j < d; ++j) {
            const long off = base - j;
            if (off >= 0 && off < static_cast<long>(sigma->size()))
              acc += (*sigma)[static_cast<std::size_t>(off)] * scaled(j);
          }
          conv(i) = acc;
        }
        for (Index i = 0; i < d; ++i) {
          const double e = (*eigs)[static_cast<std::size_t>(i)];
          double f = binom;
          for (int k = 0; k < m; ++k) f *= e;
          w(i) += f * conv(i);
        }
      }
      (void)lab0;
    };
    map.apply = apply;
    // adjoint: entry(j,i)* = (e_i - e_j)^depth (-1)^depth conj(sigma(j - i))
    auto sigma_adj = std::make_shared<std::vector<Complex>>(sigma->size());
    const double sign = (depth % 2 == 0) ? 1.0 : -1.0;
    for (long dd = -span; dd <= span; ++dd)
      (*sigma_adj)[static_cast<std::size_t>(dd + span)] =
          sign * std::conj((*sigma)[static_cast<std::size_t>(-dd + span)]);
    auto apply_adj = [sigma_adj, span, depth, eigs, lab0, d](const Vector& v, Vector& w) {
      w = Vector::Zero(d);
      Vector scaled(d), conv(d);
      double binom = 1.0;
      for (int m = 0; m <= depth; ++m) {
        if (m > 0) binom = binom * static_cast<double>(depth - m + 1) / static_cast<double>(m);
        for (Index j = 0; j < d; ++j) {
          const double e = (*eigs)[static_cast<std::size_t>(j)];
          double f = 1.0;
          for (int k = 0; k < depth - m; ++k) f *= -e;
          scaled(j) = f * v(j);
        }
        for (Index i = 0; i < d; ++i) {
          Complex acc = 0.0;
          const long base = i + span;
          for (Index j = 0; j < d; ++j) {
            const long off = base - j;
            if (off >= 0 && off < static_cast<long>(sigma_adj->size()))
              acc += (*sigma_adj)[static_cast<std::size_t>(off)] * scaled(j);
          }
          conv(i) = acc;
        }
        for (Index i = 0; i < d; ++i) {
          const double e = (*eigs)[static_cast<std::size_t>(i)];
          double f = binom;
          for (int k = 0; k < m; ++k) f *= e;
          w(i) += f * conv(i);
        }
      }
      (void)lab0;
    };
    map.apply_adjoint = apply_adj;
    return map;
  }

  // generic kernel fallback
  auto kernel = kernel_;
  auto apply = [kernel, labels, d](const Vector& v, Vector& w) {
    w = Vector::Zero(d);
    for (Index i = 0; i < d; ++i) {
      Complex acc = 0.0;
      for (Index j = 0; j < d; ++j)
        acc += kernel((*labels)[static_cast<std::size_t>(i)],
                      (*labels)[static_cast<std::size_t>(j)]) * v(j);
      w(i) = acc;
    }
  };
  auto apply_adj = [kernel, labels, d](const Vector& v, Vector& w) {
    w = Vector::Zero(d);
    for (Index i = 0; i < d; ++i) {
      Complex acc = 0.0;
      for (Index j = 0; j < d; ++j)
        acc += std::conj(kernel((*labels)[static_cast<std::size_t>(j)],
                                (*labels)[static_cast<std::size_t>(i)])) * v(j);
      w(i) = acc;
    }
  };
  map.apply = apply;
  map.apply_adjoint = apply_adj;
  return map;
}

/// Core-vector helpers.
inline CoreVector core_vector_from_ambient(const BandDecomposition& bd, const Vector& v,
                                           double prune_tol = 0.0) {
  if (v.size() != bd.dim())
    throw ValidationError("ambient vector dimension does not match the decomposition");
  CoreVector out;
  for (int b : bd.band_indices()) {
    Vector blk;
    if (bd.symbolic()) {
      const auto& pos = bd.band_positions(b);
      blk.resize(static_cast<Index>(pos.size()));
      for (std::size_t k = 0; k < pos.size(); ++k) blk(static_cast<Index>(k)) = v(pos[k]);
    } else {
      blk = bd.frame(b).adjoint() * v;
    }
    if (blk.norm() > prune_tol) out.blocks[b] = std::move(blk);
  }
  return out;
}

inline Vector ambient_from_core(const BandDecomposition& bd, const CoreVector& cv) {
  Vector out = Vector::Zero(bd.dim());
  for (const auto& [b, blk] : cv.blocks) {
    if (!bd.has_band(b)) throw ValidationError("core vector supported outside available bands");
    if (bd.symbolic()) {
      const auto& pos = bd.band_positions(b);
      for (std::size_t k = 0; k < pos.size(); ++k) out(pos[k]) += blk(static_cast<Index>(k));
    } else {
      out += bd.frame(b) * blk;
    }
  }
  return out;
}

}  // namespace opderiv
