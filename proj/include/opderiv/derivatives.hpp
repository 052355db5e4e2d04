#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opderiv/blockspace.hpp"
#include "opderiv/config.hpp"
#include "opderiv/fourier.hpp"
#include "opderiv/threading.hpp"

namespace opderiv {

enum class Boundedness { Bounded, Unbounded, Inconclusive };

inline const char* to_string(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "Bounded";
    case Boundedness::Unbounded: return "Unbounded";
    default: return "Inconclusive";
  }
}

/// Verdict on whether a truncation-norm curve stabilizes.  Boundedness of the
/// underlying infinite matrix cannot be decided from finitely many windows;
/// the documented power-law heuristic yields an honest tri-state.
struct BoundednessVerdict {
  Boundedness status = Boundedness::Inconclusive;
  double norm_estimate = 0.0;      // last curve value (meaningful when Bounded)
  double growth_exponent = 0.0;    // fitted log-log slope, top half of the sweep
  std::vector<std::pair<int, double>> curve;
  bool leakage = false;
};

/// Least-squares slope of log(y) against log(x) over the top half of the
/// points (at least two).  xs must be positive ascending.
inline double fit_top_half_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  const std::size_t take = std::max<std::size_t>(2, (m + 1) / 2);
  const std::size_t lo = m - take;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(m - lo);
  for (std::size_t i = lo; i < m; ++i) {
    const double x = std::log(xs[i]);
    const double y = std::log(ys[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = sxx - sx * sx / count;
  if (denom == 0.0) return 0.0;
  return (sxy - sx * sy / count) / denom;
}

inline BoundednessVerdict classify_growth(const std::vector<std::pair<int, double>>& curve,
                                          const GrowthThresholds& thr = {}) {
  if (curve.size() < 4)
    throw ValidationError("classify_growth needs at least 4 sweep points");
  BoundednessVerdict v;
  v.curve = curve;
  v.norm_estimate = curve.back().second;
  // vanishing curves (commuting operators) stabilize trivially
  double peak = 0.0;
  for (const auto& [n, val] : curve) peak = std::max(peak, val);
  if (peak <= 1e-13) {
    v.status = Boundedness::Bounded;
    return v;
  }
  std::vector<double> xs, ys;
  xs.reserve(curve.size());
  ys.reserve(curve.size());
  for (const auto& [n, val] : curve) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::max(val, 1e-300));
  }
  v.growth_exponent = fit_top_half_slope(xs, ys);
  if (v.growth_exponent < thr.bounded)
    v.status = Boundedness::Bounded;
  else if (v.growth_exponent > thr.unbounded)
    v.status = Boundedness::Unbounded;
  else
    v.status = Boundedness::Inconclusive;
  return v;
}

/// An operator handed to the analysis: a dense ambient matrix or, on circle
/// models, a multiplication operator given by its Fourier coefficients.
using Observable = std::variant<Matrix, FourierFunction>;

inline BlockMatrix embed_observable(const Observable& a,
                                    std::shared_ptr<const BandDecomposition> bd) {
  if (std::holds_alternative<Matrix>(a))
    return BlockMatrix::embed(std::get<Matrix>(a), std::move(bd));
  if (!is_circle_kind(bd->model_kind()))
    throw ValidationError("fourier observables require a circle model");
  const FourierFunction& f = std::get<FourierFunction>(a);
  return BlockMatrix::from_laurent(std::move(bd), [f](long d) { return f(d); });
}

/// Window compression norm; kernel-backed matrices above the dense cap go
/// through the matrix-free path.
inline double truncated_norm(const BlockMatrix& y, int window, const NormOptions& opt = {},
                             bool* clipped = nullptr) {
  bool clip = false;
  const auto pos = y.decomposition()->window_positions(window, &clip);
  if (clipped) *clipped = clip;
  const Index d = static_cast<Index>(pos.size());
  constexpr Index kDenseWindowMaxDim = 2048;
  if (y.kernel_backed() && d > kDenseWindowMaxDim)
    return operator_norm(y.window_norm_map(window), opt);
  return operator_norm(y.truncate(window).mat, opt);
}

/// Norm of the whole (truncated) model operator.
inline double ambient_norm(const BlockMatrix& y, const NormOptions& opt = {}) {
  return truncated_norm(y, y.decomposition()->full_window(), opt);
}

/// Result of probing [m(D), m(a)] for boundedness.  On finite-dimensional
/// models the derivative is exact (wD(a) = Da - aD) and carried in ambient
/// coordinates; on circle models it is the largest-window truncation.
struct WeakDerivative {
  BoundednessVerdict verdict;
  std::optional<BlockMatrix> commutator;        // circle path
  std::optional<WindowedOperator> derivative;   // materialized wD(a)
  int window = 0;                               // window of the materialization
};

inline constexpr Index kMaterializeMaxDim = 2048;

namespace detail {

inline std::vector<std::pair<int, double>> sweep_curve(const BlockMatrix& y,
                                                       const std::vector<int>& sweep,
                                                       const AnalysisConfig& cfg,
                                                       bool* leakage) {
  std::vector<std::pair<int, double>> curve(sweep.size());
  std::vector<char> clipped(sweep.size(), 0);
  parallel_for(
      sweep.size(),
      [&](std::size_t i) {
        bool clip = false;
        const double norm = truncated_norm(y, sweep[i], cfg.norm, &clip);
        curve[i] = {sweep[i], norm};
        clipped[i] = clip ? 1 : 0;
      },
      cfg.threads);
  if (leakage)
    *leakage = std::any_of(clipped.begin(), clipped.end(), [](char c) { return c != 0; });
  return curve;
}

}  // namespace detail

/// weak_derivative: classify S([m(D), m(a)]) and, when bounded, return the
/// stabilized operator.  Finite-dimensional models bypass the sweep.
inline WeakDerivative weak_derivative(const SelfAdjointModel& D, const Observable& a,
                                      const AnalysisConfig& cfg = {}) {
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  WeakDerivative out;
  if (D.finite_kind()) {
    if (!std::holds_alternative<Matrix>(a))
      throw ValidationError("finite-dimensional models take dense observables");
    const Matrix& am = std::get<Matrix>(a);
    if (am.rows() != D.dim() || am.cols() != D.dim())
      throw ValidationError("observable dimension does not match the model");
    const Matrix dd = D.to_dense();
    Matrix wd = dd * am - am * dd;
    out.verdict.status = Boundedness::Bounded;
    out.verdict.norm_estimate = operator_norm(wd, cfg.norm);
    out.window = bd->full_window();
    out.verdict.curve = {{out.window, out.verdict.norm_estimate}};
    WindowedOperator w;
    w.mat = std::move(wd);
    w.window = out.window;
    out.derivative = std::move(w);
    return out;
  }
  const BlockMatrix y = embed_observable(a, bd).commutator_with_d();
  const std::vector<int> sweep = cfg.effective_sweep(D);
  bool leakage = false;
  const auto curve = detail::sweep_curve(y, sweep, cfg, &leakage);
  out.verdict = classify_growth(curve, cfg.growth);
  out.verdict.leakage = leakage;
  out.window = sweep.back();
  out.commutator = y;
  if (out.verdict.status == Boundedness::Bounded) {
    const auto pos = bd->window_positions(out.window);
    if (static_cast<Index>(pos.size()) <= kMaterializeMaxDim)
      out.derivative = y.truncate(out.window);
  }
  return out;
}

/// Chain a, wD(a), wD²(a), ... with one verdict per order.
struct ChainTerm {
  BoundednessVerdict verdict;
  std::optional<Matrix> dense;  // finite models: exact term; circle: truncation
  int window = 0;
};

struct DerivativeChain {
  int order_requested = 0;
  std::vector<ChainTerm> terms;  // index = derivative order, including order 0

  bool fully_bounded(int through_order) const {
    if (static_cast<int>(terms.size()) <= through_order) return false;
    for (int k = 0; k <= through_order; ++k)
      if (terms[static_cast<std::size_t>(k)].verdict.status != Boundedness::Bounded) return false;
    return true;
  }
};

inline DerivativeChain higher_derivative(const SelfAdjointModel& D, const Observable& a, int order,
                                         const AnalysisConfig& cfg = {}) {
  if (order < 1) throw ValidationError("higher_derivative: order must be >= 1");
  DerivativeChain chain;
  chain.order_requested = order;
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  if (D.finite_kind()) {
    if (!std::holds_alternative<Matrix>(a))
      throw ValidationError("finite-dimensional models take dense observables");
    const Matrix dd = D.to_dense();
    Matrix term = std::get<Matrix>(a);
    if (term.rows() != D.dim()) throw ValidationError("observable dimension mismatch");
    for (int k = 0; k <= order; ++k) {
      ChainTerm t;
      t.verdict.status = Boundedness::Bounded;
      t.verdict.norm_estimate = operator_norm(term, cfg.norm);
      t.window = bd->full_window();
      t.verdict.curve = {{t.window, t.verdict.norm_estimate}};
      t.dense = term;
      chain.terms.push_back(std::move(t));
      if (k < order) term = (dd * term - term * dd).eval();
    }
    return chain;
  }
  const std::vector<int> sweep = cfg.effective_sweep(D);
  BlockMatrix y = embed_observable(a, bd);
  for (int k = 0; k <= order; ++k) {
    ChainTerm t;
    bool leakage = false;
    const auto curve = detail::sweep_curve(y, sweep, cfg, &leakage);
    t.verdict = classify_growth(curve, cfg.growth);
    t.verdict.leakage = leakage;
    t.window = sweep.back();
    if (t.verdict.status == Boundedness::Bounded) {
      const auto pos = bd->window_positions(t.window);
      if (static_cast<Index>(pos.size()) <= kMaterializeMaxDim) t.dense = y.truncate(t.window).mat;
    }
    const bool stop = t.verdict.status != Boundedness::Bounded;
    chain.terms.push_back(std::move(t));
    if (stop) break;  // status recorded; higher orders are not meaningful
    if (k < order) y = y.commutator_with_d();
  }
  return chain;
}

/// |||a|||_n = Σ_{k=0}^{n} ||wD^k(a)|| / k!  (factorials in floating point;
/// orders are capped at 20 by AnalysisConfig).
inline double n_norm(const DerivativeChain& chain, int n) {
  if (n < 0) throw ValidationError("n_norm: order must be >= 0");
  if (!chain.fully_bounded(n))
    throw ValidationError("n_norm requires a fully bounded chain through the requested order");
  double sum = 0.0;
  double factorial = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) factorial *= static_cast<double>(k);
    sum += chain.terms[static_cast<std::size_t>(k)].verdict.norm_estimate / factorial;
  }
  return sum;
}

/// ||a||_wncg^n = ||wD(a)|| + |||a|||^n with respect to |D|.
inline double wncg_norm(const SelfAdjointModel& D, const Observable& a, int n,
                        const AnalysisConfig& cfg = {}) {
  const WeakDerivative wd = weak_derivative(D, a, cfg);
  if (wd.verdict.status != Boundedness::Bounded)
    throw ValidationError("wncg norm requires a weakly D-differentiable operator");
  const SelfAdjointModel absD = abs_operator(D);
  const DerivativeChain chain = higher_derivative(absD, a, n, cfg);
  if (!chain.fully_bounded(n))
    throw ValidationError("wncg norm requires an n-times weakly |D|-differentiable operator");
  return wd.verdict.norm_estimate + n_norm(chain, n);
}

}  // namespace opderiv
