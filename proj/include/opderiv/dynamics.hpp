#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "opderiv/derivatives.hpp"

namespace opderiv {

/// alpha_t(a) = e^{itD} a e^{-itD} as a dense ambient operator.
inline Matrix alpha(const SelfAdjointModel& D, const Matrix& a, double t) {
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  return BlockMatrix::embed(a, bd).alpha_transform(t, false).reassemble();
}

struct LipschitzReport {
  std::vector<double> t_grid;     // ascending, all >= valid_floor
  std::vector<double> ratios;     // ||alpha_t(a) - a|| / t
  double sup_ratio = 0.0;
  double limit_estimate = 0.0;    // ratio at the smallest valid t
  double valid_floor = 0.0;
};

/// Per-t difference-quotient norms.  Grid points below the truncation floor
/// are dropped; an empty grid after flooring is an error.
inline LipschitzReport lipschitz_estimate(const SelfAdjointModel& D, const Observable& a,
                                          const std::vector<double>& t_grid,
                                          const AnalysisConfig& cfg = {}) {
  LipschitzReport rep;
  rep.valid_floor = cfg.valid_floor(D);
  for (double t : t_grid)
    if (t >= rep.valid_floor * (1.0 - 1e-12)) rep.t_grid.push_back(t);
  std::sort(rep.t_grid.begin(), rep.t_grid.end());
  if (rep.t_grid.empty()) throw ValidationError("empty time grid after flooring");
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  const BlockMatrix m_a = embed_observable(a, bd);
  const int full = bd->full_window();
  rep.ratios.resize(rep.t_grid.size());
  parallel_for(
      rep.t_grid.size(),
      [&](std::size_t i) {
        const double t = rep.t_grid[i];
        rep.ratios[i] = truncated_norm(m_a.alpha_transform(t, true), full, cfg.norm) / t;
      },
      cfg.threads);
  rep.sup_ratio = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.limit_estimate = rep.ratios.front();
  return rep;
}

inline LipschitzReport lipschitz_estimate(const SelfAdjointModel& D, const Observable& a,
                                          const AnalysisConfig& cfg = {}) {
  return lipschitz_estimate(D, a, cfg.time_grid(D), cfg);
}

struct ContinuityModulus {
  std::vector<double> delta;   // descending
  std::vector<double> omega;   // omega(delta) = sup_{t <= delta} ||alpha_t(b) - b||
};

/// Norm-continuity modulus of t -> alpha_t applied to the window-n truncation
/// of y.  Since E_n commutes with e^{itD}, pi_n(alpha_t(y) - y) equals the
/// alpha-difference of the truncated operator.
inline ContinuityModulus continuity_modulus(const BlockMatrix& y, int window,
                                            const std::vector<double>& delta_grid,
                                            const AnalysisConfig& cfg = {}) {
  std::vector<double> grid = delta_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) throw ValidationError("continuity_modulus: empty grid");
  std::vector<double> diffs(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        diffs[i] = truncated_norm(y.alpha_transform(grid[i], true), window, cfg.norm);
      },
      cfg.threads);
  ContinuityModulus out;
  double running = 0.0;
  std::vector<double> omega_asc(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    running = std::max(running, diffs[i]);
    omega_asc[i] = running;
  }
  out.delta.assign(grid.rbegin(), grid.rend());
  out.omega.assign(omega_asc.rbegin(), omega_asc.rend());
  return out;
}

/// Modulus for an ambient operator b.
inline ContinuityModulus continuity_modulus(const SelfAdjointModel& D, const Matrix& b,
                                            const std::vector<double>& delta_grid,
                                            const AnalysisConfig& cfg = {}) {
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  const BlockMatrix m_b = BlockMatrix::embed(b, bd);
  return continuity_modulus(m_b, bd->full_window(), delta_grid, cfg);
}

inline double omega_at_floor(const ContinuityModulus& cm) {
  return cm.omega.empty() ? 0.0 : cm.omega.back();  // smallest delta is last
}

enum class Classification { Strong, WeakOnly, NotWeak, Inconclusive };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::Strong: return "Strong";
    case Classification::WeakOnly: return "WeakOnly";
    case Classification::NotWeak: return "NotWeak";
    default: return "Inconclusive";
  }
}

struct DiffReport {
  Classification classification = Classification::Inconclusive;
  BoundednessVerdict weak;
  LipschitzReport lipschitz;
  std::optional<ContinuityModulus> continuity;   // of wD(a), when weakly differentiable
  std::optional<DerivativeChain> chain;          // when an order > 1 is requested
  double wd_norm = 0.0;
  double a_norm = 0.0;
  bool lipschitz_agrees = true;
};

/// Full weak/strong classification:
///  - weak verdict from the commutator truncation sweep,
///  - when bounded, the continuity modulus of wD(a) against the documented
///    thresholds (omega(delta_min) <= strong·||b|| -> Strong, >= weak·||b||
///    -> WeakOnly, else Inconclusive),
///  - cross-check of the Lipschitz sup ratio against ||wD(a)||.
inline DiffReport classify(const SelfAdjointModel& D, const Observable& a,
                           const AnalysisConfig& cfg = {}) {
  DiffReport rep;
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  const BlockMatrix m_a = embed_observable(a, bd);
  rep.a_norm = ambient_norm(m_a, cfg.norm);

  const WeakDerivative wd = weak_derivative(D, a, cfg);
  rep.weak = wd.verdict;
  rep.wd_norm = wd.verdict.norm_estimate;
  rep.lipschitz = lipschitz_estimate(D, a, cfg);

  if (cfg.order > 1) rep.chain = higher_derivative(D, a, cfg.order, cfg);

  if (wd.verdict.status == Boundedness::Unbounded) {
    rep.classification = Classification::NotWeak;
    return rep;
  }
  if (wd.verdict.status == Boundedness::Inconclusive) {
    rep.classification = Classification::Inconclusive;
    return rep;
  }

  // weakly differentiable: probe continuity of t -> alpha_t(wD(a))
  const BlockMatrix y = m_a.commutator_with_d();
  const int window = wd.window;
  rep.continuity = continuity_modulus(y, window, cfg.time_grid(D), cfg);
  const double b_norm = rep.wd_norm;
  const double omega_min = omega_at_floor(*rep.continuity);
  if (omega_min <= cfg.continuity.strong * b_norm)
    rep.classification = Classification::Strong;
  else if (omega_min >= cfg.continuity.weak * b_norm)
    rep.classification = Classification::WeakOnly;
  else
    rep.classification = Classification::Inconclusive;

  // ||wD(a)|| = ||a||_Lip cross-check
  const double gap = std::abs(rep.lipschitz.sup_ratio - b_norm);
  const double slack = cfg.lipschitz_agreement * b_norm + 1e-9 * std::max(1.0, rep.a_norm);
  if (gap > slack) {
    rep.lipschitz_agrees = false;
    rep.classification = Classification::Inconclusive;
  }
  return rep;
}

/// Difference quotients of matrix elements: <(alpha_t(a) - a)mu, nu> / (it).
inline std::vector<Complex> matrix_element_quotient(const SelfAdjointModel& D,
                                                    const Observable& a, const Vector& mu,
                                                    const Vector& nu,
                                                    const std::vector<double>& t_grid,
                                                    const AnalysisConfig& cfg = {}) {
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  const BlockMatrix m_a = embed_observable(a, bd);
  if (mu.size() != bd->dim() || nu.size() != bd->dim())
    throw ValidationError("matrix_element_quotient: vector dimension mismatch");
  std::vector<Complex> out(t_grid.size());
  parallel_for(
      t_grid.size(),
      [&](std::size_t i) {
        const double t = t_grid[i];
        const Vector w = m_a.alpha_transform(t, true).apply_ambient(mu);
        out[i] = (nu.adjoint() * w)(0) / Complex(0.0, t);
      },
      cfg.threads);
  return out;
}

enum class DomainVerdict { InDomain, NotInDomain, Inconclusive };

inline const char* to_string(DomainVerdict v) {
  switch (v) {
    case DomainVerdict::InDomain: return "InDomain";
    case DomainVerdict::NotInDomain: return "NotInDomain";
    default: return "Inconclusive";
  }
}

struct DomainProbe {
  std::vector<std::pair<double, double>> curve;  // (s, ||(e^{isD}xi - xi)/s||), s ascending
  double sup_quotient = 0.0;
  double estimate = 0.0;          // ||D xi|| estimate: quotient at the smallest s
  double growth_exponent = 0.0;   // fitted slope against 1/s
  DomainVerdict verdict = DomainVerdict::Inconclusive;
  double valid_floor = 0.0;
};

/// Probes xi ∈ dom(D) through the norms of (e^{isD}xi - xi)/s: stabilizing
/// quotients witness membership, power-law growth witnesses the complement.
inline DomainProbe vector_domain_probe(const SelfAdjointModel& D, const Vector& xi,
                                       const std::vector<double>& s_grid,
                                       const AnalysisConfig& cfg = {}) {
  const BandDecomposition bd = band_decompose(D);
  if (xi.size() != bd.dim())
    throw ValidationError("vector_domain_probe: vector dimension mismatch");
  Vector coords = xi;
  if (!bd.symbolic()) coords = bd.eigenvectors().adjoint() * xi;
  DomainProbe probe;
  probe.valid_floor = cfg.valid_floor(D);
  std::vector<double> grid;
  for (double s : s_grid)
    if (s >= probe.valid_floor * (1.0 - 1e-12)) grid.push_back(s);
  std::sort(grid.begin(), grid.end());
  if (grid.empty()) throw ValidationError("empty probe grid after flooring");
  for (double s : grid) {
    double acc = 0.0;
    for (Index i = 0; i < coords.size(); ++i) {
      const double lam = bd.eigenvalues()[static_cast<std::size_t>(i)];
      acc += std::norm((std::exp(Complex(0.0, s * lam)) - 1.0) * coords(i));
    }
    probe.curve.emplace_back(s, std::sqrt(acc) / s);
  }
  probe.estimate = probe.curve.front().second;
  for (const auto& [s, q] : probe.curve) probe.sup_quotient = std::max(probe.sup_quotient, q);
  // fit against the effective resolution 1/s (ascending)
  std::vector<double> xs, ys;
  for (auto it = probe.curve.rbegin(); it != probe.curve.rend(); ++it) {
    xs.push_back(1.0 / it->first);
    ys.push_back(std::max(it->second, 1e-300));
  }
  if (probe.sup_quotient <= 1e-13) {
    probe.verdict = DomainVerdict::InDomain;
    return probe;
  }
  probe.growth_exponent = fit_top_half_slope(xs, ys);
  if (probe.growth_exponent < cfg.growth.bounded)
    probe.verdict = DomainVerdict::InDomain;
  else if (probe.growth_exponent > cfg.growth.unbounded)
    probe.verdict = DomainVerdict::NotInDomain;
  else
    probe.verdict = DomainVerdict::Inconclusive;
  return probe;
}

inline DomainProbe vector_domain_probe(const SelfAdjointModel& D, const Vector& xi,
                                       const AnalysisConfig& cfg = {}) {
  return vector_domain_probe(D, xi, cfg.time_grid(D), cfg);
}

}  // namespace opderiv
