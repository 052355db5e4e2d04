#pragma once

#include <string>
#include <variant>
#include <vector>

#include "opderiv/dynamics.hpp"
#include "opderiv/fourier.hpp"

namespace opderiv {

/// D = (1/i) d/dθ truncated to the Fourier modes u_{-L}..u_L.
inline SelfAdjointModel torus_D(int bandlimit) { return SelfAdjointModel::circle(bandlimit); }

/// Dense multiplication-operator matrix a_{rc} = f̂(r - c), r, c in -L..L.
inline Matrix toeplitz(const FourierFunction& f, int bandlimit) {
  if (bandlimit < 1) throw ValidationError("toeplitz: bandlimit must be >= 1");
  const Index n = 2 * static_cast<Index>(bandlimit) + 1;
  Matrix a(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) a(r, c) = f(static_cast<long>(r - c));
  return a;
}

enum class CounterexampleKind { PowerlawUnbounded, AntiderivativeSmooth, InverseLinearVector };

inline CounterexampleKind counterexample_kind_from_string(const std::string& s) {
  if (s == "powerlaw_unbounded") return CounterexampleKind::PowerlawUnbounded;
  if (s == "antiderivative_smooth") return CounterexampleKind::AntiderivativeSmooth;
  if (s == "inverse_linear_vector") return CounterexampleKind::InverseLinearVector;
  throw ValidationError("unknown counterexample kind: " + s);
}

/// Normalized vector with coefficients 1/|n| on u_n, 0 <- u_0: not in dom(D).
inline Vector inverse_linear_vector(int bandlimit) {
  const Index n = 2 * static_cast<Index>(bandlimit) + 1;
  Vector xi = Vector::Zero(n);
  for (long k = -bandlimit; k <= bandlimit; ++k) {
    if (k == 0) continue;
    xi(k + bandlimit) = 1.0 / std::abs(static_cast<double>(k));
  }
  return xi / xi.norm();
}

/// Designed witnesses for the weak/strong dichotomies.
inline std::variant<FourierFunction, Vector> make_counterexample(CounterexampleKind kind,
                                                                 int bandlimit) {
  switch (kind) {
    case CounterexampleKind::PowerlawUnbounded: return fourier_powerlaw();
    case CounterexampleKind::AntiderivativeSmooth: return fourier_antiderivative();
    case CounterexampleKind::InverseLinearVector:
    default: return inverse_linear_vector(bandlimit);
  }
}

/// Default windows for the coefficient-summability diagnostic.  The series
/// tails of the designed symbols flatten slowly (the powerlaw slope passes
/// the bounded threshold only near 2^16), so the sweep runs geometrically to
/// 2^19; coefficients are closed forms, so this costs nothing.
inline std::vector<int> default_coefficient_windows() {
  std::vector<int> w;
  for (int k = 6; k <= 19; ++k) w.push_back(1 << k);
  return w;
}

/// Classifies the partial-sum curve of Σ|f̂(n)|; Bounded means the symbol is a
/// bounded function by absolute summability.
inline BoundednessVerdict coefficient_summability(const FourierFunction& f,
                                                  std::vector<int> windows = {},
                                                  const GrowthThresholds& thr = {}) {
  if (windows.empty()) windows = default_coefficient_windows();
  return classify_growth(coefficient_partial_sums(f, windows), thr);
}

/// dom(D)-invariance probe: applies the multiplication operator to xi and
/// probes the image.  Weakly differentiable symbols must map core vectors
/// into the domain.
inline DomainProbe domain_invariance_probe(const FourierFunction& f, const Vector& xi,
                                           int bandlimit, const AnalysisConfig& cfg = {}) {
  const SelfAdjointModel D = torus_D(bandlimit);
  const auto pre = vector_domain_probe(D, xi, cfg);
  if (pre.verdict != DomainVerdict::InDomain)
    throw ValidationError("domain_invariance_probe: input vector is not in dom(D)");
  auto bd = std::make_shared<const BandDecomposition>(band_decompose(D));
  const Vector image = BlockMatrix::from_laurent(bd, [&f](long d) { return f(d); })
                           .apply_ambient(xi);
  return vector_domain_probe(D, image, cfg);
}

/// Max entry deviation between (r-c)·ĉ_absx(r-c) and (1/i)·ĉ_sign(r-c) over a
/// window; both reduce to -2/(π(r-c)) at odd differences.
inline double absx_sign_identity_defect(int bandlimit) {
  const Complex inv_i(0.0, -1.0);
  double worst = 0.0;
  for (long d = -2L * bandlimit; d <= 2L * bandlimit; ++d) {
    const Complex lhs = static_cast<double>(d) * coeffs_absx(d);
    const Complex rhs = inv_i * coeffs_sign(d);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace opderiv
