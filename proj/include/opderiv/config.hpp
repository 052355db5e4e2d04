#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "opderiv/model.hpp"
#include "opderiv/norms.hpp"
#include "opderiv/types.hpp"

namespace opderiv {

/// Growth classification of a truncation-norm curve: least-squares log-log
/// slope over the top half of the sweep.  Below `bounded` the curve counts as
/// stabilized, above `unbounded` as growing; the band between is Inconclusive.
struct GrowthThresholds {
  double bounded = 0.02;
  double unbounded = 0.10;
};

/// t -> alpha_t(b) continuity thresholds, as fractions of ||b||.
struct ContinuityThresholds {
  double strong = 0.1;
  double weak = 0.5;
};

struct AnalysisConfig {
  std::vector<int> sweep;        // empty: derived from the model
  double floor_coeff = 10.0;     // circle models: ratios trusted only for t >= c/L
  int points_per_decade = 24;
  double decades = 3.0;
  double t_max = 1.0;
  GrowthThresholds growth;
  ContinuityThresholds continuity;
  double lipschitz_agreement = 0.2;   // relative gap allowed between sup ratio and ||wD(a)||
  NormOptions norm;
  int order = 1;
  unsigned threads = 0;

  /// Smallest trusted t.  In windowed circle models everything below c/L
  /// behaves finite-dimensionally and would mask continuum behavior.
  double valid_floor(const SelfAdjointModel& model) const {
    if (is_circle_kind(model.kind()))
      return floor_coeff / static_cast<double>(model.bandlimit());
    return t_max * std::pow(10.0, -decades);
  }

  /// Log-spaced grid from the floor to t_max, ascending.
  std::vector<double> time_grid(const SelfAdjointModel& model) const {
    return log_grid(valid_floor(model));
  }

  std::vector<double> log_grid(double floor) const {
    if (floor <= 0.0 || floor >= t_max)
      throw ValidationError("empty time grid after flooring");
    const double span = std::log10(t_max / floor);
    const int npts = std::max(2, static_cast<int>(std::lround(points_per_decade * span)) + 1);
    std::vector<double> grid(static_cast<std::size_t>(npts));
    for (int k = 0; k < npts; ++k)
      grid[static_cast<std::size_t>(k)] =
          floor * std::pow(t_max / floor, static_cast<double>(k) / (npts - 1));
    return grid;
  }

  /// Truncation windows: user sweep clipped or {L/8, L/4, L/2, L}.
  std::vector<int> effective_sweep(const SelfAdjointModel& model) const {
    std::vector<int> s = sweep;
    if (s.empty()) {
      if (is_circle_kind(model.kind())) {
        const int L = model.bandlimit();
        for (int div : {8, 4, 2, 1}) s.push_back(std::max(1, L / div));
      } else {
        s = {1, 2, 4, 8};
      }
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    if (s.empty()) throw ValidationError("empty sweep");
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] <= s[i - 1]) throw ValidationError("sweep windows must be strictly increasing");
    if (s.front() < 1) throw ValidationError("sweep windows must be >= 1");
    return s;
  }

  static AnalysisConfig from_json(const nlohmann::json& j) {
    AnalysisConfig c;
    detail::check_schema_tag(j);
    if (j.contains("sweep")) c.sweep = j["sweep"].get<std::vector<int>>();
    if (j.contains("floor_coeff")) c.floor_coeff = j["floor_coeff"].get<double>();
    if (j.contains("points_per_decade")) c.points_per_decade = j["points_per_decade"].get<int>();
    if (j.contains("decades")) c.decades = j["decades"].get<double>();
    if (j.contains("t_max")) c.t_max = j["t_max"].get<double>();
    if (j.contains("growth_bounded")) c.growth.bounded = j["growth_bounded"].get<double>();
    if (j.contains("growth_unbounded")) c.growth.unbounded = j["growth_unbounded"].get<double>();
    if (j.contains("continuity_strong")) c.continuity.strong = j["continuity_strong"].get<double>();
    if (j.contains("continuity_weak")) c.continuity.weak = j["continuity_weak"].get<double>();
    if (j.contains("lipschitz_agreement"))
      c.lipschitz_agreement = j["lipschitz_agreement"].get<double>();
    if (j.contains("norm_rel_tol")) c.norm.rel_tol = j["norm_rel_tol"].get<double>();
    if (j.contains("norm_max_matvecs")) c.norm.max_matvecs = j["norm_max_matvecs"].get<int>();
    if (j.contains("dense_svd_max_dim")) c.norm.dense_max_dim = j["dense_svd_max_dim"].get<Index>();
    if (j.contains("order")) c.order = j["order"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    return {{"schema", kSchemaTag},
            {"sweep", sweep},
            {"floor_coeff", floor_coeff},
            {"points_per_decade", points_per_decade},
            {"decades", decades},
            {"t_max", t_max},
            {"growth_bounded", growth.bounded},
            {"growth_unbounded", growth.unbounded},
            {"continuity_strong", continuity.strong},
            {"continuity_weak", continuity.weak},
            {"lipschitz_agreement", lipschitz_agreement},
            {"norm_rel_tol", norm.rel_tol},
            {"norm_max_matvecs", norm.max_matvecs},
            {"dense_svd_max_dim", norm.dense_max_dim},
            {"order", order},
            {"threads", threads}};
  }

  void validate() const {
    if (growth.bounded <= 0 || growth.unbounded <= 0 || growth.bounded >= growth.unbounded)
      throw ValidationError("growth thresholds must satisfy 0 < bounded < unbounded");
    if (continuity.strong <= 0 || continuity.weak <= 0 || continuity.strong >= continuity.weak)
      throw ValidationError("continuity thresholds must satisfy 0 < strong < weak");
    if (t_max <= 0 || floor_coeff <= 0 || points_per_decade < 1 || decades <= 0)
      throw ValidationError("grid parameters must be positive");
    if (order < 1 || order > 20) throw ValidationError("order must be in [1, 20]");
  }
};

}  // namespace opderiv
