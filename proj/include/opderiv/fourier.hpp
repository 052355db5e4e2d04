#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "opderiv/model.hpp"
#include "opderiv/types.hpp"

namespace opderiv {

inline constexpr double kPi = std::numbers::pi;

/// Fourier coefficients of the sawtooth |x|(θ) (= |θ| on (-π, π]):
/// π/2 at n = 0, -2/(π n²) at odd n, 0 at even n ≠ 0.
inline Complex coeffs_absx(long n) {
  if (n == 0) return kPi / 2.0;
  if (n % 2 != 0) return -2.0 / (kPi * static_cast<double>(n) * static_cast<double>(n));
  return 0.0;
}

/// Fourier coefficients of sign(x)(θ): -2i/(π n) at odd n, 0 otherwise.
inline Complex coeffs_sign(long n) {
  if (n % 2 != 0) return Complex(0.0, -2.0 / (kPi * static_cast<double>(n)));
  return 0.0;
}

/// Bounded symbol with non-summable derivative coefficients: |n|^{-5/4}.
inline Complex coeffs_powerlaw(long n) {
  if (n == 0) return 0.0;
  return std::pow(std::abs(static_cast<double>(n)), -1.25);
}

/// Antiderivative of |x| - π/2: -2/(iπ n³) at odd n, 0 otherwise.  Twice
/// weakly differentiable on the circle.
inline Complex coeffs_antiderivative(long n) {
  if (n % 2 != 0) {
    const double nn = static_cast<double>(n);
    return Complex(0.0, 2.0 / (kPi * nn * nn * nn));  // -2/(i·π n³) = +2i/(π n³)
  }
  return 0.0;
}

/// A function on the circle presented by its coefficient sequence n -> c_n.
struct FourierFunction {
  std::string name;
  std::function<Complex(long)> coeff;
  int bandlimit = 0;                       // largest |n| the table/form covers
  std::optional<double> sup_norm_hint;     // known ||f||_inf, when available

  Complex operator()(long n) const {
    if (std::labs(n) > bandlimit) return 0.0;
    return coeff(n);
  }
};

inline constexpr int kClosedFormBandlimit = 1 << 20;

inline FourierFunction fourier_absx() {
  return {"absx", [](long n) { return coeffs_absx(n); }, kClosedFormBandlimit, kPi};
}

inline FourierFunction fourier_sign() {
  return {"sign", [](long n) { return coeffs_sign(n); }, kClosedFormBandlimit, 1.0};
}

inline FourierFunction fourier_constant(Complex value) {
  return {"constant", [value](long n) { return n == 0 ? value : Complex(0.0); },
          kClosedFormBandlimit, std::abs(value)};
}

inline FourierFunction fourier_harmonic(long mode, Complex amplitude = 1.0) {
  return {"harmonic",
          [mode, amplitude](long n) { return n == mode ? amplitude : Complex(0.0); },
          kClosedFormBandlimit, std::abs(amplitude)};
}

inline FourierFunction fourier_powerlaw() {
  return {"powerlaw_unbounded", [](long n) { return coeffs_powerlaw(n); },
          kClosedFormBandlimit, std::nullopt};
}

inline FourierFunction fourier_antiderivative() {
  return {"antiderivative_smooth", [](long n) { return coeffs_antiderivative(n); },
          kClosedFormBandlimit, std::nullopt};
}

inline FourierFunction fourier_table(std::map<long, Complex> table, int bandlimit,
                                     std::optional<double> hint = std::nullopt) {
  auto shared = std::make_shared<std::map<long, Complex>>(std::move(table));
  return {"table",
          [shared](long n) {
            auto it = shared->find(n);
            return it == shared->end() ? Complex(0.0) : it->second;
          },
          bandlimit, hint};
}

inline FourierFunction fourier_builtin(const std::string& name) {
  if (name == "absx") return fourier_absx();
  if (name == "sign") return fourier_sign();
  if (name == "powerlaw_unbounded" || name == "powerlaw") return fourier_powerlaw();
  if (name == "antiderivative_smooth" || name == "antideriv") return fourier_antiderivative();
  throw ValidationError("unknown builtin fourier function: " + name);
}

inline FourierFunction fourier_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ValidationError("fourier function JSON needs a \"type\" field");
  detail::check_schema_tag(j);
  const std::string type = j["type"].get<std::string>();
  if (type == "builtin") {
    if (!j.contains("name")) throw ValidationError("builtin fourier function needs \"name\"");
    FourierFunction f = fourier_builtin(j["name"].get<std::string>());
    if (j.contains("bandlimit")) f.bandlimit = j["bandlimit"].get<int>();
    return f;
  }
  if (type == "table") {
    if (!j.contains("bandlimit") || !j.contains("coeffs"))
      throw ValidationError("fourier table needs \"bandlimit\" and \"coeffs\"");
    const int L = j["bandlimit"].get<int>();
    std::map<long, Complex> table;
    for (const auto& [key, val] : j["coeffs"].items()) {
      const long n = std::stol(key);
      if (std::labs(n) > L) throw ValidationError("fourier table entry outside bandlimit");
      table[n] = detail::complex_from_json(val);
    }
    std::optional<double> hint;
    if (j.contains("sup_norm_hint")) hint = j["sup_norm_hint"].get<double>();
    return fourier_table(std::move(table), L, hint);
  }
  throw ValidationError("unknown fourier function type: " + type);
}

inline nlohmann::json fourier_to_json(const FourierFunction& f, int emit_bandlimit) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (long n = -emit_bandlimit; n <= emit_bandlimit; ++n) {
    const Complex c = f(n);
    if (c != Complex(0.0)) coeffs[std::to_string(n)] = detail::complex_to_json(c);
  }
  nlohmann::json j{{"schema", kSchemaTag},
                   {"type", "table"},
                   {"bandlimit", emit_bandlimit},
                   {"coeffs", std::move(coeffs)}};
  if (f.sup_norm_hint) j["sup_norm_hint"] = *f.sup_norm_hint;
  return j;
}

/// Partial sums Σ_{|n| <= N} |c_n| at the given windows (a pure coefficient
/// diagnostic for the boundedness of f; independent of any operator model).
inline std::vector<std::pair<int, double>> coefficient_partial_sums(
    const FourierFunction& f, const std::vector<int>& windows) {
  std::vector<std::pair<int, double>> out;
  out.reserve(windows.size());
  for (int w : windows) {
    double s = std::abs(f(0));
    for (long n = 1; n <= w; ++n) s += std::abs(f(n)) + std::abs(f(-n));
    out.emplace_back(w, s);
  }
  return out;
}

}  // namespace opderiv
