#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "carma_hf/carma_core.hpp"
#include "carma_hf/sampling.hpp"

namespace carma_hf {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr double omega_exclusion = 1e-8;

/// Odd Taylor coefficients c_k(omega) of sinh(x) / (cosh(x) - cos(omega)) = sum_k c_k x^{2k+1}.
struct SeriesCoefficients {
  double omega = 0;
  std::vector<double> c;
};

namespace detail {

inline void require_omega_away_from_zero(double omega) {
  if (!(std::abs(1.0 - std::cos(omega)) > omega_exclusion)) {
    std::ostringstream msg;
    msg << "omega = " << omega << " is within the excluded neighbourhood of 0 (|1 - cos omega| <= " << omega_exclusion
        << ")";
    throw Error(ErrorCode::omega_too_close_to_zero, msg.str());
  }
}

inline BigInt factorial(int n) {
  BigInt out = 1;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt out = 1;
  for (int j = 1; j <= k; ++j) out = out * (n - k + j) / j;
  return out;
}

inline BigInt ipow(long long base, int exponent) {
  BigInt out = 1;
  for (int j = 0; j < exponent; ++j) out *= base;
  return out;  // 0^0 == 1
}

}  // namespace detail

/// Power-series division of sinh(x) by cosh(x) - cos(omega) in y = x^2.
inline SeriesCoefficients c_coefficients(double omega, int max_k) {
  detail::require_omega_away_from_zero(omega);
  if (max_k < 0) throw Error(ErrorCode::out_of_range, "series order must be non-negative");
  using L = long double;
  const L u = 2 * std::pow(std::sin(static_cast<L>(omega) / 2), 2);  // 1 - cos(omega)
  std::vector<L> num(static_cast<std::size_t>(max_k) + 1), den(static_cast<std::size_t>(max_k) + 1);
  L fact = 1;  // running factorial
  for (int k = 0; k <= max_k; ++k) {
    // den_k = 1/(2k)!, num_k = 1/(2k+1)!
    if (k > 0) fact *= static_cast<L>(2 * k - 1) * static_cast<L>(2 * k);
    den[static_cast<std::size_t>(k)] = 1 / fact;
    num[static_cast<std::size_t>(k)] = 1 / (fact * static_cast<L>(2 * k + 1));
  }
  den[0] = u;
  std::vector<L> c(static_cast<std::size_t>(max_k) + 1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    L acc = num[k];
    for (std::size_t j = 1; j <= k; ++j) acc -= den[j] * c[k - j];
    c[k] = acc / u;
  }
  return {omega, std::vector<double>(c.begin(), c.end())};
}

/// Leading small-Δ form of f_MA(omega):
/// (sigma2/2pi) (-1)^{d-1} Δ^{2d-1} c_{d-1}(omega) 2^{p-1} (1 - cos omega)^p, d = p - q.
inline double f_ma_asymptotic(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  const int d = model.order_gap();
  const auto series = c_coefficients(omega, d - 1);
  using L = long double;
  const L u = 2 * std::pow(std::sin(static_cast<L>(omega) / 2), 2);
  const L sign = (d - 1) % 2 == 0 ? 1 : -1;
  const L value = static_cast<L>(model.sigma2()) / (2 * std::numbers::pi_v<L>)*sign *
                  std::pow(static_cast<L>(grid.delta()), 2 * d - 1) * static_cast<L>(series.c.back()) *
                  std::ldexp(L(1), model.p() - 1) * std::pow(u, model.p());
  return static_cast<double>(value);
}

/// C(h,k,i,n;N) = int_0^1 (s+i-1-h)^N (s+i-1-k+n)^N ds, expanded binomially.
inline Rational c_integral(int h, int k, int i, int n, int order) {
  Rational out = 0;
  const long long x = i - 1 - h;
  const long long y = i - 1 - k + n;
  for (int l1 = 0; l1 <= order; ++l1)
    for (int l2 = 0; l2 <= order; ++l2)
      out += Rational(detail::binomial(order, l1) * detail::binomial(order, l2) * detail::ipow(x, order - l1) *
                          detail::ipow(y, order - l2),
                      BigInt(l1 + l2 + 1));
  return out;
}

/// Exact rational coefficient kappa with gamma_MA(n) ~ kappa sigma2 Δ^{2(p-q)-1}.
inline Rational gamma_ma_asymptotic_coefficient(int p, int q, int n) {
  if (p < 1 || q < 0 || q >= p) throw Error(ErrorCode::bad_orders, "need 0 <= q < p");
  if (n < 0 || n > p - 1) throw Error(ErrorCode::out_of_range, "lag outside 0..p-1");
  const int order = p - q - 1;
  Rational sum = 0;
  for (int i = 1; i <= p - n; ++i)
    for (int k = 0; k <= n + i - 1; ++k)
      for (int h = 0; h <= i - 1; ++h) {
        const BigInt weight = detail::binomial(p, k) * detail::binomial(p, h);
        const Rational term = Rational(weight) * c_integral(h, k, i, n, order);
        if ((h + k) % 2 == 0)
          sum += term;
        else
          sum -= term;
      }
  const BigInt f = detail::factorial(order);
  return sum / Rational(f * f);
}

/// Closed form of the last-lag coefficient: (-1)^q / (2(p-q)-1)!.
inline Rational last_lag_coefficient(int p, int q) {
  const Rational mag(BigInt(1), detail::factorial(2 * (p - q) - 1));
  return q % 2 == 0 ? mag : Rational(-mag);
}

inline double gamma_ma_asymptotic(const CarmaModel& model, const SamplingGrid& grid, int n) {
  const Rational kappa = gamma_ma_asymptotic_coefficient(model.p(), model.q(), n);
  return static_cast<double>(kappa) * model.sigma2() * std::pow(grid.delta(), 2 * model.order_gap() - 1);
}

/// Small-Δ limit of the sampled MA part without its (1 - B)^q factor:
/// theta_limit and tau2 ~ tau2_scale sigma2 Δ^{2d-1}.
struct AsymptoticMa {
  int d = 1;
  std::vector<double> theta_limit;
  double tau2_scale = 1;
};

inline AsymptoticMa limit_ma_model(int d) {
  const double s3 = std::sqrt(3.0);
  const double s30 = std::sqrt(30.0);
  switch (d) {
    case 1:
      return {1, {}, 1.0};
    case 2:
      return {2, {2.0 - s3}, (2.0 + s3) / 6.0};
    case 3: {
      const double root = std::sqrt(375.0 + 64.0 * s30);
      return {3, {13.0 - std::sqrt(135.0 + 4.0 * s30), 2.0 * (8.0 + s30) - root}, (2.0 * (8.0 + s30) + root) / 120.0};
    }
    default: {
      std::ostringstream msg;
      msg << "no closed-form limit MA model for p - q = " << d << " (only 1, 2, 3)";
      throw Error(ErrorCode::unsupported_d, msg.str());
    }
  }
}

/// The full order-(p-1) limit: theta_limit(z) (1 - z)^q, coefficients 1..p-1.
inline std::vector<double> limit_ma_full_theta(int d, int q) {
  const auto lim = limit_ma_model(d);
  std::vector<double> head{1.0};
  head.insert(head.end(), lim.theta_limit.begin(), lim.theta_limit.end());
  Polynomial poly(head);
  for (int j = 0; j < q; ++j) poly = multiply(poly, Polynomial{1.0, -1.0});
  std::vector<double> out(poly.coeffs().begin() + 1, poly.coeffs().end());
  out.resize(static_cast<std::size_t>(d - 1 + q), 0.0);
  return out;
}

/// Leading small-Δ spectral density of (1 - B)^{p-q} Y^Δ:
/// (sigma2/2pi) Δ (-2Δ^2)^{d-1} c_{d-1}(omega) (1 - cos omega)^d.
inline double differenced_spectrum_asymptotic(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  const int d = model.order_gap();
  const auto series = c_coefficients(omega, d - 1);
  using L = long double;
  const L delta = static_cast<L>(grid.delta());
  const L u = 2 * std::pow(std::sin(static_cast<L>(omega) / 2), 2);
  const L value = static_cast<L>(model.sigma2()) / (2 * std::numbers::pi_v<L>)*delta *
                  std::pow(-2 * delta * delta, d - 1) * static_cast<L>(series.c.back()) * std::pow(u, d);
  return static_cast<double>(value);
}

}  // namespace carma_hf
