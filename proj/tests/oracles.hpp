#pragma once

// Independent reference computations shared by the test binaries.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "carma_hf/carma_hf.hpp"

namespace carma_hf::testing {

inline ValidationPolicy no_coprime_check() {
  ValidationPolicy p;
  p.coprime_tolerance = 0.0;
  return p;
}

/// CARMA(2,1) with a = [3,2], b = [1,1]. Its AR and MA parts share the zero
/// -1, so the coprimality check is switched off; the process is an OU with rate 2.
inline CarmaModel carma21() { return validate({{3.0, 2.0}, {1.0, 1.0}, 1.0, "CARMA(2,1)"}, no_coprime_check()); }
inline CarmaModel carma21_coprime() { return validate({{3.0, 2.0}, {0.5, 1.0}, 1.0, "CARMA(2,1)"}); }
inline CarmaModel carma20() { return validate({{3.0, 2.0}, {1.0}, 1.0, "CARMA(2,0)"}); }
inline CarmaModel carma30() { return validate({{6.0, 11.0, 6.0}, {1.0}, 1.0, "CARMA(3,0)"}); }
inline CarmaModel car1(double a1 = 1.0, double sigma2 = 1.0) { return validate({{a1}, {1.0}, sigma2, "CAR(1)"}); }

inline std::vector<CarmaModel> corpus() { return {carma21(), carma20(), carma30()}; }

/// Ascending coefficients of prod (z - r) for real-coefficient root lists.
inline std::vector<double> real_poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    c.insert(c.begin(), 0.0);
    for (std::size_t k = 0; k + 1 < c.size(); ++k) c[k] -= r * c[k + 1];
  }
  std::vector<double> out;
  for (const auto& v : c) out.push_back(v.real());
  return out;
}

/// Random stable roots: real ones in [-3, -0.2] and conjugate pairs with
/// real part in [-3, -0.2] and imaginary part in [0.3, 3].
inline std::vector<std::complex<double>> random_stable_roots(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> re(-3.0, -0.2), im(0.3, 3.0), coin(0.0, 1.0);
  std::vector<std::complex<double>> roots;
  while (static_cast<int>(roots.size()) < degree) {
    if (degree - static_cast<int>(roots.size()) >= 2 && coin(rng) < 0.5) {
      const std::complex<double> z(re(rng), im(rng));
      roots.push_back(z);
      roots.push_back(std::conj(z));
    } else {
      roots.push_back(re(rng));
    }
  }
  return roots;
}

/// A random valid CARMA(p, q) model from random stable AR roots and random
/// MA roots (any half-plane).
inline CarmaModel random_model(std::mt19937_64& rng, int p, int q) {
  const auto ar_roots = random_stable_roots(rng, p);
  const auto asc = real_poly_from_roots(ar_roots);  // a_p .. a_1, 1
  std::vector<double> a(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) a[static_cast<std::size_t>(j)] = asc[static_cast<std::size_t>(p - 1 - j)];
  std::uniform_real_distribution<double> mre(-2.0, 2.0);
  std::vector<std::complex<double>> ma_roots;
  for (int j = 0; j < q; ++j) ma_roots.push_back(mre(rng));
  return validate({a, real_poly_from_roots(ma_roots), 1.0, "random"});
}

/// sigma2 int_0^inf g(u) g(u + h) du with the matrix-exponential kernel.
inline double acvf_by_quadrature(const CarmaModel& m, double h) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto f = [&](double u) { return kernel(m, u) * kernel(m, u + std::abs(h)); };
  return m.sigma2() * integrator.integrate(f, 1e-13);
}

/// Adaptive Gauss-Kronrod on [a, b].
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13, unsigned depth = 20) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, depth, tol);
}

/// int_{-pi}^{pi} f(omega) e^{i n omega} d omega for an even f.
template <class F>
double fourier_coefficient(F f, int n) {
  auto g = [&](double w) { return f(w) * std::cos(n * w); };
  return 2 * integrate(g, 0.0, std::numbers::pi, 1e-11, 15);
}

}  // namespace carma_hf::testing
