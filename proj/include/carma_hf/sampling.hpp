#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "carma_hf/carma_core.hpp"

namespace carma_hf {

/// Grid spacing Δ of the sampled sequence Y_{nΔ}.
class SamplingGrid {
 public:
  explicit SamplingGrid(double delta) : delta_(delta) {
    if (!(delta > 0) || !std::isfinite(delta)) throw Error(ErrorCode::invalid_argument, "grid spacing must be positive");
  }
  double delta() const noexcept { return delta_; }

  /// Δ max|Re λ| > 1: outside the small-Δ regime the asymptotic formulas describe.
  bool is_coarse_for(const CarmaModel& model) const noexcept {
    double worst = 0;
    for (const auto& r : model.roots()) worst = std::max(worst, std::abs(r.value.real()));
    return delta_ * worst > 1.0;
  }

 private:
  double delta_;
};

/// Coefficients of phi(B) = prod_j (1 - e^{lambda_j Δ} B) = sum_k A_k B^k.
struct FilterCoefficients {
  double delta = 0;
  std::vector<double> A;  // A[0] == 1

  int order() const noexcept { return static_cast<int>(A.size()) - 1; }
};

enum class Provenance { exact, asymptotic, empirical };

constexpr std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::exact: return "exact";
    case Provenance::asymptotic: return "asymptotic";
    case Provenance::empirical: return "empirical";
  }
  return "unknown";
}

/// Finite autocovariance list gamma(0..n_max) on a Δ-grid.
struct CovSequence {
  double delta = 0;
  std::vector<double> values;
  Provenance provenance = Provenance::exact;
  std::vector<double> standard_errors;  // empirical sequences only

  std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

namespace detail {

using L = long double;
using CL = std::complex<long double>;

inline constexpr int gauss_points = 32;

inline std::vector<L> filter_coefficients_ext(const CarmaModel& model, double delta) {
  std::vector<CL> c{CL(1)};
  for (const auto& r : model.roots_ext()) {
    const CL w = std::exp(r.value * static_cast<L>(delta));
    for (int rep = 0; rep < r.multiplicity; ++rep) {
      c.push_back(CL(0));
      for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= w * c[k - 1];
    }
  }
  std::vector<L> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k].imag()) > 1e-12L * (1 + std::abs(c[k].real())))
      throw Error(ErrorCode::invalid_argument, "filter coefficients are not real; root set not conjugate-closed");
    out[k] = c[k].real();
  }
  return out;
}

/// cosh(x) - cos(w) written as 2 sinh^2(x/2) + 2 sin^2(w/2) to avoid cancellation near x, w -> 0.
inline CL cosh_minus_cos(CL x, L omega) {
  const CL sh = std::sinh(x / L(2));
  const L sn = std::sin(omega / L(2));
  return L(2) * sh * sh + L(2) * sn * sn;
}

inline L power_transfer_ext(const CarmaModel& model, double delta, double omega) {
  const L d = static_cast<L>(delta);
  CL prod(1);
  for (const auto& r : model.roots_ext())
    for (int rep = 0; rep < r.multiplicity; ++rep) prod *= cosh_minus_cos(r.value * d, static_cast<L>(omega));
  const L a1 = static_cast<L>(model.a_coeffs()[0]);
  return std::ldexp(L(1), model.p()) * std::exp(-a1 * d) * prod.real();
}

/// Residue weights b(λ) b(-λ) / (a'(λ) a(-λ)) at the simple AR zeros.
inline std::vector<CL> residue_weights(const CarmaModel& model) {
  const BasicPolynomial<L> a(model.ar_polynomial());
  const BasicPolynomial<L> da = derivative(a);
  const BasicPolynomial<L> b(model.ma_polynomial());
  std::vector<CL> w;
  for (const auto& r : model.roots_ext()) {
    const CL z = r.value;
    w.push_back(b(z) * b(-z) / (da(z) * a(-z)));
  }
  return w;
}

inline L spectral_density_sampled_residue_ext(const CarmaModel& model, double delta, double omega) {
  if (!model.roots_ext().all_simple())
    throw Error(ErrorCode::invalid_argument, "residue route requires simple autoregressive zeros");
  const auto weights = residue_weights(model);
  const L d = static_cast<L>(delta);
  CL sum(0);
  std::size_t i = 0;
  for (const auto& r : model.roots_ext()) {
    const CL x = r.value * d;
    sum += weights[i++] * std::sinh(x) / cosh_minus_cos(x, static_cast<L>(omega));
  }
  return -static_cast<L>(model.sigma2()) / (2 * std::numbers::pi_v<L>)*sum.real();
}

/// Evaluates g(t) = b^T e^{At} e_p in long double with the companion matrices built once.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const CarmaModel& model) : c_(companion<L>(model)), p_(model.p()) {}

  L operator()(L t) const {
    if (t < 0) return 0;
    if (t == 0) return c_.b.dot(c_.e_p);
    const DynMatrix<L> e = matrix_exp<L>(c_.A * t);
    return c_.b.dot(e.col(p_ - 1));
  }

 private:
  CompanionMatrix<L> c_;
  Eigen::Index p_;
};

/// sigma2 sum_{i,k,h} A_k A_h int_{(i-1)Δ}^{iΔ} g(s - hΔ) g(s - (k-n)Δ) ds with
/// i = 1..i_max and k capped at k_cap(i).
template <class KCap>
L filtered_triple_sum(const CarmaModel& model, double delta, int n, int i_max, KCap k_cap) {
  using boost::math::quadrature::gauss;
  const auto A = filter_coefficients_ext(model, delta);
  const KernelEvaluator g(model);
  const L d = static_cast<L>(delta);
  L total = 0;
  for (int i = 1; i <= i_max; ++i) {
    const int kmax = k_cap(i);
    auto integrand = [&](L s) {
      L left = 0;
      for (int h = 0; h <= i - 1; ++h) left += A[static_cast<std::size_t>(h)] * g(s - h * d);
      L right = 0;
      for (int k = 0; k <= kmax; ++k) right += A[static_cast<std::size_t>(k)] * g(s - (k - n) * d);
      return left * right;
    };
    total += gauss<L, gauss_points>::integrate(integrand, (i - 1) * d, i * d);
  }
  return static_cast<L>(model.sigma2()) * total;
}

/// Sampled autocovariances gamma_Y(hΔ), h = 0..H, via the state-space route,
/// truncated once the exponential tail bound drops below the target.
inline std::vector<L> sampled_acvf_tail_certified(const CarmaModel& model, double delta,
                                                  std::size_t max_terms = 10'000'000) {
  const auto c = companion<L>(model);
  const auto s = stationary_state_covariance<L>(model);
  const DynMatrix<L> step = matrix_exp<L>(c.A * static_cast<L>(delta));
  const L sigma2 = static_cast<L>(model.sigma2());
  DynVector<L> v = s.sigma * c.b;
  const L gamma0 = sigma2 * c.b.dot(v);

  L rate = model.roots_ext().max_real_part();  // < 0
  if (!model.residue_route_ok()) rate /= 2;    // absorb t^{m-1} factors of repeated zeros
  const L ratio = std::exp(rate * static_cast<L>(delta));
  // Stricter than an absolute 1e-12: f_Δ can be many orders below gamma_Y(0)
  // at small Δ, and the folded route must stay comparable to the residue route.
  const L target = 1e-18L * std::min<L>(1, gamma0);
  const L needed = std::log(target * (1 - ratio) / gamma0) / (rate * static_cast<L>(delta));
  if (!(needed < static_cast<L>(max_terms))) {
    std::ostringstream msg;
    msg << "folded autocovariance sum needs " << static_cast<double>(needed) << " terms (cap " << max_terms << ")";
    throw Error(ErrorCode::truncation_unreachable, msg.str());
  }
  const auto terms = static_cast<std::size_t>(std::max<L>(1, std::ceil(needed))) + 1;
  std::vector<L> out(terms);
  for (std::size_t h = 0; h < terms; ++h) {
    out[h] = sigma2 * c.b.dot(v);
    v = (step * v).eval();
  }
  return out;
}

inline L fold(std::span<const L> gammas, double omega) {
  L sum = 0;
  for (std::size_t h = gammas.size(); h-- > 1;) sum += gammas[h] * std::cos(static_cast<L>(h) * static_cast<L>(omega));
  return (gammas[0] + 2 * sum) / (2 * std::numbers::pi_v<L>);
}

}  // namespace detail

inline FilterCoefficients filter_coefficients(const CarmaModel& model, const SamplingGrid& grid) {
  const auto ext = detail::filter_coefficients_ext(model, grid.delta());
  return {grid.delta(), std::vector<double>(ext.begin(), ext.end())};
}

/// psi(omega) = |phi(e^{i omega})|^2 = 2^p e^{-a_1 Δ} prod_i (cosh(lambda_i Δ) - cos omega).
inline double power_transfer(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  return static_cast<double>(detail::power_transfer_ext(model, grid.delta(), omega));
}

/// f_Δ by the residue sum of the sampled spectral integral (simple zeros only).
inline double spectral_density_sampled_residue(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  return static_cast<double>(detail::spectral_density_sampled_residue_ext(model, grid.delta(), omega));
}

/// f_Δ as (1/2pi) sum_h gamma_Y(hΔ) e^{-i h omega}, valid for any multiplicities.
inline std::vector<double> spectral_density_sampled_folded(const CarmaModel& model, const SamplingGrid& grid,
                                                           std::span<const double> omegas) {
  const auto gammas = detail::sampled_acvf_tail_certified(model, grid.delta());
  std::vector<double> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(static_cast<double>(detail::fold(gammas, w)));
  return out;
}

inline double spectral_density_sampled_folded(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  return spectral_density_sampled_folded(model, grid, std::span<const double>(&omega, 1)).front();
}

inline std::vector<double> spectral_density_sampled(const CarmaModel& model, const SamplingGrid& grid,
                                                    std::span<const double> omegas) {
  if (!model.residue_route_ok()) return spectral_density_sampled_folded(model, grid, omegas);
  std::vector<double> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(spectral_density_sampled_residue(model, grid, w));
  return out;
}

inline double spectral_density_sampled(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  return spectral_density_sampled(model, grid, std::span<const double>(&omega, 1)).front();
}

/// f_MA(omega) = psi(omega) f_Δ(omega), the spectral density of phi(B) Y^Δ.
inline std::vector<double> spectral_density_filtered(const CarmaModel& model, const SamplingGrid& grid,
                                                     std::span<const double> omegas) {
  std::vector<double> out;
  out.reserve(omegas.size());
  if (model.residue_route_ok()) {
    for (double w : omegas)
      out.push_back(static_cast<double>(detail::power_transfer_ext(model, grid.delta(), w) *
                                        detail::spectral_density_sampled_residue_ext(model, grid.delta(), w)));
    return out;
  }
  const auto gammas = detail::sampled_acvf_tail_certified(model, grid.delta());
  for (double w : omegas)
    out.push_back(static_cast<double>(detail::power_transfer_ext(model, grid.delta(), w) * detail::fold(gammas, w)));
  return out;
}

inline double spectral_density_filtered(const CarmaModel& model, const SamplingGrid& grid, double omega) {
  return spectral_density_filtered(model, grid, std::span<const double>(&omega, 1)).front();
}

/// Exact autocovariance gamma_MA(n), n = 0..p-1, of the filtered sequence
/// phi(B) Y^Δ, by 32-point Gauss-Legendre on each Δ-subinterval.
inline double acvf_filtered(const CarmaModel& model, const SamplingGrid& grid, int n) {
  const int p = model.p();
  if (n < 0 || n > p - 1) {
    std::ostringstream msg;
    msg << "lag " << n << " outside 0.." << p - 1;
    throw Error(ErrorCode::out_of_range, msg.str());
  }
  return static_cast<double>(
      detail::filtered_triple_sum(model, grid.delta(), n, p - n, [n](int i) { return n + i - 1; }));
}

/// The same autocovariance without dropping the terms that vanish by the
/// annihilation identity; defined for every n >= 0 and numerically zero for
/// n >= p.
inline double acvf_filtered_extended(const CarmaModel& model, const SamplingGrid& grid, int n) {
  if (n < 0) throw Error(ErrorCode::out_of_range, "lag must be non-negative");
  const int p = model.p();
  return static_cast<double>(
      detail::filtered_triple_sum(model, grid.delta(), n, p, [n, p](int i) { return std::min(n + i - 1, p); }));
}

inline CovSequence filtered_acvf_sequence(const CarmaModel& model, const SamplingGrid& grid) {
  CovSequence out{grid.delta(), {}, Provenance::exact, {}};
  for (int n = 0; n < model.p(); ++n) out.values.push_back(acvf_filtered(model, grid, n));
  return out;
}

/// sum_k A_k g(t - kΔ): the filtered kernel, identically zero for t > pΔ.
inline double annihilation_residual(const CarmaModel& model, const SamplingGrid& grid, double t) {
  const double d = grid.delta();
  if (!(t > model.p() * d)) throw Error(ErrorCode::out_of_range, "annihilation witness needs t > p*delta");
  const auto A = detail::filter_coefficients_ext(model, d);
  const detail::KernelEvaluator g(model);
  long double sum = 0;
  for (std::size_t k = 0; k < A.size(); ++k)
    sum += A[k] * g(static_cast<long double>(t) - static_cast<long double>(k) * static_cast<long double>(d));
  return static_cast<double>(sum);
}

}  // namespace carma_hf
