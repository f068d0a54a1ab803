#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "carma_hf/poly.hpp"
#include "carma_hf/sampling.hpp"

namespace carma_hf {

/// Invertible MA factor theta(B) = 1 + theta_1 B + ... + theta_m B^m and
/// innovation variance tau2 reproducing a covariance sequence.
struct MaFactorization {
  std::vector<double> theta;
  double tau2 = 0;
  /// max_n |tau2 sum_j theta_j theta_{j+n} - gamma(n)| / gamma(0)
  double residual = 0;
  /// Zeros of theta(z) on the unit circle (non-invertible limit).
  int boundary_roots = 0;
};

/// ARMA(p, p-1) representation phi(B) Y_n = theta(B) Z_n of the sampled sequence.
struct SampledArma {
  double delta = 0;
  FilterCoefficients phi;
  std::vector<double> theta;
  double tau2 = 0;
  double residual = 0;
  int boundary_roots = 0;
};

struct FactorizationOptions {
  double order_tolerance = 1e-12;  // |gamma(m)| <= tol * gamma(0) drops lag m
  double psd_tolerance = 1e-10;
  double unit_circle_tolerance = 1e-8;
  double pairing_tolerance = 1e-6;
};

/// Autocovariances tau2 sum_j theta_j theta_{j+n}, n = 0..m, with theta_0 = 1.
inline std::vector<double> ma_autocovariances(std::span<const double> theta, double tau2) {
  std::vector<double> full{1.0};
  full.insert(full.end(), theta.begin(), theta.end());
  std::vector<double> out(full.size(), 0.0);
  for (std::size_t n = 0; n < full.size(); ++n)
    for (std::size_t j = 0; j + n < full.size(); ++j) out[n] += tau2 * full[j] * full[j + n];
  return out;
}

namespace detail {

inline long double reconstruction_residual(std::span<const long double> gamma, std::span<const long double> theta_full,
                                           long double tau2) {
  long double worst = 0;
  for (std::size_t n = 0; n < gamma.size(); ++n) {
    long double acc = 0;
    for (std::size_t j = 0; j + n < theta_full.size(); ++j) acc += theta_full[j] * theta_full[j + n];
    worst = std::max(worst, std::abs(tau2 * acc - gamma[n]));
  }
  return worst / gamma[0];
}

/// Newton steps on tau2 sum_j theta_j theta_{j+n} = gamma(n); theta_full[0] == 1.
inline void polish_factorization(std::span<const long double> gamma, std::vector<long double>& theta_full,
                                 long double& tau2) {
  using L = long double;
  const auto m = static_cast<Eigen::Index>(gamma.size()) - 1;
  L best = reconstruction_residual(gamma, theta_full, tau2);
  for (int iter = 0; iter < 6 && best > 0; ++iter) {
    DynMatrix<L> jac = DynMatrix<L>::Zero(m + 1, m + 1);
    DynVector<L> f(m + 1);
    for (Eigen::Index n = 0; n <= m; ++n) {
      L acc = 0;
      for (Eigen::Index j = 0; j + n <= m; ++j) acc += theta_full[j] * theta_full[j + n];
      f(n) = tau2 * acc - gamma[static_cast<std::size_t>(n)];
      jac(n, 0) = acc;
      for (Eigen::Index l = 1; l <= m; ++l) {
        L d = 0;
        if (l + n <= m) d += theta_full[l + n];
        if (l - n >= 0) d += theta_full[l - n];
        jac(n, l) = tau2 * d;
      }
    }
    const auto lu = jac.fullPivLu();
    if (!lu.isInvertible()) return;
    const DynVector<L> step = lu.solve(f);
    std::vector<L> trial = theta_full;
    for (Eigen::Index l = 1; l <= m; ++l) trial[l] -= step(l);
    const L trial_tau2 = tau2 - step(0);
    const L r = reconstruction_residual(gamma, trial, trial_tau2);
    if (!(r < best) || !(trial_tau2 > 0)) return;
    best = r;
    theta_full = std::move(trial);
    tau2 = trial_tau2;
  }
}

}  // namespace detail

/// Minimum-phase spectral factorization of an MA(m) covariance sequence
/// gamma(0..m). The zeros of G(z) = sum_{|n|<=m} gamma(|n|) z^{n+m} come in
/// (z, 1/z) pairs; theta is assembled from the member of each pair with
/// |z| >= 1 and then refined by Newton steps on the covariance equations.
inline MaFactorization spectral_factorize(std::span<const double> cov, const FactorizationOptions& opts = {}) {
  using L = long double;
  using CL = std::complex<L>;
  if (cov.empty()) throw Error(ErrorCode::invalid_argument, "empty covariance sequence");
  if (!(cov[0] > 0)) throw Error(ErrorCode::not_psd, "gamma(0) must be positive");

  std::size_t m = cov.size() - 1;
  while (m > 0 && std::abs(cov[m]) <= opts.order_tolerance * cov[0]) --m;
  const std::vector<L> gamma(cov.begin(), cov.begin() + static_cast<std::ptrdiff_t>(m + 1));

  {
    Eigen::MatrixXd toeplitz(m + 1, m + 1);
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= m; ++j) toeplitz(i, j) = cov[i > j ? i - j : j - i];
    const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(toeplitz, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
    if (smallest < -opts.psd_tolerance * cov[0]) {
      std::ostringstream msg;
      msg << "Toeplitz matrix has eigenvalue " << smallest;
      throw Error(ErrorCode::not_psd, msg.str());
    }
  }

  MaFactorization out;
  if (m == 0) {
    out.tau2 = cov[0];
    return out;
  }

  std::vector<L> g(2 * m + 1);
  for (std::size_t j = 0; j <= 2 * m; ++j) g[j] = gamma[j > m ? j - m : m - j];
  const auto roots = find_roots(BasicPolynomial<L>(g));

  std::vector<BasicRoot<L>> outside, inside, selected;
  for (const auto& r : roots) {
    const L radius = std::abs(r.value);
    if (std::abs(radius - 1) <= static_cast<L>(opts.unit_circle_tolerance)) {
      if (r.multiplicity % 2 != 0)
        throw Error(ErrorCode::root_pairing_failure, "unit-circle zero of odd multiplicity");
      selected.push_back({r.value / radius, r.multiplicity / 2});
      out.boundary_roots += r.multiplicity / 2;
    } else {
      (radius > 1 ? outside : inside).push_back(r);
    }
  }
  std::vector<bool> used(inside.size(), false);
  for (const auto& o : outside) {
    std::size_t best = inside.size();
    L best_gap = static_cast<L>(opts.pairing_tolerance);
    for (std::size_t i = 0; i < inside.size(); ++i) {
      if (used[i] || inside[i].multiplicity != o.multiplicity) continue;
      const L gap = std::abs(o.value * inside[i].value - L(1));
      if (gap < best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best == inside.size()) {
      std::ostringstream msg;
      msg << "no reciprocal partner for zero " << static_cast<double>(o.value.real()) << "+"
          << static_cast<double>(o.value.imag()) << "i";
      throw Error(ErrorCode::root_pairing_failure, msg.str());
    }
    used[best] = true;
    selected.push_back(o);
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw Error(ErrorCode::root_pairing_failure, "unpaired zero inside the unit circle");

  // theta(z) = prod (1 - z / r)^mult
  std::vector<CL> c{CL(1)};
  for (const auto& r : selected)
    for (int rep = 0; rep < r.multiplicity; ++rep) {
      c.push_back(CL(0));
      for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= c[k - 1] / r.value;
    }
  std::vector<L> theta_full(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) theta_full[k] = c[k].real();

  L sumsq = 0;
  for (L t : theta_full) sumsq += t * t;
  L tau2 = gamma[0] / sumsq;
  if (out.boundary_roots == 0) detail::polish_factorization(gamma, theta_full, tau2);

  out.theta.assign(theta_full.begin() + 1, theta_full.end());
  out.tau2 = static_cast<double>(tau2);
  out.residual = static_cast<double>(detail::reconstruction_residual(gamma, theta_full, tau2));
  return out;
}

inline MaFactorization spectral_factorize(const CovSequence& cov, const FactorizationOptions& opts = {}) {
  return spectral_factorize(std::span<const double>(cov.values), opts);
}

/// Explicit ARMA(p, p-1) representation of Y^Δ: phi from the AR zeros, theta
/// and tau2 from the exact filtered autocovariances.
inline SampledArma sampled_arma(const CarmaModel& model, const SamplingGrid& grid) {
  const auto cov = filtered_acvf_sequence(model, grid);
  const auto f = spectral_factorize(cov);
  return {grid.delta(), filter_coefficients(model, grid), f.theta, f.tau2, f.residual, f.boundary_roots};
}

/// Runs the innovations recursion on the MA covariance sequence for `steps`
/// steps and returns the largest deviation of the limiting one-step
/// coefficients from theta (absolute) and of the prediction variance from
/// tau2 (relative).
inline double innovations_check(std::span<const double> cov, std::span<const double> theta, double tau2,
                                int steps = 200) {
  using L = long double;
  const auto n_max = static_cast<std::size_t>(steps);
  auto gamma = [&](std::size_t h) -> L { return h < cov.size() ? static_cast<L>(cov[h]) : L(0); };
  std::vector<std::vector<L>> th(n_max + 1);
  std::vector<L> v(n_max + 1);
  v[0] = gamma(0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    th[n].assign(n + 1, L(0));  // th[n][j] = theta_{n,j}
    for (std::size_t k = 0; k < n; ++k) {
      L acc = gamma(n - k);
      for (std::size_t j = 0; j < k; ++j) acc -= th[k][k - j] * th[n][n - j] * v[j];
      th[n][n - k] = acc / v[k];
    }
    L acc = gamma(0);
    for (std::size_t j = 0; j < n; ++j) acc -= th[n][n - j] * th[n][n - j] * v[j];
    v[n] = acc;
  }
  L worst = std::abs(v[n_max] - static_cast<L>(tau2)) / static_cast<L>(tau2);
  const std::size_t order = std::max(theta.size(), cov.size() > 0 ? cov.size() - 1 : 0);
  for (std::size_t j = 1; j <= std::min(order, n_max); ++j) {
    const L expected = j <= theta.size() ? static_cast<L>(theta[j - 1]) : L(0);
    worst = std::max(worst, std::abs(th[n_max][j] - expected));
  }
  return static_cast<double>(worst);
}

}  // namespace carma_hf
