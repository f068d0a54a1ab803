#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string_view>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <Eigen/Dense>

#include "carma_hf/carma_core.hpp"
#include "carma_hf/parallel.hpp"
#include "carma_hf/sampling.hpp"

namespace carma_hf {

/// Random stream keyed by (seed, stream): std::mt19937_64 initialised through
/// std::seed_seq with the four 32-bit halves of the pair. Both algorithms are
/// fully specified by the C++ standard, and all variates below are explicit
/// transforms of the raw 64-bit output, so a (seed, stream) pair reproduces
/// bit-identically on any conforming toolchain. Distinct streams of one seed
/// serve as independent substreams for parallel paths.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by the Box-Muller transform.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson count by sequential inversion (means above 30 are split into chunks).
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

 private:
  std::uint64_t poisson_small(double mean) {
    const double u = uniform();
    if (mean != cached_mean_) {
      cached_mean_ = mean;
      cached_exp_ = std::exp(-mean);
    }
    double prob = cached_exp_;
    double cdf = prob;
    std::uint64_t k = 0;
    while (u > cdf && prob > 0) {
      ++k;
      prob *= mean / static_cast<double>(k);
      cdf += prob;
    }
    return k;
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
  double cached_mean_ = 0;
  double cached_exp_ = 1;
};

enum class DriverKind { brownian, compound_poisson };
enum class JumpDistribution { normal, two_point };

/// Zero-mean Lévy driver normalised so that Var(L_1) equals the model sigma2.
/// Compound-Poisson jumps are normal(0, sigma2 / rate) or +-sqrt(sigma2 / rate)
/// with probability 1/2 each.
struct DriverSpec {
  DriverKind kind = DriverKind::brownian;
  double jump_rate = 0;
  JumpDistribution jump_dist = JumpDistribution::normal;

  static DriverSpec brownian() { return {}; }
  static DriverSpec compound_poisson(double rate, JumpDistribution dist) {
    if (!(rate > 0)) throw Error(ErrorCode::invalid_argument, "jump rate must be positive");
    return {DriverKind::compound_poisson, rate, dist};
  }

  /// E[J^2] for the jump law that gives Var(L_1) = sigma2.
  double jump_second_moment(double sigma2) const { return sigma2 / jump_rate; }

  /// Var(L_1) implied by the rate and jump law.
  double unit_variance(double sigma2) const {
    return kind == DriverKind::brownian ? sigma2 : jump_rate * jump_second_moment(sigma2);
  }
};

enum class Scheme { exact_gaussian, euler };

constexpr std::string_view to_string(Scheme s) noexcept {
  return s == Scheme::exact_gaussian ? "exact_gaussian" : "euler";
}

struct SimulationResult {
  double delta = 0;
  std::vector<double> y;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Scheme scheme = Scheme::exact_gaussian;
  int substeps = 1;
};

namespace detail {

/// Lower Cholesky factor; adds 1e-14 trace to the diagonal if the plain
/// factorisation fails. An all-zero matrix yields a zero factor.
inline Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  const double trace = cov.trace();
  if (trace == 0.0) return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::MatrixXd repaired = cov + 1e-14 * trace * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  llt.compute(repaired);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::not_psd, "covariance is not positive semi-definite");
  return llt.matrixL();
}

}  // namespace detail

/// Transition of the state over one grid step: X' = F X + eps, eps ~ N(0, sigma2 Q).
struct ExactTransition {
  Eigen::MatrixXd F;
  Eigen::MatrixXd Q;  // per unit sigma2
};

/// Q = int_0^Δ e^{Au} e_p e_p^T e^{A^T u} du from the block exponential
/// exp([[A, e_p e_p^T], [0, -A^T]] Δ) = [[F, G], [0, *]], Q = G F^T.
inline ExactTransition exact_transition(const CarmaModel& model, const SamplingGrid& grid) {
  using L = long double;
  const auto c = companion<L>(model);
  const Eigen::Index p = model.p();
  DynMatrix<L> block = DynMatrix<L>::Zero(2 * p, 2 * p);
  block.topLeftCorner(p, p) = c.A;
  block.topRightCorner(p, p) = c.e_p * c.e_p.transpose();
  block.bottomRightCorner(p, p) = -c.A.transpose();
  const DynMatrix<L> e = matrix_exp<L>(block * static_cast<L>(grid.delta()));
  const DynMatrix<L> f = e.topLeftCorner(p, p);
  DynMatrix<L> q = e.topRightCorner(p, p) * f.transpose();
  q = ((q + q.transpose()) / L(2)).eval();
  return {f.cast<double>(), q.cast<double>()};
}

/// Exact Gaussian transitions on the Δ-grid, started from the stationary law.
/// `sigma2` may be zero (degenerate run: Y is identically zero).
inline SimulationResult simulate_gaussian_exact(const CarmaModel& model, const SamplingGrid& grid, std::size_t n,
                                                std::uint64_t seed, std::uint64_t stream, double sigma2) {
  if (!(sigma2 >= 0)) throw Error(ErrorCode::invalid_argument, "sigma2 must be non-negative");
  const Eigen::Index p = model.p();
  const auto trans = exact_transition(model, grid);
  const Eigen::MatrixXd stat = stationary_state_covariance<long double>(model).sigma.cast<double>();
  const Eigen::MatrixXd init_factor = detail::cholesky_with_jitter(sigma2 * stat);
  const Eigen::MatrixXd step_factor = detail::cholesky_with_jitter(sigma2 * trans.Q);
  const Eigen::VectorXd b = companion<double>(model).b;

  RandomStream rng(seed, stream);
  Eigen::VectorXd z(p), x(p), next(p);
  for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
  x = init_factor * z;

  SimulationResult out{grid.delta(), std::vector<double>(n), seed, stream, Scheme::exact_gaussian, 1};
  for (std::size_t t = 0; t < n; ++t) {
    out.y[t] = b.dot(x);
    for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
    next.noalias() = trans.F * x;
    next.noalias() += step_factor * z;
    x.swap(next);
  }
  return out;
}

inline SimulationResult simulate_gaussian_exact(const CarmaModel& model, const SamplingGrid& grid, std::size_t n,
                                                std::uint64_t seed, std::uint64_t stream = 0) {
  return simulate_gaussian_exact(model, grid, n, seed, stream, model.sigma2());
}

/// Euler-Maruyama on dX = A X dt + e_p dL at step Δ/substeps, started from
/// X = 0 and recorded after a burn-in of ceil(20 / (Δ min|Re λ|)) grid steps.
inline SimulationResult simulate_euler(const CarmaModel& model, const SamplingGrid& grid, std::size_t n, int substeps,
                                       const DriverSpec& driver, std::uint64_t seed, std::uint64_t stream = 0) {
  if (substeps < 1) throw Error(ErrorCode::invalid_argument, "substeps must be >= 1");
  const auto p = static_cast<std::size_t>(model.p());
  const double delta = grid.delta();
  const double h = delta / substeps;
  const auto a = model.a_coeffs();
  std::vector<double> b(p, 0.0);
  std::copy(model.b_coeffs().begin(), model.b_coeffs().end(), b.begin());

  double slowest = std::numeric_limits<double>::infinity();
  for (const auto& r : model.roots()) slowest = std::min(slowest, std::abs(r.value.real()));
  const auto burn_in = static_cast<std::size_t>(std::ceil(20.0 / (delta * slowest)));

  const double sigma2 = model.sigma2();
  const double gauss_scale = std::sqrt(sigma2 * h);
  const double jump_mean = driver.kind == DriverKind::compound_poisson ? driver.jump_rate * h : 0.0;
  const double jump_scale =
      driver.kind == DriverKind::compound_poisson ? std::sqrt(driver.jump_second_moment(sigma2)) : 0.0;

  RandomStream rng(seed, stream);
  auto increment = [&]() -> double {
    if (driver.kind == DriverKind::brownian) return gauss_scale * rng.normal();
    double sum = 0.0;
    for (auto k = rng.poisson(jump_mean); k > 0; --k)
      sum += driver.jump_dist == JumpDistribution::normal ? jump_scale * rng.normal()
                                                          : (rng.uniform() < 0.5 ? -jump_scale : jump_scale);
    return sum;
  };

  std::vector<double> x(p, 0.0);
  SimulationResult out{delta, std::vector<double>(n), seed, stream, Scheme::euler, substeps};
  for (std::size_t t = 0; t < burn_in + n; ++t) {
    if (t >= burn_in) {
      double y = 0.0;
      for (std::size_t i = 0; i < p; ++i) y += b[i] * x[i];
      out.y[t - burn_in] = y;
    }
    for (int s = 0; s < substeps; ++s) {
      // last row of A is (-a_p, ..., -a_1)
      double top = 0.0;
      for (std::size_t j = 0; j < p; ++j) top -= a[p - 1 - j] * x[j];
      for (std::size_t i = 0; i + 1 < p; ++i) x[i] += h * x[i + 1];
      x[p - 1] += h * top + increment();
    }
  }
  return out;
}

/// `paths` independent exact-Gaussian runs on substreams 0..paths-1 of `seed`.
inline std::vector<SimulationResult> simulate_gaussian_exact_paths(const CarmaModel& model, const SamplingGrid& grid,
                                                                   std::size_t n, std::uint64_t seed,
                                                                   std::size_t paths) {
  return parallel_map(paths, [&](std::size_t i) { return simulate_gaussian_exact(model, grid, n, seed, i); });
}

/// Biased sample autocovariances gamma(0..max_lag) of an m-dependent series
/// with standard errors from the Bartlett-type long-run variance of the lag
/// products x_t x_{t+h}, which are (m + h)-dependent; the Gaussian Bartlett
/// formula is the fallback when that estimate is not positive.
inline CovSequence empirical_acvf(std::span<const double> x, std::size_t max_lag, std::size_t dependence,
                                  double delta) {
  const std::size_t n = x.size();
  if (n < 2 * (max_lag + dependence) + 2) throw Error(ErrorCode::series_too_short, "series too short for lags");
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t t = 0; t < n; ++t) c[t] = x[t] - mean;

  auto acvf = [&](std::size_t lag) {
    long double acc = 0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += c[t] * c[t + lag];
    return static_cast<double>(acc / n);
  };

  CovSequence out{delta, {}, Provenance::empirical, {}};
  const std::size_t ref_lags = std::max(max_lag, dependence) * 2 + 1;
  std::vector<double> ref(ref_lags + 1);
  for (std::size_t h = 0; h <= ref_lags; ++h) ref[h] = acvf(h);
  auto model_gamma = [&](long long lag) {
    const auto a = static_cast<std::size_t>(std::llabs(lag));
    return a <= dependence ? ref[a] : 0.0;
  };

  std::vector<double> u;
  for (std::size_t h = 0; h <= max_lag; ++h) {
    out.values.push_back(ref[h]);
    const std::size_t len = n - h;
    u.resize(len);
    double umean = 0;
    for (std::size_t t = 0; t < len; ++t) {
      u[t] = c[t] * c[t + h];
      umean += u[t];
    }
    umean /= static_cast<double>(len);
    long double lrv = 0;
    for (std::size_t k = 0; k <= dependence + h; ++k) {
      long double acc = 0;
      for (std::size_t t = 0; t + k < len; ++t) acc += (u[t] - umean) * (u[t + k] - umean);
      lrv += (k == 0 ? 1 : 2) * acc / len;
    }
    double var = static_cast<double>(lrv) / static_cast<double>(n);
    if (!(var > 0)) {
      double bartlett = 0;
      const auto m = static_cast<long long>(dependence);
      for (long long k = -m - static_cast<long long>(h); k <= m + static_cast<long long>(h); ++k)
        bartlett += model_gamma(k) * model_gamma(k) +
                    model_gamma(k + static_cast<long long>(h)) * model_gamma(k - static_cast<long long>(h));
      var = bartlett / static_cast<double>(n);
    }
    out.standard_errors.push_back(std::sqrt(var));
  }
  return out;
}

/// Applies phi(B) to a simulated series and returns the empirical
/// autocovariances of the (p-1)-dependent filtered sequence at lags 0..max_lag.
inline CovSequence empirical_filtered_acvf(const SimulationResult& result, const CarmaModel& model,
                                           std::size_t max_lag) {
  const auto p = static_cast<std::size_t>(model.p());
  if (result.y.size() < 100 * p) {
    std::ostringstream msg;
    msg << "series of length " << result.y.size() << " is shorter than 100 p = " << 100 * p;
    throw Error(ErrorCode::series_too_short, msg.str());
  }
  const auto phi = filter_coefficients(model, SamplingGrid(result.delta));
  std::vector<double> filtered(result.y.size() - p);
  for (std::size_t t = p; t < result.y.size(); ++t) {
    double acc = 0;
    for (std::size_t k = 0; k <= p; ++k) acc += phi.A[k] * result.y[t - k];
    filtered[t - p] = acc;
  }
  return empirical_acvf(filtered, max_lag, p - 1, result.delta);
}

/// Portmanteau statistic for zero autocorrelation at lags first..first+count-1
/// of an m-dependent series, each lag scaled by its Bartlett variance
/// (1 + 2 sum_{j=1}^{m} rho_j^2) / n. Chi-square with `count` degrees of freedom.
struct WhitenessTest {
  double statistic = 0;
  double p_value = 1;
  int dof = 0;
};

inline WhitenessTest whiteness_test(std::span<const double> x, std::size_t first_lag, std::size_t count,
                                    std::size_t dependence) {
  const auto acv = empirical_acvf(x, first_lag + count - 1, 0, 0.0);
  const double g0 = acv.values[0];
  double inflation = 1.0;
  for (std::size_t j = 1; j <= dependence && j < acv.values.size(); ++j) inflation += 2 * std::pow(acv.values[j] / g0, 2);
  const double n = static_cast<double>(x.size());
  WhitenessTest out;
  for (std::size_t k = first_lag; k < first_lag + count; ++k) {
    const double rho = acv.values[k] / g0;
    out.statistic += rho * rho * n / inflation;
  }
  out.dof = static_cast<int>(count);
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.statistic));
  return out;
}

}  // namespace carma_hf
