#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <type_traits>
#include <vector>

#include "carma_hf/error.hpp"

namespace carma_hf {

/// Real-coefficient polynomial, coefficients stored in ascending degree order
/// (coeffs()[k] multiplies z^k). Trailing zeros are trimmed on construction;
/// the zero polynomial is represented by the single coefficient 0.
template <class Real>
class BasicPolynomial {
 public:
  using value_type = Real;

  BasicPolynomial() : coeffs_{Real(0)} {}

  explicit BasicPolynomial(std::vector<Real> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  BasicPolynomial(std::initializer_list<Real> coeffs) : coeffs_(coeffs) { trim(); }

  template <class Other>
  explicit BasicPolynomial(const BasicPolynomial<Other>& other)
      : coeffs_(other.coeffs().begin(), other.coeffs().end()) {}

  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const Real> coeffs() const noexcept { return coeffs_; }
  Real operator[](std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : Real(0); }
  Real leading() const noexcept { return coeffs_.back(); }
  bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == Real(0); }

  /// Horner evaluation; T may be real or complex.
  template <class T>
  T operator()(const T& z) const {
    T acc = T(coeffs_.back());
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * z + T(coeffs_[k]);
    return acc;
  }

  friend bool operator==(const BasicPolynomial&, const BasicPolynomial&) = default;

 private:
  void trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == Real(0)) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(Real(0));
  }

  std::vector<Real> coeffs_;
};

using Polynomial = BasicPolynomial<double>;

template <class Real>
std::complex<Real> eval(const BasicPolynomial<Real>& poly, std::complex<Real> z) {
  return poly(z);
}

template <class Real>
BasicPolynomial<Real> derivative(const BasicPolynomial<Real>& poly) {
  if (poly.degree() == 0) return BasicPolynomial<Real>{};
  std::vector<Real> out(static_cast<std::size_t>(poly.degree()));
  for (std::size_t k = 1; k < poly.coeffs().size(); ++k) out[k - 1] = static_cast<Real>(k) * poly[k];
  return BasicPolynomial<Real>(std::move(out));
}

template <class Real>
BasicPolynomial<Real> multiply(const BasicPolynomial<Real>& lhs, const BasicPolynomial<Real>& rhs) {
  std::vector<Real> out(lhs.coeffs().size() + rhs.coeffs().size() - 1, Real(0));
  for (std::size_t i = 0; i < lhs.coeffs().size(); ++i)
    for (std::size_t j = 0; j < rhs.coeffs().size(); ++j) out[i + j] += lhs[i] * rhs[j];
  return BasicPolynomial<Real>(std::move(out));
}

/// Multiplies out prod_j (z - r_j) for a conjugate-closed list of roots and
/// keeps the real part of each coefficient.
template <class Real>
BasicPolynomial<Real> monic_from_roots(std::span<const std::complex<Real>> roots) {
  std::vector<std::complex<Real>> c{std::complex<Real>(1)};
  for (const auto& r : roots) {
    c.push_back(std::complex<Real>(0));
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
    c[0] = -r * c[0];
  }
  std::vector<Real> re(c.size());
  std::transform(c.begin(), c.end(), re.begin(), [](const auto& v) { return v.real(); });
  return BasicPolynomial<Real>(std::move(re));
}

template <class Real>
struct BasicRoot {
  std::complex<Real> value;
  int multiplicity = 1;
};

/// Distinct zeros of a polynomial with their multiplicities.
template <class Real>
class BasicRootSet {
 public:
  using Root = BasicRoot<Real>;

  BasicRootSet() = default;
  explicit BasicRootSet(std::vector<Root> roots) : roots_(std::move(roots)) {}

  template <class Other>
  explicit BasicRootSet(const BasicRootSet<Other>& other) {
    for (const auto& r : other)
      roots_.push_back({std::complex<Real>(static_cast<Real>(r.value.real()), static_cast<Real>(r.value.imag())),
                        r.multiplicity});
  }

  auto begin() const noexcept { return roots_.begin(); }
  auto end() const noexcept { return roots_.end(); }
  std::size_t size() const noexcept { return roots_.size(); }
  const Root& operator[](std::size_t i) const noexcept { return roots_[i]; }

  int total_multiplicity() const noexcept {
    int total = 0;
    for (const auto& r : roots_) total += r.multiplicity;
    return total;
  }

  bool all_simple() const noexcept {
    return std::all_of(roots_.begin(), roots_.end(), [](const Root& r) { return r.multiplicity == 1; });
  }

  /// Smallest pairwise distance between distinct roots (infinity for < 2 roots).
  Real min_separation() const noexcept {
    Real best = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < roots_.size(); ++i)
      for (std::size_t j = i + 1; j < roots_.size(); ++j) best = std::min(best, std::abs(roots_[i].value - roots_[j].value));
    return best;
  }

  Real max_real_part() const noexcept {
    Real best = -std::numeric_limits<Real>::infinity();
    for (const auto& r : roots_) best = std::max(best, r.value.real());
    return best;
  }

  Real max_modulus() const noexcept {
    Real best = 0;
    for (const auto& r : roots_) best = std::max(best, std::abs(r.value));
    return best;
  }

  /// Roots repeated according to multiplicity.
  std::vector<std::complex<Real>> expanded() const {
    std::vector<std::complex<Real>> out;
    for (const auto& r : roots_) out.insert(out.end(), static_cast<std::size_t>(r.multiplicity), r.value);
    return out;
  }

 private:
  std::vector<Root> roots_;
};

using RootSet = BasicRootSet<double>;

struct RootFinderOptions {
  int max_iterations = 500;
  double step_tolerance = 1e-13;
  double cluster_radius = 1e-6;
};

namespace detail {

template <class Real>
using WorkReal = std::conditional_t<(std::numeric_limits<Real>::digits < std::numeric_limits<long double>::digits),
                                    long double, Real>;

template <class W>
struct HornerResult {
  std::complex<W> value;
  std::complex<W> slope;
  W bound;  // sum |c_k| |z|^k, scale for the rounding error of `value`
};

template <class W>
HornerResult<W> horner_with_slope(std::span<const W> monic, std::complex<W> z) {
  const W az = std::abs(z);
  std::complex<W> p(monic.back());
  std::complex<W> dp(0);
  W bound = std::abs(monic.back());
  for (std::size_t k = monic.size() - 1; k-- > 0;) {
    dp = dp * z + p;
    p = p * z + monic[k];
    bound = bound * az + std::abs(monic[k]);
  }
  return {p, dp, bound};
}


/// Newton on the (m-1)-th derivative, where an m-fold root is simple (plain
/// Newton for m = 1). The result is kept only if it stays inside the cluster.
template <class W>
std::complex<W> polish_multiple_root(std::span<const W> monic, int m, std::complex<W> start, W spread) {
  std::vector<W> d(monic.begin(), monic.end());
  for (int j = 0; j < m - 1; ++j) {
    for (std::size_t k = 1; k < d.size(); ++k) d[k - 1] = d[k] * static_cast<W>(k);
    d.pop_back();
  }
  std::complex<W> z = start;
  for (int it = 0; it < 20; ++it) {
    const auto h = horner_with_slope<W>(d, z);
    if (h.slope == std::complex<W>(0)) break;
    const auto step = h.value / h.slope;
    z -= step;
    if (std::abs(step) <= 4 * std::numeric_limits<W>::epsilon() * (1 + std::abs(z))) break;
  }
  const W slack = std::max(2 * spread, W(1e-10) * (1 + std::abs(start)));
  return std::abs(z - start) <= slack ? z : start;
}

}  // namespace detail

/// Zeros of `poly` by Aberth-Ehrlich simultaneous iteration, run in at least
/// long double precision, then clustered into multiplicity groups and made
/// exactly closed under conjugation.
///
/// Roots within `cluster_radius` of each other are reported as one root of the
/// combined multiplicity (value = arithmetic mean). Multiple roots are only
/// resolved when the coefficients represent them exactly; rounding a
/// polynomial with an m-fold root to double spreads it by ~eps^(1/m).
template <class Real>
BasicRootSet<Real> find_roots(const BasicPolynomial<Real>& poly, const RootFinderOptions& opts = {}) {
  using W = detail::WorkReal<Real>;
  using C = std::complex<W>;
  const int n = poly.degree();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "find_roots requires degree >= 1");

  std::vector<W> monic(poly.coeffs().size());
  const W lead = static_cast<W>(poly.leading());
  for (std::size_t k = 0; k < monic.size(); ++k) monic[k] = static_cast<W>(poly[k]) / lead;

  std::vector<C> z(static_cast<std::size_t>(n));
  if (n == 1) {
    z[0] = C(-monic[0]);
  } else {
    W radius = 0;
    for (int k = 0; k < n; ++k) radius = std::max(radius, std::abs(monic[static_cast<std::size_t>(k)]));
    radius += 1;  // Cauchy bound
    const W two_pi = 2 * std::numbers::pi_v<W>;
    for (int k = 0; k < n; ++k) {
      const W angle = two_pi * k / n + W(0.4) + W(0.05) * std::sin(W(k + 1));
      z[static_cast<std::size_t>(k)] = std::polar(radius, angle);
    }

    const W eps = std::numeric_limits<W>::epsilon();
    const W tol = static_cast<W>(opts.step_tolerance);
    std::vector<bool> done(static_cast<std::size_t>(n), false);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations && !converged; ++it) {
      converged = true;
      for (std::size_t k = 0; k < z.size(); ++k) {
        if (done[k]) continue;
        const auto h = detail::horner_with_slope<W>(monic, z[k]);
        if (std::abs(h.value) <= 4 * n * eps * h.bound) {
          done[k] = true;
          continue;
        }
        C ratio = (h.slope == C(0)) ? C(eps * (1 + std::abs(z[k]))) : h.value / h.slope;
        C pull(0);
        for (std::size_t j = 0; j < z.size(); ++j)
          if (j != k) pull += W(1) / (z[k] - z[j]);
        const C step = ratio / (W(1) - ratio * pull);
        z[k] -= step;
        if (std::abs(step) < tol * (1 + std::abs(z[k])))
          done[k] = true;
        else
          converged = false;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "Aberth iteration did not converge in " << opts.max_iterations << " iterations; best iterate:";
      for (const auto& r : z) msg << ' ' << static_cast<double>(r.real()) << (r.imag() < 0 ? "" : "+")
                                  << static_cast<double>(r.imag()) << 'i';
      throw Error(ErrorCode::non_convergence, msg.str());
    }
  }

  // Each iterate carries a Newton inclusion radius n |p / p'|; an m-fold root
  // leaves its copies on a ring comparable to that radius, so iterates closer
  // than a few radii (or than cluster_radius) are merged.
  std::vector<W> reach(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) {
    const auto h = detail::horner_with_slope<W>(monic, z[k]);
    reach[k] = h.slope == C(0) ? W(0) : 3 * n * std::abs(h.value / h.slope);
  }
  const W radius = static_cast<W>(opts.cluster_radius);
  std::vector<bool> used(z.size(), false);
  std::vector<BasicRoot<W>> clusters;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> members{i};
    used[i] = true;
    for (std::size_t m = 0; m < members.size(); ++m)
      for (std::size_t j = 0; j < z.size(); ++j)
        if (!used[j] && std::abs(z[j] - z[members[m]]) < std::max({radius, reach[j], reach[members[m]]})) {
          used[j] = true;
          members.push_back(j);
        }
    C mean(0);
    W spread = 0;
    for (auto idx : members) mean += z[idx];
    mean /= static_cast<W>(members.size());
    for (auto idx : members) spread = std::max(spread, std::abs(z[idx] - mean));
    const int mult = static_cast<int>(members.size());
    mean = detail::polish_multiple_root<W>(monic, mult, mean, spread);
    clusters.push_back({mean, mult});
  }

  // Conjugate closure.
  std::vector<bool> paired(clusters.size(), false);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (paired[i]) continue;
    auto& ci = clusters[i];
    if (std::abs(ci.value.imag()) <= radius / 2) {
      ci.value = C(ci.value.real(), 0);
      paired[i] = true;
      continue;
    }
    std::size_t partner = clusters.size();
    W best = std::numeric_limits<W>::infinity();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (j == i || paired[j] || clusters[j].multiplicity != ci.multiplicity) continue;
      const W d = std::abs(clusters[j].value - std::conj(ci.value));
      if (d < best) {
        best = d;
        partner = j;
      }
    }
    if (partner == clusters.size())
      throw Error(ErrorCode::non_convergence, "root set is not closed under conjugation");
    C v = (ci.value + std::conj(clusters[partner].value)) / W(2);
    if (v.imag() < 0) v = std::conj(v);
    ci.value = v;
    clusters[partner].value = std::conj(v);
    paired[i] = paired[partner] = true;
  }

  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
  });

  std::vector<BasicRoot<Real>> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters)
    out.push_back({std::complex<Real>(static_cast<Real>(c.value.real()), static_cast<Real>(c.value.imag())),
                   c.multiplicity});
  return BasicRootSet<Real>(std::move(out));
}

inline constexpr double default_stability_margin = 1e-12;
inline constexpr double default_coprime_tolerance = 1e-8;

/// Strict left half-plane test; real parts in [-margin, 0] count as unstable.
template <class Real>
bool is_stable(const BasicRootSet<Real>& roots, double margin = default_stability_margin) {
  return std::all_of(roots.begin(), roots.end(),
                     [margin](const auto& r) { return r.value.real() < -static_cast<Real>(margin); });
}

/// Smallest |b(lambda)| over the zeros lambda of `a`, relative to max |b_k|.
template <class Real>
Real common_zero_gap(const BasicRootSet<Real>& a_roots, const BasicPolynomial<Real>& b) {
  Real scale = 0;
  for (Real c : b.coeffs()) scale = std::max(scale, std::abs(c));
  if (scale == Real(0)) return Real(0);
  Real gap = std::numeric_limits<Real>::infinity();
  for (const auto& r : a_roots) gap = std::min(gap, std::abs(b(r.value)) / scale);
  return gap;
}

template <class Real>
bool coprime(const BasicPolynomial<Real>& a, const BasicPolynomial<Real>& b,
             double tolerance = default_coprime_tolerance) {
  if (a.degree() < 1) return !b.is_zero();
  return common_zero_gap(find_roots(a), b) > static_cast<Real>(tolerance);
}

}  // namespace carma_hf
