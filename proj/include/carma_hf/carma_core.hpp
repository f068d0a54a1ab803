#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carma_hf/error.hpp"
#include "carma_hf/matrix_exp.hpp"
#include "carma_hf/poly.hpp"

namespace carma_hf {

/// Unvalidated model fields as read from a file or built in code.
/// `a` holds a_1..a_p of a(z) = z^p + a_1 z^{p-1} + ... + a_p and `b` holds
/// b_0..b_q of b(z) = b_0 + b_1 z + ... + z^q.
struct RawModel {
  std::vector<double> a;
  std::vector<double> b;
  double sigma2 = 1.0;
  std::string label;
};

struct ValidationPolicy {
  double stability_margin = default_stability_margin;
  /// Common-zero threshold relative to max |b_k|; zero or negative skips the check.
  double coprime_tolerance = default_coprime_tolerance;
  /// Separation, relative to max(1, max |lambda|), below which two zeros are
  /// treated as repeated for route selection. Residue sums lose roughly
  /// eps / separation^k for k nearly coincident zeros.
  double distinct_root_separation = 1e-2;
};

/// A validated Lévy-driven CARMA(p, q) model. Immutable; obtain one through
/// validate().
class CarmaModel {
 public:
  int p() const noexcept { return static_cast<int>(a_.size()); }
  int q() const noexcept { return static_cast<int>(b_.size()) - 1; }
  /// p - q, the smoothness index that drives every small-Δ rate.
  int order_gap() const noexcept { return p() - q(); }
  std::span<const double> a_coeffs() const noexcept { return a_; }
  std::span<const double> b_coeffs() const noexcept { return b_; }
  double sigma2() const noexcept { return sigma2_; }
  const std::string& label() const noexcept { return label_; }

  const Polynomial& ar_polynomial() const noexcept { return ar_; }
  const Polynomial& ma_polynomial() const noexcept { return ma_; }
  const RootSet& roots() const noexcept { return roots_; }
  const BasicRootSet<long double>& roots_ext() const noexcept { return roots_ext_; }

  /// True when all AR zeros are simple and separated by at least the policy's
  /// relative distinct_root_separation, so the closed-form residue sums are usable.
  bool residue_route_ok() const noexcept { return residue_ok_; }

  RawModel raw() const { return {a_, b_, sigma2_, label_}; }

 private:
  friend CarmaModel validate(const RawModel& raw, const ValidationPolicy& policy);
  CarmaModel() = default;

  std::vector<double> a_;
  std::vector<double> b_;
  double sigma2_ = 1.0;
  std::string label_;
  Polynomial ar_;
  Polynomial ma_;
  RootSet roots_;
  BasicRootSet<long double> roots_ext_;
  bool residue_ok_ = false;
};

inline Polynomial ar_polynomial_from(std::span<const double> a) {
  std::vector<double> c(a.size() + 1);
  c[a.size()] = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) c[a.size() - 1 - j] = a[j];
  return Polynomial(std::move(c));
}

/// Checks the CARMA assumptions and returns the model, or throws Error with
/// one of bad_orders, bad_normalization, nonpositive_sigma2, unstable_ar,
/// common_zeros.
inline CarmaModel validate(const RawModel& raw, const ValidationPolicy& policy = {}) {
  const std::size_t p = raw.a.size();
  if (p == 0) throw Error(ErrorCode::bad_orders, "p must be at least 1 (empty a)");
  if (raw.b.empty()) throw Error(ErrorCode::bad_orders, "b must contain b_0..b_q");
  if (raw.b.size() > p) {
    std::ostringstream msg;
    msg << "q = " << raw.b.size() - 1 << " must be smaller than p = " << p;
    throw Error(ErrorCode::bad_orders, msg.str());
  }
  for (double v : raw.a)
    if (!std::isfinite(v)) throw Error(ErrorCode::bad_orders, "non-finite autoregressive coefficient");
  for (double v : raw.b)
    if (!std::isfinite(v)) throw Error(ErrorCode::bad_orders, "non-finite moving-average coefficient");
  if (raw.b.back() != 1.0) throw Error(ErrorCode::bad_normalization, "leading moving-average coefficient b_q must be 1");
  if (!(raw.sigma2 > 0.0) || !std::isfinite(raw.sigma2))
    throw Error(ErrorCode::nonpositive_sigma2, "sigma2 must be positive and finite");

  CarmaModel m;
  m.a_ = raw.a;
  m.b_ = raw.b;
  m.sigma2_ = raw.sigma2;
  m.label_ = raw.label;
  m.ar_ = ar_polynomial_from(m.a_);
  m.ma_ = Polynomial(m.b_);
  m.roots_ext_ = find_roots(BasicPolynomial<long double>(m.ar_));
  m.roots_ = RootSet(m.roots_ext_);

  if (!is_stable(m.roots_ext_, policy.stability_margin)) {
    std::ostringstream msg;
    msg << "autoregressive zeros must lie in the open left half-plane; max real part = "
        << static_cast<double>(m.roots_ext_.max_real_part());
    throw Error(ErrorCode::unstable_ar, msg.str());
  }
  if (policy.coprime_tolerance > 0) {
    const long double gap = common_zero_gap(m.roots_ext_, BasicPolynomial<long double>(m.ma_));
    if (!(gap > static_cast<long double>(policy.coprime_tolerance))) {
      std::ostringstream msg;
      msg << "a(z) and b(z) share a zero (min |b(lambda)| / max|b_k| = " << static_cast<double>(gap) << ")";
      throw Error(ErrorCode::common_zeros, msg.str());
    }
  }
  long double scale = 1;
  for (const auto& r : m.roots_ext_) scale = std::max(scale, std::abs(r.value));
  m.residue_ok_ = m.roots_ext_.all_simple() &&
                  m.roots_ext_.min_separation() >= static_cast<long double>(policy.distinct_root_separation) * scale;
  return m;
}

/// Controller-companion state-space matrices: A (ones on the superdiagonal,
/// last row -a_p .. -a_1), b zero-padded to length p, and e_p.
template <class Scalar = double>
struct CompanionMatrix {
  DynMatrix<Scalar> A;
  DynVector<Scalar> b;
  DynVector<Scalar> e_p;
};

template <class Scalar = double>
CompanionMatrix<Scalar> companion(const CarmaModel& model) {
  const Eigen::Index p = model.p();
  CompanionMatrix<Scalar> c{DynMatrix<Scalar>::Zero(p, p), DynVector<Scalar>::Zero(p), DynVector<Scalar>::Zero(p)};
  for (Eigen::Index i = 0; i + 1 < p; ++i) c.A(i, i + 1) = 1;
  const auto a = model.a_coeffs();
  for (Eigen::Index j = 0; j < p; ++j) c.A(p - 1, j) = -static_cast<Scalar>(a[static_cast<std::size_t>(p - 1 - j)]);
  const auto b = model.b_coeffs();
  for (std::size_t j = 0; j < b.size(); ++j) c.b(static_cast<Eigen::Index>(j)) = static_cast<Scalar>(b[j]);
  c.e_p(p - 1) = 1;
  return c;
}

/// Stationary state covariance per unit sigma2: solves A S + S A^T = -e_p e_p^T.
template <class Scalar = double>
struct StateCovariance {
  DynMatrix<Scalar> sigma;
};

template <class Scalar = double>
StateCovariance<Scalar> stationary_state_covariance(const CarmaModel& model) {
  const auto c = companion<Scalar>(model);
  const Eigen::Index p = model.p();
  const DynMatrix<Scalar> eye = DynMatrix<Scalar>::Identity(p, p);
  // Column-major vec: vec(A S) = (I (x) A) vec S, vec(S A^T) = (A (x) I) vec S.
  DynMatrix<Scalar> lhs = DynMatrix<Scalar>::Zero(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      lhs.block(i * p, j * p, p, p) += eye(i, j) * c.A;
      lhs.block(i * p, j * p, p, p) += c.A(i, j) * eye;
    }
  DynVector<Scalar> rhs = DynVector<Scalar>::Zero(p * p);
  rhs(p * p - 1) = -1;
  const auto lu = lhs.fullPivLu();
  if (!lu.isInvertible()) throw Error(ErrorCode::invalid_argument, "Lyapunov operator is singular (unstable A)");
  const DynVector<Scalar> vec = lu.solve(rhs);
  StateCovariance<Scalar> out{DynMatrix<Scalar>(p, p)};
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < p; ++i) out.sigma(i, j) = vec(j * p + i);
  out.sigma = ((out.sigma + out.sigma.transpose()) / Scalar(2)).eval();
  return out;
}

/// Moving-average kernel g(t) = b^T e^{At} e_p for t > 0 and 0 for t < 0.
/// At t = 0 the right limit g(0+) is returned.
inline double kernel(const CarmaModel& model, double t) {
  if (t < 0) return 0.0;
  const auto c = companion<long double>(model);
  if (t == 0) return static_cast<double>(c.b.dot(c.e_p));
  const DynMatrix<long double> at = c.A * static_cast<long double>(t);
  const DynMatrix<long double> e = matrix_exp(at);
  return static_cast<double>(c.b.dot(e.col(model.p() - 1)));
}

/// Residue form of the kernel, g(t) = sum_lambda b(lambda) e^{lambda t} / a'(lambda).
/// Requires simple AR zeros.
inline double kernel_residue(const CarmaModel& model, double t) {
  if (!model.roots_ext().all_simple())
    throw Error(ErrorCode::invalid_argument, "residue kernel requires simple autoregressive zeros");
  if (t < 0) return 0.0;
  using L = long double;
  const BasicPolynomial<L> a(model.ar_polynomial());
  const BasicPolynomial<L> da = derivative(a);
  const BasicPolynomial<L> b(model.ma_polynomial());
  std::complex<L> sum(0);
  for (const auto& r : model.roots_ext()) sum += b(r.value) * std::exp(r.value * static_cast<L>(t)) / da(r.value);
  return static_cast<double>(sum.real());
}

/// Right derivative g^{(k)}(0+) = b^T A^k e_p.
inline double kernel_derivative_at_zero(const CarmaModel& model, int k) {
  if (k < 0) throw Error(ErrorCode::out_of_range, "derivative order must be non-negative");
  const auto c = companion<long double>(model);
  DynVector<long double> v = c.e_p;
  for (int i = 0; i < k; ++i) v = (c.A * v).eval();
  return static_cast<double>(c.b.dot(v));
}

/// gamma_Y(h) by the residue sum over the (simple) AR zeros.
inline double acvf_continuous_residue(const CarmaModel& model, double h) {
  if (!model.roots_ext().all_simple())
    throw Error(ErrorCode::invalid_argument, "residue autocovariance requires simple autoregressive zeros");
  using L = long double;
  const BasicPolynomial<L> a(model.ar_polynomial());
  const BasicPolynomial<L> da = derivative(a);
  const BasicPolynomial<L> b(model.ma_polynomial());
  const L lag = std::abs(static_cast<L>(h));
  std::complex<L> sum(0);
  for (const auto& r : model.roots_ext()) {
    const auto z = r.value;
    sum += b(z) * b(-z) * std::exp(z * lag) / (da(z) * a(-z));
  }
  return static_cast<double>(static_cast<L>(model.sigma2()) * sum.real());
}

/// gamma_Y(h) = sigma2 b^T e^{A|h|} S b through the stationary state covariance.
inline double acvf_continuous_state_space(const CarmaModel& model, double h) {
  const auto c = companion<long double>(model);
  const auto s = stationary_state_covariance<long double>(model);
  const DynMatrix<long double> e = matrix_exp<long double>(c.A * std::abs(static_cast<long double>(h)));
  return static_cast<double>(static_cast<long double>(model.sigma2()) * c.b.dot(e * (s.sigma * c.b)));
}

inline double acvf_continuous(const CarmaModel& model, double h) {
  return model.residue_route_ok() ? acvf_continuous_residue(model, h) : acvf_continuous_state_space(model, h);
}

/// f_Y(omega) = sigma2 / (2 pi) |b(i omega) / a(i omega)|^2.
inline double spectral_density_continuous(const CarmaModel& model, double omega) {
  double ratio;
  if (std::abs(omega) <= 1) {
    const std::complex<double> iw(0.0, omega);
    ratio = std::norm(model.ma_polynomial()(iw)) / std::norm(model.ar_polynomial()(iw));
  } else {
    // Reversed polynomials in u = 1 / (i omega) avoid overflow for large |omega|.
    const std::complex<double> u(0.0, -1.0 / omega);
    auto reversed = [&](const Polynomial& poly) {
      std::complex<double> acc(0);
      for (std::size_t k = 0; k < poly.coeffs().size(); ++k) acc = acc * u + poly.coeffs()[k];
      return acc;
    };
    ratio = std::norm(reversed(model.ma_polynomial())) / std::norm(reversed(model.ar_polynomial())) *
            std::pow(std::abs(omega), -2.0 * model.order_gap());
  }
  return model.sigma2() / (2.0 * std::numbers::pi) * ratio;
}

}  // namespace carma_hf
