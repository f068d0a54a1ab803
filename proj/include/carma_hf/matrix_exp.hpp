#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace carma_hf {

template <class Scalar>
using DynMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using DynVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Matrix exponential by scaling and squaring with a diagonal [8/8] Padé
/// approximant. The argument is scaled by 2^-s so that its 1-norm is at most
/// 1/2, where the [8/8] truncation error is below 1e-25.
template <class Scalar>
DynMatrix<Scalar> matrix_exp(const DynMatrix<Scalar>& m) {
  using std::abs;
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  if (!m.allFinite()) throw std::invalid_argument("matrix_exp: non-finite entries");

  const Scalar norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > Scalar(0.5)) squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm / Scalar(0.5)))));
  const DynMatrix<Scalar> x = m / std::ldexp(Scalar(1), squarings);

  constexpr int order = 8;
  // c_j = (2q-j)! q! / ((2q)! j! (q-j)!)
  Scalar c = 1;
  DynMatrix<Scalar> numer = DynMatrix<Scalar>::Identity(n, n);
  DynMatrix<Scalar> denom = DynMatrix<Scalar>::Identity(n, n);
  DynMatrix<Scalar> power = DynMatrix<Scalar>::Identity(n, n);
  for (int j = 1; j <= order; ++j) {
    c = c * Scalar(order - j + 1) / Scalar(j * (2 * order - j + 1));
    power = (power * x).eval();
    numer += c * power;
    denom += ((j % 2) ? -c : c) * power;
  }
  DynMatrix<Scalar> result = denom.partialPivLu().solve(numer);
  for (int s = 0; s < squarings; ++s) result = (result * result).eval();
  return result;
}

}  // namespace carma_hf
