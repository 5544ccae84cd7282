#pragma once

// Independent reference computations for tests. Nothing here calls the library's
// algebra routines, so agreement is a real cross-check.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;
using V3 = Eigen::Vector3d;

inline M sigma(int k) {
  M s = M::Zero(2, 2);
  const C i{0, 1};
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -i, i, 0; break;
    default: s << 1, 0, 0, -1; break;
  }
  return s;
}

/// Textbook Kronecker product by explicit index arithmetic.
inline M kron(const M& a, const M& b) {
  M out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

inline M chain(const std::vector<M>& factors) {
  M out = M::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

inline M local(const M& op, int site, int n) {
  std::vector<M> f(static_cast<std::size_t>(n), M::Identity(2, 2));
  f[static_cast<std::size_t>(site)] = op;
  return chain(f);
}

inline M pauli_string(const std::vector<int>& labels) {
  std::vector<M> f;
  for (int l : labels) f.push_back(sigma(l));
  return chain(f);
}

/// tr(B H) / d by full matrix product.
inline C projection(const M& h, const std::vector<int>& labels) {
  return (pauli_string(labels) * h).trace() / static_cast<double>(h.rows());
}

/// cos(a/2) 1 - i sin(a/2) n.sigma
inline M su2(double a, const V3& n) {
  const C i{0, 1};
  return std::cos(a / 2) * sigma(0) - i * std::sin(a / 2) * (n.x() * sigma(1) + n.y() * sigma(2) + n.z() * sigma(3));
}

/// Equal up to a global phase: |tr(A^dagger B)| / 2 == 1.
inline double phase_free_distance(const M& a, const M& b) {
  return std::abs(1.0 - std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows()));
}

/// exp(-i H t) by scaling-and-squaring Taylor series (independent of eigen-solvers).
inline M expm_taylor(const M& h, double t) {
  const C i{0, 1};
  M a = -i * t * h;
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    a /= 2.0;
    norm /= 2.0;
    ++squarings;
  }
  M term = M::Identity(a.rows(), a.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline V3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  V3 v(g(rng), g(rng), g(rng));
  return v.normalized();
}

inline M random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  M a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = C(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

inline Eigen::VectorXcd random_state(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(d);
  for (int i = 0; i < d; ++i) v(i) = C(g(rng), g(rng));
  return v.normalized();
}

/// Rodrigues rotation of a 3-vector.
inline V3 rotate(const V3& v, const V3& n, double a) {
  return v * std::cos(a) + n.cross(v) * std::sin(a) + n * n.dot(v) * (1 - std::cos(a));
}

}  // namespace oracle
