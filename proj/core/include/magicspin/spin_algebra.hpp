#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace magicspin {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using StateVector = Eigen::VectorXcd;

/// Largest spin count handled by the dense exact routines (dim 256).
inline constexpr int kMaxExactSpins = 8;

class SpinAlgebraError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
/// 0 = identity, 1..3 = x, y, z.
Mat2 by_index(int index);
}  // namespace pauli

/// Dense operator on the Hilbert space of M spin-1/2 particles.
///
/// Site 0 is the leftmost tensor factor, so for basis index `b` the state of
/// site `s` is bit (M - 1 - s) of `b`, with 0 meaning spin up (+1 of sigma_z).
class SpinOperator {
 public:
  SpinOperator() = default;
  /// Throws SpinAlgebraError when the matrix is not square with a power-of-two
  /// dimension, or when `hermitian` is requested but not satisfied to 1e-12
  /// relative to the largest element.
  explicit SpinOperator(Matrix matrix, bool hermitian = false);

  static SpinOperator zero(int n_spins);
  static SpinOperator identity(int n_spins);

  int n_spins() const { return n_spins_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  bool is_hermitian() const { return hermitian_; }
  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
  int n_spins_ = 0;
  bool hermitian_ = false;
};

/// Relative Hermiticity defect ||A - A^dagger||_max / max|A_ij| (0 for A = 0).
double hermiticity_defect(const Matrix& a);
/// ||U^dagger U - 1||_F.
double unitarity_defect(const Matrix& u);
Matrix commutator(const Matrix& a, const Matrix& b);
/// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b);
/// Number of spins for a power-of-two dimension; throws otherwise.
int spins_for_dim(Eigen::Index dim);

/// 1 (x) ... (x) op (x) ... (x) 1 with `op` at position `site`.
SpinOperator embed_local(const Mat2& op, int site, int n_spins);
/// The same single-spin operator on every site: op (x) op (x) ... (x) op.
Matrix tensor_power(const Mat2& op, int n_spins);

/// Eigendecomposition of a Hermitian matrix, reusable for many evolution times.
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const Matrix& h);
  /// exp(-i H t).
  Matrix evolve(double t) const;
  const Eigen::VectorXd& energies() const { return energies_; }
  const Matrix& eigenvectors() const { return vectors_; }

 private:
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

/// exp(-i H t) via eigendecomposition. Throws on non-Hermitian input.
SpinOperator hermitian_evolve(const SpinOperator& h, double t);

struct LogResult {
  SpinOperator generator;
  /// An eigenphase sat within 1e-12 of the -pi/pi branch cut.
  bool branch_ambiguous = false;
  /// Smallest |eigenphase + pi| (distance from the cut), for diagnostics.
  double cut_distance = 0.0;
};

/// Principal-branch (i/T) log U, eigenphases taken in (-pi, pi].
/// Throws when U is not unitary to 1e-10 or T <= 0.
LogResult unitary_log(const SpinOperator& u, double period);
/// Matrix-level variant used on hot paths; `u` must already be unitary.
LogResult unitary_log(const Matrix& u, double period);

/// Tensor-product Pauli string; label 0..3 per site (identity, x, y, z).
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<std::uint8_t> labels);
  PauliString(std::initializer_list<int> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  int operator[](int site) const { return labels_[static_cast<std::size_t>(site)]; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }
  /// Number of non-identity factors.
  int weight() const;
  /// e.g. "ZI", "XYZ"
  std::string to_string() const;
  Matrix to_matrix() const;

  auto operator<=>(const PauliString&) const = default;

 private:
  std::vector<std::uint8_t> labels_;
};

/// tr(B_s^dagger H) / 2^M for a single Pauli string, O(2^M).
Complex pauli_coefficient(const Matrix& h, const PauliString& s);

class OperatorTable {
 public:
  OperatorTable() = default;
  explicit OperatorTable(int n_spins) : n_spins_(n_spins) {}

  int n_spins() const { return n_spins_; }
  const std::map<PauliString, double>& coefficients() const { return coefficients_; }
  double coefficient(const PauliString& s) const;
  void set(const PauliString& s, double value);
  std::size_t size() const { return coefficients_.size(); }
  /// Drop entries with |c| <= tol.
  OperatorTable pruned(double tol) const;
  Matrix reconstruct() const;

 private:
  int n_spins_ = 0;
  std::map<PauliString, double> coefficients_;
};

/// Orthonormal Pauli decomposition c_s = tr(B_s H)/2^M; exact zeros omitted.
OperatorTable decompose(const SpinOperator& h);

/// Reduced density matrix on `keep` (sorted ascending on output order).
Matrix partial_trace(const Matrix& rho, std::span<const int> keep);
Matrix partial_trace(const Matrix& rho, std::initializer_list<int> keep);
/// |psi><psi|
Matrix density_matrix(const StateVector& psi);

/// Von Neumann entropy in nats. Eigenvalues in [-1e-10, 0] are clamped;
/// anything more negative throws.
double entanglement_entropy(const Matrix& rho);

/// Product state from per-site spin-up flags (true = up).
StateVector product_state(std::span<const bool> up);

}  // namespace magicspin
