#include "magicspin/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace magicspin {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

namespace pauli {
Mat2 identity() { return Mat2::Identity(); }
Mat2 x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}
Mat2 y() {
  Mat2 m;
  m << 0, -kI, kI, 0;
  return m;
}
Mat2 z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}
Mat2 by_index(int index) {
  switch (index) {
    case 0: return identity();
    case 1: return x();
    case 2: return y();
    case 3: return z();
    default: throw SpinAlgebraError("pauli index must be in 0..3");
  }
}
}  // namespace pauli

int spins_for_dim(Eigen::Index dim) {
  if (!is_power_of_two(dim)) throw SpinAlgebraError("dimension is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

double hermiticity_defect(const Matrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

double unitarity_defect(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm();
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

SpinOperator::SpinOperator(Matrix matrix, bool hermitian)
    : matrix_(std::move(matrix)), hermitian_(hermitian) {
  if (matrix_.rows() != matrix_.cols()) throw SpinAlgebraError("operator must be square");
  n_spins_ = spins_for_dim(matrix_.rows());
  if (hermitian_ && hermiticity_defect(matrix_) > 1e-12)
    throw SpinAlgebraError("operator flagged Hermitian is not Hermitian");
}

SpinOperator SpinOperator::zero(int n_spins) {
  const Eigen::Index d = Eigen::Index{1} << n_spins;
  return SpinOperator(Matrix::Zero(d, d), true);
}

SpinOperator SpinOperator::identity(int n_spins) {
  const Eigen::Index d = Eigen::Index{1} << n_spins;
  return SpinOperator(Matrix::Identity(d, d), true);
}

SpinOperator embed_local(const Mat2& op, int site, int n_spins) {
  if (n_spins < 1) throw SpinAlgebraError("n_spins must be positive");
  if (site < 0 || site >= n_spins) throw SpinAlgebraError("site out of range");
  const Eigen::Index left = Eigen::Index{1} << site;
  const Eigen::Index right = Eigen::Index{1} << (n_spins - site - 1);
  const Eigen::Index d = left * 2 * right;
  Matrix out = Matrix::Zero(d, d);
  // out = 1_left (x) op (x) 1_right
  for (Eigen::Index l = 0; l < left; ++l)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        if (op(a, b) == Complex{}) continue;
        for (Eigen::Index r = 0; r < right; ++r)
          out((l * 2 + a) * right + r, (l * 2 + b) * right + r) = op(a, b);
      }
  return SpinOperator(std::move(out), hermiticity_defect(op) <= 1e-12);
}

Matrix tensor_power(const Mat2& op, int n_spins) {
  Matrix out = Matrix::Identity(1, 1);
  for (int s = 0; s < n_spins; ++s) out = kron(out, op);
  return out;
}

HermitianSpectrum::HermitianSpectrum(const Matrix& h) {
  if (hermiticity_defect(h) > 1e-12) throw SpinAlgebraError("hermitian_evolve: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw SpinAlgebraError("eigendecomposition failed");
  energies_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

Matrix HermitianSpectrum::evolve(double t) const {
  Eigen::VectorXcd phases(energies_.size());
  for (Eigen::Index i = 0; i < energies_.size(); ++i)
    phases(i) = std::polar(1.0, -energies_(i) * t);
  return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

SpinOperator hermitian_evolve(const SpinOperator& h, double t) {
  return SpinOperator(HermitianSpectrum(h.matrix()).evolve(t));
}

LogResult unitary_log(const Matrix& u, double period) {
  if (!(period > 0.0)) throw SpinAlgebraError("unitary_log: period must be positive");
  Eigen::ComplexSchur<Matrix> schur(u);
  const Matrix& q = schur.matrixU();
  const Matrix& t = schur.matrixT();
  Eigen::VectorXcd gen(t.rows());
  double cut = std::numbers::pi;
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    double phi = std::arg(t(i, i));
    if (phi <= -std::numbers::pi) phi = std::numbers::pi;
    cut = std::min(cut, std::numbers::pi - std::abs(phi));
    gen(i) = -phi / period;
  }
  Matrix h = q * gen.asDiagonal() * q.adjoint();
  h = 0.5 * (h + h.adjoint()).eval();
  LogResult out;
  out.generator = SpinOperator(std::move(h), true);
  out.cut_distance = cut;
  out.branch_ambiguous = cut < 1e-12;
  return out;
}

LogResult unitary_log(const SpinOperator& u, double period) {
  if (unitarity_defect(u.matrix()) > 1e-10) throw SpinAlgebraError("unitary_log: input is not unitary");
  return unitary_log(u.matrix(), period);
}

PauliString::PauliString(std::vector<std::uint8_t> labels) : labels_(std::move(labels)) {
  for (auto l : labels_)
    if (l > 3) throw SpinAlgebraError("pauli label must be in 0..3");
}

PauliString::PauliString(std::initializer_list<int> labels) {
  labels_.reserve(labels.size());
  for (int l : labels) {
    if (l < 0 || l > 3) throw SpinAlgebraError("pauli label must be in 0..3");
    labels_.push_back(static_cast<std::uint8_t>(l));
  }
}

int PauliString::weight() const {
  return static_cast<int>(std::count_if(labels_.begin(), labels_.end(), [](auto l) { return l != 0; }));
}

std::string PauliString::to_string() const {
  static constexpr char names[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  for (auto l : labels_) s.push_back(names[l]);
  return s;
}

Matrix PauliString::to_matrix() const {
  Matrix out = Matrix::Identity(1, 1);
  for (auto l : labels_) out = kron(out, pauli::by_index(l));
  return out;
}

Complex pauli_coefficient(const Matrix& h, const PauliString& s) {
  const int n = s.size();
  const Eigen::Index d = h.rows();
  if (d != (Eigen::Index{1} << n)) throw SpinAlgebraError("pauli string length does not match operator");
  // B|b> = phase(b)|b ^ flip>, so tr(B H) = sum_b phase(b) H(b, b ^ flip).
  Eigen::Index flip = 0;
  for (int site = 0; site < n; ++site)
    if (s[site] == 1 || s[site] == 2) flip |= Eigen::Index{1} << (n - 1 - site);
  Complex acc{};
  for (Eigen::Index b = 0; b < d; ++b) {
    Complex phase{1.0, 0.0};
    for (int site = 0; site < n; ++site) {
      const bool down = (b >> (n - 1 - site)) & 1;
      switch (s[site]) {
        case 2: phase *= down ? -kI : kI; break;
        case 3: if (down) phase = -phase; break;
        default: break;
      }
    }
    acc += phase * h(b, b ^ flip);
  }
  return acc / static_cast<double>(d);
}

double OperatorTable::coefficient(const PauliString& s) const {
  auto it = coefficients_.find(s);
  return it == coefficients_.end() ? 0.0 : it->second;
}

void OperatorTable::set(const PauliString& s, double value) {
  if (s.size() != n_spins_) throw SpinAlgebraError("pauli string length does not match table");
  coefficients_[s] = value;
}

OperatorTable OperatorTable::pruned(double tol) const {
  OperatorTable out(n_spins_);
  for (const auto& [s, c] : coefficients_)
    if (std::abs(c) > tol) out.coefficients_.emplace(s, c);
  return out;
}

Matrix OperatorTable::reconstruct() const {
  const Eigen::Index d = Eigen::Index{1} << n_spins_;
  Matrix out = Matrix::Zero(d, d);
  for (const auto& [s, c] : coefficients_) out += c * s.to_matrix();
  return out;
}

OperatorTable decompose(const SpinOperator& h) {
  const int n = h.n_spins();
  OperatorTable table(n);
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n), 0);
  const std::size_t total = std::size_t{1} << (2 * n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (int site = n - 1; site >= 0; --site) {
      labels[static_cast<std::size_t>(site)] = static_cast<std::uint8_t>(c & 3);
      c >>= 2;
    }
    PauliString s(labels);
    const double value = pauli_coefficient(h.matrix(), s).real();
    if (value != 0.0) table.set(s, value);
  }
  return table;
}

Matrix partial_trace(const Matrix& rho, std::span<const int> keep_in) {
  const int n = spins_for_dim(rho.rows());
  if (keep_in.empty()) throw SpinAlgebraError("partial_trace: empty keep set");
  std::vector<int> keep(keep_in.begin(), keep_in.end());
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw SpinAlgebraError("partial_trace: duplicate site");
  if (keep.front() < 0 || keep.back() >= n) throw SpinAlgebraError("partial_trace: site out of range");
  std::vector<int> traced;
  for (int s = 0; s < n; ++s)
    if (!std::binary_search(keep.begin(), keep.end(), s)) traced.push_back(s);

  const int nk = static_cast<int>(keep.size());
  const int nt = static_cast<int>(traced.size());
  auto scatter = [n](const std::vector<int>& sites, Eigen::Index bits) {
    Eigen::Index full = 0;
    const int k = static_cast<int>(sites.size());
    for (int i = 0; i < k; ++i)
      if ((bits >> (k - 1 - i)) & 1) full |= Eigen::Index{1} << (n - 1 - sites[static_cast<std::size_t>(i)]);
    return full;
  };
  const Eigen::Index dk = Eigen::Index{1} << nk;
  const Eigen::Index dt = Eigen::Index{1} << nt;
  std::vector<Eigen::Index> kidx(static_cast<std::size_t>(dk)), tidx(static_cast<std::size_t>(dt));
  for (Eigen::Index i = 0; i < dk; ++i) kidx[static_cast<std::size_t>(i)] = scatter(keep, i);
  for (Eigen::Index i = 0; i < dt; ++i) tidx[static_cast<std::size_t>(i)] = scatter(traced, i);

  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a)
    for (Eigen::Index b = 0; b < dk; ++b) {
      Complex acc{};
      for (auto t : tidx) acc += rho(kidx[static_cast<std::size_t>(a)] | t, kidx[static_cast<std::size_t>(b)] | t);
      out(a, b) = acc;
    }
  return out;
}

Matrix partial_trace(const Matrix& rho, std::initializer_list<int> keep) {
  std::vector<int> k(keep);
  return partial_trace(rho, std::span<const int>(k));
}

Matrix density_matrix(const StateVector& psi) { return psi * psi.adjoint(); }

double entanglement_entropy(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p < -1e-10) throw SpinAlgebraError("entanglement_entropy: negative eigenvalue");
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

StateVector product_state(std::span<const bool> up) {
  const int n = static_cast<int>(up.size());
  Eigen::Index idx = 0;
  for (int s = 0; s < n; ++s)
    if (!up[static_cast<std::size_t>(s)]) idx |= Eigen::Index{1} << (n - 1 - s);
  StateVector psi = StateVector::Zero(Eigen::Index{1} << n);
  psi(idx) = 1.0;
  return psi;
}

}  // namespace magicspin
