#include <stdexcept>

#include "detail.hpp"
#include "magicspin/dynamics.hpp"

namespace magicspin {

namespace {

Matrix omega_sum(const std::array<Matrix, 3>& omega, int order) {
  if (order < 0 || order > 2) throw std::invalid_argument("Magnus order must be 0, 1 or 2");
  Matrix s = omega[0];
  for (int k = 1; k <= order; ++k) s += omega[static_cast<std::size_t>(k)];
  return s;
}

}  // namespace

Matrix MagnusTerms::effective(int order) const {
  const Complex i{0.0, 1.0};
  return (i / period) * omega_sum(omega, order);
}

Matrix MagnusTerms::propagator(int order) const {
  const Complex i{0.0, 1.0};
  Matrix h = i * omega_sum(omega, order);
  h = 0.5 * (h + h.adjoint()).eval();
  return HermitianSpectrum(h).evolve(1.0);
}

MagnusTerms magnus_terms(const SpinNetwork& network, const PiecewiseSchedule& schedule, bool secular, int substeps) {
  detail::require_exact_size(network);
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  const int n = network.n_spins();
  const Eigen::Index d = Eigen::Index{1} << n;
  const Complex i{0.0, 1.0};
  const Matrix h_int = dipolar_hamiltonian(network, secular);
  std::vector<std::vector<Mat2>> local;
  for (SegmentKind k : {SegmentKind::h0, SegmentKind::h1, SegmentKind::wait})
    local.push_back(detail::local_hamiltonians(network, k));

  std::vector<Mat2> v(static_cast<std::size_t>(n), Mat2::Identity());
  Matrix o1 = Matrix::Zero(d, d), o2 = Matrix::Zero(d, d), o3 = Matrix::Zero(d, d);
  for (const auto& seg : schedule.segments) {
    if (seg.kind == SegmentKind::ideal_pulse) {
      const Mat2 p = seg.pulse.to_matrix();
      for (auto& x : v) x = p * x;
      continue;
    }
    if (seg.duration == 0.0) continue;
    const auto& hk = local[static_cast<std::size_t>(seg.kind)];
    const double h = seg.duration / substeps;
    std::vector<Mat2> step;
    for (const auto& x : hk) step.push_back(detail::local_evolve(x, h));
    for (int s = 0; s < substeps; ++s) {
      const Matrix vf = detail::kron_all(v);
      const Matrix a = -i * (vf.adjoint() * h_int * vf);
      const Matrix c1 = commutator(o1, a);
      o3 += -0.5 * (h * commutator(o2, a) - (h * h / 4.0) * commutator(c1, a)) +
            (h * commutator(o1, c1) + (h * h / 2.0) * commutator(a, c1)) / 12.0;
      o2 += -0.5 * h * c1;
      o1 += h * a;
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = step[j] * v[j];
    }
  }
  MagnusTerms out;
  out.omega = {std::move(o1), std::move(o2), std::move(o3)};
  out.period = schedule.period();
  if (!(out.period > 0.0)) throw std::invalid_argument("schedule period must be positive");
  return out;
}

SpinOperator magnus_effective(const SpinNetwork& network, const PiecewiseSchedule& schedule, int order, bool secular,
                              int substeps) {
  Matrix h = magnus_terms(network, schedule, secular, substeps).effective(order);
  h = 0.5 * (h + h.adjoint()).eval();
  return SpinOperator(std::move(h), true);
}

}  // namespace magicspin
