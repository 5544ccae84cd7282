#include "magicspin/dynamics.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>

#include "detail.hpp"

namespace magicspin {

namespace detail {

std::vector<Vec3> segment_fields(const SpinNetwork& network, SegmentKind kind) {
  const Vec3 base = kind == SegmentKind::h1 ? Vec3(network.b0 + network.wire_field) : network.b0;
  const Vec3 z = network.b0.normalized();
  std::vector<Vec3> out;
  out.reserve(network.sites.size());
  for (const auto& s : network.sites) {
    Vec3 extra = Vec3::Zero();
    for (const auto& nv : network.nvs) {
      const bool active = kind == SegmentKind::h1 ||
                          (kind == SegmentKind::wait && nv.gating == NVGating::active_during_wait);
      if (active) extra += nv_dipole_field(nv, s.position, network.constants);
    }
    if (network.nv_field_mode == NVFieldMode::z_only) extra = extra.dot(z) * z;
    out.push_back(base + extra);
  }
  return out;
}

std::vector<Mat2> local_hamiltonians(const SpinNetwork& network, SegmentKind kind) {
  const double tl = network.units().larmor_period();
  const auto fields = segment_fields(network, kind);
  std::vector<Mat2> out;
  out.reserve(fields.size());
  for (std::size_t j = 0; j < fields.size(); ++j) {
    const Vec3 w = network.sites[j].gamma * tl * fields[j];
    out.push_back(0.5 * (w.x() * pauli::x() + w.y() * pauli::y() + w.z() * pauli::z()));
  }
  return out;
}

Mat2 local_evolve(const Mat2& h, double t) {
  const Vec3 w{(h * pauli::x()).trace().real(), (h * pauli::y()).trace().real(), (h * pauli::z()).trace().real()};
  const double wn = w.norm();
  if (wn == 0.0) return Mat2::Identity();
  const Vec3 n = w / wn;
  const double half = 0.5 * wn * t;
  const Complex i{0.0, 1.0};
  return std::cos(half) * Mat2::Identity() -
         i * std::sin(half) * (n.x() * pauli::x() + n.y() * pauli::y() + n.z() * pauli::z());
}

Matrix kron_all(const std::vector<Mat2>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

void require_exact_size(const SpinNetwork& network) {
  if (network.n_spins() < 1) throw NetworkError("network has no spins");
  if (network.n_spins() > kMaxExactSpins)
    throw NetworkError("exact propagation is limited to " + std::to_string(kMaxExactSpins) +
                       " spins; use pairwise or cluster mode for larger networks");
}

}  // namespace detail

namespace {

Matrix matrix_power(Matrix base, int exponent) {
  Matrix result = Matrix::Identity(base.rows(), base.cols());
  while (exponent > 0) {
    if (exponent & 1) result = base * result;
    exponent >>= 1;
    if (exponent) base = base * base;
  }
  return result;
}

std::vector<Mat2> local_power(std::vector<Mat2> base, int exponent) {
  std::vector<Mat2> out(base.size(), Mat2::Identity());
  for (std::size_t j = 0; j < base.size(); ++j) {
    Mat2 b = base[j];
    int e = exponent;
    while (e > 0) {
      if (e & 1) out[j] = b * out[j];
      e >>= 1;
      b = b * b;
    }
  }
  return out;
}

struct KindSpectra {
  std::vector<HermitianSpectrum> full;
  std::vector<std::vector<Mat2>> local;
};

KindSpectra kind_spectra(const SpinNetwork& network, const DynamicsOptions& options) {
  const Matrix hdd = dipolar_hamiltonian(network, options.secular);
  KindSpectra ks;
  for (SegmentKind k : {SegmentKind::h0, SegmentKind::h1, SegmentKind::wait}) {
    ks.full.emplace_back(zeeman_hamiltonian(network, detail::segment_fields(network, k)) + hdd);
    ks.local.push_back(detail::local_hamiltonians(network, k));
  }
  return ks;
}

std::vector<Mat2> local_step(const std::vector<Mat2>& h, double t) {
  std::vector<Mat2> out;
  out.reserve(h.size());
  for (const auto& x : h) out.push_back(detail::local_evolve(x, t));
  return out;
}

std::vector<Mat2> local_mul(const std::vector<Mat2>& a, const std::vector<Mat2>& b) {
  std::vector<Mat2> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
  return out;
}

}  // namespace

double ProtocolTiming::rotation_time() const {
  if (pulse_model == PulseModel::ideal) return 0.0;
  const double blocks = std::ldexp(1.0, n_c - 1);
  return tau_a + 2.0 * tau_b + 4.0 * (blocks * tau_1 + (blocks - 1.0) * tau_0);
}

double ProtocolTiming::period() const { return m * (rotation_time() + tau); }

void ProtocolTiming::validate() const {
  for (double t : {tau_1, tau_0, tau_a, tau_b, tau})
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("protocol times must be finite and >= 0");
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (n_c < 1 || n_c > 24) throw std::invalid_argument("n_c must be in 1..24");
  if (!(period() > 0.0)) throw std::invalid_argument("protocol period must be positive");
}

double PiecewiseSchedule::period() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

Vec3 magic_axis(const SpinNetwork& network) {
  const FieldFrame f = network.frame();
  return std::cos(kMagicAngle) * f.z + std::sin(kMagicAngle) * f.x;
}

PiecewiseSchedule build_schedule(const ProtocolTiming& timing, const Vec3& ideal_axis) {
  timing.validate();
  PiecewiseSchedule s;
  if (timing.pulse_model == PulseModel::ideal) {
    const Rotation pulse = Rotation::from_axis_angle(ideal_axis, 2.0 * std::numbers::pi / timing.m);
    for (int k = 0; k < timing.m; ++k) {
      s.segments.push_back({SegmentKind::ideal_pulse, 0.0, pulse});
      s.segments.push_back({SegmentKind::wait, timing.tau, {}});
    }
    return s;
  }
  // U^(1) = H1 for tau_1; U^(k+1) = U^(k), H0 tau_0, U^(k).
  std::vector<Segment> u{{SegmentKind::h1, timing.tau_1, {}}};
  for (int k = 1; k < timing.n_c; ++k) {
    std::vector<Segment> next = u;
    next.push_back({SegmentKind::h0, timing.tau_0, {}});
    next.insert(next.end(), u.begin(), u.end());
    u = std::move(next);
  }
  std::vector<Segment> rot;
  auto append_u = [&] { rot.insert(rot.end(), u.begin(), u.end()); };
  append_u();
  rot.push_back({SegmentKind::h0, timing.tau_b, {}});
  append_u();
  rot.push_back({SegmentKind::h0, timing.tau_a, {}});
  append_u();
  rot.push_back({SegmentKind::h0, timing.tau_b, {}});
  append_u();
  rot.push_back({SegmentKind::wait, timing.tau, {}});
  for (int k = 0; k < timing.m; ++k) s.segments.insert(s.segments.end(), rot.begin(), rot.end());
  return s;
}

Propagators propagate(const SpinNetwork& network, const PiecewiseSchedule& schedule, const DynamicsOptions& options) {
  detail::require_exact_size(network);
  const int n = network.n_spins();
  const Eigen::Index d = Eigen::Index{1} << n;
  const KindSpectra ks = kind_spectra(network, options);
  std::map<std::pair<int, double>, Matrix> cache;
  Matrix u = Matrix::Identity(d, d);
  std::vector<Mat2> u0(static_cast<std::size_t>(n), Mat2::Identity());
  for (const auto& seg : schedule.segments) {
    if (seg.kind == SegmentKind::ideal_pulse) {
      const Mat2 p = seg.pulse.to_matrix();
      u = tensor_power(p, n) * u;
      for (auto& x : u0) x = p * x;
      continue;
    }
    if (seg.duration == 0.0) continue;
    const int k = static_cast<int>(seg.kind);
    auto key = std::make_pair(k, seg.duration);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, ks.full[static_cast<std::size_t>(k)].evolve(seg.duration)).first;
    u = it->second * u;
    u0 = local_mul(local_step(ks.local[static_cast<std::size_t>(k)], seg.duration), u0);
  }
  return {std::move(u), detail::kron_all(u0), schedule.period()};
}

Propagators propagate_protocol(const SpinNetwork& network, const ProtocolTiming& timing,
                               const DynamicsOptions& options) {
  timing.validate();
  detail::require_exact_size(network);
  const int n = network.n_spins();
  const KindSpectra ks = kind_spectra(network, options);
  const auto& full = ks.full;
  const auto& local = ks.local;
  constexpr std::size_t h0 = 0, h1 = 1, wait = 2;

  Matrix step;
  std::vector<Mat2> step0;
  if (timing.pulse_model == PulseModel::ideal) {
    const Mat2 p = Rotation::from_axis_angle(magic_axis(network), 2.0 * std::numbers::pi / timing.m).to_matrix();
    step = full[wait].evolve(timing.tau) * tensor_power(p, n);
    step0 = local_step(local[wait], timing.tau);
    for (auto& x : step0) x = x * p;
  } else {
    Matrix u = full[h1].evolve(timing.tau_1);
    std::vector<Mat2> u0 = local_step(local[h1], timing.tau_1);
    const Matrix r0 = full[h0].evolve(timing.tau_0);
    const auto r00 = local_step(local[h0], timing.tau_0);
    for (int k = 1; k < timing.n_c; ++k) {
      u = u * r0 * u;
      u0 = local_mul(local_mul(u0, r00), u0);
    }
    const Matrix rb = full[h0].evolve(timing.tau_b), ra = full[h0].evolve(timing.tau_a);
    const auto rb0 = local_step(local[h0], timing.tau_b), ra0 = local_step(local[h0], timing.tau_a);
    const Matrix v = u * rb * u;
    const auto v0 = local_mul(local_mul(u0, rb0), u0);
    step = full[wait].evolve(timing.tau) * (v * ra * v);
    step0 = local_mul(local_step(local[wait], timing.tau), local_mul(local_mul(v0, ra0), v0));
  }
  return {matrix_power(step, timing.m), detail::kron_all(local_power(step0, timing.m)), timing.period()};
}

LogResult effective_hamiltonian(const Matrix& u, const Matrix& u0, double period) {
  return unitary_log(SpinOperator(u0.adjoint() * u), period);
}

Rotation concatenated_rotation(const SpinNetwork& network, const ProtocolTiming& timing) {
  SpinNetwork bare;
  bare.b0 = network.b0;
  bare.wire_field = network.wire_field;
  bare.constants = network.constants;
  bare.gamma_ref = network.gamma_ref;
  bare.sites = {{Vec3::Zero(), network.gamma_ref}};
  const FieldFrame f = network.frame();
  auto in_frame = [&](SegmentKind kind, double t) {
    const Rotation r = Rotation::from_su2(propagate(bare, PiecewiseSchedule{{{kind, t, {}}}}).u0);
    return Rotation::from_axis_angle(Vec3(f.x.dot(r.axis), f.y.dot(r.axis), f.z.dot(r.axis)), r.flip);
  };
  return concatenate(in_frame(SegmentKind::h1, timing.tau_1), in_frame(SegmentKind::h0, timing.tau_0), timing.n_c);
}

FinalStepSolution design_final_step(const SpinNetwork& network, const ProtocolTiming& timing,
                                    std::optional<double> target_flip, const FinalStepOptions& options) {
  const double two_pi = 2.0 * std::numbers::pi;
  return solve_final_step(concatenated_rotation(network, timing), two_pi, target_flip.value_or(two_pi / timing.m),
                          options);
}

ProtocolTiming designed_timing(const SpinNetwork& network, ProtocolTiming timing) {
  const FinalStepSolution s = design_final_step(network, timing);
  timing.tau_a = s.tau_a;
  timing.tau_b = s.tau_b;
  return timing;
}

namespace diagnostics {
LogResult schrodinger_effective(const Matrix& u, double period) { return unitary_log(SpinOperator(u), period); }
}  // namespace diagnostics

MasAverage mas_average_matrix(const Vec3& axis, int m) {
  if (m < 3) throw std::invalid_argument("mas_average_matrix: m must be >= 3");
  const Vec3 n = axis.normalized();
  const Vec3 z = Vec3::UnitZ();
  MasAverage out;
  out.discrete.setZero();
  for (int k = 1; k <= m; ++k) {
    const Mat3 r = Rotation::from_axis_angle(n, 2.0 * std::numbers::pi * k / m).so3();
    const Vec3 rz = r * z;
    out.discrete += rz * rz.transpose();
  }
  out.discrete /= m;
  const double c2 = n.z() * n.z();
  const Mat3 nn = n * n.transpose();
  out.closed_form = c2 * nn + 0.5 * (1.0 - c2) * (Mat3::Identity() - nn);
  return out;
}

std::vector<StateVector> evolve_stroboscopic(const SpinNetwork& network, const ProtocolTiming& timing,
                                             const StateVector& psi0, int n_periods, const DynamicsOptions& options) {
  if (n_periods < 0) throw std::invalid_argument("n_periods must be >= 0");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state must be normalized");
  const Matrix u = propagate_protocol(network, timing, options).u;
  if (u.rows() != psi0.size()) throw std::invalid_argument("state dimension does not match the network");
  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(n_periods) + 1);
  out.push_back(psi0);
  for (int p = 0; p < n_periods; ++p) out.push_back(u * out.back());
  return out;
}

std::vector<double> entropy_series(const std::vector<StateVector>& states, const std::vector<int>& keep) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& psi : states)
    out.push_back(entanglement_entropy(partial_trace(density_matrix(psi), std::span<const int>(keep))));
  return out;
}

}  // namespace magicspin
