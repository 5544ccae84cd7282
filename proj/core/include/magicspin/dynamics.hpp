#pragma once

#include <array>
#include <optional>
#include <vector>

#include "magicspin/network.hpp"
#include "magicspin/rotation.hpp"
#include "magicspin/spin_algebra.hpp"

namespace magicspin {

enum class PulseModel { finite, ideal };

/// All times in Larmor periods.
struct ProtocolTiming {
  double tau_1 = 0.5;
  double tau_0 = 0.5;
  double tau_a = 0.0;
  double tau_b = 0.0;
  double tau = 0.0;
  int n_c = 1;
  int m = 3;
  PulseModel pulse_model = PulseModel::finite;

  /// tau_a + 2 tau_b + 4 [2^(n_c-1) tau_1 + (2^(n_c-1) - 1) tau_0]; 0 for ideal pulses.
  double rotation_time() const;
  /// m (rotation_time + tau)
  double period() const;
  void validate() const;
};

enum class SegmentKind { h0, h1, wait, ideal_pulse };

struct Segment {
  SegmentKind kind = SegmentKind::h0;
  double duration = 0.0;
  Rotation pulse;  // ideal_pulse only
};

struct PiecewiseSchedule {
  std::vector<Segment> segments;
  double period() const;
};

/// Magic axis (tilt theta_M, azimuth 0) in the network's B0/wire frame.
Vec3 magic_axis(const SpinNetwork& network);

/// One full period, segments in time order. Finite pulses: m x [U_tot expansion, wait];
/// ideal pulses: m x [R(2pi/m, ideal_axis), wait].
PiecewiseSchedule build_schedule(const ProtocolTiming& timing, const Vec3& ideal_axis = tilted_axis(kMagicAngle));

struct DynamicsOptions {
  /// Use the secular dipolar form instead of the full one.
  bool secular = false;
};

struct Propagators {
  Matrix u;   // full Hamiltonian
  Matrix u0;  // single-spin terms only
  double period = 0.0;
};

/// Ordered product of segment propagators; throws for more than kMaxExactSpins spins.
Propagators propagate(const SpinNetwork& network, const PiecewiseSchedule& schedule,
                      const DynamicsOptions& options = {});
/// U^(n_c) of a bare spin in the field frame (z along b0, x along the wire's transverse part).
Rotation concatenated_rotation(const SpinNetwork& network, const ProtocolTiming& timing);

/// Final-step (tau_a, tau_b) for the network fields; target flip defaults to 2 pi / m.
/// Throws InfeasibleDesignError.
FinalStepSolution design_final_step(const SpinNetwork& network, const ProtocolTiming& timing,
                                    std::optional<double> target_flip = std::nullopt,
                                    const FinalStepOptions& options = {});
/// `timing` with tau_a, tau_b taken from design_final_step.
ProtocolTiming designed_timing(const SpinNetwork& network, ProtocolTiming timing);

/// Same result as propagate(build_schedule(timing, magic_axis(network))), using the
/// recursive structure of the sequence (O(n_c + log m) matrix products).
Propagators propagate_protocol(const SpinNetwork& network, const ProtocolTiming& timing,
                               const DynamicsOptions& options = {});

/// (i/T) log(U0^dagger U), principal branch.
LogResult effective_hamiltonian(const Matrix& u, const Matrix& u0, double period);

namespace diagnostics {
/// Schroedinger-picture (i/T) log U. Subject to spurious branch jumps; diagnostics only.
LogResult schrodinger_effective(const Matrix& u, double period);
}  // namespace diagnostics

struct MasAverage {
  Mat3 discrete;
  Mat3 closed_form;
};

/// (1/m) sum_k R(2 pi k/m, n) z z^T R^T and cos^2 th n n^T + (sin^2 th / 2)(1 - n n^T).
MasAverage mas_average_matrix(const Vec3& axis, int m);

/// psi0 followed by the state after each of n_periods full periods.
std::vector<StateVector> evolve_stroboscopic(const SpinNetwork& network, const ProtocolTiming& timing,
                                             const StateVector& psi0, int n_periods,
                                             const DynamicsOptions& options = {});
/// Entropy (nats) of the reduced state on `keep` for each state.
std::vector<double> entropy_series(const std::vector<StateVector>& states, const std::vector<int>& keep);

struct MagnusTerms {
  std::array<Matrix, 3> omega;  // Omega_1..Omega_3
  double period = 0.0;
  /// (i/T) sum_{n <= order + 1} Omega_n
  Matrix effective(int order) const;
  /// exp(sum_{n <= order + 1} Omega_n), the truncated toggling-frame propagator.
  Matrix propagator(int order) const;
};

/// Piecewise-constant Magnus series of the toggling-frame interaction: within each
/// (sub)segment the toggling Hamiltonian is frozen at its start.
MagnusTerms magnus_terms(const SpinNetwork& network, const PiecewiseSchedule& schedule, bool secular,
                         int substeps = 1);
SpinOperator magnus_effective(const SpinNetwork& network, const PiecewiseSchedule& schedule, int order,
                              bool secular, int substeps = 1);

}  // namespace magicspin
