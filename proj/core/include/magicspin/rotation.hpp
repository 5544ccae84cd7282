#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "magicspin/spin_algebra.hpp"

namespace magicspin {

/// arctan(sqrt(2)), the tilt at which 3 cos^2 - 1 vanishes.
inline constexpr double kMagicAngle = 0.95531661812450927816;

class RotationConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// e^{i phase} exp(-i flip axis.sigma/2), kept in canonical form:
/// flip in [0, 2pi), axis_z >= 0 (ties broken by axis_x >= 0, then axis_y >= 0).
/// A (numerically) zero flip has no meaningful axis; it is reported as e_z
/// with `degenerate` set.
struct Rotation {
  Vec3 axis = Vec3::UnitZ();
  double flip = 0.0;
  double phase = 0.0;
  bool degenerate = true;

  static Rotation identity() { return {}; }
  /// Normalizes the axis and canonicalizes. Throws on a zero axis with nonzero flip.
  static Rotation from_axis_angle(const Vec3& axis, double flip, double phase = 0.0);
  /// From scalar/vector quaternion parts of q0 - i q.sigma, times e^{i phase}.
  static Rotation from_quaternion(double q0, const Vec3& q, double phase = 0.0);
  /// Any 2x2 unitary; throws when not unitary to 1e-10.
  static Rotation from_su2(const Mat2& u);

  Mat2 to_matrix() const;
  /// Unit quaternion (q0, q) with U = e^{i phase}(q0 - i q.sigma).
  double q0() const;
  Vec3 qv() const;
  /// SO(3) image (Rodrigues).
  Mat3 so3() const;
};

/// Phase-free distance: min over sign of the quaternion 4-vector difference.
double rotation_distance(const Rotation& a, const Rotation& b);

/// R_outer * R_inner.
Rotation compose(const Rotation& outer, const Rotation& inner);
/// R1 * R0 * R1 from the closed-form flip/axis expressions.
Rotation sandwich(const Rotation& rot1, const Rotation& rot0);
/// U^(1) = initial, U^(k+1) = U^(k) pivot U^(k); returns U^(n_c).
Rotation concatenate(const Rotation& initial, const Rotation& pivot, int n_c);
/// U Rb U Ra U Rb U with Ra = R(omega0 tau_a, h0_axis), Rb = R(omega0 tau_b, h0_axis).
Rotation total_sequence(const Rotation& u_nc, const Vec3& h0_axis, double omega0, double tau_a,
                        double tau_b);

struct AnglesTriple {
  double tilt = 0.0;
  double azimuth = 0.0;
  double flip = 0.0;
};

AnglesTriple angles_of(const Rotation& rot);

struct FinalStepOptions {
  int grid = 64;
  Vec3 h0_axis = Vec3::UnitZ();
  double tolerance = 1e-11;
};

struct FinalStepRoot {
  double tau_a = 0.0;
  double tau_b = 0.0;
  AnglesTriple angles;
};

struct FinalStepSolution {
  double tau_a = 0.0;
  double tau_b = 0.0;
  AnglesTriple angles;
  /// All distinct roots, sorted by the selection rule (selected root first).
  std::vector<FinalStepRoot> roots;
  /// Whether tilt(u_nc) sat inside [theta_M/2, theta_M].
  bool in_guarantee_window = false;
};

/// Achieved (tilt, flip) information when no root exists.
struct DesignFrontier {
  double max_tilt = 0.0;
  /// Flip values (radians) sampled along the tilt = theta_M contour, if any.
  std::vector<double> contour_flips;
};

class InfeasibleDesignError : public std::runtime_error {
 public:
  InfeasibleDesignError(const std::string& what, DesignFrontier frontier)
      : std::runtime_error(what), frontier_(std::move(frontier)) {}
  const DesignFrontier& frontier() const { return frontier_; }

 private:
  DesignFrontier frontier_;
};

/// Finds (tau_a, tau_b) in [0, 2pi/|omega0|)^2 landing total_sequence on tilt
/// theta_M with the target flip. Grid scan plus damped Newton; the root with the
/// smallest tau_a + 2 tau_b (then smaller tau_a) is selected.
FinalStepSolution solve_final_step(const Rotation& u_nc, double omega0, double target_flip,
                                   const FinalStepOptions& options = {});

struct SensitivityRow {
  double alpha1 = 0.0;
  double tilt = 0.0;
  double flip = 0.0;
};

/// One sandwich R1 R0 R1 with R0 = R(pi, z) and R1 = R(alpha1, n1), n1 tilted theta0 in x-z.
std::vector<SensitivityRow> sensitivity_scan(double theta0, const std::vector<double>& alpha1_grid);

/// Axis at `tilt` from z with azimuth `azimuth`.
Vec3 tilted_axis(double tilt, double azimuth = 0.0);

}  // namespace magicspin
