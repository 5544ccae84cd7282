#pragma once

#include <numbers>
#include <stdexcept>
#include <vector>

#include "magicspin/spin_algebra.hpp"

namespace magicspin {

class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhysicalConstants {
  double mu0 = 4.0e-7 * std::numbers::pi;
  double hbar = 1.054571817e-34;
  /// 13C, rad s^-1 T^-1
  double gamma_c13 = 2.0 * std::numbers::pi * 10.7084e6;
  /// NV electron, rad s^-1 T^-1
  double gamma_e = -2.0 * std::numbers::pi * 28.024e9;
};

struct SpinSite {
  Vec3 position = Vec3::Zero();  // m
  double gamma = PhysicalConstants{}.gamma_c13;
};

enum class NVGating { pulse_synchronous, active_during_wait };
enum class NVFieldMode { full_vector, z_only };

struct NVActuator {
  Vec3 position = Vec3::Zero();  // m
  double gamma_e = PhysicalConstants{}.gamma_e;
  int active_state = -1;  // 0 or -1
  NVGating gating = NVGating::pulse_synchronous;
  Vec3 axis = Vec3::UnitZ();
};

/// hbar = 1, time unit = Larmor period 2pi / (gamma_ref |B0|).
struct UnitSystem {
  double gamma_ref = PhysicalConstants{}.gamma_c13;
  double b0_magnitude = 0.1;

  double larmor_period() const { return 2.0 * std::numbers::pi / (std::abs(gamma_ref) * b0_magnitude); }
  /// rad/s -> rad per Larmor period
  double to_larmor(double omega) const { return omega * larmor_period(); }
};

/// Orthonormal frame with z along B0 and x along the transverse part of the wire field.
struct FieldFrame {
  Vec3 x, y, z;
};

struct SpinNetwork {
  std::vector<SpinSite> sites;
  std::vector<NVActuator> nvs;
  Vec3 b0 = Vec3(0.0, 0.0, 0.1);  // T
  Vec3 wire_field = Vec3::Zero();  // T
  NVFieldMode nv_field_mode = NVFieldMode::full_vector;
  PhysicalConstants constants;
  double gamma_ref = PhysicalConstants{}.gamma_c13;

  int n_spins() const { return static_cast<int>(sites.size()); }
  UnitSystem units() const { return {gamma_ref, b0.norm()}; }
  FieldFrame frame() const;
  /// Throws NetworkError on |b0| = 0, gamma = 0, coincident sites or bad NV state.
  void validate() const;
  /// Copy restricted to `indices` (NVs and fields kept).
  SpinNetwork subset(const std::vector<int>& indices) const;
};

/// Wire field making |B1| = |B0| with B1 tilted by `tilt` from B0 at `azimuth`
/// (azimuth measured from `reference_x`, which must not be parallel to B0).
Vec3 wire_for_tilt(const Vec3& b0, double tilt, double azimuth = 0.0, const Vec3& reference_x = Vec3::UnitX());

/// D = -mu0 gamma_j gamma_k hbar / (8 pi r^3), rad/s.
double dipolar_constant(const SpinSite& j, const SpinSite& k, const PhysicalConstants& c = {});

/// J with H = sum_ab J_ab I_a^j I_b^k (I = sigma/2), rad/s.
/// Full: D (3 e e^T - 1). Secular: (D/2)(3 cos^2 beta - 1)(3 z z^T - 1), z = b0_axis.
Mat3 dipolar_tensor(const SpinSite& j, const SpinSite& k, bool secular, const Vec3& b0_axis,
                    const PhysicalConstants& c = {});

/// 4x4 pair Hamiltonian in rad/s (site j is the left factor).
SpinOperator dipolar_pair_hamiltonian(const SpinSite& j, const SpinSite& k, bool secular, const Vec3& b0_axis,
                                      const PhysicalConstants& c = {});

/// Point-dipole field of an NV (zero when its state is 0), tesla.
Vec3 nv_dipole_field(const NVActuator& nv, const Vec3& point, const PhysicalConstants& c = {});

/// Per-site field: config 0 -> b0, config 1 -> b0 + wire; NV fields added when nv_on.
std::vector<Vec3> field_configuration(const SpinNetwork& network, int config, bool nv_on);

/// Honeycomb vertices of all hexagons within `extent` rings (extent 1 = one hexagon), z = 0.
/// The first hexagon has a vertex at the origin and a bond from (0,0) to (a_lat,0).
std::vector<Vec3> hexagonal_lattice(double a_lat, int extent);
/// Index pairs at nearest-neighbour distance a_lat.
std::vector<std::pair<int, int>> nearest_neighbour_edges(const std::vector<Vec3>& positions, double a_lat);

/// Embed a two-site operator (j is the left factor of `op`) into n spins.
Matrix embed_pair(const Eigen::Matrix4cd& op, int j, int k, int n_spins);
/// sum_ab J_ab I_a^j I_b^k as a 4x4 matrix.
Eigen::Matrix4cd coupling_matrix(const Mat3& j_tensor);

/// Zeeman Hamiltonian sum_j gamma_j B_j . I_j in rad per Larmor period.
Matrix zeeman_hamiltonian(const SpinNetwork& network, const std::vector<Vec3>& fields);
/// Sum of all pair dipolar terms in rad per Larmor period.
Matrix dipolar_hamiltonian(const SpinNetwork& network, bool secular);

}  // namespace magicspin
