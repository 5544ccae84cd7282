#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "magicspin/dynamics.hpp"

namespace magicspin {

struct PairCoupling {
  int j = 0;
  int k = 1;
  /// D_mn = Re tr[(sigma_m^j sigma_n^k) H] / 2^M, m, n in {x, y, z}.
  Mat3 d_matrix = Mat3::Zero();
  /// Frobenius norm of d_matrix.
  double strength = 0.0;
};

PairCoupling extract_pair_coupling(const SpinOperator& h, int j, int k);
PairCoupling extract_pair_coupling(const Matrix& h, int j, int k);

struct DecouplingReport {
  int j = 0;
  int k = 1;
  Vec3 position_j = Vec3::Zero();
  Vec3 position_k = Vec3::Zero();
  double bare_strength = 0.0;       // full dipolar form, rad per Larmor period
  double effective_strength = 0.0;  // rad per Larmor period
  double ratio = 0.0;
  Mat3 d_matrix = Mat3::Zero();
  /// |3 cos^2 beta - 1| / 2: share of the bare strength carried by the secular part.
  double secular_ceiling = 0.5;
  bool branch_warning = false;
};

struct AnalysisOptions {
  DynamicsOptions dynamics;
  int threads = 1;
};

/// Bare strength of the full dipolar coupling between two sites, rad per Larmor period.
double bare_pair_strength(const SpinNetwork& network, int j, int k);

DecouplingReport decoupling_ratio(const SpinNetwork& network, const ProtocolTiming& timing, std::pair<int, int> pair,
                                  const AnalysisOptions& options = {});
/// Reports for several pairs from one effective Hamiltonian.
std::vector<DecouplingReport> decoupling_ratios(const SpinNetwork& network, const ProtocolTiming& timing,
                                                const std::vector<std::pair<int, int>>& pairs,
                                                const AnalysisOptions& options = {});
/// Report for pair (j, k) from an already computed effective Hamiltonian.
DecouplingReport make_report(const SpinNetwork& network, const Matrix& h_eff, int j, int k);

/// Frobenius norm of all Pauli coefficients acting on >= min_weight sites.
double many_body_strength(const SpinOperator& h, int min_weight = 3);

struct LatticeEdgeReport {
  DecouplingReport report;  // j, k refer to the full lattice
  std::vector<int> cluster;
  bool fallback = false;
};

/// Pair plus the (cluster_size - 2) nearest other spins (distance to the nearer pair
/// member, ties by lexicographic position).
std::vector<int> select_cluster(const SpinNetwork& network, int j, int k, int cluster_size, bool* fallback = nullptr);

std::vector<LatticeEdgeReport> lattice_map(const SpinNetwork& lattice, const ProtocolTiming& timing,
                                           const std::vector<std::pair<int, int>>& edges, int cluster_size,
                                           const AnalysisOptions& options = {});

struct PositionScanRow {
  double separation = 0.0;  // m
  Vec3 direction = Vec3::UnitX();
  double ratio = 0.0;
  /// Within tolerance of the same orientation's largest-separation value.
  bool on_plateau = false;
};

struct PositionScan {
  std::vector<PositionScanRow> rows;
  /// Mean over orientations of the ratio at the largest separation.
  double plateau_ratio = 0.0;
  /// (max - min) / mean of the per-orientation plateaus.
  double anisotropy = 0.0;
  /// Smallest separation from which every orientation stays on its own plateau.
  double convergence_separation = 0.0;
};

/// Two-spin R versus separation and orientation; `base` supplies fields and constants.
PositionScan position_independence_scan(const SpinNetwork& base, const ProtocolTiming& timing,
                                        const std::vector<double>& separations, const std::vector<Vec3>& orientations,
                                        double tolerance = 1e-2, const AnalysisOptions& options = {});

struct TertiaryRow {
  Vec3 position = Vec3::Zero();
  double effective_strength = 0.0;
  double ratio = 0.0;
  /// effective strength relative to the two-spin baseline
  double enhancement = 0.0;
  bool excluded = false;
};

struct TertiaryScan {
  double baseline_strength = 0.0;
  double baseline_ratio = 0.0;
  std::vector<TertiaryRow> rows;
};

/// Effective coupling of sites 0 and 1 of `pair_network` with a third spin placed at each position.
TertiaryScan tertiary_spin_scan(const SpinNetwork& pair_network, const std::vector<Vec3>& third_positions,
                                const ProtocolTiming& timing, const AnalysisOptions& options = {},
                                double exclusion_radius = 0.05e-9);

struct ConvergenceRow {
  int length = 0;
  Mat3 d_matrix = Mat3::Zero();
  double difference = 0.0;  // ||D(L) - D(L_max)||_F
  double relative = 0.0;    // difference / ||D(L_max)||_F
};

/// Central-pair effective coupling of an L-spin chain along x versus L; the largest L is the reference.
std::vector<ConvergenceRow> cluster_convergence(const SpinNetwork& base, double chain_spacing,
                                                const std::vector<int>& lengths, const ProtocolTiming& timing,
                                                const AnalysisOptions& options = {});

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace magicspin
