#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "magicspin/optimize.hpp"

namespace magicspin {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lengths in nm, fields in tesla, times in Larmor periods. Unknown keys are rejected.
///
/// {
///   "field": {"b0": [0, 0, 0.1] | {"magnitude": 0.1, "tilt_deg": 0, "azimuth_deg": 0},
///             "wire": [..] | "b1": {"tilt_deg": 2.5, "azimuth_deg": 0},
///             "nv_field_mode": "full_vector" | "z_only"},
///   "constants": {"mu0", "hbar", "gamma_c13", "gamma_e", "gamma_ref"},
///   "spins": [{"position_nm": [x, y, z], "gamma": g}],
///   "nvs": [{"position_nm": [..], "active_state": -1, "gating": "pulse_synchronous" | "active_during_wait"}],
///   "lattice": {"type": "hexagonal", "a_lat_nm": 0.71, "extent": 2}
/// }
struct LatticeSpec {
  double a_lat = 0.71e-9;  // m
  int extent = 2;
};

struct NetworkDescription {
  SpinNetwork network;
  std::optional<LatticeSpec> lattice;
};

NetworkDescription parse_network(const std::string& json_text);
NetworkDescription load_network(const std::filesystem::path& path);

enum class OutputFormat { csv, json };

struct DesignSection {
  std::optional<double> theta0;  // rad; default: tilt of b0 + wire from b0
  int n_c = 5;
  int m = 3;
  double tau_1 = 0.5;
  double tau_0 = 0.5;
  int grid = 64;
  std::optional<double> target_flip;  // rad, default 2pi/m
};

struct EntropySection {
  int periods = 0;
  /// Per labelled initial state, one spin-up flag per site.
  std::vector<std::pair<std::string, std::vector<bool>>> initial_states;
  std::vector<int> keep{0};
};

struct SimulateSection {
  /// Empty means every pair.
  std::vector<std::pair<int, int>> pairs;
  EntropySection entropy;
  /// Free evolution under H0 (no rotations); entropy is sampled samples_per_period times per protocol period.
  bool protocol_off = false;
  int samples_per_period = 1;
};

struct MapSection {
  int cluster_size = 2;
  /// 0 disables the cluster validation column.
  int validate_cluster_size = 0;
};

struct ScanSection {
  std::string type;  // wait_time | landscape | sensitivity | tertiary | convergence | position
  std::vector<double> taus;
  PulseModel pulse_model = PulseModel::finite;
  int grid = 64;
  bool with_ratio = false;
  std::vector<double> alpha1;  // rad
  double theta0 = 2.5 * std::numbers::pi / 180.0;
  std::vector<Vec3> positions;  // m, tertiary grid
  std::vector<double> spacings;  // m
  std::vector<int> lengths;
  std::vector<double> separations;  // m
  std::vector<Vec3> orientations;
  double tolerance = 1e-2;
};

struct OptimizeSection {
  OptimizationSpec spec;
  /// Seed (tau_a, tau_b) from the final-step design instead of spec.seed_point.
  bool seed_from_design = false;
};

struct RunConfig {
  std::filesystem::path source;
  std::optional<NetworkDescription> network;
  std::optional<ProtocolTiming> protocol;
  /// protocol.tau_a/tau_b are replaced by the final-step design (key "tau_ab": "design").
  bool protocol_from_design = false;
  DynamicsOptions dynamics;
  OutputFormat format = OutputFormat::csv;
  std::optional<std::string> output_path;
  std::optional<DesignSection> design;
  std::optional<SimulateSection> simulate;
  std::optional<MapSection> map;
  std::optional<ScanSection> scan;
  std::optional<OptimizeSection> optimize;
};

/// `base_dir` resolves a relative "network" path.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace magicspin
