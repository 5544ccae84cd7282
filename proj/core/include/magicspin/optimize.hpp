#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magicspin/analysis.hpp"

namespace magicspin {

enum class TimingParam { tau_a, tau_b, tau };
enum class Objective { ratio, strength };

std::string to_string(TimingParam p);

struct OptimizationSpec {
  std::vector<TimingParam> free_params{TimingParam::tau_a, TimingParam::tau_b, TimingParam::tau};
  /// One (lo, hi) per free parameter, Larmor periods.
  std::vector<std::pair<double, double>> bounds;
  std::vector<double> seed_point;
  std::pair<int, int> target_pair{0, 1};
  Objective objective = Objective::ratio;
  int budget = 500;
  std::uint64_t rng_seed = 1;
  int restarts = 8;
  /// Uniform jitter half-width applied to the incumbent when a restart begins.
  double jitter = 1e-3;
  /// Initial simplex edge length.
  double initial_step = 1e-3;
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-10;

  void validate() const;
};

struct TraceRow {
  int index = 0;
  std::vector<double> params;
  /// log10 of the objective (R or effective strength)
  double value = 0.0;
};

struct OptimizationResult {
  ProtocolTiming best_timing;
  double best_value = 0.0;  // R or strength
  double best_log10 = 0.0;
  double seed_log10 = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::vector<TraceRow> trace;
};

/// Nelder-Mead on log10(objective) with bound projection and sequential restarts
/// seeded from the incumbent; evaluations are cached by parameter tuple.
OptimizationResult optimize(const SpinNetwork& network, const ProtocolTiming& timing_template,
                            const OptimizationSpec& spec, const DynamicsOptions& dynamics = {});

struct WaitScanRow {
  double tau = 0.0;
  double ratio = 0.0;
};

std::vector<WaitScanRow> wait_time_scan(const SpinNetwork& network, const ProtocolTiming& timing_template,
                                        const std::vector<double>& taus, PulseModel pulse_model,
                                        const AnalysisOptions& options = {}, std::pair<int, int> pair = {0, 1});

struct LandscapePoint {
  double tau_a = 0.0;
  double tau_b = 0.0;
  AnglesTriple angles;
  double cost = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

struct Landscape {
  int grid = 0;
  double step = 0.0;
  /// Row-major: index = i * grid + j with tau_a = i * step, tau_b = j * step.
  std::vector<LandscapePoint> points;
  const LandscapePoint& at(int i, int j) const;
};

struct LandscapeOptions {
  int grid = 64;
  int m = 3;
  Vec3 h0_axis = Vec3::UnitZ();
  /// When set, R of the pair is evaluated at every point using this network/template.
  const SpinNetwork* network = nullptr;
  const ProtocolTiming* timing_template = nullptr;
  AnalysisOptions analysis;
};

/// Phase-optimised Frobenius distance to the nearest magic rotation
/// (tilt theta_M, azimuth 0 or pi, flip +-2pi/m).
double magic_cost(const Rotation& u, int m);

Landscape tau_ab_landscape(const Rotation& u_nc, double omega0, const LandscapeOptions& options);

struct ContourPoint {
  double tau_a = 0.0;
  double tau_b = 0.0;
  double flip = 0.0;
};

/// Points where tilt crosses theta_M along the tau_b direction (linear interpolation).
std::vector<ContourPoint> magic_contour(const Landscape& landscape);

/// Grid-local minima (8-neighbourhood, periodic) of the cost or of R.
std::vector<std::pair<int, int>> landscape_minima(const Landscape& landscape, bool use_ratio);

}  // namespace magicspin
