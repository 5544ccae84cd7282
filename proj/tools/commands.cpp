#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include "magicspin/magicspin.hpp"

namespace magicspin::cli {

namespace {

constexpr double kNm = 1e-9;
constexpr double kDeg = 180.0 / std::numbers::pi;

using Row = std::vector<Table::Cell>;

SpinNetwork require_network(const RunConfig& rc) {
  if (!rc.network) throw UsageError("config has no network section");
  return rc.network->network;
}

void require_exact_size(const SpinNetwork& net) {
  if (net.n_spins() > 8)
    throw UsageError(std::to_string(net.n_spins()) +
                     " spins exceed the exact-dynamics limit of 8; use `map` with a cluster_size for large networks");
}

ProtocolTiming require_protocol(const RunConfig& rc, const SpinNetwork& net, std::ostream& log) {
  if (!rc.protocol) throw UsageError("config has no protocol section");
  ProtocolTiming t = *rc.protocol;
  if (rc.protocol_from_design) {
    t = designed_timing(net, t);
    log << "designed tau_a = " << format_real(t.tau_a) << ", tau_b = " << format_real(t.tau_b) << '\n';
  }
  return t;
}

AnalysisOptions analysis_options(const RunConfig& rc, const Options& opt) { return {rc.dynamics, opt.threads}; }

long long flag(bool b) { return b ? 1 : 0; }

Output single(std::string name, Table t) {
  Output out;
  out.tables.emplace_back(std::move(name), std::move(t));
  return out;
}

double param_value(const ProtocolTiming& t, TimingParam p) {
  switch (p) {
    case TimingParam::tau_a: return t.tau_a;
    case TimingParam::tau_b: return t.tau_b;
    case TimingParam::tau: return t.tau;
  }
  return 0.0;
}

const std::vector<std::string> kReportColumns{
    "j",    "k",    "xj_nm", "yj_nm", "zj_nm", "xk_nm", "yk_nm", "zk_nm", "bare_strength", "effective_strength",
    "ratio", "d_xx", "d_xy", "d_xz", "d_yx",  "d_yy",  "d_yz",  "d_zx",  "d_zy",  "d_zz",
    "secular_ceiling", "branch_warning"};

Row report_row(const DecouplingReport& r) {
  Row row{static_cast<long long>(r.j), static_cast<long long>(r.k)};
  for (const Vec3* p : {&r.position_j, &r.position_k})
    for (int i = 0; i < 3; ++i) row.emplace_back((*p)(i) / kNm);
  row.insert(row.end(), {r.bare_strength, r.effective_strength, r.ratio});
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) row.emplace_back(r.d_matrix(a, b));
  row.insert(row.end(), {r.secular_ceiling, flag(r.branch_warning)});
  return row;
}

std::vector<std::pair<int, int>> all_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) out.emplace_back(j, k);
  return out;
}

std::vector<std::pair<int, int>> map_edges(const NetworkDescription& d) {
  std::vector<Vec3> pos;
  for (const auto& s : d.network.sites) pos.push_back(s.position);
  if (d.lattice) return nearest_neighbour_edges(pos, d.lattice->a_lat);
  double dmin = INFINITY;
  for (auto [j, k] : all_pairs(static_cast<int>(pos.size())))
    dmin = std::min(dmin, (pos[static_cast<std::size_t>(j)] - pos[static_cast<std::size_t>(k)]).norm());
  if (!std::isfinite(dmin)) throw UsageError("map needs at least two spins");
  return nearest_neighbour_edges(pos, dmin);
}

Table wait_time_table(const RunConfig& rc, const ScanSection& sc, const Options& opt, std::ostream& log) {
  const SpinNetwork net = require_network(rc);
  require_exact_size(net);
  const ProtocolTiming t = require_protocol(rc, net, log);
  if (sc.taus.empty()) throw UsageError("scan.taus is required for a wait_time scan");
  const AnalysisOptions ao = analysis_options(rc, opt);
  const auto ideal = wait_time_scan(net, t, sc.taus, PulseModel::ideal, ao);
  if (sc.pulse_model == PulseModel::ideal) {
    Table table({"tau", "ratio_ideal"});
    for (const auto& r : ideal) table.add_row({r.tau, r.ratio});
    return table;
  }
  const auto finite = wait_time_scan(net, t, sc.taus, PulseModel::finite, ao);
  Table table({"tau", "ratio_finite", "ratio_ideal"});
  for (std::size_t i = 0; i < finite.size(); ++i) table.add_row({finite[i].tau, finite[i].ratio, ideal[i].ratio});
  return table;
}

Table landscape_table(const RunConfig& rc, const ScanSection& sc, const Options& opt, std::ostream& log) {
  SpinNetwork net = rc.network ? rc.network->network : SpinNetwork{};
  if (!rc.network) net.wire_field = wire_for_tilt(net.b0, sc.theta0);
  const ProtocolTiming t = rc.protocol.value_or(ProtocolTiming{});
  LandscapeOptions lo;
  lo.grid = sc.grid;
  lo.m = t.m;
  lo.analysis = analysis_options(rc, opt);
  if (sc.with_ratio) {
    if (!rc.network || net.n_spins() < 2) throw UsageError("landscape with_ratio needs a network with a pair");
    require_exact_size(net);
    lo.network = &net;
    lo.timing_template = &t;
  }
  const Rotation u = concatenated_rotation(net, t);
  log << "U^(n_c) tilt " << angles_of(u).tilt * kDeg << " deg, flip " << u.flip * kDeg << " deg\n";
  const Landscape land = tau_ab_landscape(u, 2.0 * std::numbers::pi, lo);
  Table table({"tau_a", "tau_b", "tilt_deg", "flip_deg", "azimuth_deg", "cost", "ratio"});
  for (const auto& p : land.points)
    table.add_row({p.tau_a, p.tau_b, p.angles.tilt * kDeg, p.angles.flip * kDeg, p.angles.azimuth * kDeg, p.cost,
                   p.ratio});
  return table;
}

Table sensitivity_table(const ScanSection& sc) {
  std::vector<double> alpha = sc.alpha1;
  if (alpha.empty())
    for (int i = 0; i <= 360; ++i) alpha.push_back(i / kDeg);
  Table table({"alpha1_deg", "tilt_deg", "flip_deg"});
  for (const auto& r : sensitivity_scan(sc.theta0, alpha)) table.add_row({r.alpha1 * kDeg, r.tilt * kDeg, r.flip * kDeg});
  return table;
}

Table tertiary_table(const RunConfig& rc, const ScanSection& sc, const Options& opt, std::ostream& log) {
  const SpinNetwork net = require_network(rc);
  if (net.n_spins() != 2) throw UsageError("tertiary scan needs a two-spin network");
  const ProtocolTiming t = require_protocol(rc, net, log);
  if (sc.positions.empty()) throw UsageError("scan.positions_nm is required for a tertiary scan");
  const TertiaryScan ts = tertiary_spin_scan(net, sc.positions, t, analysis_options(rc, opt));
  log << "two-spin baseline R = " << format_real(ts.baseline_ratio) << '\n';
  Table table({"x_nm", "y_nm", "z_nm", "effective_strength", "ratio", "enhancement", "excluded"});
  for (const auto& r : ts.rows)
    table.add_row({r.position.x() / kNm, r.position.y() / kNm, r.position.z() / kNm, r.effective_strength, r.ratio,
                   r.enhancement, flag(r.excluded)});
  return table;
}

Table convergence_table(const RunConfig& rc, const ScanSection& sc, const Options& opt, std::ostream& log) {
  const SpinNetwork base = require_network(rc);
  const ProtocolTiming t = require_protocol(rc, base, log);
  if (sc.spacings.empty() || sc.lengths.empty()) throw UsageError("convergence scan needs spacings_nm and lengths");
  Table table({"spacing_nm", "length", "difference", "relative"});
  std::vector<double> spacing, first_diff;
  for (double s : sc.spacings) {
    const auto rows = cluster_convergence(base, s, sc.lengths, t, analysis_options(rc, opt));
    for (const auto& r : rows) table.add_row({s / kNm, static_cast<long long>(r.length), r.difference, r.relative});
    spacing.push_back(s);
    first_diff.push_back(rows.front().difference);
    if (spacing.size() == 1 && rows.size() > 2) {
      std::vector<double> len, rel;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        len.push_back(rows[i].length);
        rel.push_back(rows[i].relative);
      }
      log << "relative-accuracy slope vs L at " << s / kNm << " nm: " << loglog_slope(len, rel) << '\n';
    }
  }
  if (spacing.size() > 1)
    log << "difference slope vs spacing (L = " << sc.lengths.front() << "): " << loglog_slope(spacing, first_diff)
        << '\n';
  return table;
}

Table position_table(const RunConfig& rc, const ScanSection& sc, const Options& opt, std::ostream& log) {
  const SpinNetwork base = require_network(rc);
  const ProtocolTiming t = require_protocol(rc, base, log);
  if (sc.separations.empty()) throw UsageError("position scan needs separations_nm");
  const std::vector<Vec3> dirs = sc.orientations.empty() ? std::vector<Vec3>{Vec3::UnitX()} : sc.orientations;
  const PositionScan ps =
      position_independence_scan(base, t, sc.separations, dirs, sc.tolerance, analysis_options(rc, opt));
  log << "plateau R " << format_real(ps.plateau_ratio) << ", anisotropy " << ps.anisotropy << ", converged from "
      << ps.convergence_separation / kNm << " nm\n";
  Table table({"dir_x", "dir_y", "dir_z", "separation_nm", "ratio", "on_plateau"});
  for (const auto& r : ps.rows)
    table.add_row({r.direction.x(), r.direction.y(), r.direction.z(), r.separation / kNm, r.ratio, flag(r.on_plateau)});
  return table;
}

}  // namespace

Output cmd_design(const RunConfig& rc, const Options&, std::ostream& log) {
  SpinNetwork net = rc.network ? rc.network->network : SpinNetwork{};
  const DesignSection ds = rc.design.value_or(DesignSection{});
  if (ds.theta0) net.wire_field = wire_for_tilt(net.b0, *ds.theta0);
  else if (!rc.network) net.wire_field = wire_for_tilt(net.b0, 2.5 / kDeg);
  ProtocolTiming t;
  t.n_c = ds.n_c;
  t.m = ds.m;
  t.tau_1 = ds.tau_1;
  t.tau_0 = ds.tau_0;
  FinalStepOptions fo;
  fo.grid = ds.grid;

  const Rotation u = concatenated_rotation(net, t);
  log << "U^(n_c): tilt " << angles_of(u).tilt * kDeg << " deg, flip " << u.flip * kDeg << " deg\n";
  const FinalStepSolution sol = design_final_step(net, t, ds.target_flip, fo);
  if (!sol.in_guarantee_window) log << "note: tilt of U^(n_c) is outside [theta_M/2, theta_M]\n";

  Table table({"root", "selected", "tau_a", "tau_b", "tilt_deg", "flip_deg", "azimuth_deg", "tau_rot"});
  long long i = 0;
  for (const auto& r : sol.roots) {
    ProtocolTiming rt = t;
    rt.tau_a = r.tau_a;
    rt.tau_b = r.tau_b;
    table.add_row({i, flag(i == 0), r.tau_a, r.tau_b, r.angles.tilt * kDeg, r.angles.flip * kDeg,
                   r.angles.azimuth * kDeg, rt.rotation_time()});
    ++i;
  }
  return single("design", std::move(table));
}

Output cmd_simulate(const RunConfig& rc, const Options& opt, std::ostream& log) {
  const SpinNetwork net = require_network(rc);
  require_exact_size(net);
  const SimulateSection ss = rc.simulate.value_or(SimulateSection{});
  ProtocolTiming t = require_protocol(rc, net, log);
  if (ss.protocol_off) {
    // bare H0: no rotations, one wait per sample
    ProtocolTiming off;
    off.tau_1 = off.tau_0 = 0.0;
    off.m = 2;
    off.tau = t.period() / (2.0 * ss.samples_per_period);
    t = off;
  }
  const auto pairs = ss.pairs.empty() ? all_pairs(net.n_spins()) : ss.pairs;

  Table reports(kReportColumns);
  for (const auto& r : decoupling_ratios(net, t, pairs, analysis_options(rc, opt))) reports.add_row(report_row(r));
  Output out = single("reports", std::move(reports));

  if (ss.entropy.periods > 0) {
    auto states = ss.entropy.initial_states;
    if (states.empty()) {
      std::vector<bool> up;
      std::string label;
      for (int i = 0; i < net.n_spins(); ++i) {
        up.push_back(i % 2 == 0);
        label += i % 2 == 0 ? 'u' : 'd';
      }
      states.emplace_back(label, up);
    }
    const int samples = ss.entropy.periods * (ss.protocol_off ? ss.samples_per_period : 1);
    std::vector<std::string> cols{"sample", "time"};
    std::vector<std::vector<double>> series;
    for (const auto& [label, up] : states) {
      if (static_cast<int>(up.size()) != net.n_spins())
        throw ConfigError("simulate.entropy.initial." + label + ": needs one u/d per spin");
      std::unique_ptr<bool[]> bits(new bool[up.size()]);
      for (std::size_t i = 0; i < up.size(); ++i) bits[i] = up[i];
      const StateVector psi = product_state(std::span<const bool>(bits.get(), up.size()));
      series.push_back(entropy_series(evolve_stroboscopic(net, t, psi, samples, rc.dynamics), ss.entropy.keep));
      cols.push_back("entropy_" + label);
    }
    Table entropy(cols);
    for (int p = 0; p <= samples; ++p) {
      Row row{static_cast<long long>(p), p * t.period()};
      for (const auto& s : series) row.emplace_back(s[static_cast<std::size_t>(p)]);
      entropy.add_row(std::move(row));
    }
    out.tables.emplace_back("entropy", std::move(entropy));
  }
  return out;
}

Output cmd_map(const RunConfig& rc, const Options& opt, std::ostream& log) {
  if (!rc.network) throw UsageError("config has no network section");
  const SpinNetwork net = rc.network->network;
  const ProtocolTiming t = require_protocol(rc, net, log);
  const MapSection ms = rc.map.value_or(MapSection{});
  const auto edges = map_edges(*rc.network);
  const AnalysisOptions ao = analysis_options(rc, opt);
  const auto map = lattice_map(net, t, edges, ms.cluster_size, ao);

  std::vector<std::string> cols = kReportColumns;
  cols.insert(cols.end(), {"cluster_size", "fallback"});
  std::vector<LatticeEdgeReport> check;
  if (ms.validate_cluster_size > 0) {
    check = lattice_map(net, t, edges, ms.validate_cluster_size, ao);
    cols.insert(cols.end(), {"ratio_validation", "relative_deviation"});
  }
  Table table(cols);
  double worst = 0.0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& e = map[i];
    Row row = report_row(e.report);
    row.insert(row.end(), {static_cast<long long>(e.cluster.size()), flag(e.fallback)});
    if (!check.empty()) {
      const double rv = check[i].report.ratio;
      const double dev = std::abs(e.report.ratio - rv) / rv;
      worst = std::max(worst, dev);
      row.insert(row.end(), {rv, dev});
    }
    table.add_row(std::move(row));
  }
  if (!check.empty())
    log << "max relative deviation vs " << ms.validate_cluster_size << "-spin clusters: " << worst << '\n';
  return single("map", std::move(table));
}

Output cmd_scan(const RunConfig& rc, const Options& opt, std::ostream& log) {
  if (!rc.scan) throw UsageError("config has no scan section");
  const ScanSection& sc = *rc.scan;
  if (sc.type == "wait_time") return single("wait_time", wait_time_table(rc, sc, opt, log));
  if (sc.type == "landscape") return single("landscape", landscape_table(rc, sc, opt, log));
  if (sc.type == "sensitivity") return single("sensitivity", sensitivity_table(sc));
  if (sc.type == "tertiary") return single("tertiary", tertiary_table(rc, sc, opt, log));
  if (sc.type == "convergence") return single("convergence", convergence_table(rc, sc, opt, log));
  if (sc.type == "position") return single("position", position_table(rc, sc, opt, log));
  throw UsageError("unknown scan type " + sc.type);
}

Output cmd_optimize(const RunConfig& rc, const Options& opt, std::ostream& log) {
  const SpinNetwork net = require_network(rc);
  require_exact_size(net);
  if (!rc.optimize) throw UsageError("config has no optimize section");
  ProtocolTiming t = require_protocol(rc, net, log);
  OptimizationSpec spec = rc.optimize->spec;
  if (rc.optimize->seed_from_design) {
    if (!rc.protocol_from_design) t = designed_timing(net, t);
    spec.seed_point.clear();
    for (auto p : spec.free_params) spec.seed_point.push_back(param_value(t, p));
  }
  if (opt.seed) spec.rng_seed = *opt.seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const OptimizationResult r = optimize(net, t, spec, rc.dynamics);
  log << "log10 objective: seed " << r.seed_log10 << " -> best " << r.best_log10 << " in " << r.evaluations
      << " evaluations" << (r.converged ? " (converged)" : " (budget or stall)") << '\n';

  std::vector<std::string> cols{"evaluation"};
  for (auto p : spec.free_params) cols.emplace_back(to_string(p));
  cols.emplace_back("log10_objective");
  Table trace(cols);
  for (const auto& row : r.trace) {
    Row out{static_cast<long long>(row.index)};
    for (double x : row.params) out.emplace_back(x);
    out.emplace_back(row.value);
    trace.add_row(std::move(out));
  }
  Table best({"tau_a", "tau_b", "tau", "log10_objective", "seed_log10", "evaluations", "converged"});
  best.add_row({r.best_timing.tau_a, r.best_timing.tau_b, r.best_timing.tau, r.best_log10, r.seed_log10,
                static_cast<long long>(r.evaluations), flag(r.converged)});
  Output out = single("trace", std::move(trace));
  out.tables.emplace_back("best", std::move(best));
  return out;
}

}  // namespace magicspin::cli
