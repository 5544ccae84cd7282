#include "magicspin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace magicspin {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::clamp(threads, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PairCoupling extract_pair_coupling(const Matrix& h, int j, int k) {
  const int n = spins_for_dim(h.rows());
  if (j == k) throw std::invalid_argument("extract_pair_coupling: j and k must differ");
  if (j < 0 || k < 0 || j >= n || k >= n) throw std::invalid_argument("extract_pair_coupling: site out of range");
  PairCoupling pc;
  pc.j = j;
  pc.k = k;
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n), 0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      labels[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(a + 1);
      labels[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(b + 1);
      pc.d_matrix(a, b) = pauli_coefficient(h, PauliString(labels)).real();
    }
  pc.strength = pc.d_matrix.norm();
  return pc;
}

PairCoupling extract_pair_coupling(const SpinOperator& h, int j, int k) {
  return extract_pair_coupling(h.matrix(), j, k);
}

double bare_pair_strength(const SpinNetwork& network, int j, int k) {
  const auto& sj = network.sites.at(static_cast<std::size_t>(j));
  const auto& sk = network.sites.at(static_cast<std::size_t>(k));
  const Mat3 jt = network.units().larmor_period() *
                  dipolar_tensor(sj, sk, false, network.b0.normalized(), network.constants);
  return extract_pair_coupling(Matrix(coupling_matrix(jt)), 0, 1).strength;
}

DecouplingReport make_report(const SpinNetwork& network, const Matrix& h_eff, int j, int k) {
  DecouplingReport r;
  r.j = j;
  r.k = k;
  r.position_j = network.sites.at(static_cast<std::size_t>(j)).position;
  r.position_k = network.sites.at(static_cast<std::size_t>(k)).position;
  const PairCoupling pc = extract_pair_coupling(h_eff, j, k);
  r.d_matrix = pc.d_matrix;
  r.effective_strength = pc.strength;
  r.bare_strength = bare_pair_strength(network, j, k);
  r.ratio = r.effective_strength / r.bare_strength;
  const double cb = (r.position_j - r.position_k).normalized().dot(network.b0.normalized());
  r.secular_ceiling = std::abs(3.0 * cb * cb - 1.0) / 2.0;
  return r;
}

std::vector<DecouplingReport> decoupling_ratios(const SpinNetwork& network, const ProtocolTiming& timing,
                                                const std::vector<std::pair<int, int>>& pairs,
                                                const AnalysisOptions& options) {
  network.validate();
  const Propagators p = propagate_protocol(network, timing, options.dynamics);
  const LogResult h = effective_hamiltonian(p.u, p.u0, p.period);
  std::vector<DecouplingReport> out;
  out.reserve(pairs.size());
  for (auto [j, k] : pairs) {
    out.push_back(make_report(network, h.generator.matrix(), j, k));
    out.back().branch_warning = h.branch_ambiguous;
  }
  return out;
}

DecouplingReport decoupling_ratio(const SpinNetwork& network, const ProtocolTiming& timing, std::pair<int, int> pair,
                                  const AnalysisOptions& options) {
  return decoupling_ratios(network, timing, {pair}, options).front();
}

double many_body_strength(const SpinOperator& h, int min_weight) {
  const OperatorTable table = decompose(h);
  double acc = 0.0;
  for (const auto& [s, c] : table.coefficients())
    if (s.weight() >= min_weight) acc += c * c;
  return std::sqrt(acc);
}

std::vector<int> select_cluster(const SpinNetwork& network, int j, int k, int cluster_size, bool* fallback) {
  const int n = network.n_spins();
  std::vector<int> others;
  for (int i = 0; i < n; ++i)
    if (i != j && i != k) others.push_back(i);
  const Vec3 pj = network.sites.at(static_cast<std::size_t>(j)).position;
  const Vec3 pk = network.sites.at(static_cast<std::size_t>(k)).position;
  auto key = [&](int i) {
    const Vec3& p = network.sites[static_cast<std::size_t>(i)].position;
    return std::make_tuple(std::min((p - pj).norm(), (p - pk).norm()), p.x(), p.y(), p.z());
  };
  std::stable_sort(others.begin(), others.end(), [&](int a, int b) { return key(a) < key(b); });
  const int want = cluster_size - 2;
  const int take = std::min<int>(want, static_cast<int>(others.size()));
  if (fallback) *fallback = take < want;
  std::vector<int> cluster{j, k};
  cluster.insert(cluster.end(), others.begin(), others.begin() + take);
  return cluster;
}

std::vector<LatticeEdgeReport> lattice_map(const SpinNetwork& lattice, const ProtocolTiming& timing,
                                           const std::vector<std::pair<int, int>>& edges, int cluster_size,
                                           const AnalysisOptions& options) {
  if (cluster_size != 2 && cluster_size != 4 && cluster_size != 6)
    throw std::invalid_argument("lattice_map: cluster_size must be 2, 4 or 6");
  std::vector<LatticeEdgeReport> out(edges.size());
  parallel_for(static_cast<int>(edges.size()), options.threads, [&](int e) {
    const auto [j, k] = edges[static_cast<std::size_t>(e)];
    LatticeEdgeReport& r = out[static_cast<std::size_t>(e)];
    r.cluster = select_cluster(lattice, j, k, cluster_size, &r.fallback);
    const SpinNetwork sub = lattice.subset(r.cluster);
    r.report = decoupling_ratio(sub, timing, {0, 1}, {options.dynamics, 1});
    r.report.j = j;
    r.report.k = k;
  });
  return out;
}

PositionScan position_independence_scan(const SpinNetwork& base, const ProtocolTiming& timing,
                                        const std::vector<double>& separations, const std::vector<Vec3>& orientations,
                                        double tolerance, const AnalysisOptions& options) {
  for (double s : separations)
    if (!(s > 0.0)) throw std::invalid_argument("separations must be positive");
  if (separations.empty() || orientations.empty()) throw std::invalid_argument("empty scan");
  const SpinSite proto = base.sites.empty() ? SpinSite{} : base.sites.front();
  PositionScan scan;
  const int no = static_cast<int>(orientations.size());
  const int total = static_cast<int>(separations.size()) * no;
  scan.rows.resize(static_cast<std::size_t>(total));
  parallel_for(total, options.threads, [&](int idx) {
    const double s = separations[static_cast<std::size_t>(idx / no)];
    const Vec3 dir = orientations[static_cast<std::size_t>(idx % no)].normalized();
    SpinNetwork net = base;
    net.sites = {proto, proto};
    net.sites[0].position = Vec3::Zero();
    net.sites[1].position = s * dir;
    PositionScanRow& row = scan.rows[static_cast<std::size_t>(idx)];
    row.separation = s;
    row.direction = dir;
    row.ratio = decoupling_ratio(net, timing, {0, 1}, {options.dynamics, 1}).ratio;
  });
  // Plateau per orientation: the value at the largest separation.
  const double smax = *std::max_element(separations.begin(), separations.end());
  std::vector<double> plateau(static_cast<std::size_t>(no), 0.0);
  for (std::size_t i = 0; i < scan.rows.size(); ++i)
    if (scan.rows[i].separation == smax) plateau[i % static_cast<std::size_t>(no)] = scan.rows[i].ratio;
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    const double p = plateau[i % static_cast<std::size_t>(no)];
    scan.rows[i].on_plateau = std::abs(scan.rows[i].ratio - p) <= tolerance * p;
  }
  const auto [lo, hi] = std::minmax_element(plateau.begin(), plateau.end());
  scan.plateau_ratio = std::accumulate(plateau.begin(), plateau.end(), 0.0) / no;
  scan.anisotropy = scan.plateau_ratio > 0.0 ? (*hi - *lo) / scan.plateau_ratio : 0.0;
  scan.convergence_separation = smax;
  std::vector<double> sorted = separations;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double s : sorted) {
    bool all = true;
    for (const auto& r : scan.rows)
      if (r.separation >= s && !r.on_plateau) all = false;
    if (!all) break;
    scan.convergence_separation = s;
  }
  return scan;
}

TertiaryScan tertiary_spin_scan(const SpinNetwork& pair_network, const std::vector<Vec3>& third_positions,
                                const ProtocolTiming& timing, const AnalysisOptions& options,
                                double exclusion_radius) {
  if (pair_network.n_spins() != 2) throw std::invalid_argument("tertiary_spin_scan: expects a two-spin network");
  TertiaryScan scan;
  const DecouplingReport base = decoupling_ratio(pair_network, timing, {0, 1}, {options.dynamics, 1});
  scan.baseline_strength = base.effective_strength;
  scan.baseline_ratio = base.ratio;
  scan.rows.resize(third_positions.size());
  parallel_for(static_cast<int>(third_positions.size()), options.threads, [&](int i) {
    TertiaryRow& row = scan.rows[static_cast<std::size_t>(i)];
    row.position = third_positions[static_cast<std::size_t>(i)];
    for (const auto& s : pair_network.sites)
      if ((s.position - row.position).norm() < exclusion_radius) row.excluded = true;
    if (row.excluded) return;
    SpinNetwork net = pair_network;
    SpinSite third = pair_network.sites[0];
    third.position = row.position;
    net.sites.push_back(third);
    const DecouplingReport r = decoupling_ratio(net, timing, {0, 1}, {options.dynamics, 1});
    row.effective_strength = r.effective_strength;
    row.ratio = r.ratio;
    row.enhancement = r.effective_strength / scan.baseline_strength;
  });
  return scan;
}

std::vector<ConvergenceRow> cluster_convergence(const SpinNetwork& base, double chain_spacing,
                                                const std::vector<int>& lengths, const ProtocolTiming& timing,
                                                const AnalysisOptions& options) {
  if (lengths.empty()) throw std::invalid_argument("cluster_convergence: no lengths");
  for (int l : lengths)
    if (l < 2 || l % 2 != 0 || l > kMaxExactSpins)
      throw std::invalid_argument("cluster_convergence: lengths must be even and in 2..8");
  const SpinSite proto = base.sites.empty() ? SpinSite{} : base.sites.front();
  std::vector<ConvergenceRow> rows(lengths.size());
  parallel_for(static_cast<int>(lengths.size()), options.threads, [&](int i) {
    const int l = lengths[static_cast<std::size_t>(i)];
    SpinNetwork net = base;
    net.sites.assign(static_cast<std::size_t>(l), proto);
    for (int s = 0; s < l; ++s) net.sites[static_cast<std::size_t>(s)].position = Vec3(s * chain_spacing, 0.0, 0.0);
    const int j = l / 2 - 1;
    rows[static_cast<std::size_t>(i)].length = l;
    rows[static_cast<std::size_t>(i)].d_matrix = decoupling_ratio(net, timing, {j, j + 1}, {options.dynamics, 1}).d_matrix;
  });
  const auto ref_it = std::max_element(rows.begin(), rows.end(),
                                       [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.length < b.length; });
  const Mat3 ref = ref_it->d_matrix;
  for (auto& r : rows) {
    r.difference = (r.d_matrix - ref).norm();
    r.relative = r.difference / ref.norm();
  }
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("loglog_slope: degenerate x values");
  return (n * sxy - sx * sy) / den;
}

}  // namespace magicspin
