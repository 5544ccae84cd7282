#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>

#include "magicspin/analysis.hpp"
#include "oracles.hpp"

using namespace magicspin;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double nm = 1e-9;

SpinNetwork fig3_pair() {
  SpinNetwork net;
  net.sites = {{Vec3(5 * nm, 0, 0)}, {Vec3(5.5 * nm, 0, 0)}};
  net.wire_field = wire_for_tilt(net.b0, 2.5 * kPi / 180);
  return net;
}

ProtocolTiming designed_timing() {
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  const Rotation u5 = concatenate(Rotation::from_axis_angle(tilted_axis(2.5 * kPi / 180), kPi), r0, 5);
  const FinalStepSolution sol = solve_final_step(u5, 2 * kPi, 2 * kPi / 3);
  ProtocolTiming t;
  t.n_c = 5;
  t.m = 3;
  t.tau = 1000.5;
  t.tau_a = sol.tau_a;
  t.tau_b = sol.tau_b;
  return t;
}

}  // namespace

TEST_CASE("extract_pair_coupling examples") {
  const double c = 0.37;
  const PairCoupling zz = extract_pair_coupling(Matrix(c * oracle::kron(oracle::sigma(3), oracle::sigma(3))), 0, 1);
  CHECK(zz.d_matrix(2, 2) == doctest::Approx(c));
  CHECK(zz.d_matrix.norm() == doctest::Approx(c));
  CHECK(zz.strength == doctest::Approx(c));

  CHECK_THROWS(extract_pair_coupling(Matrix(Matrix::Identity(4, 4)), 1, 1));
  CHECK_THROWS(extract_pair_coupling(Matrix(Matrix::Identity(4, 4)), 0, 2));

  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = oracle::random_hermitian(8, rng);
    for (auto [j, k] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{2, 1}}) {
      const PairCoupling p = extract_pair_coupling(h, j, k);
      double acc = 0.0;
      for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
          std::vector<int> labels(3, 0);
          labels[static_cast<std::size_t>(j)] = a;
          labels[static_cast<std::size_t>(k)] = b;
          const double expected = oracle::projection(h, labels).real();
          CHECK(p.d_matrix(a - 1, b - 1) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
          acc += expected * expected;
        }
      CHECK(p.strength == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bare strength equals the analytic Frobenius norm; secular carries the geometric share") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    SpinNetwork net;
    const Vec3 e = oracle::random_unit(rng);
    net.sites = {{Vec3::Zero()}, {0.3 * nm * e}};
    const double d = dipolar_constant(net.sites[0], net.sites[1]) * net.units().larmor_period();
    // D_mn = J_mn / 4 with J = D (3 e e^T - 1), ||3 e e^T - 1||_F = sqrt(6)
    const double analytic = std::abs(d) * std::sqrt(6.0) / 4.0;
    CHECK(bare_pair_strength(net, 0, 1) == doctest::Approx(analytic).epsilon(1e-12));
    CHECK(extract_pair_coupling(dipolar_hamiltonian(net, false), 0, 1).strength ==
          doctest::Approx(analytic).epsilon(1e-12));
    const double sec = extract_pair_coupling(dipolar_hamiltonian(net, true), 0, 1).strength;
    CHECK(sec / analytic == doctest::Approx(std::abs(3 * e.z() * e.z() - 1) / 2).epsilon(1e-12));
  }
  SpinNetwork flat;
  flat.sites = {{Vec3::Zero()}, {Vec3(0.2 * nm, 0.1 * nm, 0)}};
  CHECK(extract_pair_coupling(dipolar_hamiltonian(flat, true), 0, 1).strength / bare_pair_strength(flat, 0, 1) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("decoupling_ratio examples") {
  const SpinNetwork net = fig3_pair();
  ProtocolTiming off;
  off.tau_1 = off.tau_0 = 0.0;
  off.tau = 1.0;
  const DecouplingReport r_off = decoupling_ratio(net, off, {0, 1});
  CHECK(r_off.ratio == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(r_off.ratio <= 0.5 + 1e-9);
  CHECK(r_off.secular_ceiling == doctest::Approx(0.5));

  const ProtocolTiming t = designed_timing();
  const DecouplingReport r = decoupling_ratio(net, t, {0, 1});
  CHECK(r.ratio >= 1e-4);
  CHECK(r.ratio <= 1e-3);
  CHECK(r.bare_strength == doctest::Approx(bare_pair_strength(net, 0, 1)));
  CHECK(r.effective_strength == doctest::Approx(r.ratio * r.bare_strength));

  SpinNetwork with_nv = net;
  NVActuator a, b;
  a.position = Vec3(5 * nm, 0, -2.5 * nm);
  b.position = Vec3(11 * nm, 0, -2.5 * nm);
  with_nv.nvs = {a, b};
  CHECK(decoupling_ratio(with_nv, t, {0, 1}).ratio > 10 * r.ratio);

  CHECK_THROWS(decoupling_ratio(net, t, {0, 0}));
  CHECK_THROWS(decoupling_ratio(net, t, {0, 2}));
}

TEST_CASE("a magic-angle design is a local minimum of R") {
  const SpinNetwork net = fig3_pair();
  const ProtocolTiming t = designed_timing();
  const double r0 = decoupling_ratio(net, t, {0, 1}).ratio;
  for (auto [da, db] : {std::pair{1e-3, 0.0}, std::pair{-1e-3, 0.0}, std::pair{0.0, 1e-3}, std::pair{0.0, -1e-3}}) {
    ProtocolTiming p = t;
    p.tau_a += da;
    p.tau_b += db;
    CHECK(decoupling_ratio(net, p, {0, 1}).ratio > r0);
  }
}

TEST_CASE("property: R is invariant under rotating the whole setup about B0") {
  ProtocolTiming t;
  t.n_c = 3;
  t.tau_a = 0.21;
  t.tau_b = 0.34;
  t.tau = 2.25;
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> ang(0, 2 * kPi);
  for (int trial = 0; trial < 10; ++trial) {
    SpinNetwork net;
    net.sites = {{0.2 * nm * oracle::random_unit(rng)}, {0.4 * nm * oracle::random_unit(rng)}, {Vec3(0.5 * nm, 0, 0.1 * nm)}};
    net.wire_field = wire_for_tilt(net.b0, 0.2);
    const double phi = ang(rng);
    SpinNetwork rot = net;
    for (auto& s : rot.sites) s.position = oracle::rotate(s.position, Vec3::UnitZ(), phi);
    rot.wire_field = oracle::rotate(net.wire_field, Vec3::UnitZ(), phi);
    const auto a = decoupling_ratios(net, t, {{0, 1}, {1, 2}});
    const auto b = decoupling_ratios(rot, t, {{0, 1}, {1, 2}});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].ratio - b[i].ratio) < 1e-10);
  }
}

TEST_CASE("many_body_strength counts only terms of the requested weight") {
  const Matrix h = 0.3 * oracle::pauli_string({1, 2, 3}) + 0.4 * oracle::pauli_string({3, 3, 0}) + oracle::pauli_string({0, 0, 1});
  CHECK(many_body_strength(SpinOperator(h, true)) == doctest::Approx(0.3));
  CHECK(many_body_strength(SpinOperator(h, true), 2) == doctest::Approx(0.5));
}

TEST_CASE("select_cluster picks nearest spins with deterministic ties") {
  SpinNetwork net;
  net.sites = {{Vec3(0, 0, 0)}, {Vec3(1 * nm, 0, 0)}, {Vec3(-1 * nm, 0, 0)}, {Vec3(2 * nm, 0, 0)}, {Vec3(5 * nm, 0, 0)}};
  bool fallback = true;
  auto c = select_cluster(net, 0, 1, 4, &fallback);
  CHECK_FALSE(fallback);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == 0);
  CHECK(c[1] == 1);
  // -1 nm and 2 nm tie at 1 nm from the pair; -1 nm is lexicographically first
  CHECK(std::find(c.begin(), c.end(), 2) != c.end());
  CHECK(std::find(c.begin(), c.end(), 3) != c.end());
  c = select_cluster(net, 0, 1, 6, &fallback);
  CHECK(fallback);
  CHECK(c.size() == 5);
}

TEST_CASE("lattice_map on a uniform lattice is uniform") {
  SpinNetwork lat;
  for (const auto& p : hexagonal_lattice(0.71 * nm, 1)) lat.sites.push_back({p});
  lat.wire_field = wire_for_tilt(lat.b0, 2.5 * kPi / 180);
  ProtocolTiming t;
  t.n_c = 1;
  t.m = 3;
  t.tau_a = 0.3;
  t.tau_b = 0.2;
  t.tau = 10.5;
  const auto edges = nearest_neighbour_edges(hexagonal_lattice(0.71 * nm, 1), 0.71 * nm);
  const auto map = lattice_map(lat, t, edges, 2, {{}, 2});
  REQUIRE(map.size() == 6);
  for (const auto& e : map) {
    CHECK(e.report.ratio == doctest::Approx(map[0].report.ratio).epsilon(1e-2));
    CHECK(e.cluster.size() == 2);
  }
  const auto map4 = lattice_map(lat, t, edges, 4);
  for (std::size_t i = 0; i < map.size(); ++i) {
    CHECK(map4[i].cluster.size() == 4);
    CHECK(map4[i].report.j == map[i].report.j);
  }
  CHECK_THROWS(lattice_map(lat, t, edges, 3));
}

TEST_CASE("position_independence_scan: R becomes distance independent") {
  const SpinNetwork base = fig3_pair();
  const ProtocolTiming t = designed_timing();
  const std::vector<Vec3> dirs{Vec3::UnitX(), Vec3(1, 1, 0), Vec3(1, 0, 0.3)};
  const PositionScan scan = position_independence_scan(base, t, {0.12 * nm, 0.5 * nm, 1.0 * nm, 2.0 * nm}, dirs, 5e-2);
  REQUIRE(scan.rows.size() == 12);
  CHECK(scan.convergence_separation <= 0.5 * nm + 1e-15);
  bool departs = false;
  for (const auto& r : scan.rows) {
    if (r.separation >= 0.5 * nm) CHECK(r.on_plateau);
    if (r.separation < 0.2 * nm && !r.on_plateau) departs = true;
    CHECK(r.ratio <= 0.5 + 1e-9);
  }
  CHECK(departs);
  CHECK(scan.anisotropy >= 0.0);
  CHECK_THROWS(position_independence_scan(base, t, {0.0}, {Vec3::UnitX()}));
}

TEST_CASE("tertiary_spin_scan: far spin keeps the baseline, close spin enhances but stays below bare") {
  SpinNetwork pair;
  pair.sites = {{Vec3(-1 * nm, 0, 0)}, {Vec3(1 * nm, 0, 0.2 * nm)}};
  ProtocolTiming t;
  t.pulse_model = PulseModel::ideal;
  t.tau = 1000.0;
  t.m = 3;
  const double bare = bare_pair_strength(pair, 0, 1);
  const TertiaryScan scan = tertiary_spin_scan(pair, {Vec3(0, 0, 1e-6), Vec3(-0.85 * nm, 0, 0.1 * nm), Vec3(-1 * nm, 0, 0)}, t);
  REQUIRE(scan.rows.size() == 3);
  CHECK(scan.baseline_ratio < 1e-8);
  CHECK(std::abs(scan.rows[0].effective_strength - scan.baseline_strength) < 1e-9 * bare);
  CHECK(scan.rows[1].enhancement > 1e3);
  CHECK(scan.rows[1].effective_strength < bare);
  CHECK(scan.rows[2].excluded);
}

TEST_CASE("cluster_convergence reference row is exact") {
  const SpinNetwork base = fig3_pair();
  ProtocolTiming t;
  t.n_c = 2;
  t.tau_a = 0.2;
  t.tau_b = 0.3;
  t.tau = 100.5;
  const auto rows = cluster_convergence(base, 0.5 * nm, {2, 4, 6}, t);
  REQUIRE(rows.size() == 3);
  CHECK(rows.back().difference == 0.0);
  CHECK(rows[0].difference > rows[1].difference);
  CHECK_THROWS(cluster_convergence(base, 0.5 * nm, {3}, t));
  CHECK_THROWS(cluster_convergence(base, 0.5 * nm, {10}, t));
}

TEST_CASE("loglog_slope recovers power laws") {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(0.1 * i);
    y.push_back(3.0 * std::pow(0.1 * i, -9.0));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(-9.0).epsilon(1e-12));
  CHECK_THROWS(loglog_slope({1.0}, {1.0}));
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, threads, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](int i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("threaded and serial ratios agree exactly") {
  const SpinNetwork net = fig3_pair();
  const ProtocolTiming t = designed_timing();
  SpinNetwork tri = net;
  tri.sites.push_back({Vec3(5.2 * nm, 0.4 * nm, 0)});
  const auto a = decoupling_ratios(tri, t, {{0, 1}, {0, 2}, {1, 2}}, {{}, 1});
  const auto b = decoupling_ratios(tri, t, {{0, 1}, {0, 2}, {1, 2}}, {{}, 4});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].ratio == b[i].ratio);
}
