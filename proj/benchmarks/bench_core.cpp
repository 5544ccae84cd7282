#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "magicspin/magicspin.hpp"

using namespace magicspin;

namespace {

SpinNetwork chain(int n, double spacing_nm) {
  SpinNetwork net;
  net.wire_field = wire_for_tilt(net.b0, 2.5 * std::numbers::pi / 180.0);
  for (int i = 0; i < n; ++i) net.sites.push_back({Vec3(i * spacing_nm * 1e-9, 0.0, 0.0)});
  return net;
}

ProtocolTiming fig3_timing() {
  ProtocolTiming t;
  t.tau_a = 0.1224665;
  t.tau_b = 0.1483976;
  t.tau = 1000.5;
  t.n_c = 5;
  t.m = 3;
  return t;
}

}  // namespace

static void BM_Sandwich(benchmark::State& state) {
  const Rotation r1 = Rotation::from_axis_angle(Vec3(0.1, 0.0, 1.0), 1.3);
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), std::numbers::pi);
  for (auto _ : state) benchmark::DoNotOptimize(concatenate(r1, r0, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Sandwich)->Arg(5)->Arg(20);

static void BM_PropagateProtocol(benchmark::State& state) {
  const SpinNetwork net = chain(static_cast<int>(state.range(0)), 0.5);
  const ProtocolTiming t = fig3_timing();
  for (auto _ : state) benchmark::DoNotOptimize(propagate_protocol(net, t));
}
BENCHMARK(BM_PropagateProtocol)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

static void BM_PropagateSchedule(benchmark::State& state) {
  const SpinNetwork net = chain(static_cast<int>(state.range(0)), 0.5);
  const PiecewiseSchedule s = build_schedule(fig3_timing(), magic_axis(net));
  for (auto _ : state) benchmark::DoNotOptimize(propagate(net, s));
}
BENCHMARK(BM_PropagateSchedule)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_DecouplingRatio(benchmark::State& state) {
  const SpinNetwork net = chain(static_cast<int>(state.range(0)), 0.5);
  const ProtocolTiming t = fig3_timing();
  for (auto _ : state) benchmark::DoNotOptimize(decoupling_ratio(net, t, {0, 1}));
}
BENCHMARK(BM_DecouplingRatio)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_SolveFinalStep(benchmark::State& state) {
  SpinNetwork net = chain(0, 0.5);
  const ProtocolTiming t = fig3_timing();
  const Rotation u = concatenated_rotation(net, t);
  FinalStepOptions o;
  o.grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_final_step(u, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi / 3, o));
}
BENCHMARK(BM_SolveFinalStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_LatticeMap(benchmark::State& state) {
  SpinNetwork net = chain(0, 0.5);
  const double a = 0.71e-9;
  for (const Vec3& p : hexagonal_lattice(a, 1)) net.sites.push_back({p});
  std::vector<Vec3> pos;
  for (const auto& s : net.sites) pos.push_back(s.position);
  const auto edges = nearest_neighbour_edges(pos, a);
  ProtocolTiming t = fig3_timing();
  for (auto _ : state)
    benchmark::DoNotOptimize(lattice_map(net, t, edges, static_cast<int>(state.range(0)), {{}, 1}));
}
BENCHMARK(BM_LatticeMap)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Magnus(benchmark::State& state) {
  const SpinNetwork net = chain(2, 0.3);
  ProtocolTiming t;
  t.pulse_model = PulseModel::ideal;
  t.m = 4;
  t.tau = 10.25;
  const PiecewiseSchedule s = build_schedule(t, magic_axis(net));
  for (auto _ : state) benchmark::DoNotOptimize(magnus_terms(net, s, true));
}
BENCHMARK(BM_Magnus)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
