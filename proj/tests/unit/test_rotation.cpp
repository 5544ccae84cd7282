#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magicspin/rotation.hpp"
#include "oracles.hpp"

using namespace magicspin;

namespace {

constexpr double kPi = std::numbers::pi;

double deg(double d) { return d * kPi / 180.0; }

// Phase-free comparison against a brute-force 2x2 product.
void check_same(const Rotation& r, const oracle::M& u, double tol = 1e-12) {
  CHECK(oracle::phase_free_distance(Matrix(r.to_matrix()), u) < tol);
}

oracle::M su2_of(const Rotation& r) { return oracle::su2(r.flip, r.axis); }

Rotation random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  return Rotation::from_axis_angle(oracle::random_unit(rng), u(rng), u(rng));
}

}  // namespace

TEST_CASE("Rotation canonical form") {
  const Rotation r = Rotation::from_axis_angle(Vec3(0.3, 0.1, -0.9), 1.0);
  CHECK(r.axis.z() >= 0.0);
  CHECK(r.flip == doctest::Approx(2 * kPi - 1.0));
  CHECK(std::abs(r.axis.norm() - 1.0) < 1e-12);
  check_same(r, oracle::su2(1.0, Vec3(0.3, 0.1, -0.9).normalized()));

  const Rotation id = Rotation::from_axis_angle(Vec3::UnitX(), 2 * kPi);
  CHECK(id.degenerate);
  CHECK(id.axis == Vec3::UnitZ());

  const Rotation back = Rotation::from_su2(r.to_matrix());
  CHECK(rotation_distance(back, r) < 1e-12);
  CHECK(std::abs(std::remainder(back.phase - r.phase, 2 * kPi)) < 1e-12);
}

TEST_CASE("compose examples") {
  const Rotation a = Rotation::from_axis_angle(Vec3(1, 2, 3), 0.7);
  CHECK(rotation_distance(compose(a, Rotation::identity()), a) < 1e-15);

  const Vec3 n = Vec3(1, -1, 2).normalized();
  const Rotation coaxial = compose(Rotation::from_axis_angle(n, 2.0), Rotation::from_axis_angle(n, 5.0));
  CHECK(rotation_distance(coaxial, Rotation::from_axis_angle(n, std::fmod(7.0, 2 * kPi))) < 1e-12);

  const Rotation xy = compose(Rotation::from_axis_angle(Vec3::UnitX(), kPi), Rotation::from_axis_angle(Vec3::UnitY(), kPi));
  CHECK(rotation_distance(xy, Rotation::from_axis_angle(Vec3::UnitZ(), kPi)) < 1e-12);
  check_same(xy, oracle::sigma(1) * oracle::sigma(2));

  const Rotation zero = compose(Rotation::from_axis_angle(n, 1.0), Rotation::from_axis_angle(n, 2 * kPi - 1.0));
  CHECK(zero.degenerate);
}

TEST_CASE("property: compose matches 2x2 matrix products including phase") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const Rotation a = random_rotation(rng), b = random_rotation(rng);
    const Rotation c = compose(a, b);
    CHECK((Matrix(c.to_matrix()) - Matrix(a.to_matrix() * b.to_matrix())).norm() < 1e-12);
    check_same(c, su2_of(a) * su2_of(b));
  }
}

TEST_CASE("sandwich examples") {
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  for (double theta : {deg(2.5), deg(10.0), deg(30.0), deg(44.0)}) {
    const Rotation r1 = Rotation::from_axis_angle(tilted_axis(theta), kPi);
    const AnglesTriple a = angles_of(sandwich(r1, r0));
    CHECK(a.tilt == doctest::Approx(2 * theta).epsilon(1e-13));
    CHECK(a.flip == doctest::Approx(kPi).epsilon(1e-13));
  }

  const Rotation r = Rotation::from_axis_angle(Vec3(0.2, 0.4, 1.0), 1.3);
  CHECK(rotation_distance(sandwich(Rotation::identity(), r), r) < 1e-14);

  const Rotation q0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi / 2);
  const Rotation q1 = Rotation::from_axis_angle(Vec3::UnitX(), kPi / 2);
  const oracle::M brute = oracle::su2(kPi / 2, Vec3::UnitX()) * oracle::su2(kPi / 2, Vec3::UnitZ()) *
                          oracle::su2(kPi / 2, Vec3::UnitX());
  check_same(sandwich(q1, q0), brute);
}

TEST_CASE("property: sandwich equals compose(compose(r1, r0), r1) on random inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10000; ++trial) {
    const Rotation r1 = random_rotation(rng), r0 = random_rotation(rng);
    const Rotation s = sandwich(r1, r0);
    const Rotation c = compose(compose(r1, r0), r1);
    REQUIRE(rotation_distance(s, c) < 1e-12);
    REQUIRE((Matrix(s.to_matrix()) - Matrix(c.to_matrix())).norm() < 1e-11);
  }
}

TEST_CASE("property: tilt doubling for pi rotations") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> tilt(1e-3, kPi / 4 - 1e-3), az(-kPi, kPi);
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const double t = tilt(rng), phi = az(rng);
    const AnglesTriple a = angles_of(sandwich(Rotation::from_axis_angle(tilted_axis(t, phi), kPi), r0));
    CHECK(a.tilt == doctest::Approx(2 * t).epsilon(1e-12));
    CHECK(std::abs(std::remainder(a.azimuth - phi, kPi)) < 1e-9);
  }
}

TEST_CASE("concatenate examples") {
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  const Rotation r1 = Rotation::from_axis_angle(tilted_axis(deg(2.5)), kPi);
  const Rotation u5 = concatenate(r1, r0, 5);
  CHECK(angles_of(u5).tilt == doctest::Approx(deg(40.0)).epsilon(1e-12));
  CHECK(u5.flip == doctest::Approx(kPi));
  CHECK(angles_of(u5).azimuth == doctest::Approx(0.0));

  // brute force U(k+1) = U(k) R0 U(k) with 2x2 matrices
  oracle::M u = oracle::su2(kPi, tilted_axis(deg(2.5)));
  const oracle::M z = oracle::su2(kPi, Vec3::UnitZ());
  for (int k = 1; k < 5; ++k) u = oracle::M(u * z * u);
  check_same(u5, u);

  CHECK(rotation_distance(concatenate(r1, r0, 1), r1) == 0.0);

  const Rotation quarter = Rotation::from_axis_angle(tilted_axis(kMagicAngle / 4), kPi);
  CHECK(angles_of(concatenate(quarter, r0, 3)).tilt == doctest::Approx(kMagicAngle).epsilon(1e-13));
  CHECK_THROWS(concatenate(r1, r0, 0));
}

TEST_CASE("total_sequence examples") {
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  const Rotation u5 = concatenate(Rotation::from_axis_angle(tilted_axis(deg(2.5)), kPi), r0, 5);
  const double w0 = 2 * kPi;
  CHECK(total_sequence(u5, Vec3::UnitZ(), w0, 0.0, 0.0).degenerate);

  const double ta = 0.31, tb = 0.77;
  const oracle::M u = oracle::su2(kPi, u5.axis);
  const oracle::M a = oracle::su2(w0 * ta, Vec3::UnitZ()), b = oracle::su2(w0 * tb, Vec3::UnitZ());
  check_same(total_sequence(u5, Vec3::UnitZ(), w0, ta, tb), u * b * u * a * u * b * u);
  CHECK_THROWS(total_sequence(u5, Vec3::UnitZ(), w0, -1.0, 0.0));
}

TEST_CASE("property: total_sequence axis stays in the plane of h0 and the input axis") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> t(0.0, 1.0), tilt(0.05, 1.5), az(-kPi, kPi), fl(0.1, 6.2);
  for (int trial = 0; trial < 2000; ++trial) {
    const double phi = az(rng);
    const Rotation u = Rotation::from_axis_angle(tilted_axis(tilt(rng), phi), fl(rng));
    const Rotation tot = total_sequence(u, Vec3::UnitZ(), 2 * kPi, t(rng), t(rng));
    if (tot.degenerate || std::hypot(tot.axis.x(), tot.axis.y()) < 1e-9) continue;
    const Vec3 normal = Vec3::UnitZ().cross(u.axis).normalized();
    CHECK(std::abs(tot.axis.dot(normal)) < 1e-10);
  }
}

TEST_CASE("angles_of examples") {
  CHECK(angles_of(Rotation::from_axis_angle(Vec3::UnitZ(), 1.0)).tilt == 0.0);
  const AnglesTriple m = angles_of(Rotation::from_axis_angle(Vec3(std::sqrt(2.0), 0, 1), 1.0));
  CHECK(m.tilt == doctest::Approx(kMagicAngle).epsilon(1e-15));
  CHECK(m.tilt == doctest::Approx(std::atan(std::sqrt(2.0))));
  CHECK(m.azimuth == 0.0);
  const AnglesTriple f = angles_of(Rotation::from_axis_angle(Vec3(0, std::sqrt(2.0), 1), 1.0));
  CHECK(f.tilt == doctest::Approx(kMagicAngle));
  CHECK(f.azimuth == doctest::Approx(kPi / 2));
  const AnglesTriple w = angles_of(Rotation::from_axis_angle(Vec3(-1, 0, 1), 1.0));
  CHECK(w.azimuth == doctest::Approx(kPi));
}

TEST_CASE("solve_final_step lands on the magic angle") {
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  const Rotation u5 = concatenate(Rotation::from_axis_angle(tilted_axis(deg(2.5)), kPi), r0, 5);
  const double w0 = 2 * kPi;
  const FinalStepSolution sol = solve_final_step(u5, w0, 2 * kPi / 3);
  CHECK(sol.in_guarantee_window);
  REQUIRE_FALSE(sol.roots.empty());
  for (const auto& root : sol.roots) {
    CHECK(root.tau_a >= 0.0);
    CHECK(root.tau_b >= 0.0);
    CHECK(root.tau_a < 1.0);
    CHECK(root.tau_b < 1.0);
    const Rotation tot = total_sequence(u5, Vec3::UnitZ(), w0, root.tau_a, root.tau_b);
    const AnglesTriple a = angles_of(tot);
    CHECK(std::abs(a.tilt - kMagicAngle) < 1e-9);
    CHECK(std::abs(std::remainder(a.flip - 2 * kPi / 3, 2 * kPi)) < 1e-9);
    CHECK(sol.tau_a + 2 * sol.tau_b <= root.tau_a + 2 * root.tau_b + 1e-12);

    // independent 2x2 oracle
    const oracle::M u = oracle::su2(kPi, u5.axis);
    const oracle::M a2 = oracle::su2(w0 * root.tau_a, Vec3::UnitZ()), b2 = oracle::su2(w0 * root.tau_b, Vec3::UnitZ());
    const oracle::M prod = u * b2 * u * a2 * u * b2 * u;
    const double c = std::abs(prod.trace().real()) / 2;  // |cos(flip/2)| up to phase
    CHECK(std::abs(c - std::abs(std::cos(kPi / 3))) < 1e-8);
  }
}

TEST_CASE("solve_final_step trivial root when already magic") {
  const Rotation u = Rotation::from_axis_angle(tilted_axis(kMagicAngle), 2 * kPi / 3);
  const FinalStepSolution sol = solve_final_step(u, 2 * kPi, u.flip);
  bool has_origin = false;
  for (const auto& r : sol.roots) {
    const Rotation tot = total_sequence(u, Vec3::UnitZ(), 2 * kPi, r.tau_a, r.tau_b);
    CHECK(std::abs(angles_of(tot).tilt - kMagicAngle) < 1e-9);
    if (std::hypot(std::remainder(r.tau_a, 1.0), std::remainder(r.tau_b, 1.0)) < 1e-6) has_origin = true;
  }
  // R^4 at the magic angle gives flip 4 * 2pi/3, so the origin is a root only if it matches the target.
  const AnglesTriple at0 = angles_of(total_sequence(u, Vec3::UnitZ(), 2 * kPi, 0.0, 0.0));
  if (std::abs(std::remainder(at0.flip - u.flip, 2 * kPi)) < 1e-9) CHECK(has_origin);
}

TEST_CASE("solve_final_step reports infeasibility for a small tilt") {
  const Rotation u = Rotation::from_axis_angle(tilted_axis(deg(5.0)), kPi);
  bool infeasible = false;
  for (double target : {kPi / 6, kPi / 3, 2 * kPi / 3, kPi}) {
    try {
      (void)solve_final_step(u, 2 * kPi, target);
    } catch (const InfeasibleDesignError& e) {
      infeasible = true;
      CHECK(e.frontier().max_tilt > 0.0);
    }
  }
  CHECK(infeasible);
}

TEST_CASE("sensitivity_scan examples") {
  const double theta0 = deg(2.5);
  const auto rows = sensitivity_scan(theta0, {kPi, 0.0, 1e-3, 2 * kPi - 1e-3});
  CHECK(rows[0].tilt == doctest::Approx(2 * theta0));
  CHECK(rows[1].tilt == doctest::Approx(0.0));
  CHECK(rows[1].flip == doctest::Approx(kPi));

  // the magic angle is reached in a single sandwich, at the price of a small flip
  std::vector<double> grid;
  for (int i = 1; i < 20000; ++i) grid.push_back(2 * kPi * i / 20000.0);
  double best = 10.0, flip_at_best = 0.0;
  for (const auto& r : sensitivity_scan(theta0, grid)) {
    if (std::abs(r.tilt - kMagicAngle) < best) {
      best = std::abs(r.tilt - kMagicAngle);
      flip_at_best = std::min(r.flip, 2 * kPi - r.flip);
    }
  }
  CHECK(best < 1e-2);
  CHECK(flip_at_best < 0.2);
  CHECK_THROWS(sensitivity_scan(0.0, grid));
}
