#include "magicspin/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace magicspin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegenerateNorm = 5e-13;

bool needs_flip(const Vec3& n) {
  constexpr double tie = 1e-15;
  if (std::abs(n.z()) > tie) return n.z() < 0.0;
  if (std::abs(n.x()) > tie) return n.x() < 0.0;
  return n.y() < 0.0;
}

double wrap_phase(double p) {
  p = std::fmod(p, kTwoPi);
  if (p <= -kPi) p += kTwoPi;
  if (p > kPi) p -= kTwoPi;
  return p;
}

double wrap_signed(double x) {
  x = std::fmod(x + kPi, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  return x - kPi;
}

}  // namespace

Vec3 tilted_axis(double tilt, double azimuth) {
  return {std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth), std::cos(tilt)};
}

Rotation Rotation::from_quaternion(double q0, const Vec3& q, double phase) {
  const double s = q.norm();
  if (q0 < 0.0 && s < kDegenerateNorm) {
    q0 = -q0;
    phase += kPi;
  }
  Rotation r;
  if (s < kDegenerateNorm) {
    r.axis = Vec3::UnitZ();
    r.flip = 0.0;
    r.degenerate = true;
    r.phase = wrap_phase(phase);
    return r;
  }
  Vec3 n = q / s;
  double flip = 2.0 * std::atan2(s, q0);  // in (0, 2pi)
  if (needs_flip(n)) {
    n = -n;
    flip = kTwoPi - flip;
    phase += kPi;
  }
  if (flip >= kTwoPi) flip -= kTwoPi;
  r.axis = n;
  r.flip = flip;
  r.degenerate = false;
  r.phase = wrap_phase(phase);
  return r;
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double flip, double phase) {
  const double len = axis.norm();
  if (len == 0.0) {
    if (std::fmod(flip, kTwoPi) != 0.0) throw RotationConsistencyError("zero rotation axis");
    return from_quaternion(std::cos(flip / 2.0), Vec3::Zero(), phase);
  }
  return from_quaternion(std::cos(flip / 2.0), std::sin(flip / 2.0) * axis / len, phase);
}

Rotation Rotation::from_su2(const Mat2& u) {
  if ((u.adjoint() * u - Mat2::Identity()).norm() > 1e-10)
    throw RotationConsistencyError("from_su2: matrix is not unitary");
  const Complex det = u.determinant();
  const double phase = 0.5 * std::arg(det);
  const Mat2 v = u * std::polar(1.0, -phase);
  const Complex i{0.0, 1.0};
  const double q0 = 0.5 * v.trace().real();
  const Vec3 q{(0.5 * i * (v * pauli::x()).trace()).real(), (0.5 * i * (v * pauli::y()).trace()).real(),
               (0.5 * i * (v * pauli::z()).trace()).real()};
  const double norm = std::sqrt(q0 * q0 + q.squaredNorm());
  return from_quaternion(q0 / norm, q / norm, phase);
}

double Rotation::q0() const { return std::cos(flip / 2.0); }
Vec3 Rotation::qv() const { return std::sin(flip / 2.0) * axis; }

Mat2 Rotation::to_matrix() const {
  const Complex i{0.0, 1.0};
  const Vec3 q = qv();
  Mat2 m = q0() * Mat2::Identity() - i * (q.x() * pauli::x() + q.y() * pauli::y() + q.z() * pauli::z());
  return std::polar(1.0, phase) * m;
}

Mat3 Rotation::so3() const {
  const double c = std::cos(flip), s = std::sin(flip);
  Mat3 k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + s * k + (1.0 - c) * k * k;
}

double rotation_distance(const Rotation& a, const Rotation& b) {
  Eigen::Vector4d qa, qb;
  qa << a.q0(), a.qv();
  qb << b.q0(), b.qv();
  return std::min((qa - qb).norm(), (qa + qb).norm());
}

Rotation compose(const Rotation& outer, const Rotation& inner) {
  const double a0 = outer.q0(), b0 = inner.q0();
  const Vec3 a = outer.qv(), b = inner.qv();
  const double c0 = a0 * b0 - a.dot(b);
  const Vec3 c = a0 * b + b0 * a + a.cross(b);
  return Rotation::from_quaternion(c0, c, outer.phase + inner.phase);
}

Rotation sandwich(const Rotation& rot1, const Rotation& rot0) {
  const double c1 = std::cos(rot1.flip / 2.0), s1 = std::sin(rot1.flip / 2.0);
  const double c0 = std::cos(rot0.flip / 2.0), s0 = std::sin(rot0.flip / 2.0);
  const double b = c0 * c1 - rot0.axis.dot(rot1.axis) * s0 * s1;
  const double cos_half = 2.0 * b * c1 - c0;
  const Vec3 n = 2.0 * b * s1 * rot1.axis + s0 * rot0.axis;
  if (std::abs(cos_half) > 1.0 + 1e-9)
    throw RotationConsistencyError("sandwich: flip cosine outside [-1, 1]");
  const double phase = 2.0 * rot1.phase + rot0.phase;
  const double nn = n.norm();
  if (nn < kDegenerateNorm) return Rotation::from_quaternion(cos_half, Vec3::Zero(), phase);
  // alpha = 2 arccos|c|; a negative scalar part moves pi into the phase.
  const double mag = std::min(std::abs(cos_half), 1.0);
  const double alpha = 2.0 * std::acos(mag);
  Vec3 axis = n / nn;
  double extra = 0.0;
  if (cos_half < 0.0) {
    axis = -axis;
    extra = kPi;
  }
  return Rotation::from_quaternion(std::cos(alpha / 2.0), std::sin(alpha / 2.0) * axis, phase + extra);
}

Rotation concatenate(const Rotation& initial, const Rotation& pivot, int n_c) {
  if (n_c < 1) throw std::invalid_argument("concatenate: n_c must be >= 1");
  Rotation u = initial;
  for (int k = 1; k < n_c; ++k) u = sandwich(u, pivot);
  return u;
}

Rotation total_sequence(const Rotation& u_nc, const Vec3& h0_axis, double omega0, double tau_a,
                        double tau_b) {
  if (tau_a < 0.0 || tau_b < 0.0) throw std::invalid_argument("total_sequence: negative time");
  const Rotation ra = Rotation::from_axis_angle(h0_axis, omega0 * tau_a);
  const Rotation rb = Rotation::from_axis_angle(h0_axis, omega0 * tau_b);
  return sandwich(sandwich(u_nc, rb), ra);
}

AnglesTriple angles_of(const Rotation& rot) {
  AnglesTriple a;
  a.tilt = std::acos(std::clamp(rot.axis.z(), -1.0, 1.0));
  a.flip = rot.flip;
  if (std::hypot(rot.axis.x(), rot.axis.y()) < 1e-12) {
    a.azimuth = 0.0;
  } else {
    a.azimuth = std::atan2(rot.axis.y(), rot.axis.x());
    if (a.azimuth <= -kPi) a.azimuth = kPi;
  }
  return a;
}

namespace {

struct Residual {
  double tilt = 0.0;
  double flip = 0.0;
  double norm() const { return std::hypot(tilt, flip); }
};

}  // namespace

FinalStepSolution solve_final_step(const Rotation& u_nc, double omega0, double target_flip,
                                   const FinalStepOptions& options) {
  if (omega0 == 0.0) throw std::invalid_argument("solve_final_step: omega0 must be nonzero");
  if (options.grid < 4) throw std::invalid_argument("solve_final_step: grid too coarse");
  const double period = kTwoPi / std::abs(omega0);
  const int g = options.grid;
  const double step = period / g;

  auto angles_at = [&](double ta, double tb) {
    return angles_of(total_sequence(u_nc, options.h0_axis, omega0, ta, tb));
  };
  auto residual = [&](double ta, double tb) {
    const AnglesTriple a = angles_at(ta, tb);
    return Residual{a.tilt - kMagicAngle, wrap_signed(a.flip - target_flip)};
  };
  auto wrap_time = [&](double t) {
    t = std::fmod(t, period);
    if (t < 0.0) t += period;
    if (period - t < 1e-12 * period) t = 0.0;
    return t;
  };

  std::vector<Residual> grid(static_cast<std::size_t>(g * g));
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) grid[static_cast<std::size_t>(i * g + j)] = residual(i * step, j * step);
  auto at = [&](int i, int j) -> const Residual& {
    i = (i % g + g) % g;
    j = (j % g + g) % g;
    return grid[static_cast<std::size_t>(i * g + j)];
  };

  // Seeds: local minima of the residual norm over the 8-neighbourhood.
  std::vector<std::pair<int, int>> seeds;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double v = at(i, j).norm();
      if (v > 1.0) continue;
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && at(i + di, j + dj).norm() < v) {
            minimum = false;
            break;
          }
      if (minimum) seeds.emplace_back(i, j);
    }

  std::vector<FinalStepRoot> roots;
  const double fd = 1e-7 * period;
  for (auto [si, sj] : seeds) {
    double ta = si * step, tb = sj * step;
    Residual r = residual(ta, tb);
    for (int it = 0; it < 60 && r.norm() > options.tolerance; ++it) {
      const Residual ra_p = residual(wrap_time(ta + fd), tb), ra_m = residual(wrap_time(ta - fd + period), tb);
      const Residual rb_p = residual(ta, wrap_time(tb + fd)), rb_m = residual(ta, wrap_time(tb - fd + period));
      Eigen::Matrix2d jac;
      jac << (ra_p.tilt - ra_m.tilt) / (2 * fd), (rb_p.tilt - rb_m.tilt) / (2 * fd),
          wrap_signed(ra_p.flip - ra_m.flip) / (2 * fd), wrap_signed(rb_p.flip - rb_m.flip) / (2 * fd);
      const Eigen::Vector2d f{r.tilt, r.flip};
      Eigen::Vector2d delta = jac.fullPivLu().solve(-f);
      if (!delta.allFinite()) break;
      const double cap = 0.25 * period;
      if (delta.norm() > cap) delta *= cap / delta.norm();
      double lambda = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
        const double na = wrap_time(ta + lambda * delta(0)), nb = wrap_time(tb + lambda * delta(1));
        const Residual nr = residual(na, nb);
        if (nr.norm() < r.norm()) {
          ta = na;
          tb = nb;
          r = nr;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (r.norm() > options.tolerance) continue;
    bool duplicate = false;
    for (const auto& root : roots) {
      const double da = std::abs(wrap_signed((root.tau_a - ta) / period * kTwoPi));
      const double db = std::abs(wrap_signed((root.tau_b - tb) / period * kTwoPi));
      if (da < 1e-6 && db < 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) roots.push_back({ta, tb, angles_at(ta, tb)});
  }

  const double tilt_in = angles_of(u_nc).tilt;
  if (roots.empty()) {
    DesignFrontier frontier;
    for (const auto& r : grid) frontier.max_tilt = std::max(frontier.max_tilt, r.tilt + kMagicAngle);
    // Contour crossings along tau_b rows, linearly interpolated in flip.
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        const Residual& a = at(i, j);
        const Residual& b = at(i, j + 1);
        if ((a.tilt < 0.0) != (b.tilt < 0.0)) {
          const double w = a.tilt / (a.tilt - b.tilt);
          double flip = a.flip + target_flip + w * wrap_signed(b.flip - a.flip);
          flip = std::fmod(flip + kTwoPi, kTwoPi);
          frontier.contour_flips.push_back(flip);
        }
      }
    std::sort(frontier.contour_flips.begin(), frontier.contour_flips.end());
    std::string msg = "no (tau_a, tau_b) reaches the magic angle with the requested flip; max tilt " +
                      std::to_string(frontier.max_tilt * 180.0 / kPi) + " deg";
    if (!frontier.contour_flips.empty()) {
      double lo = kPi, hi = -kPi;
      for (double f : frontier.contour_flips) {
        lo = std::min(lo, wrap_signed(f));
        hi = std::max(hi, wrap_signed(f));
      }
      msg += ", magic-contour flips in [" + std::to_string(lo * 180.0 / kPi) + ", " +
             std::to_string(hi * 180.0 / kPi) + "] deg (requested " + std::to_string(target_flip * 180.0 / kPi) +
             ")";
    }
    throw InfeasibleDesignError(msg, std::move(frontier));
  }

  std::sort(roots.begin(), roots.end(), [](const FinalStepRoot& a, const FinalStepRoot& b) {
    const double ka = a.tau_a + 2.0 * a.tau_b, kb = b.tau_a + 2.0 * b.tau_b;
    if (std::abs(ka - kb) > 1e-12) return ka < kb;
    return a.tau_a < b.tau_a;
  });
  FinalStepSolution sol;
  sol.tau_a = roots.front().tau_a;
  sol.tau_b = roots.front().tau_b;
  sol.angles = roots.front().angles;
  sol.roots = std::move(roots);
  sol.in_guarantee_window = tilt_in >= kMagicAngle / 2.0 - 1e-12 && tilt_in <= kMagicAngle + 1e-12;
  return sol;
}

std::vector<SensitivityRow> sensitivity_scan(double theta0, const std::vector<double>& alpha1_grid) {
  if (!(theta0 > 0.0 && theta0 < kPi / 2.0)) throw std::invalid_argument("sensitivity_scan: theta0 out of range");
  const Rotation r0 = Rotation::from_axis_angle(Vec3::UnitZ(), kPi);
  const Vec3 n1 = tilted_axis(theta0);
  std::vector<SensitivityRow> rows;
  rows.reserve(alpha1_grid.size());
  for (double a1 : alpha1_grid) {
    const AnglesTriple a = angles_of(sandwich(Rotation::from_axis_angle(n1, a1), r0));
    rows.push_back({a1, a.tilt, a.flip});
  }
  return rows;
}

}  // namespace magicspin
