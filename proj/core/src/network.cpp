#include "magicspin/network.hpp"

#include <cmath>

namespace magicspin {

namespace {

Vec3 any_perpendicular(const Vec3& z, const Vec3& hint) {
  Vec3 x = hint - hint.dot(z) * z;
  if (x.norm() < 1e-9) {
    x = Vec3::UnitX() - z.x() * z;
    if (x.norm() < 1e-9) x = Vec3::UnitY() - z.y() * z;
  }
  return x.normalized();
}

}  // namespace

FieldFrame SpinNetwork::frame() const {
  FieldFrame f;
  f.z = b0.normalized();
  f.x = any_perpendicular(f.z, wire_field.norm() > 0.0 ? wire_field : Vec3::UnitX());
  f.y = f.z.cross(f.x);
  return f;
}

void SpinNetwork::validate() const {
  if (!(b0.norm() > 0.0)) throw NetworkError("b0 must be nonzero");
  if (gamma_ref == 0.0) throw NetworkError("reference gyromagnetic ratio must be nonzero");
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (sites[j].gamma == 0.0) throw NetworkError("site gyromagnetic ratio must be nonzero");
    for (std::size_t k = j + 1; k < sites.size(); ++k)
      if ((sites[j].position - sites[k].position).norm() == 0.0) throw NetworkError("coincident spin positions");
  }
  for (const auto& nv : nvs) {
    if (nv.active_state != 0 && nv.active_state != -1) throw NetworkError("NV active_state must be 0 or -1");
    for (const auto& s : sites)
      if ((s.position - nv.position).norm() == 0.0) throw NetworkError("spin coincides with an NV");
  }
}

SpinNetwork SpinNetwork::subset(const std::vector<int>& indices) const {
  SpinNetwork out = *this;
  out.sites.clear();
  for (int i : indices) out.sites.push_back(sites.at(static_cast<std::size_t>(i)));
  return out;
}

Vec3 wire_for_tilt(const Vec3& b0, double tilt, double azimuth, const Vec3& reference_x) {
  const double mag = b0.norm();
  if (!(mag > 0.0)) throw NetworkError("b0 must be nonzero");
  const Vec3 z = b0 / mag;
  const Vec3 x = any_perpendicular(z, reference_x);
  const Vec3 y = z.cross(x);
  const Vec3 b1 = mag * (std::cos(tilt) * z + std::sin(tilt) * (std::cos(azimuth) * x + std::sin(azimuth) * y));
  return b1 - b0;
}

double dipolar_constant(const SpinSite& j, const SpinSite& k, const PhysicalConstants& c) {
  const double r = (j.position - k.position).norm();
  if (r == 0.0) throw NetworkError("coincident spin positions");
  return -c.mu0 * j.gamma * k.gamma * c.hbar / (8.0 * std::numbers::pi * r * r * r);
}

Mat3 dipolar_tensor(const SpinSite& j, const SpinSite& k, bool secular, const Vec3& b0_axis,
                    const PhysicalConstants& c) {
  const double d = dipolar_constant(j, k, c);
  const Vec3 e = (j.position - k.position).normalized();
  if (!secular) return d * (3.0 * e * e.transpose() - Mat3::Identity());
  const Vec3 z = b0_axis.normalized();
  const double cb = e.dot(z);
  return 0.5 * d * (3.0 * cb * cb - 1.0) * (3.0 * z * z.transpose() - Mat3::Identity());
}

Eigen::Matrix4cd coupling_matrix(const Mat3& jt) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (jt(a, b) == 0.0) continue;
      out += 0.25 * jt(a, b) * kron(pauli::by_index(a + 1), pauli::by_index(b + 1));
    }
  return out;
}

SpinOperator dipolar_pair_hamiltonian(const SpinSite& j, const SpinSite& k, bool secular, const Vec3& b0_axis,
                                      const PhysicalConstants& c) {
  Matrix h = coupling_matrix(dipolar_tensor(j, k, secular, b0_axis, c));
  return SpinOperator(std::move(h), true);
}

Vec3 nv_dipole_field(const NVActuator& nv, const Vec3& point, const PhysicalConstants& c) {
  const Vec3 r = point - nv.position;
  const double d = r.norm();
  if (d == 0.0) throw NetworkError("field point coincides with the NV");
  if (nv.active_state == 0) return Vec3::Zero();
  const Vec3 m = nv.gamma_e * c.hbar * nv.active_state * nv.axis.normalized();
  const Vec3 e = r / d;
  return c.mu0 / (4.0 * std::numbers::pi) * (3.0 * m.dot(e) * e - m) / (d * d * d);
}

std::vector<Vec3> field_configuration(const SpinNetwork& network, int config, bool nv_on) {
  if (config != 0 && config != 1) throw NetworkError("field configuration must be 0 or 1");
  const Vec3 base = config == 0 ? network.b0 : Vec3(network.b0 + network.wire_field);
  const Vec3 z = network.b0.normalized();
  std::vector<Vec3> out;
  out.reserve(network.sites.size());
  for (const auto& s : network.sites) {
    Vec3 b = base;
    if (nv_on) {
      Vec3 extra = Vec3::Zero();
      for (const auto& nv : network.nvs) extra += nv_dipole_field(nv, s.position, network.constants);
      if (network.nv_field_mode == NVFieldMode::z_only) extra = extra.dot(z) * z;
      b += extra;
    }
    out.push_back(b);
  }
  return out;
}

std::vector<Vec3> hexagonal_lattice(double a_lat, int extent) {
  if (!(a_lat > 0.0)) throw NetworkError("lattice constant must be positive");
  if (extent < 1) throw NetworkError("lattice extent must be >= 1");
  const double s3 = std::sqrt(3.0);
  const Vec3 c0(a_lat / 2.0, -a_lat * s3 / 2.0, 0.0);
  const Vec3 a1(1.5 * a_lat, s3 / 2.0 * a_lat, 0.0);
  const Vec3 a2(0.0, s3 * a_lat, 0.0);
  std::vector<Vec3> pts;
  for (int i = -extent; i <= extent; ++i)
    for (int j = -extent; j <= extent; ++j) {
      const int k = -i - j;
      if (std::max({std::abs(i), std::abs(j), std::abs(k)}) > extent - 1) continue;
      const Vec3 c = c0 + i * a1 + j * a2;
      for (int v = 0; v < 6; ++v) {
        const double phi = std::numbers::pi / 3.0 * v;
        Vec3 p = c + a_lat * Vec3(std::cos(phi), std::sin(phi), 0.0);
        bool seen = false;
        for (const auto& q : pts)
          if ((p - q).norm() < 1e-3 * a_lat) {
            seen = true;
            break;
          }
        if (!seen) pts.push_back(p);
      }
    }
  return pts;
}

std::vector<std::pair<int, int>> nearest_neighbour_edges(const std::vector<Vec3>& positions, double a_lat) {
  std::vector<std::pair<int, int>> edges;
  const int n = static_cast<int>(positions.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs((positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)]).norm() - a_lat) <
          1e-6 * a_lat)
        edges.emplace_back(i, j);
  return edges;
}

Matrix embed_pair(const Eigen::Matrix4cd& op, int j, int k, int n_spins) {
  if (j == k || j < 0 || k < 0 || j >= n_spins || k >= n_spins) throw SpinAlgebraError("embed_pair: bad sites");
  const Eigen::Index d = Eigen::Index{1} << n_spins;
  const Eigen::Index bj = Eigen::Index{1} << (n_spins - 1 - j);
  const Eigen::Index bk = Eigen::Index{1} << (n_spins - 1 - k);
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const int rj = (r & bj) ? 1 : 0, rk = (r & bk) ? 1 : 0;
    const Eigen::Index rest = r & ~(bj | bk);
    for (int cj = 0; cj < 2; ++cj)
      for (int ck = 0; ck < 2; ++ck) {
        const Complex v = op(rj * 2 + rk, cj * 2 + ck);
        if (v == Complex{}) continue;
        out(r, rest | (cj ? bj : 0) | (ck ? bk : 0)) = v;
      }
  }
  return out;
}

Matrix zeeman_hamiltonian(const SpinNetwork& network, const std::vector<Vec3>& fields) {
  const int n = network.n_spins();
  if (static_cast<int>(fields.size()) != n) throw NetworkError("field list does not match spin count");
  const double tl = network.units().larmor_period();
  const Eigen::Index d = Eigen::Index{1} << n;
  Matrix h = Matrix::Zero(d, d);
  for (int j = 0; j < n; ++j) {
    const Vec3 w = network.sites[static_cast<std::size_t>(j)].gamma * tl * fields[static_cast<std::size_t>(j)];
    const Mat2 local = 0.5 * (w.x() * pauli::x() + w.y() * pauli::y() + w.z() * pauli::z());
    // Single-site term: acts on bit (n-1-j), diagonal elsewhere.
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - j);
    for (Eigen::Index r = 0; r < d; ++r) {
      const int rb = (r & bit) ? 1 : 0;
      const Eigen::Index rest = r & ~bit;
      h(r, rest) += local(rb, 0);
      h(r, rest | bit) += local(rb, 1);
    }
  }
  return h;
}

Matrix dipolar_hamiltonian(const SpinNetwork& network, bool secular) {
  const int n = network.n_spins();
  const Eigen::Index d = Eigen::Index{1} << n;
  const double tl = network.units().larmor_period();
  const Vec3 z = network.b0.normalized();
  Matrix h = Matrix::Zero(d, d);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const Mat3 jt = tl * dipolar_tensor(network.sites[static_cast<std::size_t>(j)],
                                          network.sites[static_cast<std::size_t>(k)], secular, z, network.constants);
      h += embed_pair(coupling_matrix(jt), j, k, n);
    }
  return h;
}

}  // namespace magicspin
