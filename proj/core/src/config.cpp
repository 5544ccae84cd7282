#include "magicspin/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include "json.hpp"
#endif

namespace magicspin {

namespace {

using json = nlohmann::json;

constexpr double kNm = 1e-9;
constexpr double kDeg = std::numbers::pi / 180.0;

void allow(const json& obj, std::initializer_list<const char*> keys, const std::string& ctx) {
  if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError(ctx + ": unknown key '" + k + "'");
}

double number(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw ConfigError(ctx + ": expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) throw ConfigError(ctx + ": expected an integer");
  return v.get<int>();
}

std::string string(const json& v, const std::string& ctx) {
  if (!v.is_string()) throw ConfigError(ctx + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& ctx) {
  if (!v.is_boolean()) throw ConfigError(ctx + ": expected true/false");
  return v.get<bool>();
}

template <class T, class F>
void opt(const json& obj, const char* key, T& out, F conv, const std::string& ctx) {
  if (auto it = obj.find(key); it != obj.end()) out = conv(*it, ctx + "." + key);
}

Vec3 vec3(const json& v, const std::string& ctx, double scale = 1.0) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(ctx + ": expected [x, y, z]");
  return scale * Vec3(number(v[0], ctx), number(v[1], ctx), number(v[2], ctx));
}

/// Explicit list or {"start", "stop", "count"} (inclusive linspace).
std::vector<double> number_list(const json& v, const std::string& ctx, double scale = 1.0) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(scale * number(x, ctx));
    return out;
  }
  allow(v, {"start", "stop", "count"}, ctx);
  if (!v.contains("start") || !v.contains("stop") || !v.contains("count"))
    throw ConfigError(ctx + ": range needs start, stop and count");
  const double a = number(v["start"], ctx), b = number(v["stop"], ctx);
  const int n = integer(v["count"], ctx);
  if (n < 1) throw ConfigError(ctx + ": count must be >= 1");
  for (int i = 0; i < n; ++i) out.push_back(scale * (n == 1 ? a : a + (b - a) * i / (n - 1)));
  return out;
}

Vec3 field_vector(const json& v, const std::string& ctx) {
  if (v.is_array()) return vec3(v, ctx);
  allow(v, {"magnitude", "tilt_deg", "azimuth_deg"}, ctx);
  double mag = 0.0, tilt = 0.0, az = 0.0;
  if (!v.contains("magnitude")) throw ConfigError(ctx + ": magnitude required");
  mag = number(v["magnitude"], ctx);
  opt(v, "tilt_deg", tilt, number, ctx);
  opt(v, "azimuth_deg", az, number, ctx);
  return mag * Vec3(std::sin(tilt * kDeg) * std::cos(az * kDeg), std::sin(tilt * kDeg) * std::sin(az * kDeg),
                    std::cos(tilt * kDeg));
}

NetworkDescription network_from_json(const json& j) {
  allow(j, {"field", "constants", "spins", "nvs", "lattice"}, "network");
  NetworkDescription d;
  SpinNetwork& net = d.network;
  if (auto c = j.find("constants"); c != j.end()) {
    allow(*c, {"mu0", "hbar", "gamma_c13", "gamma_e", "gamma_ref"}, "constants");
    opt(*c, "mu0", net.constants.mu0, number, "constants");
    opt(*c, "hbar", net.constants.hbar, number, "constants");
    opt(*c, "gamma_c13", net.constants.gamma_c13, number, "constants");
    opt(*c, "gamma_e", net.constants.gamma_e, number, "constants");
    net.gamma_ref = net.constants.gamma_c13;
    opt(*c, "gamma_ref", net.gamma_ref, number, "constants");
  }
  if (auto f = j.find("field"); f != j.end()) {
    allow(*f, {"b0", "wire", "b1", "nv_field_mode"}, "field");
    if (f->contains("b0")) net.b0 = field_vector((*f)["b0"], "field.b0");
    if (f->contains("wire") && f->contains("b1")) throw ConfigError("field: give either wire or b1, not both");
    if (f->contains("wire")) net.wire_field = vec3((*f)["wire"], "field.wire");
    if (f->contains("b1")) {
      const json& b1 = (*f)["b1"];
      allow(b1, {"tilt_deg", "azimuth_deg"}, "field.b1");
      double tilt = 0.0, az = 0.0;
      opt(b1, "tilt_deg", tilt, number, "field.b1");
      opt(b1, "azimuth_deg", az, number, "field.b1");
      net.wire_field = wire_for_tilt(net.b0, tilt * kDeg, az * kDeg);
    }
    if (f->contains("nv_field_mode")) {
      const std::string mode = string((*f)["nv_field_mode"], "field.nv_field_mode");
      if (mode == "full_vector") net.nv_field_mode = NVFieldMode::full_vector;
      else if (mode == "z_only") net.nv_field_mode = NVFieldMode::z_only;
      else throw ConfigError("field.nv_field_mode: expected full_vector or z_only");
    }
  }
  if (auto s = j.find("spins"); s != j.end()) {
    if (!s->is_array()) throw ConfigError("spins: expected an array");
    for (const auto& e : *s) {
      allow(e, {"position_nm", "gamma"}, "spins[]");
      SpinSite site;
      site.gamma = net.constants.gamma_c13;
      if (!e.contains("position_nm")) throw ConfigError("spins[]: position_nm required");
      site.position = vec3(e["position_nm"], "spins[].position_nm", kNm);
      opt(e, "gamma", site.gamma, number, "spins[]");
      net.sites.push_back(site);
    }
  }
  if (auto n = j.find("nvs"); n != j.end()) {
    if (!n->is_array()) throw ConfigError("nvs: expected an array");
    for (const auto& e : *n) {
      allow(e, {"position_nm", "active_state", "gating", "gamma_e", "axis"}, "nvs[]");
      NVActuator nv;
      nv.gamma_e = net.constants.gamma_e;
      if (!e.contains("position_nm")) throw ConfigError("nvs[]: position_nm required");
      nv.position = vec3(e["position_nm"], "nvs[].position_nm", kNm);
      opt(e, "active_state", nv.active_state, integer, "nvs[]");
      opt(e, "gamma_e", nv.gamma_e, number, "nvs[]");
      if (e.contains("axis")) nv.axis = vec3(e["axis"], "nvs[].axis");
      if (e.contains("gating")) {
        const std::string g = string(e["gating"], "nvs[].gating");
        if (g == "pulse_synchronous") nv.gating = NVGating::pulse_synchronous;
        else if (g == "active_during_wait") nv.gating = NVGating::active_during_wait;
        else throw ConfigError("nvs[].gating: expected pulse_synchronous or active_during_wait");
      }
      net.nvs.push_back(nv);
    }
  }
  if (auto l = j.find("lattice"); l != j.end()) {
    allow(*l, {"type", "a_lat_nm", "extent"}, "lattice");
    if (l->contains("type") && string((*l)["type"], "lattice.type") != "hexagonal")
      throw ConfigError("lattice.type: only hexagonal is supported");
    LatticeSpec spec;
    double a_nm = spec.a_lat / kNm;
    opt(*l, "a_lat_nm", a_nm, number, "lattice");
    opt(*l, "extent", spec.extent, integer, "lattice");
    spec.a_lat = a_nm * kNm;
    if (!net.sites.empty()) throw ConfigError("network: give either spins or lattice, not both");
    for (const auto& p : hexagonal_lattice(spec.a_lat, spec.extent)) {
      SpinSite site;
      site.gamma = net.constants.gamma_c13;
      site.position = p;
      net.sites.push_back(site);
    }
    d.lattice = spec;
  }
  try {
    net.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
  return d;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& ctx) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

PulseModel pulse_model(const json& v, const std::string& ctx) {
  const std::string s = string(v, ctx);
  if (s == "finite") return PulseModel::finite;
  if (s == "ideal") return PulseModel::ideal;
  throw ConfigError(ctx + ": expected finite or ideal");
}

std::pair<int, int> pair_of(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(ctx + ": expected [j, k]");
  return {integer(v[0], ctx), integer(v[1], ctx)};
}

std::vector<Vec3> position_grid(const json& v, const std::string& ctx) {
  std::vector<Vec3> out;
  if (v.is_array()) {
    for (const auto& p : v) out.push_back(vec3(p, ctx, kNm));
    return out;
  }
  allow(v, {"x", "y", "z"}, ctx);
  auto axis = [&](const char* k) {
    return v.contains(k) ? number_list(v[k], ctx + "." + k, kNm) : std::vector<double>{0.0};
  };
  const auto xs = axis("x"), ys = axis("y"), zs = axis("z");
  for (double x : xs)
    for (double y : ys)
      for (double z : zs) out.emplace_back(x, y, z);
  return out;
}

}  // namespace

NetworkDescription parse_network(const std::string& json_text) {
  return network_from_json(parse_json(json_text, "network"));
}

NetworkDescription load_network(const std::filesystem::path& path) {
  try {
    return parse_network(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "config");
  allow(j, {"network", "protocol", "dynamics", "output", "design", "simulate", "map", "scan", "optimize"}, "config");
  RunConfig rc;

  if (auto n = j.find("network"); n != j.end()) {
    if (n->is_string()) {
      std::filesystem::path p = n->get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      rc.network = load_network(p);
    } else {
      rc.network = network_from_json(*n);
    }
  }

  if (auto p = j.find("protocol"); p != j.end()) {
    allow(*p, {"tau_1", "tau_0", "tau_a", "tau_b", "tau", "n_c", "m", "pulse_model", "tau_ab"}, "protocol");
    ProtocolTiming t;
    opt(*p, "tau_1", t.tau_1, number, "protocol");
    opt(*p, "tau_0", t.tau_0, number, "protocol");
    opt(*p, "tau_a", t.tau_a, number, "protocol");
    opt(*p, "tau_b", t.tau_b, number, "protocol");
    opt(*p, "tau", t.tau, number, "protocol");
    opt(*p, "n_c", t.n_c, integer, "protocol");
    opt(*p, "m", t.m, integer, "protocol");
    opt(*p, "pulse_model", t.pulse_model, pulse_model, "protocol");
    if (p->contains("tau_ab")) {
      if (string((*p)["tau_ab"], "protocol.tau_ab") != "design") throw ConfigError("protocol.tau_ab: only \"design\"");
      if (p->contains("tau_a") || p->contains("tau_b"))
        throw ConfigError("protocol: tau_ab \"design\" excludes explicit tau_a/tau_b");
      rc.protocol_from_design = true;
    }
    try {
      t.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("protocol: ") + e.what());
    }
    rc.protocol = t;
  }

  if (auto d = j.find("dynamics"); d != j.end()) {
    allow(*d, {"secular"}, "dynamics");
    opt(*d, "secular", rc.dynamics.secular, boolean, "dynamics");
  }

  if (auto o = j.find("output"); o != j.end()) {
    allow(*o, {"format", "path"}, "output");
    if (o->contains("format")) {
      const std::string f = string((*o)["format"], "output.format");
      if (f == "csv") rc.format = OutputFormat::csv;
      else if (f == "json") rc.format = OutputFormat::json;
      else throw ConfigError("output.format: expected csv or json");
    }
    if (o->contains("path")) rc.output_path = string((*o)["path"], "output.path");
  }

  if (auto d = j.find("design"); d != j.end()) {
    allow(*d, {"theta0_deg", "n_c", "m", "tau_1", "tau_0", "grid", "target_flip_deg"}, "design");
    DesignSection ds;
    if (d->contains("theta0_deg")) ds.theta0 = number((*d)["theta0_deg"], "design.theta0_deg") * kDeg;
    opt(*d, "n_c", ds.n_c, integer, "design");
    opt(*d, "m", ds.m, integer, "design");
    opt(*d, "tau_1", ds.tau_1, number, "design");
    opt(*d, "tau_0", ds.tau_0, number, "design");
    opt(*d, "grid", ds.grid, integer, "design");
    if (d->contains("target_flip_deg")) ds.target_flip = number((*d)["target_flip_deg"], "design") * kDeg;
    if (ds.m < 3) throw ConfigError("design.m: m must be >= 3 (the rotation average needs m >= 3)");
    if (ds.n_c < 1) throw ConfigError("design.n_c: must be >= 1");
    rc.design = ds;
  }

  if (auto s = j.find("simulate"); s != j.end()) {
    allow(*s, {"pairs", "entropy", "mode", "samples_per_period"}, "simulate");
    SimulateSection ss;
    if (s->contains("mode")) {
      const std::string mode = string((*s)["mode"], "simulate.mode");
      if (mode == "off") ss.protocol_off = true;
      else if (mode != "protocol") throw ConfigError("simulate.mode: expected \"protocol\" or \"off\"");
    }
    opt(*s, "samples_per_period", ss.samples_per_period, integer, "simulate");
    if (ss.samples_per_period < 1) throw ConfigError("simulate.samples_per_period: must be >= 1");
    if (s->contains("pairs")) {
      const json& pr = (*s)["pairs"];
      if (pr.is_string()) {
        if (pr.get<std::string>() != "all") throw ConfigError("simulate.pairs: expected \"all\" or a list");
      } else {
        if (!pr.is_array()) throw ConfigError("simulate.pairs: expected a list");
        for (const auto& x : pr) ss.pairs.push_back(pair_of(x, "simulate.pairs[]"));
      }
    }
    if (s->contains("entropy")) {
      const json& e = (*s)["entropy"];
      allow(e, {"periods", "initial", "keep"}, "simulate.entropy");
      opt(e, "periods", ss.entropy.periods, integer, "simulate.entropy");
      if (e.contains("keep")) {
        ss.entropy.keep.clear();
        for (const auto& k : e["keep"]) ss.entropy.keep.push_back(integer(k, "simulate.entropy.keep"));
      }
      if (e.contains("initial")) {
        // {"label": "ud"} with one u/d character per site
        const json& init = e["initial"];
        if (!init.is_object()) throw ConfigError("simulate.entropy.initial: expected {label: \"ud...\"}");
        for (const auto& [label, v] : init.items()) {
          const std::string bits = string(v, "simulate.entropy.initial");
          std::vector<bool> up;
          for (char c : bits) {
            if (c != 'u' && c != 'd') throw ConfigError("simulate.entropy.initial: use 'u' and 'd'");
            up.push_back(c == 'u');
          }
          ss.entropy.initial_states.emplace_back(label, up);
        }
      }
    }
    rc.simulate = ss;
  }

  if (auto m = j.find("map"); m != j.end()) {
    allow(*m, {"cluster_size", "validate_cluster_size"}, "map");
    MapSection ms;
    opt(*m, "cluster_size", ms.cluster_size, integer, "map");
    opt(*m, "validate_cluster_size", ms.validate_cluster_size, integer, "map");
    rc.map = ms;
  }

  if (auto s = j.find("scan"); s != j.end()) {
    allow(*s,
          {"type", "taus", "pulse_model", "grid", "with_ratio", "alpha1_deg", "theta0_deg", "positions_nm",
           "spacings_nm", "lengths", "separations_nm", "orientations", "tolerance"},
          "scan");
    ScanSection sc;
    if (!s->contains("type")) throw ConfigError("scan.type required");
    sc.type = string((*s)["type"], "scan.type");
    static const std::set<std::string> types{"wait_time", "landscape", "sensitivity", "tertiary", "convergence",
                                             "position"};
    if (!types.count(sc.type)) throw ConfigError("scan.type: unknown scan '" + sc.type + "'");
    if (s->contains("taus")) sc.taus = number_list((*s)["taus"], "scan.taus");
    opt(*s, "pulse_model", sc.pulse_model, pulse_model, "scan");
    opt(*s, "grid", sc.grid, integer, "scan");
    opt(*s, "with_ratio", sc.with_ratio, boolean, "scan");
    if (s->contains("alpha1_deg")) sc.alpha1 = number_list((*s)["alpha1_deg"], "scan.alpha1_deg", kDeg);
    if (s->contains("theta0_deg")) sc.theta0 = number((*s)["theta0_deg"], "scan.theta0_deg") * kDeg;
    if (s->contains("positions_nm")) sc.positions = position_grid((*s)["positions_nm"], "scan.positions_nm");
    if (s->contains("spacings_nm")) sc.spacings = number_list((*s)["spacings_nm"], "scan.spacings_nm", kNm);
    if (s->contains("lengths"))
      for (const auto& l : (*s)["lengths"]) sc.lengths.push_back(integer(l, "scan.lengths"));
    if (s->contains("separations_nm"))
      sc.separations = number_list((*s)["separations_nm"], "scan.separations_nm", kNm);
    if (s->contains("orientations"))
      for (const auto& o : (*s)["orientations"]) sc.orientations.push_back(vec3(o, "scan.orientations"));
    opt(*s, "tolerance", sc.tolerance, number, "scan");
    rc.scan = sc;
  }

  if (auto o = j.find("optimize"); o != j.end()) {
    allow(*o,
          {"free", "bounds", "seed", "pair", "objective", "budget", "rng_seed", "restarts", "jitter", "step"},
          "optimize");
    OptimizeSection os;
    auto& spec = os.spec;
    if (o->contains("free")) {
      spec.free_params.clear();
      for (const auto& f : (*o)["free"]) {
        const std::string name = string(f, "optimize.free");
        if (name == "tau_a") spec.free_params.push_back(TimingParam::tau_a);
        else if (name == "tau_b") spec.free_params.push_back(TimingParam::tau_b);
        else if (name == "tau") spec.free_params.push_back(TimingParam::tau);
        else throw ConfigError("optimize.free: unknown parameter '" + name + "'");
      }
    }
    if (o->contains("bounds"))
      for (const auto& b : (*o)["bounds"]) {
        if (!b.is_array() || b.size() != 2) throw ConfigError("optimize.bounds: expected [lo, hi] pairs");
        spec.bounds.emplace_back(number(b[0], "optimize.bounds"), number(b[1], "optimize.bounds"));
      }
    if (o->contains("seed")) {
      const json& sd = (*o)["seed"];
      if (sd.is_string()) {
        if (sd.get<std::string>() != "design") throw ConfigError("optimize.seed: expected a list or \"design\"");
        os.seed_from_design = true;
      } else {
        spec.seed_point = number_list(sd, "optimize.seed");
      }
    }
    if (o->contains("pair")) spec.target_pair = pair_of((*o)["pair"], "optimize.pair");
    if (o->contains("objective")) {
      const std::string ob = string((*o)["objective"], "optimize.objective");
      if (ob == "ratio") spec.objective = Objective::ratio;
      else if (ob == "strength") spec.objective = Objective::strength;
      else throw ConfigError("optimize.objective: expected ratio or strength");
    }
    opt(*o, "budget", spec.budget, integer, "optimize");
    if (o->contains("rng_seed")) spec.rng_seed = (*o)["rng_seed"].get<std::uint64_t>();
    opt(*o, "restarts", spec.restarts, integer, "optimize");
    opt(*o, "jitter", spec.jitter, number, "optimize");
    opt(*o, "step", spec.initial_step, number, "optimize");
    rc.optimize = os;
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig rc;
  try {
    rc = parse_run_config(read_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  rc.source = path;
  return rc;
}

}  // namespace magicspin
