#include "magicspin/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

namespace magicspin {

std::string to_string(TimingParam p) {
  switch (p) {
    case TimingParam::tau_a: return "tau_a";
    case TimingParam::tau_b: return "tau_b";
    case TimingParam::tau: return "tau";
  }
  return "?";
}

void OptimizationSpec::validate() const {
  if (free_params.empty()) throw std::invalid_argument("optimization: no free parameters");
  for (std::size_t i = 0; i < free_params.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (free_params[i] == free_params[j]) throw std::invalid_argument("optimization: repeated free parameter");
  if (bounds.size() != free_params.size() || seed_point.size() != free_params.size())
    throw std::invalid_argument("optimization: bounds and seed must match the free parameters");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds[i].first <= bounds[i].second) || bounds[i].first < 0.0)
      throw std::invalid_argument("optimization: invalid bounds");
    if (seed_point[i] < bounds[i].first || seed_point[i] > bounds[i].second)
      throw std::invalid_argument("optimization: seed outside bounds");
  }
  if (budget < 1) throw std::invalid_argument("optimization: budget must be >= 1");
  if (restarts < 1) throw std::invalid_argument("optimization: restarts must be >= 1");
  if (target_pair.first == target_pair.second) throw std::invalid_argument("optimization: bad target pair");
}

namespace {

using Point = std::vector<double>;

class BudgetExhausted {};

class ObjectiveFunction {
 public:
  ObjectiveFunction(const SpinNetwork& network, const ProtocolTiming& base, const OptimizationSpec& spec,
            const DynamicsOptions& dynamics, std::vector<TraceRow>& trace)
      : network_(network), base_(base), spec_(spec), dynamics_(dynamics), trace_(trace) {}

  ProtocolTiming timing_at(const Point& x) const {
    ProtocolTiming t = base_;
    for (std::size_t i = 0; i < x.size(); ++i) {
      switch (spec_.free_params[i]) {
        case TimingParam::tau_a: t.tau_a = x[i]; break;
        case TimingParam::tau_b: t.tau_b = x[i]; break;
        case TimingParam::tau: t.tau = x[i]; break;
      }
    }
    return t;
  }

  double raw(const Point& x) const {
    const DecouplingReport r = decoupling_ratio(network_, timing_at(x), spec_.target_pair, {dynamics_, 1});
    return spec_.objective == Objective::ratio ? r.ratio : r.effective_strength;
  }

  double operator()(const Point& x) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(x); it != cache_.end()) return it->second;
      if (evaluations_ >= spec_.budget) throw BudgetExhausted{};
      ++evaluations_;
    }
    const double v = std::log10(std::max(raw(x), 1e-30));
    std::lock_guard lock(mutex_);
    cache_.emplace(x, v);
    trace_.push_back({static_cast<int>(trace_.size()), x, v});
    return v;
  }

  int evaluations() const { return evaluations_; }

 private:
  const SpinNetwork& network_;
  const ProtocolTiming& base_;
  const OptimizationSpec& spec_;
  DynamicsOptions dynamics_;
  std::vector<TraceRow>& trace_;
  std::map<Point, double> cache_;
  std::mutex mutex_;
  int evaluations_ = 0;
};

Point project(Point x, const OptimizationSpec& spec) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], spec.bounds[i].first, spec.bounds[i].second);
  return x;
}

Point lerp(const Point& a, const Point& b, double t) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Runs one simplex descent from `start`; returns true when the tolerances were met.
bool nelder_mead(ObjectiveFunction& f, const Point& start, const OptimizationSpec& spec, Point& best, double& best_f) {
  const std::size_t n = start.size();
  std::vector<Point> simplex{project(start, spec)};
  for (std::size_t i = 0; i < n; ++i) {
    Point v = simplex[0];
    const double hi = spec.bounds[i].second;
    v[i] = v[i] + spec.initial_step <= hi ? v[i] + spec.initial_step : v[i] - spec.initial_step;
    simplex.push_back(project(v, spec));
  }
  std::vector<double> fv;
  auto track = [&](const Point& x, double v) {
    if (v < best_f) {
      best_f = v;
      best = x;
    }
  };
  for (const auto& v : simplex) {
    fv.push_back(f(v));
    track(v, fv.back());
  }
  std::vector<std::size_t> order(n + 1);
  // a simplex pinned against the bounds can cycle through cached points without spending budget
  int stalled = 0, last_evaluations = f.evaluations();
  while (true) {
    if (f.evaluations() == last_evaluations) {
      if (++stalled > 4 * static_cast<int>(n + 1)) return false;
    } else {
      stalled = 0;
      last_evaluations = f.evaluations();
    }
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    std::vector<Point> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex = std::move(s2);
    fv = std::move(f2);

    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) diameter = std::max(diameter, distance(simplex[i], simplex[0]));
    if (fv[n] - fv[0] < spec.f_tolerance && diameter < spec.x_tolerance) return true;

    Point centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d] / static_cast<double>(n);

    const Point xr = project(lerp(centroid, simplex[n], -1.0), spec);
    const double fr = f(xr);
    track(xr, fr);
    if (fr < fv[0]) {
      const Point xe = project(lerp(centroid, simplex[n], -2.0), spec);
      const double fe = f(xe);
      track(xe, fe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    const Point xc = project(outside ? lerp(centroid, xr, 0.5) : lerp(centroid, simplex[n], 0.5), spec);
    const double fc = f(xc);
    track(xc, fc);
    if (fc < std::min(fr, fv[n])) {
      simplex[n] = xc;
      fv[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      simplex[i] = project(lerp(simplex[0], simplex[i], 0.5), spec);
      fv[i] = f(simplex[i]);
      track(simplex[i], fv[i]);
    }
  }
}

}  // namespace

OptimizationResult optimize(const SpinNetwork& network, const ProtocolTiming& timing_template,
                            const OptimizationSpec& spec, const DynamicsOptions& dynamics) {
  spec.validate();
  timing_template.validate();
  OptimizationResult result;
  ObjectiveFunction f(network, timing_template, spec, dynamics, result.trace);
  std::mt19937_64 rng(spec.rng_seed);
  std::uniform_real_distribution<double> jitter(-spec.jitter, spec.jitter);

  Point best = project(spec.seed_point, spec);
  double best_f = std::numeric_limits<double>::infinity();
  bool converged = false;
  try {
    best_f = f(best);
    result.seed_log10 = best_f;
    for (int r = 0; r < spec.restarts; ++r) {
      Point start = best;
      if (r > 0)
        for (auto& x : start) x += jitter(rng);
      converged = nelder_mead(f, project(start, spec), spec, best, best_f);
    }
  } catch (const BudgetExhausted&) {
    converged = false;
  }
  result.converged = converged;
  result.evaluations = f.evaluations();
  result.best_timing = f.timing_at(best);
  result.best_log10 = best_f;
  result.best_value = std::pow(10.0, best_f);
  return result;
}

std::vector<WaitScanRow> wait_time_scan(const SpinNetwork& network, const ProtocolTiming& timing_template,
                                        const std::vector<double>& taus, PulseModel pulse_model,
                                        const AnalysisOptions& options, std::pair<int, int> pair) {
  for (double t : taus)
    if (!(t > 0.0)) throw std::invalid_argument("wait_time_scan: tau values must be positive");
  std::vector<WaitScanRow> rows(taus.size());
  parallel_for(static_cast<int>(taus.size()), options.threads, [&](int i) {
    ProtocolTiming t = timing_template;
    t.tau = taus[static_cast<std::size_t>(i)];
    t.pulse_model = pulse_model;
    rows[static_cast<std::size_t>(i)] = {t.tau, decoupling_ratio(network, t, pair, {options.dynamics, 1}).ratio};
  });
  return rows;
}

const LandscapePoint& Landscape::at(int i, int j) const {
  i = (i % grid + grid) % grid;
  j = (j % grid + grid) % grid;
  return points[static_cast<std::size_t>(i * grid + j)];
}

double magic_cost(const Rotation& u, int m) {
  if (m < 1) throw std::invalid_argument("magic_cost: m must be positive");
  const Mat2 um = u.to_matrix();
  double best = std::numeric_limits<double>::infinity();
  for (double az : {0.0, std::numbers::pi})
    for (double sign : {1.0, -1.0}) {
      const Mat2 v = Rotation::from_axis_angle(tilted_axis(kMagicAngle, az), sign * 2.0 * std::numbers::pi / m)
                         .to_matrix();
      // min_phi ||U - e^{i phi} V||_F^2 = 4 - 2 |tr(V^dagger U)|
      const double d2 = 4.0 - 2.0 * std::abs((v.adjoint() * um).trace());
      best = std::min(best, std::sqrt(std::max(d2, 0.0)));
    }
  return best;
}

Landscape tau_ab_landscape(const Rotation& u_nc, double omega0, const LandscapeOptions& options) {
  if (options.grid < 16) throw std::invalid_argument("tau_ab_landscape: grid must be >= 16");
  if (omega0 == 0.0) throw std::invalid_argument("tau_ab_landscape: omega0 must be nonzero");
  Landscape land;
  land.grid = options.grid;
  land.step = 2.0 * std::numbers::pi / std::abs(omega0) / options.grid;
  const int g = options.grid;
  land.points.resize(static_cast<std::size_t>(g * g));
  const bool with_ratio = options.network != nullptr && options.timing_template != nullptr;
  parallel_for(g * g, options.analysis.threads, [&](int idx) {
    LandscapePoint& p = land.points[static_cast<std::size_t>(idx)];
    p.tau_a = (idx / g) * land.step;
    p.tau_b = (idx % g) * land.step;
    const Rotation u = total_sequence(u_nc, options.h0_axis, omega0, p.tau_a, p.tau_b);
    p.angles = angles_of(u);
    p.cost = magic_cost(u, options.m);
    if (with_ratio) {
      ProtocolTiming t = *options.timing_template;
      t.tau_a = p.tau_a;
      t.tau_b = p.tau_b;
      p.ratio = decoupling_ratio(*options.network, t, {0, 1}, {options.analysis.dynamics, 1}).ratio;
    }
  });
  return land;
}

std::vector<ContourPoint> magic_contour(const Landscape& land) {
  std::vector<ContourPoint> out;
  const int g = land.grid;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j + 1 < g; ++j) {
      const auto& a = land.at(i, j);
      const auto& b = land.at(i, j + 1);
      const double ta = a.angles.tilt - kMagicAngle, tb = b.angles.tilt - kMagicAngle;
      if ((ta < 0.0) == (tb < 0.0)) continue;
      const double w = ta / (ta - tb);
      double df = b.angles.flip - a.angles.flip;
      if (df > std::numbers::pi) df -= 2.0 * std::numbers::pi;
      if (df < -std::numbers::pi) df += 2.0 * std::numbers::pi;
      double flip = std::fmod(a.angles.flip + w * df + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
      out.push_back({a.tau_a, a.tau_b + w * land.step, flip});
    }
  return out;
}

std::vector<std::pair<int, int>> landscape_minima(const Landscape& land, bool use_ratio) {
  std::vector<std::pair<int, int>> out;
  const int g = land.grid;
  auto value = [&](int i, int j) {
    const auto& p = land.at(i, j);
    return use_ratio ? p.ratio : p.cost;
  };
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double v = value(i, j);
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && value(i + di, j + dj) < v) {
            minimum = false;
            break;
          }
      if (minimum) out.emplace_back(i, j);
    }
  return out;
}

}  // namespace magicspin
