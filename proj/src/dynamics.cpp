#include "hodgeflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace hodgeflow {

namespace {

std::vector<VectorField> gradient_fields(const std::vector<ScalarField> &fs,
                                         const MetricField &g) {
  std::vector<VectorField> out;
  out.reserve(fs.size());
  for (const auto &f : fs)
    out.push_back(gradient_field(f, g));
  return out;
}

void check_field_dims(const std::vector<ScalarField> &fs, int n, const char *what) {
  for (std::size_t i = 0; i < fs.size(); ++i)
    if (fs[i].dim() != n)
      throw DomainError(std::string(what) + "[" + std::to_string(i) + "] has dimension " +
                        std::to_string(fs[i].dim()) + ", expected " + std::to_string(n));
}

bool all_finite(const Point &x) { return x.array().isFinite().all(); }

} // namespace

void Scenario::validate() const {
  check_dim(dim);
  if (metric.dim() != dim)
    throw DomainError("metric dimension does not match scenario dimension");
  check_field_dims(conserved, dim, "conserved");
  check_field_dims(dissipated, dim, "dissipated");
  check_field_dims(rates, dim, "rates");
  check_field_dims(direction_coeffs, dim, "direction_coeffs");
  if (rates.size() != dissipated.size())
    throw DomainError(std::to_string(dissipated.size()) + " dissipated fields but " +
                      std::to_string(rates.size()) + " rates");
  const int m = k() + p();
  if (m < 1 || m > dim)
    throw PreconditionError("need 1 <= k + p <= dim, got k + p = " + std::to_string(m));
  if (!direction_coeffs.empty() && static_cast<int>(direction_coeffs.size()) != dim - m)
    throw DomainError("direction_coeffs has " + std::to_string(direction_coeffs.size()) +
                      " entries, expected " + std::to_string(dim - m));
  if (base_field && base_field->dim() != dim)
    throw DomainError("base field dimension does not match scenario dimension");
  if (x0.size() != dim)
    throw DomainError("x0 has dimension " + std::to_string(x0.size()) + ", expected " +
                      std::to_string(dim));
  for (const auto &x : region_sample)
    if (x.size() != dim)
      throw DomainError("region sample point has the wrong dimension");
  if (!(dt > 0))
    throw PreconditionError("dt must be positive");
  if (steps < 1)
    throw PreconditionError("steps must be at least 1");

  std::vector<Multivectord> grads;
  for (const auto &f : dissipated)
    grads.push_back(Multivectord::vector(riemannian_gradient(f, x0, metric)));
  for (const auto &f : conserved)
    grads.push_back(Multivectord::vector(riemannian_gradient(f, x0, metric)));
  const auto rc = check_rank<double>(grads, dim);
  if (!rc.independent)
    throw RankDeficiencyError(rc.smallest, rc.largest,
                              std::vector<double>(x0.data(), x0.data() + x0.size()));
}

AffineDistribution scenario_distribution(const Scenario &scenario) {
  scenario.validate();
  auto xs = gradient_fields(scenario.conserved, scenario.metric);
  auto ys = gradient_fields(scenario.dissipated, scenario.metric);
  std::vector<Point> sample{scenario.x0};
  sample.insert(sample.end(), scenario.region_sample.begin(), scenario.region_sample.end());

  const int n = scenario.dim;
  const int m = scenario.k() + scenario.p();
  std::vector<Point> completion;
  if (m < n - 1)
    for (const auto &z : frame_completion_field(xs, ys, sample))
      completion.push_back(z(Point::Zero(n)));
  return AffineDistribution(std::move(xs), std::move(ys), scenario.rates, scenario.metric,
                            std::move(completion));
}

VectorField synthesize(const Scenario &scenario) {
  auto dist = std::make_shared<const AffineDistribution>(scenario_distribution(scenario));
  const auto coeffs = scenario.direction_coeffs;
  const auto base = scenario.base_field;
  const int n = scenario.dim;
  return VectorField(n, [dist, coeffs, base, n](const Point &x) {
    Point out = dist->p() > 0 ? dist->particular(x) : Point::Zero(n);
    if (!coeffs.empty()) {
      const auto gens = dist->generators(x);
      for (std::size_t a = 0; a < gens.size(); ++a)
        out += coeffs[a](x) * gens[a];
    } else if (dist->p() == 0) {
      // Still certify independence at x for conservative scenarios.
      (void)dist->generators(x);
    }
    if (base)
      out += (*base)(x);
    return out;
  });
}

VectorField perturb(const VectorField &base, const Scenario &scenario) {
  Scenario s = scenario;
  s.base_field = base;
  s.direction_coeffs.clear();
  return synthesize(s);
}

IntegrationDiverged::IntegrationDiverged(int step, Trajectory partial)
    : std::runtime_error("integration diverged at step " + std::to_string(step)),
      step_(step), partial_(std::move(partial)) {}

Trajectory integrate(const VectorField &field, const Point &x0, double dt, int steps) {
  if (!(dt > 0))
    throw PreconditionError("dt must be positive");
  if (steps < 1)
    throw PreconditionError("steps must be at least 1");
  if (x0.size() != field.dim())
    throw DomainError("initial point dimension does not match the field");

  Trajectory traj;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  Point x = x0;
  for (int i = 0; i < steps; ++i) {
    const auto slope = [&](const Point &y) {
      if (!all_finite(y))
        throw IntegrationDiverged(i + 1, std::move(traj));
      Point k;
      try {
        k = field(y);
      } catch (const NumericalError &) {
        throw IntegrationDiverged(i + 1, std::move(traj));
      }
      if (!all_finite(k))
        throw IntegrationDiverged(i + 1, std::move(traj));
      return k;
    };
    const Point k1 = slope(x);
    const Point k2 = slope(x + 0.5 * dt * k1);
    const Point k3 = slope(x + 0.5 * dt * k2);
    const Point k4 = slope(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(x))
      throw IntegrationDiverged(i + 1, std::move(traj));
    traj.times.push_back(dt * (i + 1));
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate(const Scenario &scenario) {
  auto traj = integrate(synthesize(scenario), scenario.x0, scenario.dt, scenario.steps);
  record_samples(traj, scenario);
  return traj;
}

void record_samples(Trajectory &traj, const Scenario &scenario) {
  const auto rows = static_cast<Eigen::Index>(traj.states.size());
  traj.conserved_samples.resize(rows, scenario.k());
  traj.dissipated_samples.resize(rows, scenario.p());
  traj.rate_samples.resize(rows, scenario.p());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto &x = traj.states[r];
    for (int i = 0; i < scenario.k(); ++i)
      traj.conserved_samples(r, i) = scenario.conserved[i](x);
    for (int j = 0; j < scenario.p(); ++j) {
      traj.dissipated_samples(r, j) = scenario.dissipated[j](x);
      traj.rate_samples(r, j) = scenario.rates[j](x);
    }
  }
}

std::vector<double> cumulative_simpson(const std::vector<double> &f, double dt) {
  std::vector<double> out(f.size(), 0.0);
  double even_acc = 0.0; // Simpson integral up to the last even index
  for (std::size_t m = 1; m < f.size(); ++m) {
    if (m % 2 == 0) {
      even_acc += dt / 3.0 * (f[m - 2] + 4.0 * f[m - 1] + f[m]);
      out[m] = even_acc;
    } else {
      out[m] = even_acc + 0.5 * dt * (f[m - 1] + f[m]);
    }
  }
  return out;
}

double DriftReport::max_drift() const {
  double out = 0.0;
  for (double d : conservation_drift)
    out = std::max(out, d);
  for (double d : dissipation_residual)
    out = std::max(out, d);
  return out;
}

DriftReport audit(const Trajectory &traj, const Scenario &scenario) {
  DriftReport report;
  if (traj.states.empty())
    return report;
  const double dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : scenario.dt;

  for (const auto &f : scenario.conserved) {
    const double f0 = f(traj.states.front());
    double drift = 0.0;
    for (const auto &x : traj.states) {
      const double r = std::abs(f(x) - f0);
      drift = std::isfinite(r) ? std::max(drift, r) : INFINITY;
    }
    report.conservation_drift.push_back(drift);
  }

  for (int j = 0; j < scenario.p(); ++j) {
    std::vector<double> d, h;
    d.reserve(traj.states.size());
    h.reserve(traj.states.size());
    for (const auto &x : traj.states) {
      d.push_back(scenario.dissipated[j](x));
      h.push_back(scenario.rates[j](x));
    }
    const auto budget = cumulative_simpson(h, dt);
    double residual = 0.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
      const double r = std::abs(d[m] - d[0] - budget[m]);
      residual = std::isfinite(r) ? std::max(residual, r) : INFINITY;
    }
    report.dissipation_residual.push_back(residual);
  }
  return report;
}

} // namespace hodgeflow
