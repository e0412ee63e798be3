#pragma once

// Vector fields that conserve prescribed functions I_1..I_k and dissipate
// D_1..D_p at prescribed rates h_1..h_p, a fixed-step RK4 integrator and a
// trajectory audit of the conservation and dissipation claims.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

#include "hodgeflow/riemann.hpp"

namespace hodgeflow {

struct Scenario {
  int dim = 0;
  MetricField metric = MetricField::identity(1);
  std::vector<ScalarField> conserved;  // I_1..I_k
  std::vector<ScalarField> dissipated; // D_1..D_p
  std::vector<ScalarField> rates;      // h_1..h_p
  std::optional<VectorField> base_field;
  // Coefficients of the homogeneous generators; empty means all zero.
  std::vector<ScalarField> direction_coeffs;
  Point x0;
  double dt = 0;
  int steps = 0;
  // Extra points on which the frozen frame completion must be valid, on top
  // of x0.
  std::vector<Point> region_sample;

  int k() const noexcept { return static_cast<int>(conserved.size()); }
  int p() const noexcept { return static_cast<int>(dissipated.size()); }

  // Throws DomainError/PreconditionError on shape problems and
  // RankDeficiencyError when the gradients are dependent at x0.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  // One row per state; filled by record_samples.
  Eigen::MatrixXd conserved_samples;
  Eigen::MatrixXd dissipated_samples;
  Eigen::MatrixXd rate_samples;
};

struct DriftReport {
  std::vector<double> conservation_drift; // max_t |I_i(x(t)) - I_i(x0)|
  // max_t |D_j(x(t)) - D_j(x0) - int_0^t h_j(x(s)) ds|
  std::vector<double> dissipation_residual;

  double max_drift() const;
  bool passes(double tol) const { return max_drift() < tol; }
};

class IntegrationDiverged : public std::runtime_error {
public:
  IntegrationDiverged(int step, Trajectory partial);
  int step() const noexcept { return step_; }
  const Trajectory &partial() const noexcept { return partial_; }

private:
  int step_;
  Trajectory partial_;
};

// The affine distribution of the scenario: constraints grad_g I_i (conserved),
// grad_g D_j with rates h_j, frame completion frozen on {x0} + region_sample.
AffineDistribution scenario_distribution(const Scenario &scenario);

// x -> X0(x) + sum_a c_a(x) generator_a(x) + base(x).
VectorField synthesize(const Scenario &scenario);

// x -> base(x) + X0(x).
VectorField perturb(const VectorField &base, const Scenario &scenario);

Trajectory integrate(const VectorField &field, const Point &x0, double dt, int steps);

// Integrates the synthesized field of the scenario and records samples.
Trajectory integrate(const Scenario &scenario);

void record_samples(Trajectory &traj, const Scenario &scenario);

// Running integral of uniformly spaced samples: composite Simpson over the
// largest even prefix, plus one trapezoid panel for a trailing odd interval.
std::vector<double> cumulative_simpson(const std::vector<double> &samples, double dt);

DriftReport audit(const Trajectory &traj, const Scenario &scenario);

} // namespace hodgeflow
