#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hodgeflow/dynamics.hpp"
#include "oracles.hpp"

using namespace hodgeflow;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Point pt(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    p(i++) = x;
  return p;
}

// sum_i c_i x_i^2 / 2
ScalarField weighted_square(std::vector<double> c) {
  const int n = static_cast<int>(c.size());
  std::vector<Monomial> terms;
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 2;
    terms.push_back({0.5 * c[i], e});
  }
  return ScalarField(n, std::move(terms));
}

ScalarField euler_i1() { return weighted_square({1, 1, 1}); }
ScalarField euler_i2() { return weighted_square({1, 1.0 / 2, 1.0 / 3}); }

VectorXd euler_cross(const Point &x) {
  return oracle::cross(euclidean_gradient(euler_i1(), x), euclidean_gradient(euler_i2(), x));
}

Scenario damped_radial() {
  Scenario s;
  s.dim = 2;
  s.metric = MetricField::identity(2);
  s.dissipated = {weighted_square({1, 1})};
  s.rates = {ScalarField(2, {{-1.0, {2, 0}}, {-1.0, {0, 2}}})};
  s.x0 = pt({1, 0});
  s.dt = 1e-3;
  s.steps = 1000;
  return s;
}

Scenario euler_top() {
  Scenario s;
  s.dim = 3;
  s.metric = MetricField::identity(3);
  s.conserved = {euler_i1(), euler_i2()};
  s.direction_coeffs = {ScalarField::constant(3, 1.0)};
  s.x0 = pt({1, 1, 1});
  s.dt = 1e-3;
  s.steps = 10000;
  return s;
}

double metric_inner(const VectorXd &a, const VectorXd &b, const MatrixXd &g) {
  return a.dot(g * b);
}

} // namespace

TEST_CASE("synthesize examples") {
  const auto field = synthesize(damped_radial());
  oracle::Random rng(41);
  for (int i = 0; i < 20; ++i) {
    const Point x = rng.vector(2) + pt({2, 0});
    CHECK((field(x) + x).norm() <= 1e-14 * std::max(1.0, x.norm()));
  }

  const auto top = euler_top();
  const auto dist = scenario_distribution(top);
  for (int i = 0; i < 20; ++i) {
    const Point x = rng.vector(3);
    const auto gens = dist.generators(x);
    REQUIRE(gens.size() == 1);
    const VectorXd expected = euler_cross(x);
    CHECK((gens[0] - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((synthesize(top)(x) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }

  auto zero_rate = damped_radial();
  zero_rate.rates = {ScalarField::zero(2)};
  CHECK(synthesize(zero_rate)(pt({0.3, 0.4})).norm() == 0.0);

  auto bad = damped_radial();
  bad.rates.clear();
  CHECK_THROWS_AS(synthesize(bad), DomainError);
  bad = damped_radial();
  bad.x0 = pt({0, 0});
  CHECK_THROWS_AS(synthesize(bad), RankDeficiencyError);

  // Rank drop at an evaluation point, not at x0.
  try {
    synthesize(damped_radial())(pt({0, 0}));
    FAIL("expected a rank deficiency");
  } catch (const RankDeficiencyError &err) {
    REQUIRE(err.point());
    CHECK(*err.point() == std::vector<double>{0, 0});
  }
}

TEST_CASE("perturbing the Euler top") {
  Scenario s;
  s.dim = 3;
  s.metric = MetricField::identity(3);
  s.conserved = {euler_i1()};
  s.dissipated = {euler_i2()};
  s.rates = {ScalarField(3, {{-0.5, {1, 1, 0}}, {0.2, {0, 0, 0}}})};
  s.x0 = pt({1, 0.5, -0.3});
  s.dt = 1e-3;
  s.steps = 10;
  const VectorField base(3, [](const Point &x) { return euler_cross(x); });
  const auto field = perturb(base, s);

  oracle::Random rng(42);
  for (int i = 0; i < 50; ++i) {
    const Point x = rng.vector(3);
    const VectorXd v = field(x);
    const VectorXd g1 = euclidean_gradient(euler_i1(), x);
    const VectorXd g2 = euclidean_gradient(euler_i2(), x);
    const double h = s.rates[0](x);
    CHECK(std::abs(v.dot(g1)) < 1e-12 * std::max(1.0, v.norm() * g1.norm()));
    CHECK(std::abs(v.dot(g2) - h) < 1e-12 * std::max(1.0, v.norm() * g2.norm()));
  }

  auto with_zero = s;
  with_zero.base_field.reset();
  const auto plain = synthesize(with_zero);
  const auto zero_perturbed = perturb(VectorField::zero(3), s);
  const Point x = pt({0.2, 0.7, -0.4});
  CHECK((plain(x) - zero_perturbed(x)).norm() == 0.0);

  auto conservative = s;
  conservative.rates = {ScalarField::zero(3)};
  const auto traj = integrate(perturb(base, conservative), conservative.x0, 1e-3, 2000);
  const double i1 = euler_i1()(conservative.x0), i2 = euler_i2()(conservative.x0);
  double drift = 0.0;
  for (const auto &state : traj.states)
    drift = std::max({drift, std::abs(euler_i1()(state) - i1), std::abs(euler_i2()(state) - i2)});
  CHECK(drift < 1e-8);
}

TEST_CASE("integrate") {
  const auto still = integrate(VectorField::zero(2), pt({3, -1}), 0.1, 5);
  REQUIRE(still.states.size() == 6);
  for (const auto &x : still.states)
    CHECK(x == pt({3, -1}));
  CHECK(still.times.back() == doctest::Approx(0.5));

  const VectorField decay(1, [](const Point &x) -> Point { return -x; });
  const auto traj = integrate(decay, pt({1}), 1e-3, 1000);
  CHECK(std::abs(traj.states.back()(0) - std::exp(-1.0)) < 1e-10);

  const VectorField blowup(1, [](const Point &x) -> Point { return x.array().square() * 1e6; });
  try {
    integrate(blowup, pt({1e150}), 1.0, 100);
    FAIL("expected divergence");
  } catch (const IntegrationDiverged &err) {
    CHECK(err.step() == 1);
    CHECK(err.partial().states.size() == 1);
  }

  CHECK_THROWS_AS(integrate(decay, pt({1}), 0.0, 10), PreconditionError);
  CHECK_THROWS_AS(integrate(decay, pt({1}), 0.1, 0), PreconditionError);
  CHECK_THROWS_AS(integrate(decay, pt({1, 2}), 0.1, 1), DomainError);
}

TEST_CASE("RK4 endpoint error scales as dt^4") {
  const VectorField decay(1, [](const Point &x) -> Point { return -x; });
  std::vector<double> errors;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    const auto traj = integrate(decay, pt({1}), dt, steps);
    errors.push_back(std::abs(traj.states.back()(0) - std::exp(-1.0)));
  }
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double ratio = errors[i] / errors[i + 1];
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
  }
}

TEST_CASE("cumulative_simpson") {
  // Exact on cubics.
  std::vector<double> cubic;
  const double dt = 0.1;
  for (int i = 0; i <= 10; ++i) {
    const double t = i * dt;
    cubic.push_back(t * t * t - 2 * t + 1);
  }
  const auto acc = cumulative_simpson(cubic, dt);
  REQUIRE(acc.size() == cubic.size());
  CHECK(acc[0] == 0.0);
  for (int i = 2; i <= 10; i += 2) {
    const double t = i * dt;
    CHECK(acc[i] == doctest::Approx(t * t * t * t / 4 - t * t + t).epsilon(1e-13));
  }
  // Odd tail uses one trapezoid panel.
  std::vector<double> line{1.0, 2.0, 3.0, 4.0};
  const auto lacc = cumulative_simpson(line, 1.0);
  CHECK(lacc[1] == doctest::Approx(1.5));
  CHECK(lacc[2] == doctest::Approx(4.0));
  CHECK(lacc[3] == doctest::Approx(7.5));
  CHECK(cumulative_simpson({5.0}, 1.0) == std::vector<double>{0.0});
}

TEST_CASE("audit") {
  auto s = damped_radial();
  const auto traj = integrate(s);
  REQUIRE(traj.states.size() == 1001);
  const double d0 = s.dissipated[0](s.x0);
  CHECK(std::abs(s.dissipated[0](traj.states.back()) - d0 * std::exp(-2.0)) < 1e-6);
  auto report = audit(traj, s);
  CHECK(report.conservation_drift.empty());
  REQUIRE(report.dissipation_residual.size() == 1);
  CHECK(report.dissipation_residual[0] < 1e-6);
  CHECK(report.passes(1e-6));
  CHECK(traj.dissipated_samples.rows() == 1001);
  CHECK(traj.rate_samples(1000, 0) == doctest::Approx(-std::exp(-2.0)).epsilon(1e-6));

  auto top = euler_top();
  const auto ttraj = integrate(top);
  report = audit(ttraj, top);
  REQUIRE(report.conservation_drift.size() == 2);
  CHECK(report.dissipation_residual.empty());
  CHECK(report.max_drift() < 1e-8);

  auto still = damped_radial();
  still.rates = {ScalarField::zero(2)};
  still.steps = 1;
  report = audit(integrate(still), still);
  CHECK(report.dissipation_residual[0] == 0.0);
  CHECK(report.max_drift() == 0.0);

  // With h = 0 the budget residual is the drift of D under an arbitrary field.
  still.steps = 50;
  Trajectory wander = integrate(VectorField(2, [](const Point &x) { return pt({-x(1), 0.3}); }),
                                still.x0, 0.01, 50);
  record_samples(wander, still);
  report = audit(wander, still);
  double drift = 0.0;
  for (const auto &x : wander.states)
    drift = std::max(drift, std::abs(still.dissipated[0](x) - still.dissipated[0](still.x0)));
  CHECK(report.dissipation_residual[0] == doctest::Approx(drift).epsilon(1e-14));
  CHECK(report.dissipation_residual[0] > 0.0);

  // A corrupted state shows up as drift.
  Trajectory bad = ttraj;
  bad.states[5000](0) += 1e-3;
  CHECK_FALSE(audit(bad, top).passes(1e-8));

  bad.states[10](1) = std::nan("");
  CHECK(std::isinf(audit(bad, top).max_drift()));
}

TEST_CASE("random scenarios: pointwise synthesis and affine closure") {
  oracle::Random rng(43);
  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.integer(2, 6);
    const int k = rng.integer(0, n - 1);
    const int p = rng.integer(k == 0 ? 1 : 0, n - k);
    const MatrixXd gm = rng.spd(n);

    Scenario s;
    s.dim = n;
    s.metric = MetricField(Metricd(gm));
    for (int i = 0; i < k; ++i)
      s.conserved.push_back(rng.polynomial(n, 4, 3));
    for (int j = 0; j < p; ++j) {
      s.dissipated.push_back(rng.polynomial(n, 4, 3));
      s.rates.push_back(rng.polynomial(n, 3, 3));
    }
    s.x0 = rng.vector(n);
    s.dt = 1e-3;
    s.steps = 1;
    std::vector<Point> points;
    for (int i = 0; i < 50; ++i)
      points.push_back(rng.vector(n));
    s.region_sample = points;
    for (int a = 0; a < n - k - p; ++a)
      s.direction_coeffs.push_back(rng.polynomial(n, 2, 2));
    auto other = s;
    for (auto &c : other.direction_coeffs)
      c = rng.polynomial(n, 2, 2);

    VectorField first = VectorField::zero(n), second = VectorField::zero(n);
    try {
      first = synthesize(s);
      second = synthesize(other);
      for (const auto &x : points)
        (void)first(x);
    } catch (const RankDeficiencyError &) {
      continue;
    } catch (const RegionTooLargeError &) {
      continue;
    }
    ++tested;
    for (const auto &x : points) {
      const VectorXd v = first(x);
      const VectorXd diff = v - second(x);
      for (const auto &f : s.conserved) {
        const VectorXd grad = riemannian_gradient(f, x, s.metric);
        CHECK(std::abs(metric_inner(v, grad, gm)) < 1e-8);
        CHECK(std::abs(metric_inner(diff, grad, gm)) < 1e-8);
      }
      for (int j = 0; j < p; ++j) {
        const VectorXd grad = riemannian_gradient(s.dissipated[j], x, s.metric);
        const double h = s.rates[j](x);
        CHECK(std::abs(metric_inner(v, grad, gm) - h) < 1e-8 * std::max(1.0, std::abs(h)));
        CHECK(std::abs(metric_inner(diff, grad, gm)) < 1e-8);
      }
    }
  }
  CHECK(tested >= 20);
}

TEST_CASE("completely integrable chain") {
  Scenario s;
  s.dim = 4;
  s.metric = MetricField::identity(4);
  for (int l = 0; l < 3; ++l) {
    std::vector<double> c(4, 0.0);
    c[l] = c[l + 1] = 1.0;
    s.conserved.push_back(weighted_square(c));
  }
  s.direction_coeffs = {ScalarField::constant(4, 1.0)};
  s.x0 = pt({1, 0.8, 0.6, 0.4});
  s.dt = 1e-3;
  s.steps = 2000;
  const auto dist = scenario_distribution(s);
  const Point x = s.x0;
  const auto gens = dist.generators(x);
  REQUIRE(gens.size() == 1);
  std::vector<Multivectord> grads;
  for (const auto &f : s.conserved)
    grads.push_back(Multivectord::vector(euclidean_gradient(f, x)));
  const auto expected = hodge_star(wedge_all<double>(4, grads), Metricd::identity(4));
  CHECK((gens[0] - expected.to_vector()).norm() <= 1e-14);
  CHECK(audit(integrate(s), s).max_drift() < 1e-6);
}
