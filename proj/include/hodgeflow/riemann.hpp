#pragma once

// Pointwise hyperplane solving lifted to a single Euclidean chart carrying a
// (possibly position-dependent) metric: polynomial scalar fields, Riemannian
// gradients, frame completion on a sample region and local generators of the
// affine distribution {X : g(X, X_i) = 0, g(X, Y_j) = h_j}.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hodgeflow/exterior.hpp"
#include "hodgeflow/intersect.hpp"

namespace hodgeflow {

using Point = Eigen::VectorXd;

struct Monomial {
  double coeff = 0;
  std::vector<int> exponents;
};

// Polynomial in x_1..x_n. Evaluation and differentiation are exact up to
// floating-point rounding.
class ScalarField {
public:
  ScalarField(int dim, std::vector<Monomial> terms);

  static ScalarField zero(int dim) { return ScalarField(dim, {}); }
  static ScalarField constant(int dim, double c);

  int dim() const noexcept { return dim_; }
  const std::vector<Monomial> &terms() const noexcept { return terms_; }

  double operator()(const Point &x) const;
  ScalarField derivative(int i) const;

private:
  int dim_;
  std::vector<Monomial> terms_;
};

double eval_field(const ScalarField &f, const Point &x);
Point euclidean_gradient(const ScalarField &f, const Point &x);

class MetricField {
public:
  using Function = std::function<Metricd(const Point &)>;

  explicit MetricField(Metricd constant) : dim_(constant.dim()), source_(std::move(constant)) {}
  MetricField(int dim, Function f) : dim_(dim), source_(std::move(f)) {}

  static MetricField identity(int dim) { return MetricField(Metricd::identity(dim)); }

  int dim() const noexcept { return dim_; }
  bool is_constant() const noexcept { return std::holds_alternative<Metricd>(source_); }

  // Metric at x; Metric construction validates symmetry and definiteness.
  Metricd at(const Point &x) const;

private:
  int dim_;
  std::variant<Metricd, Function> source_;
};

class VectorField {
public:
  using Function = std::function<Point(const Point &)>;

  VectorField(int dim, Function f) : dim_(dim), f_(std::move(f)) {}
  static VectorField constant(Point value);
  static VectorField zero(int dim);

  int dim() const noexcept { return dim_; }
  Point operator()(const Point &x) const;

private:
  int dim_;
  Function f_;
};

// Solves G(x) out = df(x).
Point riemannian_gradient(const ScalarField &f, const Point &x, const MetricField &g);
VectorField gradient_field(ScalarField f, MetricField g);

struct PointwiseGenerators {
  std::optional<Point> particular; // X0(x); absent when p = 0
  std::vector<Point> directions;   // n - (k + p) vectors
};

// Solves g(X, X_i) = 0, g(X, Y_j) = h_j(x) at a single point.
PointwiseGenerators pointwise_generators(const Point &x,
                                         std::span<const VectorField> x_fields,
                                         std::span<const VectorField> y_fields,
                                         std::span<const ScalarField> h_fields,
                                         const MetricField &g);

// Constant standard-basis fields Z completing {Y_j(x), X_i(x)} to a frame at
// every sample point, chosen greedily by index.
std::vector<VectorField> frame_completion_field(std::span<const VectorField> x_fields,
                                                std::span<const VectorField> y_fields,
                                                std::span<const Point> region_sample);

struct GeneratorSet {
  std::optional<VectorField> particular;
  std::vector<VectorField> generators;
  std::vector<Point> completion; // frozen Z_1..Z_{n-(k+p)} values
};

// Constraint fields plus a frozen frame completion. Evaluates X0 and all
// generator values at a point in one pass.
class AffineDistribution {
public:
  AffineDistribution(std::vector<VectorField> x_fields, std::vector<VectorField> y_fields,
                     std::vector<ScalarField> h_fields, MetricField g,
                     std::vector<Point> completion);

  int dim() const noexcept { return g_.dim(); }
  int k() const noexcept { return static_cast<int>(x_fields_.size()); }
  int p() const noexcept { return static_cast<int>(y_fields_.size()); }
  const std::vector<Point> &completion() const noexcept { return completion_; }

  // Throws RankDeficiencyError (with x) when the constraint values drop rank
  // and RegionTooLargeError when the frozen completion degenerates at x.
  Point particular(const Point &x) const;
  std::vector<Point> generators(const Point &x) const;

private:
  std::vector<Multivectord> constraint_values(const Point &x) const;

  std::vector<VectorField> x_fields_;
  std::vector<VectorField> y_fields_;
  std::vector<ScalarField> h_fields_;
  MetricField g_;
  std::vector<Point> completion_;
};

// particular: x -> X0(x); generator a: x -> *(Z_{!a} ^ Y ^ X)(x).
GeneratorSet generator_set(std::span<const VectorField> x_fields,
                           std::span<const VectorField> y_fields,
                           std::span<const ScalarField> h_fields, const MetricField &g,
                           std::span<const Point> region_sample);

} // namespace hodgeflow
