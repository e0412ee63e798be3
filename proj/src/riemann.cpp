#include "hodgeflow/riemann.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace hodgeflow {

namespace {

std::vector<double> to_std(const Point &x) { return {x.data(), x.data() + x.size()}; }

void require_point_dim(const Point &x, int dim, const char *what) {
  if (x.size() != dim)
    throw DomainError(std::string(what) + ": point has dimension " +
                      std::to_string(x.size()) + ", expected " + std::to_string(dim));
}

double power(double base, int e) {
  double out = 1.0;
  for (int i = 0; i < e; ++i)
    out *= base;
  return out;
}

template <typename Fn> auto with_point(const Point &x, Fn &&fn) {
  try {
    return fn();
  } catch (const RankDeficiencyError &e) {
    if (e.point())
      throw;
    throw e.at(to_std(x));
  }
}

} // namespace

ScalarField::ScalarField(int dim, std::vector<Monomial> terms)
    : dim_(dim), terms_(std::move(terms)) {
  check_dim(dim);
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    if (static_cast<int>(terms_[t].exponents.size()) != dim)
      throw DomainError("term " + std::to_string(t) + " has " +
                        std::to_string(terms_[t].exponents.size()) +
                        " exponents, expected " + std::to_string(dim));
    for (int e : terms_[t].exponents)
      if (e < 0)
        throw DomainError("term " + std::to_string(t) + " has a negative exponent");
  }
}

ScalarField ScalarField::constant(int dim, double c) {
  return ScalarField(dim, {Monomial{c, std::vector<int>(dim, 0)}});
}

double ScalarField::operator()(const Point &x) const {
  require_point_dim(x, dim_, "scalar field");
  double acc = 0.0;
  for (const auto &t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < dim_; ++i)
      m *= power(x(i), t.exponents[i]);
    acc += m;
  }
  return acc;
}

ScalarField ScalarField::derivative(int i) const {
  if (i < 0 || i >= dim_)
    throw DomainError("derivative index " + std::to_string(i) + " out of range");
  std::vector<Monomial> out;
  for (const auto &t : terms_) {
    if (t.exponents[i] == 0)
      continue;
    Monomial d = t;
    d.coeff *= t.exponents[i];
    d.exponents[i] -= 1;
    out.push_back(std::move(d));
  }
  return ScalarField(dim_, std::move(out));
}

double eval_field(const ScalarField &f, const Point &x) { return f(x); }

Point euclidean_gradient(const ScalarField &f, const Point &x) {
  const int n = f.dim();
  require_point_dim(x, n, "gradient");
  Point grad = Point::Zero(n);
  for (const auto &t : f.terms()) {
    for (int i = 0; i < n; ++i) {
      const int ei = t.exponents[i];
      if (ei == 0)
        continue;
      double m = t.coeff * ei;
      for (int j = 0; j < n; ++j)
        m *= power(x(j), j == i ? ei - 1 : t.exponents[j]);
      grad(i) += m;
    }
  }
  return grad;
}

Metricd MetricField::at(const Point &x) const {
  require_point_dim(x, dim_, "metric field");
  if (const auto *m = std::get_if<Metricd>(&source_))
    return *m;
  Metricd out = std::get<Function>(source_)(x);
  if (out.dim() != dim_)
    throw DomainError("metric field returned dimension " + std::to_string(out.dim()));
  return out;
}

VectorField VectorField::constant(Point value) {
  const int n = static_cast<int>(value.size());
  return VectorField(n, [v = std::move(value)](const Point &) { return v; });
}

VectorField VectorField::zero(int dim) { return constant(Point::Zero(dim)); }

Point VectorField::operator()(const Point &x) const {
  require_point_dim(x, dim_, "vector field");
  Point out = f_(x);
  if (out.size() != dim_)
    throw DomainError("vector field returned " + std::to_string(out.size()) +
                      " components, expected " + std::to_string(dim_));
  return out;
}

Point riemannian_gradient(const ScalarField &f, const Point &x, const MetricField &g) {
  if (f.dim() != g.dim())
    throw DomainError("scalar field and metric field dimensions differ");
  const Metricd gx = g.at(x);
  return gx.matrix().llt().solve(euclidean_gradient(f, x));
}

VectorField gradient_field(ScalarField f, MetricField g) {
  const int n = f.dim();
  return VectorField(n, [f = std::move(f), g = std::move(g)](const Point &x) {
    return riemannian_gradient(f, x, g);
  });
}

PointwiseGenerators pointwise_generators(const Point &x,
                                         std::span<const VectorField> x_fields,
                                         std::span<const VectorField> y_fields,
                                         std::span<const ScalarField> h_fields,
                                         const MetricField &g) {
  const int n = g.dim();
  require_point_dim(x, n, "pointwise generators");
  if (h_fields.size() != y_fields.size())
    throw DomainError("number of rates does not match number of affine fields");

  HyperplaneSystemd sys{n, {}, {}, {}, g.at(x)};
  for (const auto &f : x_fields)
    sys.homogeneous_normals.push_back(Multivectord::vector(f(x)));
  for (std::size_t j = 0; j < y_fields.size(); ++j) {
    sys.affine_normals.push_back(Multivectord::vector(y_fields[j](x)));
    sys.offsets.push_back(h_fields[j](x));
  }

  const auto sol = with_point(x, [&] { return solve_intersection(sys); });
  PointwiseGenerators out;
  if (sol.particular)
    out.particular = sol.particular->to_vector();
  for (const auto &b : sol.basis)
    out.directions.push_back(b.to_vector());
  return out;
}

namespace {

// Y_1(x)..Y_p(x), X_1(x)..X_k(x) as vectors.
std::vector<Multivectord> stacked_values(const Point &x,
                                         std::span<const VectorField> x_fields,
                                         std::span<const VectorField> y_fields) {
  std::vector<Multivectord> out;
  for (const auto &f : y_fields)
    out.push_back(Multivectord::vector(f(x)));
  for (const auto &f : x_fields)
    out.push_back(Multivectord::vector(f(x)));
  return out;
}

int field_dim(std::span<const VectorField> x_fields, std::span<const VectorField> y_fields) {
  if (!x_fields.empty())
    return x_fields.front().dim();
  if (!y_fields.empty())
    return y_fields.front().dim();
  return 0;
}

} // namespace

std::vector<VectorField> frame_completion_field(std::span<const VectorField> x_fields,
                                                std::span<const VectorField> y_fields,
                                                std::span<const Point> region_sample) {
  if (region_sample.empty())
    throw PreconditionError("frame completion needs at least one sample point");
  const int n = static_cast<int>(region_sample.front().size());
  check_dim(n);
  const int m = static_cast<int>(x_fields.size() + y_fields.size());
  if (m > n)
    throw PreconditionError("more constraint fields than dimensions");

  struct PointState {
    Multivectord acc;
    double norm_product;
  };
  std::vector<PointState> states;
  states.reserve(region_sample.size());
  for (const auto &x : region_sample) {
    require_point_dim(x, n, "frame completion sample");
    const auto values = stacked_values(x, x_fields, y_fields);
    with_point(x, [&] {
      require_independent<double>(values, n);
      return 0;
    });
    PointState s{wedge_all<double>(n, values), 1.0};
    for (const auto &v : values)
      s.norm_product *= v.coeffs().norm();
    states.push_back(std::move(s));
  }

  const std::size_t needed = static_cast<std::size_t>(n - m);
  std::vector<VectorField> out;
  std::optional<Point> first_failure;
  for (int i = 0; i < n && out.size() < needed; ++i) {
    const auto e = Multivectord::basis_vector(n, i);
    std::vector<Multivectord> trials;
    trials.reserve(states.size());
    bool valid = true;
    for (std::size_t s = 0; s < states.size() && valid; ++s) {
      auto trial = wedge(states[s].acc, e);
      if (trial.coeffs().norm() > kRankTolerance * states[s].norm_product) {
        trials.push_back(std::move(trial));
      } else {
        valid = false;
        if (!first_failure)
          first_failure = region_sample[s];
      }
    }
    if (!valid)
      continue;
    for (std::size_t s = 0; s < states.size(); ++s)
      states[s].acc = std::move(trials[s]);
    out.push_back(VectorField::constant(Point::Unit(n, i)));
  }
  if (out.size() != needed)
    throw RegionTooLargeError(to_std(first_failure.value_or(region_sample.front())),
                              out.size(), needed);
  return out;
}

AffineDistribution::AffineDistribution(std::vector<VectorField> x_fields,
                                       std::vector<VectorField> y_fields,
                                       std::vector<ScalarField> h_fields, MetricField g,
                                       std::vector<Point> completion)
    : x_fields_(std::move(x_fields)), y_fields_(std::move(y_fields)),
      h_fields_(std::move(h_fields)), g_(std::move(g)), completion_(std::move(completion)) {
  const int n = g_.dim();
  if (h_fields_.size() != y_fields_.size())
    throw DomainError("number of rates does not match number of affine fields");
  if (k() + p() > n)
    throw PreconditionError("k + p exceeds dimension");
  const bool single = k() + p() == n - 1 && completion_.empty();
  if (!single && static_cast<int>(completion_.size()) != n - k() - p())
    throw DomainError("completion has " + std::to_string(completion_.size()) +
                      " vectors, expected " + std::to_string(n - k() - p()));
  for (const auto &f : x_fields_)
    if (f.dim() != n)
      throw DomainError("constraint field dimension does not match metric");
  for (const auto &f : y_fields_)
    if (f.dim() != n)
      throw DomainError("constraint field dimension does not match metric");
  for (const auto &h : h_fields_)
    if (h.dim() != n)
      throw DomainError("rate field dimension does not match metric");
}

std::vector<Multivectord> AffineDistribution::constraint_values(const Point &x) const {
  require_point_dim(x, dim(), "affine distribution");
  auto values = stacked_values(x, x_fields_, y_fields_);
  with_point(x, [&] {
    require_independent<double>(values, dim());
    return 0;
  });
  return values;
}

Point AffineDistribution::particular(const Point &x) const {
  if (p() == 0)
    return Point::Zero(dim());
  HyperplaneSystemd sys{dim(), {}, {}, {}, g_.at(x)};
  for (const auto &f : x_fields_)
    sys.homogeneous_normals.push_back(Multivectord::vector(f(x)));
  for (std::size_t j = 0; j < y_fields_.size(); ++j) {
    sys.affine_normals.push_back(Multivectord::vector(y_fields_[j](x)));
    sys.offsets.push_back(h_fields_[j](x));
  }
  return with_point(x, [&] { return particular_solution(sys).to_vector(); });
}

std::vector<Point> AffineDistribution::generators(const Point &x) const {
  const int n = dim();
  const auto normals = constraint_values(x);
  if (k() + p() == n)
    return {};
  if (k() + p() == n - 1)
    return {hodge_star(wedge_all<double>(n, normals), g_.at(x)).to_vector()};
  std::vector<Multivectord> frame;
  for (const auto &z : completion_)
    frame.push_back(Multivectord::vector(z));
  auto all = frame;
  all.insert(all.end(), normals.begin(), normals.end());
  if (!check_rank<double>(all, n).independent)
    throw RegionTooLargeError(to_std(x), 0, completion_.size());

  const auto g = g_.at(x);
  std::vector<Point> out;
  for (const auto &u : homogeneous_basis_from_completion<double>(normals, frame, g))
    out.push_back(u.to_vector());
  return out;
}

GeneratorSet generator_set(std::span<const VectorField> x_fields,
                           std::span<const VectorField> y_fields,
                           std::span<const ScalarField> h_fields, const MetricField &g,
                           std::span<const Point> region_sample) {
  const int n = g.dim();
  if (const int fd = field_dim(x_fields, y_fields); fd != 0 && fd != n)
    throw DomainError("constraint field dimension does not match metric");
  const int m = static_cast<int>(x_fields.size() + y_fields.size());
  std::vector<Point> completion;
  if (m == n - 1) {
    // *(Y ^ X) needs no completion; still certify the sample.
    for (const auto &x : region_sample)
      with_point(x, [&] {
        require_independent<double>(stacked_values(x, x_fields, y_fields), n);
        return 0;
      });
  } else {
    for (const auto &z : frame_completion_field(x_fields, y_fields, region_sample))
      completion.push_back(z(Point::Zero(n)));
  }

  auto dist = std::make_shared<const AffineDistribution>(
      std::vector<VectorField>(x_fields.begin(), x_fields.end()),
      std::vector<VectorField>(y_fields.begin(), y_fields.end()),
      std::vector<ScalarField>(h_fields.begin(), h_fields.end()), g, completion);

  GeneratorSet out;
  out.completion = completion;
  if (!y_fields.empty())
    out.particular = VectorField(n, [dist](const Point &x) { return dist->particular(x); });
  const std::size_t count = static_cast<std::size_t>(n - m);
  for (std::size_t a = 0; a < count; ++a)
    out.generators.emplace_back(
        n, [dist, a](const Point &x) { return dist->generators(x)[a]; });
  return out;
}

} // namespace hodgeflow
