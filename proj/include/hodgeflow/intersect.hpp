#pragma once

// Intersection of k linear hyperplanes <u, v_i> = 0 and p affine hyperplanes
// <u, w_j> = lambda_j, written with wedge products and the Hodge star:
//
//   solutions = u0 + span{ *(w_{!a} ^ ... ^ v) }
//
// where the homogeneous part comes from a completion of the normals to a basis
// and u0 is the canonical particular solution lying in span{v, w}.

#include <Eigen/SVD>

#include <optional>
#include <span>
#include <vector>

#include "hodgeflow/exterior.hpp"

namespace hodgeflow {

// Relative threshold on singular values for "linearly independent".
inline constexpr double kRankTolerance = 1e-10;

template <typename Scalar> struct RankCheck {
  Scalar smallest = 0;
  Scalar largest = 0;
  bool independent = true;
};

// Singular values of the matrix whose rows are the given vectors.
template <typename Scalar>
RankCheck<Scalar> check_rank(std::span<const Multivector<Scalar>> vectors, int dim) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  RankCheck<Scalar> out;
  if (vectors.empty())
    return out;
  if (static_cast<int>(vectors.size()) > dim) {
    out.independent = false;
    return out;
  }
  Matrix rows(static_cast<Eigen::Index>(vectors.size()), dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim)
      throw DomainError("normal " + std::to_string(i) + " has dimension " +
                        std::to_string(vectors[i].dim()) + ", expected " +
                        std::to_string(dim));
    rows.row(static_cast<Eigen::Index>(i)) = vectors[i].to_vector().transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(rows);
  const auto &s = svd.singularValues();
  out.largest = s(0);
  out.smallest = s(s.size() - 1);
  out.independent =
      out.largest > Scalar(0) && out.smallest > Scalar(kRankTolerance) * out.largest;
  return out;
}

template <typename Scalar>
RankCheck<Scalar> check_rank(const std::vector<Multivector<Scalar>> &vectors, int dim) {
  return check_rank(std::span<const Multivector<Scalar>>(vectors), dim);
}

template <typename Scalar>
void require_independent(std::span<const Multivector<Scalar>> vectors, int dim) {
  const auto rc = check_rank(vectors, dim);
  if (!rc.independent)
    throw RankDeficiencyError(double(rc.smallest), double(rc.largest));
}

template <typename Scalar = double> struct HyperplaneSystem {
  int dim;
  std::vector<Multivector<Scalar>> homogeneous_normals; // v_1..v_k
  std::vector<Multivector<Scalar>> affine_normals;      // w_1..w_p
  std::vector<Scalar> offsets;                          // lambda_1..lambda_p
  Metric<Scalar> metric;

  int k() const noexcept { return static_cast<int>(homogeneous_normals.size()); }
  int p() const noexcept { return static_cast<int>(affine_normals.size()); }

  // w_1..w_p followed by v_1..v_k.
  std::vector<Multivector<Scalar>> all_normals() const {
    std::vector<Multivector<Scalar>> out = affine_normals;
    out.insert(out.end(), homogeneous_normals.begin(), homogeneous_normals.end());
    return out;
  }

  void validate() const {
    check_dim(dim);
    if (metric.dim() != dim)
      throw DomainError("metric dimension " + std::to_string(metric.dim()) +
                        " does not match system dimension " + std::to_string(dim));
    if (offsets.size() != affine_normals.size())
      throw DomainError(std::to_string(affine_normals.size()) +
                        " affine normals but " + std::to_string(offsets.size()) +
                        " offsets");
    if (k() + p() > dim)
      throw PreconditionError("k + p = " + std::to_string(k() + p()) +
                              " exceeds dimension " + std::to_string(dim));
    const auto normals = all_normals();
    for (const auto &v : normals) {
      if (v.dim() != dim)
        throw DomainError("normal of dimension " + std::to_string(v.dim()) +
                          " in a system of dimension " + std::to_string(dim));
      (void)v.to_vector();
    }
    require_independent<Scalar>(normals, dim);
  }
};

using HyperplaneSystemd = HyperplaneSystem<double>;

template <typename Scalar = double> struct AffineSolution {
  std::optional<Multivector<Scalar>> particular; // absent when p = 0
  std::vector<Multivector<Scalar>> basis;
};

using AffineSolutiond = AffineSolution<double>;

// Greedily appends e_0, e_1, ... keeping e_i iff the accumulated wedge stays
// above kRankTolerance times the product of member norms.
template <typename Scalar>
std::vector<Multivector<Scalar>>
complete_to_basis(std::span<const Multivector<Scalar>> vectors, int dim) {
  check_dim(dim);
  require_independent(vectors, dim);
  auto acc = Multivector<Scalar>::scalar(dim, Scalar(1));
  Scalar norm_product(1);
  for (const auto &v : vectors) {
    acc = wedge(acc, v);
    norm_product *= v.coeffs().norm();
  }
  std::vector<Multivector<Scalar>> out;
  const std::size_t needed = static_cast<std::size_t>(dim) - vectors.size();
  for (int i = 0; i < dim && out.size() < needed; ++i) {
    auto e = Multivector<Scalar>::basis_vector(dim, i);
    auto trial = wedge(acc, e);
    // Blades are orthonormal in the coordinate metric, so the coefficient
    // norm is the wedge norm.
    if (trial.coeffs().norm() > Scalar(kRankTolerance) * norm_product) {
      acc = std::move(trial);
      out.push_back(std::move(e));
    }
  }
  if (out.size() != needed)
    throw NumericalError("greedy completion found " + std::to_string(out.size()) +
                         " of " + std::to_string(needed) + " vectors");
  return out;
}

// u_a = *( omega_1 ^ .. (omega_a omitted) .. ^ omega_{n-k} ^ v_1 ^ ... ^ v_k ).
template <typename Scalar>
std::vector<Multivector<Scalar>>
homogeneous_basis_from_completion(std::span<const Multivector<Scalar>> normals,
                                  std::span<const Multivector<Scalar>> completion,
                                  const Metric<Scalar> &g) {
  const int n = g.dim();
  const auto tail = wedge_all<Scalar>(n, normals);
  const int m = static_cast<int>(completion.size());
  if (m == 0)
    return {};
  HodgeStar<Scalar> star(g, n - 1);
  std::vector<Multivector<Scalar>> out;
  out.reserve(m);
  for (int a = 0; a < m; ++a) {
    auto head = Multivector<Scalar>::scalar(n, Scalar(1));
    for (int i = 0; i < m; ++i)
      if (i != a)
        head = wedge(head, completion[i]);
    out.push_back(star(wedge(head, tail)));
  }
  return out;
}

// Basis of {u : <u, v_i> = 0 for all i}; n - k vectors.
template <typename Scalar>
std::vector<Multivector<Scalar>>
homogeneous_basis(std::span<const Multivector<Scalar>> normals, const Metric<Scalar> &g) {
  const int n = g.dim();
  const int k = static_cast<int>(normals.size());
  if (k > n)
    throw PreconditionError("more normals than dimensions");
  require_independent(normals, n);
  if (k == n)
    return {};
  if (k == n - 1)
    return {hodge_star(wedge_all<Scalar>(n, normals), g)};
  const auto completion = complete_to_basis(normals, n);
  return homogeneous_basis_from_completion<Scalar>(normals, completion, g);
}

template <typename Scalar>
std::vector<Multivector<Scalar>>
complete_to_basis(const std::vector<Multivector<Scalar>> &vectors, int dim) {
  return complete_to_basis(std::span<const Multivector<Scalar>>(vectors), dim);
}

template <typename Scalar>
std::vector<Multivector<Scalar>>
homogeneous_basis(const std::vector<Multivector<Scalar>> &normals, const Metric<Scalar> &g) {
  return homogeneous_basis(std::span<const Multivector<Scalar>>(normals), g);
}

namespace detail {

template <typename Scalar>
Scalar particular_residual_scale(const Multivector<Scalar> &u0,
                                 const Multivector<Scalar> &normal,
                                 Scalar offset, const Metric<Scalar> &g) {
  using std::abs;
  return norm(u0, g) * norm(normal, g) + abs(offset) + Scalar(1e-300);
}

} // namespace detail

// Canonical particular solution
//   u0 = |W ^ V|^{-2} sum_i (-1)^{n-i} lambda_i *[ W_{!i} ^ V ^ *(W ^ V) ]
// with W = w_1 ^ ... ^ w_p, V = v_1 ^ ... ^ v_k and i counted from 1.
template <typename Scalar>
Multivector<Scalar> particular_solution(const HyperplaneSystem<Scalar> &sys) {
  if (sys.p() == 0)
    throw PreconditionError("particular_solution needs at least one affine "
                            "hyperplane; use homogeneous_basis for p = 0");
  sys.validate();
  const int n = sys.dim;
  const auto &g = sys.metric;
  const auto tail = wedge_all<Scalar>(n, sys.homogeneous_normals);
  const auto full = wedge(wedge_all<Scalar>(n, sys.affine_normals), tail);
  const Scalar full_sq = inner_product(full, full, g);
  const auto complement = hodge_star(full, g);
  const auto tail_dual = wedge(tail, complement);

  HodgeStar<Scalar> star(g, n - 1);
  Multivector<Scalar> u0(n);
  for (int i = 0; i < sys.p(); ++i) {
    if (sys.offsets[i] == Scalar(0))
      continue;
    auto head = Multivector<Scalar>::scalar(n, Scalar(1));
    for (int j = 0; j < sys.p(); ++j)
      if (j != i)
        head = wedge(head, sys.affine_normals[j]);
    const auto theta = star(wedge(head, tail_dual));
    const Scalar sign = ((n - (i + 1)) % 2 == 0) ? Scalar(1) : Scalar(-1);
    u0 += theta * (sign * sys.offsets[i]);
  }
  u0 /= full_sq;
  if (!u0.coeffs().allFinite())
    throw NumericalError("particular solution is not finite");

  using std::abs;
  for (int j = 0; j < sys.p(); ++j) {
    const Scalar r = inner_product(u0, sys.affine_normals[j], g) - sys.offsets[j];
    if (!(abs(r) <= Scalar(1e-6) * detail::particular_residual_scale(
                                       u0, sys.affine_normals[j], sys.offsets[j], g)))
      throw NumericalError("particular solution fails affine equation " +
                           std::to_string(j) + " (residual " +
                           std::to_string(double(r)) + ")");
  }
  for (int i = 0; i < sys.k(); ++i) {
    const Scalar r = inner_product(u0, sys.homogeneous_normals[i], g);
    if (!(abs(r) <= Scalar(1e-6) * detail::particular_residual_scale(
                                       u0, sys.homogeneous_normals[i], Scalar(0), g)))
      throw NumericalError("particular solution fails linear equation " +
                           std::to_string(i) + " (residual " +
                           std::to_string(double(r)) + ")");
  }
  return u0;
}

// u0 + E[w_1..w_p, v_1..v_k].
template <typename Scalar>
AffineSolution<Scalar> solve_intersection(const HyperplaneSystem<Scalar> &sys) {
  sys.validate();
  AffineSolution<Scalar> out;
  if (sys.p() > 0)
    out.particular = particular_solution(sys);
  const auto normals = sys.all_normals();
  out.basis = homogeneous_basis<Scalar>(normals, sys.metric);
  return out;
}

template <typename Scalar = double> struct SolutionReport {
  Scalar max_homogeneous_residual = 0;   // max_i |<u0, v_i>|
  Scalar max_affine_residual = 0;        // max_j |<u0, w_j> - lambda_j|
  Scalar max_basis_annihilation = 0;     // max_{a,normal} |<b_a, normal>|
  Scalar basis_singular_ratio = 1;       // smallest / largest singular value
  Scalar max_particular_basis_inner = 0; // max_a |<u0, b_a>|
  bool basis_size_ok = true;
  Scalar tolerance = 0;
  bool passed = true;
};

// Residual audit. Affine residuals are judged against tol * max(1, |lambda_j|),
// basis annihilation and u0-orthogonality against tol * max(1, |x| |y|).
template <typename Scalar>
SolutionReport<Scalar> verify_solution(const HyperplaneSystem<Scalar> &sys,
                                       const AffineSolution<Scalar> &sol, Scalar tol) {
  using std::abs;
  using std::max;
  const auto &g = sys.metric;
  SolutionReport<Scalar> r;
  r.tolerance = tol;
  bool ok = true;

  r.basis_size_ok =
      static_cast<int>(sol.basis.size()) == sys.dim - sys.k() - sys.p();
  ok &= r.basis_size_ok;
  ok &= sol.particular.has_value() == (sys.p() > 0);

  if (sol.particular) {
    const auto &u0 = *sol.particular;
    for (const auto &v : sys.homogeneous_normals) {
      const Scalar res = abs(inner_product(u0, v, g));
      r.max_homogeneous_residual = max(r.max_homogeneous_residual, res);
      ok &= res <= tol;
    }
    for (int j = 0; j < sys.p(); ++j) {
      const Scalar res =
          abs(inner_product(u0, sys.affine_normals[j], g) - sys.offsets[j]);
      r.max_affine_residual = max(r.max_affine_residual, res);
      ok &= res <= tol * max(Scalar(1), abs(sys.offsets[j]));
    }
    for (const auto &b : sol.basis) {
      const Scalar res = abs(inner_product(u0, b, g));
      r.max_particular_basis_inner = max(r.max_particular_basis_inner, res);
      ok &= res <= tol * max(Scalar(1), norm(u0, g) * norm(b, g));
    }
  }

  for (const auto &b : sol.basis)
    for (const auto &normal : sys.all_normals()) {
      const Scalar res = abs(inner_product(b, normal, g));
      r.max_basis_annihilation = max(r.max_basis_annihilation, res);
      ok &= res <= tol * max(Scalar(1), norm(b, g) * norm(normal, g));
    }

  if (!sol.basis.empty()) {
    const auto rc = check_rank<Scalar>(sol.basis, sys.dim);
    r.basis_singular_ratio = rc.largest > Scalar(0) ? rc.smallest / rc.largest : Scalar(0);
    ok &= rc.independent;
  }
  r.passed = ok;
  return r;
}

} // namespace hodgeflow
