#pragma once

// Dense exterior algebra over R^n with a metric-induced inner product on each
// exterior power and the Hodge star defined by <*a, w> mu = a ^ w.
//
// Blades are stored as bitmasks: bit i set <=> e_i is a factor. Coefficients
// of a Multivector live in a dense vector of length 2^n indexed by mask.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hodgeflow/errors.hpp"

namespace hodgeflow {

inline constexpr int kMaxDim = 16;

// Canonical basis blade e_{i_1} ^ ... ^ e_{i_p} with i_1 < ... < i_p.
class BladeIndex {
public:
  constexpr BladeIndex() = default;
  static constexpr BladeIndex from_mask(std::uint32_t mask) {
    BladeIndex b;
    b.mask_ = mask;
    return b;
  }

  constexpr std::uint32_t mask() const noexcept { return mask_; }
  constexpr int grade() const noexcept { return std::popcount(mask_); }
  constexpr bool contains(int i) const noexcept { return (mask_ >> i) & 1u; }

  std::vector<int> indices() const {
    std::vector<int> out;
    out.reserve(grade());
    for (std::uint32_t m = mask_; m; m &= m - 1)
      out.push_back(std::countr_zero(m));
    return out;
  }

  friend constexpr auto operator<=>(BladeIndex, BladeIndex) = default;

private:
  std::uint32_t mask_ = 0;
};

struct CanonicalBlade {
  BladeIndex blade;
  int sign; // -1, 0 or +1; 0 iff an index repeats
};

inline void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim)
    throw DomainError("ambient dimension " + std::to_string(dim) +
                      " outside [1, " + std::to_string(kMaxDim) + "]");
}

// Sorts a wedge monomial e_{i_1} ^ ... ^ e_{i_m} into canonical order.
inline CanonicalBlade canonical_blade(std::span<const int> indices, int dim) {
  check_dim(dim);
  for (int i : indices)
    if (i < 0 || i >= dim)
      throw DomainError("blade index " + std::to_string(i) +
                        " outside [0, " + std::to_string(dim) + ")");
  std::uint32_t mask = 0;
  int inversions = 0;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    if ((mask >> indices[a]) & 1u)
      return {BladeIndex{}, 0};
    mask |= 1u << indices[a];
    for (std::size_t b = a + 1; b < indices.size(); ++b)
      inversions += indices[a] > indices[b];
  }
  return {BladeIndex::from_mask(mask), (inversions % 2) ? -1 : 1};
}

// Sign of e_A ^ e_B relative to e_{A|B}, for disjoint A and B: parity of
// the number of pairs (a in A, b in B) with a > b.
constexpr int reorder_sign(std::uint32_t a, std::uint32_t b) noexcept {
  int swaps = 0;
  for (std::uint32_t m = b; m; m &= m - 1)
    swaps += std::popcount(a >> (std::countr_zero(m) + 1));
  return (swaps & 1) ? -1 : 1;
}

// All canonical blades of the given grade, in increasing mask order.
inline std::vector<BladeIndex> blades_of_grade(int dim, int grade) {
  check_dim(dim);
  std::vector<BladeIndex> out;
  if (grade < 0 || grade > dim)
    return out;
  const std::uint32_t end = 1u << dim;
  for (std::uint32_t m = 0; m < end; ++m)
    if (std::popcount(m) == grade)
      out.push_back(BladeIndex::from_mask(m));
  return out;
}

// Grade reported for the zero multivector, which is homogeneous of every grade.
inline constexpr int kAnyGrade = -1;

template <typename Scalar> class Multivector {
public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Multivector(int dim) : dim_(dim) {
    check_dim(dim);
    coeffs_ = Coeffs::Zero(Eigen::Index{1} << dim);
  }

  static Multivector scalar(int dim, Scalar s) {
    Multivector out(dim);
    out.coeffs_[0] = s;
    return out;
  }

  static Multivector blade(int dim, BladeIndex b, Scalar c = Scalar(1)) {
    Multivector out(dim);
    if (b.mask() >> dim)
      throw DomainError("blade does not fit in dimension " +
                        std::to_string(dim));
    out.coeffs_[b.mask()] = c;
    return out;
  }

  static Multivector basis_vector(int dim, int i) {
    if (i < 0 || i >= dim)
      throw DomainError("basis index " + std::to_string(i) + " outside [0, " +
                        std::to_string(dim) + ")");
    return blade(dim, BladeIndex::from_mask(1u << i));
  }

  template <typename Derived>
  static Multivector vector(const Eigen::MatrixBase<Derived> &v) {
    const int n = static_cast<int>(v.size());
    Multivector out(n);
    for (int i = 0; i < n; ++i)
      out.coeffs_[Eigen::Index{1} << i] = v(i);
    return out;
  }

  static Multivector vector(std::initializer_list<Scalar> v) {
    Vector tmp(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), tmp.data());
    return vector(tmp);
  }

  int dim() const noexcept { return dim_; }
  const Coeffs &coeffs() const noexcept { return coeffs_; }

  Scalar operator[](BladeIndex b) const { return coeffs_[b.mask()]; }
  Scalar &operator[](BladeIndex b) { return coeffs_[b.mask()]; }

  bool is_zero() const { return (coeffs_.array() == Scalar(0)).all(); }

  // Grade shared by every nonzero coefficient; kAnyGrade for zero.
  // Throws DomainError on mixed grades.
  int grade() const {
    int g = kAnyGrade;
    for (Eigen::Index m = 0; m < coeffs_.size(); ++m) {
      if (coeffs_[m] == Scalar(0))
        continue;
      const int gm = std::popcount(static_cast<std::uint32_t>(m));
      if (g == kAnyGrade)
        g = gm;
      else if (g != gm)
        throw DomainError("multivector is not homogeneous (grades " +
                          std::to_string(g) + " and " + std::to_string(gm) +
                          ")");
    }
    return g;
  }

  bool is_homogeneous() const {
    try {
      (void)grade();
      return true;
    } catch (const DomainError &) {
      return false;
    }
  }

  // Coordinates of a grade-1 (or zero) multivector.
  Vector to_vector() const {
    const int g = grade();
    if (g != 1 && g != kAnyGrade)
      throw DomainError("expected a vector, got grade " + std::to_string(g));
    Vector v(dim_);
    for (int i = 0; i < dim_; ++i)
      v(i) = coeffs_[Eigen::Index{1} << i];
    return v;
  }

  Multivector &operator+=(const Multivector &o) {
    same_dim(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  Multivector &operator-=(const Multivector &o) {
    same_dim(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  Multivector &operator*=(Scalar s) {
    coeffs_ *= s;
    return *this;
  }
  Multivector &operator/=(Scalar s) {
    coeffs_ /= s;
    return *this;
  }

  friend Multivector operator+(Multivector a, const Multivector &b) {
    return a += b;
  }
  friend Multivector operator-(Multivector a, const Multivector &b) {
    return a -= b;
  }
  friend Multivector operator-(Multivector a) {
    a.coeffs_ = -a.coeffs_;
    return a;
  }
  friend Multivector operator*(Multivector a, Scalar s) { return a *= s; }
  friend Multivector operator*(Scalar s, Multivector a) { return a *= s; }
  friend Multivector operator/(Multivector a, Scalar s) { return a /= s; }

private:
  void same_dim(const Multivector &o) const {
    if (o.dim_ != dim_)
      throw DomainError("dimension mismatch: " + std::to_string(dim_) +
                        " vs " + std::to_string(o.dim_));
  }

  int dim_;
  Coeffs coeffs_;
};

using Multivectord = Multivector<double>;

template <typename Scalar> Multivector<Scalar> wedge(const Multivector<Scalar> &a,
                                                     const Multivector<Scalar> &b) {
  if (a.dim() != b.dim())
    throw DomainError("wedge: dimension mismatch " + std::to_string(a.dim()) +
                      " vs " + std::to_string(b.dim()));
  const auto &ca = a.coeffs();
  const auto &cb = b.coeffs();
  std::vector<std::uint32_t> nz_b;
  for (Eigen::Index j = 0; j < cb.size(); ++j)
    if (cb[j] != Scalar(0))
      nz_b.push_back(static_cast<std::uint32_t>(j));

  Multivector<Scalar> out(a.dim());
  for (Eigen::Index i = 0; i < ca.size(); ++i) {
    if (ca[i] == Scalar(0))
      continue;
    const auto mi = static_cast<std::uint32_t>(i);
    for (std::uint32_t mj : nz_b) {
      if (mi & mj)
        continue;
      const auto target = BladeIndex::from_mask(mi | mj);
      out[target] += Scalar(reorder_sign(mi, mj)) * ca[i] * cb[mj];
    }
  }
  return out;
}

// Left-to-right wedge of a sequence; the empty wedge is the scalar 1.
template <typename Scalar>
Multivector<Scalar> wedge_all(int dim, std::span<const Multivector<Scalar>> factors) {
  auto out = Multivector<Scalar>::scalar(dim, Scalar(1));
  for (const auto &f : factors)
    out = wedge(out, f);
  return out;
}

template <typename Scalar>
Multivector<Scalar> wedge_all(int dim, const std::vector<Multivector<Scalar>> &factors) {
  return wedge_all(dim, std::span<const Multivector<Scalar>>(factors));
}

template <typename Scalar = double> class Metric {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Metric(Matrix m) : matrix_(std::move(m)) {
    if (matrix_.rows() != matrix_.cols())
      throw DomainError("metric matrix is not square");
    check_dim(static_cast<int>(matrix_.rows()));
    if (!(matrix_.array().isFinite().all()))
      throw DomainError("metric matrix has non-finite entries");
    if (matrix_ != matrix_.transpose())
      throw DomainError("metric matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
    const Scalar lo = eig.eigenvalues().minCoeff();
    const Scalar hi = eig.eigenvalues().maxCoeff();
    if (!(hi > Scalar(0)) || !(lo > Scalar(1e-12) * hi))
      throw DomainError("metric matrix is not positive definite "
                        "(eigenvalues in [" + std::to_string(double(lo)) +
                        ", " + std::to_string(double(hi)) + "])");
  }

  static Metric identity(int dim) {
    check_dim(dim);
    return Metric(Matrix::Identity(dim, dim));
  }

  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Matrix &matrix() const noexcept { return matrix_; }

  Scalar inner(const Vector &u, const Vector &v) const {
    return u.dot(matrix_ * v);
  }

  // <e_I, e_J> on blades of equal grade: det of the I x J block of the matrix.
  Scalar blade_pairing(BladeIndex I, BladeIndex J) const {
    const auto ri = I.indices();
    const auto cj = J.indices();
    const auto p = static_cast<Eigen::Index>(ri.size());
    if (p == 0)
      return Scalar(1);
    if (p == 1)
      return matrix_(ri[0], cj[0]);
    Matrix block(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
      for (Eigen::Index b = 0; b < p; ++b)
        block(a, b) = matrix_(ri[a], cj[b]);
    return block.determinant();
  }

private:
  Matrix matrix_;
};

using Metricd = Metric<double>;

namespace detail {

template <typename Scalar>
void require_metric_dim(const Multivector<Scalar> &a, const Metric<Scalar> &g) {
  if (a.dim() != g.dim())
    throw DomainError("multivector dimension " + std::to_string(a.dim()) +
                      " does not match metric dimension " +
                      std::to_string(g.dim()));
}

} // namespace detail

// Induced inner product on a single exterior power, in blade coordinates.
// Holds the Gram matrix of the canonical blade basis and its Cholesky factor;
// build once per (metric, grade) when many products or stars are needed.
template <typename Scalar = double> class InducedMetric {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  InducedMetric(const Metric<Scalar> &g, int grade)
      : dim_(g.dim()), grade_(grade), blades_(blades_of_grade(g.dim(), grade)) {
    if (grade < 0 || grade > dim_)
      throw DomainError("grade " + std::to_string(grade) + " outside [0, " +
                        std::to_string(dim_) + "]");
    const auto m = static_cast<Eigen::Index>(blades_.size());
    gram_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i; j < m; ++j)
        gram_(i, j) = gram_(j, i) = g.blade_pairing(blades_[i], blades_[j]);
    llt_.compute(gram_);
    if (llt_.info() != Eigen::Success)
      throw NumericalError("induced Gram matrix of grade " +
                           std::to_string(grade) + " is not positive definite");
  }

  int dim() const noexcept { return dim_; }
  int grade() const noexcept { return grade_; }
  const std::vector<BladeIndex> &blades() const noexcept { return blades_; }
  const Matrix &gram() const noexcept { return gram_; }
  const Eigen::LLT<Matrix> &factor() const noexcept { return llt_; }

  Vector coordinates(const Multivector<Scalar> &a) const {
    check(a);
    Vector c(static_cast<Eigen::Index>(blades_.size()));
    for (std::size_t i = 0; i < blades_.size(); ++i)
      c(static_cast<Eigen::Index>(i)) = a[blades_[i]];
    return c;
  }

  Multivector<Scalar> from_coordinates(const Vector &c) const {
    Multivector<Scalar> out(dim_);
    for (std::size_t i = 0; i < blades_.size(); ++i)
      out[blades_[i]] = c(static_cast<Eigen::Index>(i));
    return out;
  }

  Scalar inner(const Multivector<Scalar> &a, const Multivector<Scalar> &b) const {
    return coordinates(a).dot(gram_ * coordinates(b));
  }

private:
  void check(const Multivector<Scalar> &a) const {
    if (a.dim() != dim_)
      throw DomainError("dimension mismatch in induced metric");
    const int g = a.grade();
    if (g != grade_ && g != kAnyGrade)
      throw DomainError("expected grade " + std::to_string(grade_) + ", got " +
                        std::to_string(g));
  }

  int dim_;
  int grade_;
  std::vector<BladeIndex> blades_;
  Matrix gram_;
  Eigen::LLT<Matrix> llt_;
};

// <a, b>_p, extended bilinearly from det[<v_i, w_j>] on decomposables.
template <typename Scalar>
Scalar inner_product(const Multivector<Scalar> &a, const Multivector<Scalar> &b,
                     const Metric<Scalar> &g) {
  detail::require_metric_dim(a, g);
  detail::require_metric_dim(b, g);
  const int ga = a.grade();
  const int gb = b.grade();
  if (ga != kAnyGrade && gb != kAnyGrade && ga != gb)
    throw DomainError("inner product of mixed grades " + std::to_string(ga) +
                      " and " + std::to_string(gb));
  if (ga == kAnyGrade || gb == kAnyGrade)
    return Scalar(0);

  std::vector<std::uint32_t> nz_b;
  for (Eigen::Index j = 0; j < b.coeffs().size(); ++j)
    if (b.coeffs()[j] != Scalar(0))
      nz_b.push_back(static_cast<std::uint32_t>(j));

  Scalar acc(0);
  for (Eigen::Index i = 0; i < a.coeffs().size(); ++i) {
    const Scalar ai = a.coeffs()[i];
    if (ai == Scalar(0))
      continue;
    const auto I = BladeIndex::from_mask(static_cast<std::uint32_t>(i));
    for (std::uint32_t mj : nz_b)
      acc += ai * b.coeffs()[mj] * g.blade_pairing(I, BladeIndex::from_mask(mj));
  }
  return acc;
}

template <typename Scalar>
Scalar norm(const Multivector<Scalar> &a, const Metric<Scalar> &g) {
  using std::sqrt;
  const Scalar sq = inner_product(a, a, g);
  return sqrt(sq > Scalar(0) ? sq : Scalar(0));
}

// Gram matrix [<v_i, v_j>] of an ordered set of vectors.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
gram_matrix(std::span<const Multivector<Scalar>> vectors, const Metric<Scalar> &g) {
  const auto m = static_cast<Eigen::Index>(vectors.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> coords(g.dim(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    detail::require_metric_dim(vectors[i], g);
    coords.col(i) = vectors[i].to_vector();
  }
  return coords.transpose() * g.matrix() * coords;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
gram_matrix(const std::vector<Multivector<Scalar>> &vectors, const Metric<Scalar> &g) {
  return gram_matrix(std::span<const Multivector<Scalar>>(vectors), g);
}

// Unit-norm, positively oriented top-grade element c * e_0 ^ ... ^ e_{n-1}.
template <typename Scalar>
Multivector<Scalar> volume_form(const Metric<Scalar> &g) {
  using std::sqrt;
  const int n = g.dim();
  const Scalar c = Scalar(1) / sqrt(g.matrix().determinant());
  return Multivector<Scalar>::blade(n, BladeIndex::from_mask((1u << n) - 1u), c);
}

// Hodge star on one grade. Solves the Gram system of Lambda^{n-p} for the
// unique *a with <*a, e_J> mu = a ^ e_J for every blade e_J of grade n-p.
template <typename Scalar = double> class HodgeStar {
public:
  HodgeStar(const Metric<Scalar> &g, int grade)
      : grade_(grade), target_(g, g.dim() - grade) {
    using std::sqrt;
    volume_coeff_ = Scalar(1) / sqrt(g.matrix().determinant());
  }

  int grade() const noexcept { return grade_; }
  const InducedMetric<Scalar> &target_metric() const noexcept { return target_; }

  Multivector<Scalar> operator()(const Multivector<Scalar> &a) const {
    const int n = target_.dim();
    if (a.dim() != n)
      throw DomainError("hodge star: dimension mismatch");
    const int ga = a.grade();
    if (ga == kAnyGrade)
      return Multivector<Scalar>(n);
    if (ga != grade_)
      throw DomainError("hodge star built for grade " + std::to_string(grade_) +
                        ", got " + std::to_string(ga));
    const std::uint32_t full = (1u << n) - 1u;
    const auto &blades = target_.blades();
    typename InducedMetric<Scalar>::Vector rhs(static_cast<Eigen::Index>(blades.size()));
    for (std::size_t j = 0; j < blades.size(); ++j) {
      const std::uint32_t mj = blades[j].mask();
      const std::uint32_t comp = full ^ mj;
      rhs(static_cast<Eigen::Index>(j)) =
          Scalar(reorder_sign(comp, mj)) * a[BladeIndex::from_mask(comp)] /
          volume_coeff_;
    }
    return target_.from_coordinates(target_.factor().solve(rhs));
  }

private:
  int grade_;
  InducedMetric<Scalar> target_;
  Scalar volume_coeff_;
};

template <typename Scalar>
Multivector<Scalar> hodge_star(const Multivector<Scalar> &a, const Metric<Scalar> &g) {
  detail::require_metric_dim(a, g);
  const int ga = a.grade();
  if (ga == kAnyGrade)
    return Multivector<Scalar>(a.dim());
  return HodgeStar<Scalar>(g, ga)(a);
}

} // namespace hodgeflow
