#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hodgeflow {

// Dimension mismatch, wrong grade, index out of range.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A documented precondition of an operation was not met by the caller.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A numerical post-check failed where the math says it cannot.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline std::string format_point(const std::vector<double> &x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i)
      os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

// A set of vectors that must be linearly independent is not (relative to the
// rank tolerance). Carries the offending singular values and, for pointwise
// problems, the point at which the rank dropped.
class RankDeficiencyError : public std::runtime_error {
public:
  RankDeficiencyError(double smallest, double largest,
                      std::optional<std::vector<double>> point = std::nullopt)
      : std::runtime_error(describe(smallest, largest, point)),
        smallest_(smallest), largest_(largest), point_(std::move(point)) {}

  double smallest_singular_value() const noexcept { return smallest_; }
  double largest_singular_value() const noexcept { return largest_; }
  const std::optional<std::vector<double>> &point() const noexcept {
    return point_;
  }

  RankDeficiencyError at(std::vector<double> x) const {
    return RankDeficiencyError(smallest_, largest_, std::move(x));
  }

private:
  static std::string describe(double s, double l,
                              const std::optional<std::vector<double>> &x) {
    std::ostringstream os;
    os.precision(6);
    os << "rank deficiency: smallest singular value " << s
       << " (largest " << l << ")";
    if (x)
      os << " at point " << format_point(*x);
    return os.str();
  }

  double smallest_;
  double largest_;
  std::optional<std::vector<double>> point_;
};

// No single greedy completion works on every point of the sample region.
class RegionTooLargeError : public std::runtime_error {
public:
  RegionTooLargeError(std::vector<double> failing_point, std::size_t found,
                      std::size_t needed)
      : std::runtime_error(
            "no uniform frame completion on the sample region: found " +
            std::to_string(found) + " of " + std::to_string(needed) +
            " completing fields; first failing point " +
            format_point(failing_point)),
        point_(std::move(failing_point)) {}

  const std::vector<double> &failing_point() const noexcept { return point_; }

private:
  std::vector<double> point_;
};

} // namespace hodgeflow
