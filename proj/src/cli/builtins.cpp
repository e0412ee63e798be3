#include "hodgeflow/cli/config.hpp"

#include <map>

namespace hodgeflow::cli {

namespace {

// Rigid-body moments (1, 2, 3): I1 = |x|^2 / 2, I2 = sum x_i^2 / (2 a_i).
constexpr const char *kEulerTop = R"({
  "name": "euler-top",
  "dim": 3,
  "metric": "identity",
  "conserved": [
    [{"coeff": 0.5, "exponents": [2, 0, 0]},
     {"coeff": 0.5, "exponents": [0, 2, 0]},
     {"coeff": 0.5, "exponents": [0, 0, 2]}],
    [{"coeff": 0.5, "exponents": [2, 0, 0]},
     {"coeff": 0.25, "exponents": [0, 2, 0]},
     {"coeff": 0.16666666666666666, "exponents": [0, 0, 2]}]
  ],
  "direction_coeffs": [1.0],
  "x0": [1.0, 1.0, 1.0],
  "dt": 0.001,
  "steps": 10000,
  "tolerance": 1e-8
})";

// D = |x|^2 / 2 dissipated at rate h = -|x|^2, so D(t) = D(0) exp(-2t).
constexpr const char *kDampedRadial = R"({
  "name": "damped-radial",
  "dim": 2,
  "metric": "identity",
  "dissipated": [
    [{"coeff": 0.5, "exponents": [2, 0]}, {"coeff": 0.5, "exponents": [0, 2]}]
  ],
  "rates": [
    [{"coeff": -1.0, "exponents": [2, 0]}, {"coeff": -1.0, "exponents": [0, 2]}]
  ],
  "x0": [1.0, 0.0],
  "dt": 0.001,
  "steps": 1000,
  "tolerance": 1e-6
})";

// n = 4 with three first integrals I_l = (x_l^2 + x_{l+1}^2) / 2.
constexpr const char *kIntegrableChain = R"({
  "name": "integrable-chain",
  "dim": 4,
  "metric": "identity",
  "conserved": [
    [{"coeff": 0.5, "exponents": [2, 0, 0, 0]}, {"coeff": 0.5, "exponents": [0, 2, 0, 0]}],
    [{"coeff": 0.5, "exponents": [0, 2, 0, 0]}, {"coeff": 0.5, "exponents": [0, 0, 2, 0]}],
    [{"coeff": 0.5, "exponents": [0, 0, 2, 0]}, {"coeff": 0.5, "exponents": [0, 0, 0, 2]}]
  ],
  "direction_coeffs": [1.0],
  "x0": [1.0, 0.8, 0.6, 0.4],
  "dt": 0.001,
  "steps": 5000,
  "tolerance": 1e-6
})";

const std::map<std::string, const char *> &registry() {
  static const std::map<std::string, const char *> r{
      {"euler-top", kEulerTop},
      {"damped-radial", kDampedRadial},
      {"integrable-chain", kIntegrableChain},
  };
  return r;
}

} // namespace

std::optional<std::string> builtin_scenario_text(const std::string &name) {
  const auto &r = registry();
  if (auto it = r.find(name); it != r.end())
    return std::string(it->second);
  return std::nullopt;
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> out;
  for (const auto &[name, text] : registry())
    out.push_back(name);
  return out;
}

std::optional<VectorField> builtin_base_field(const std::string &name, int dim) {
  if (name == "euler-top" && dim == 3) {
    // grad I1 x grad I2 for moments (1, 2, 3).
    return VectorField(3, [](const Point &x) {
      constexpr double a1 = 1.0, a2 = 2.0, a3 = 3.0;
      Point v(3);
      v << x(1) * x(2) * (1.0 / a3 - 1.0 / a2), x(2) * x(0) * (1.0 / a1 - 1.0 / a3),
          x(0) * x(1) * (1.0 / a2 - 1.0 / a1);
      return v;
    });
  }
  if (name == "zero")
    return VectorField::zero(dim);
  return std::nullopt;
}

} // namespace hodgeflow::cli
