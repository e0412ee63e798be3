#include "hodgeflow/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hodgeflow::cli {

using nlohmann::json;

namespace {

std::string child(const std::string &parent, const std::string &key) {
  return parent.empty() ? key : parent + "." + key;
}

std::string element(const std::string &parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

const json &require(const json &obj, const std::string &key, const std::string &path) {
  if (!obj.is_object())
    throw ConfigError(path.empty() ? "<document>" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(child(path, key), "missing required field");
  return *it;
}

double as_number(const json &j, const std::string &field) {
  if (!j.is_number())
    throw ConfigError(field, "expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

int as_int(const json &j, const std::string &field) {
  if (!j.is_number_integer())
    throw ConfigError(field, "expected an integer, got " + std::string(j.type_name()));
  return j.get<int>();
}

const json &as_array(const json &j, const std::string &field) {
  if (!j.is_array())
    throw ConfigError(field, "expected a list, got " + std::string(j.type_name()));
  return j;
}

Point as_point(const json &j, int dim, const std::string &field) {
  as_array(j, field);
  if (static_cast<int>(j.size()) != dim)
    throw ConfigError(field, "expected " + std::to_string(dim) + " coordinates, got " +
                                 std::to_string(j.size()));
  Point x(dim);
  for (int i = 0; i < dim; ++i)
    x(i) = as_number(j[i], element(field, i));
  return x;
}

std::vector<ScalarField> polynomial_list(const json &doc, const std::string &key, int dim) {
  std::vector<ScalarField> out;
  auto it = doc.find(key);
  if (it == doc.end())
    return out;
  as_array(*it, key);
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(parse_polynomial((*it)[i], dim, element(key, i)));
  return out;
}

std::vector<Multivectord> vector_list(const json &doc, const std::string &key, int dim) {
  std::vector<Multivectord> out;
  auto it = doc.find(key);
  if (it == doc.end())
    return out;
  as_array(*it, key);
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(Multivectord::vector(as_point((*it)[i], dim, element(key, i))));
  return out;
}

} // namespace

json parse_document(const std::string &text, const std::string &source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    // Translate the byte offset into a line number.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw ConfigError(source + ":" + std::to_string(line), e.what());
  }
}

json load_document(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), path.string());
}

// A polynomial is a list of terms {"coeff": c, "exponents": [e_1, ..., e_n]}.
// The bare number c is accepted as the constant polynomial.
ScalarField parse_polynomial(const json &j, int dim, const std::string &field) {
  if (j.is_number())
    return ScalarField::constant(dim, j.get<double>());
  const json &terms = j.is_object() ? require(j, "terms", field) : j;
  const std::string terms_field = j.is_object() ? child(field, "terms") : field;
  as_array(terms, terms_field);
  std::vector<Monomial> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tf = element(terms_field, t);
    Monomial m;
    m.coeff = as_number(require(terms[t], "coeff", tf), child(tf, "coeff"));
    const json &ex = as_array(require(terms[t], "exponents", tf), child(tf, "exponents"));
    if (static_cast<int>(ex.size()) != dim)
      throw ConfigError(child(tf, "exponents"), "expected " + std::to_string(dim) +
                                                    " exponents, got " +
                                                    std::to_string(ex.size()));
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const int e = as_int(ex[i], element(child(tf, "exponents"), i));
      if (e < 0)
        throw ConfigError(element(child(tf, "exponents"), i), "negative exponent");
      m.exponents.push_back(e);
    }
    out.push_back(std::move(m));
  }
  return ScalarField(dim, std::move(out));
}

// "identity" | {"diagonal": [...]} | {"matrix": [[...], ...]}
MetricField parse_metric(const json &j, int dim, const std::string &field) {
  try {
    if (j.is_string()) {
      if (j.get<std::string>() != "identity")
        throw ConfigError(field, "unknown metric '" + j.get<std::string>() + "'");
      return MetricField::identity(dim);
    }
    if (!j.is_object())
      throw ConfigError(field, "expected \"identity\" or an object");
    if (auto it = j.find("diagonal"); it != j.end()) {
      const Point d = as_point(*it, dim, child(field, "diagonal"));
      return MetricField(Metricd(d.asDiagonal().toDenseMatrix()));
    }
    if (auto it = j.find("matrix"); it != j.end()) {
      const std::string mf = child(field, "matrix");
      as_array(*it, mf);
      if (static_cast<int>(it->size()) != dim)
        throw ConfigError(mf, "expected " + std::to_string(dim) + " rows");
      Eigen::MatrixXd m(dim, dim);
      for (int r = 0; r < dim; ++r)
        m.row(r) = as_point((*it)[r], dim, element(mf, r)).transpose();
      return MetricField(Metricd(m));
    }
    throw ConfigError(field, "expected key \"diagonal\" or \"matrix\"");
  } catch (const DomainError &e) {
    throw ConfigError(field, e.what());
  }
}

ScenarioConfig parse_scenario(const json &doc) {
  if (!doc.is_object())
    throw ConfigError("<document>", "expected an object");
  ScenarioConfig cfg;
  const int dim = as_int(require(doc, "dim", ""), "dim");
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("dim", "must lie in [1, " + std::to_string(kMaxDim) + "]");

  if (auto it = doc.find("name"); it != doc.end() && it->is_string())
    cfg.name = it->get<std::string>();
  if (auto it = doc.find("tolerance"); it != doc.end()) {
    cfg.tolerance = as_number(*it, "tolerance");
    if (!(cfg.tolerance > 0))
      throw ConfigError("tolerance", "must be positive");
  }

  Scenario &s = cfg.scenario;
  s.dim = dim;
  s.metric = doc.contains("metric") ? parse_metric(doc["metric"], dim, "metric")
                                    : MetricField::identity(dim);
  s.conserved = polynomial_list(doc, "conserved", dim);
  s.dissipated = polynomial_list(doc, "dissipated", dim);
  s.rates = polynomial_list(doc, "rates", dim);
  s.direction_coeffs = polynomial_list(doc, "direction_coeffs", dim);
  s.x0 = as_point(require(doc, "x0", ""), dim, "x0");
  s.dt = as_number(require(doc, "dt", ""), "dt");
  s.steps = as_int(require(doc, "steps", ""), "steps");
  if (auto it = doc.find("region_sample"); it != doc.end()) {
    as_array(*it, "region_sample");
    for (std::size_t i = 0; i < it->size(); ++i)
      s.region_sample.push_back(as_point((*it)[i], dim, element("region_sample", i)));
  }
  if (auto it = doc.find("base_field"); it != doc.end()) {
    if (!it->is_string())
      throw ConfigError("base_field", "expected a built-in field name");
    cfg.base_field_name = it->get<std::string>();
    s.base_field = builtin_base_field(*cfg.base_field_name, dim);
    if (!s.base_field)
      throw ConfigError("base_field", "unknown built-in field '" + *cfg.base_field_name +
                                          "' for dimension " + std::to_string(dim));
  }

  if (s.rates.size() != s.dissipated.size())
    throw ConfigError("rates", "expected " + std::to_string(s.dissipated.size()) +
                                   " rates (one per dissipated field), got " +
                                   std::to_string(s.rates.size()));
  const int m = s.k() + s.p();
  if (m < 1 || m > dim)
    throw ConfigError("conserved", "need 1 <= (#conserved + #dissipated) <= dim, got " +
                                       std::to_string(m));
  if (!s.direction_coeffs.empty() && static_cast<int>(s.direction_coeffs.size()) != dim - m)
    throw ConfigError("direction_coeffs", "expected " + std::to_string(dim - m) +
                                              " coefficients, got " +
                                              std::to_string(s.direction_coeffs.size()));
  if (!(s.dt > 0))
    throw ConfigError("dt", "must be positive");
  if (s.steps < 1)
    throw ConfigError("steps", "must be at least 1");
  return cfg;
}

// {"dim": n, "metric": ..., "v": [[...]], "w": [[...]], "lambda": [...]}
HyperplaneSystemd parse_system(const json &doc) {
  if (!doc.is_object())
    throw ConfigError("<document>", "expected an object");
  const int dim = as_int(require(doc, "dim", ""), "dim");
  if (dim < 1 || dim > kMaxDim)
    throw ConfigError("dim", "must lie in [1, " + std::to_string(kMaxDim) + "]");
  const MetricField g =
      doc.contains("metric") ? parse_metric(doc["metric"], dim, "metric") : MetricField::identity(dim);
  HyperplaneSystemd sys{dim, vector_list(doc, "v", dim), vector_list(doc, "w", dim), {},
                        g.at(Point::Zero(dim))};
  if (auto it = doc.find("lambda"); it != doc.end()) {
    as_array(*it, "lambda");
    for (std::size_t i = 0; i < it->size(); ++i)
      sys.offsets.push_back(as_number((*it)[i], element("lambda", i)));
  }
  if (sys.offsets.size() != sys.affine_normals.size())
    throw ConfigError("lambda", "expected " + std::to_string(sys.affine_normals.size()) +
                                    " offsets (one per w), got " +
                                    std::to_string(sys.offsets.size()));
  if (sys.k() + sys.p() > dim)
    throw ConfigError("w", "k + p = " + std::to_string(sys.k() + sys.p()) +
                               " exceeds dim " + std::to_string(dim));
  return sys;
}

// Either a bare list of points or {"points": [...]}.
std::vector<Point> parse_points(const json &doc, int dim) {
  const bool wrapped = doc.is_object();
  const json &list = wrapped ? require(doc, "points", "") : doc;
  const std::string field = wrapped ? "points" : "";
  as_array(list, field.empty() ? "<document>" : field);
  std::vector<Point> out;
  for (std::size_t i = 0; i < list.size(); ++i)
    out.push_back(as_point(list[i], dim, element(field.empty() ? "points" : field, i)));
  return out;
}

ScenarioConfig resolve_scenario(const std::string &name_or_path) {
  if (auto text = builtin_scenario_text(name_or_path)) {
    auto cfg = parse_scenario(parse_document(*text, name_or_path));
    if (cfg.name.empty())
      cfg.name = name_or_path;
    return cfg;
  }
  return parse_scenario(load_document(name_or_path));
}

} // namespace hodgeflow::cli
