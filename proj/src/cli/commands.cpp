#include "hodgeflow/cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "hodgeflow/cli/config.hpp"

namespace hodgeflow::cli {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v + 0.0); // -0 prints as 0
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_header(int dim, int k, int p) {
  std::vector<std::string> cols{"t"};
  for (int i = 1; i <= dim; ++i)
    cols.push_back("x_" + std::to_string(i));
  for (int i = 1; i <= k; ++i)
    cols.push_back("I_" + std::to_string(i));
  for (int j = 1; j <= p; ++j)
    cols.push_back("D_" + std::to_string(j));
  for (int j = 1; j <= p; ++j)
    cols.push_back("h_" + std::to_string(j));
  return cols;
}

void write_trajectory_csv(std::ostream &out, const Trajectory &traj) {
  const int dim = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  const int k = static_cast<int>(traj.conserved_samples.cols());
  const int p = static_cast<int>(traj.dissipated_samples.cols());
  const auto header = trajectory_header(dim, k, p);
  for (std::size_t c = 0; c < header.size(); ++c)
    out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < traj.states.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out << format_number(traj.times[r]);
    for (int i = 0; i < dim; ++i)
      out << ',' << format_number(traj.states[r](i));
    for (int i = 0; i < k; ++i)
      out << ',' << format_number(traj.conserved_samples(row, i));
    for (int j = 0; j < p; ++j)
      out << ',' << format_number(traj.dissipated_samples(row, j));
    for (int j = 0; j < p; ++j)
      out << ',' << format_number(traj.rate_samples(row, j));
    out << '\n';
  }
}

void write_file_atomically(const std::filesystem::path &path, const std::string &contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f)
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << contents;
    f.flush();
    if (!f)
      throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void emit(const std::optional<std::filesystem::path> &path, std::ostream &out,
          const std::string &text) {
  if (path)
    write_file_atomically(*path, text);
  else
    out << text;
}

json vector_json(const Point &v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    arr.push_back(v(i) + 0.0);
  return arr;
}

std::vector<VectorField> gradients_of(const std::vector<ScalarField> &fs, const MetricField &g) {
  std::vector<VectorField> out;
  for (const auto &f : fs)
    out.push_back(gradient_field(f, g));
  return out;
}

// Runs a command body, mapping library errors onto the exit-code contract.
template <typename Fn> int guarded(std::ostream &err, Fn &&body) {
  try {
    return body();
  } catch (const ConfigError &e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const RankDeficiencyError &e) {
    err << "degenerate input: " << e.what() << '\n';
    return kExitRankError;
  } catch (const RegionTooLargeError &e) {
    err << "degenerate input: " << e.what() << '\n';
    return kExitRankError;
  } catch (const DomainError &e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const PreconditionError &e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  }
}

} // namespace

int cmd_solve(const SolveOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto sys = parse_system(load_document(opts.input));
    const auto sol = solve_intersection(sys);
    const auto report = verify_solution(sys, sol, opts.tol);

    json doc;
    doc["dim"] = sys.dim;
    doc["k"] = sys.k();
    doc["p"] = sys.p();
    doc["particular"] = sol.particular ? vector_json(sol.particular->to_vector()) : json(nullptr);
    doc["basis"] = json::array();
    for (const auto &b : sol.basis)
      doc["basis"].push_back(vector_json(b.to_vector()));
    if (sol.basis.empty())
      doc["note"] = sys.p() > 0 ? "unique solution" : "only the zero solution";
    doc["residuals"] = {
        {"max_homogeneous", report.max_homogeneous_residual},
        {"max_affine", report.max_affine_residual},
        {"max_basis_annihilation", report.max_basis_annihilation},
        {"basis_singular_ratio", report.basis_singular_ratio},
        {"max_particular_basis_inner", report.max_particular_basis_inner},
        {"tolerance", report.tolerance},
        {"passed", report.passed},
    };
    emit(opts.output, out, doc.dump(2) + "\n");
    if (!report.passed)
      err << "residual check failed at tolerance " << format_number(opts.tol) << '\n';
    return report.passed ? kExitOk : kExitAuditFail;
  });
}

int cmd_generators(const GeneratorsOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto cfg = resolve_scenario(opts.scenario);
    const auto &s = cfg.scenario;
    const int n = s.dim;
    const int k = s.k();
    const int p = s.p();
    const int m = k + p;
    const auto points = parse_points(load_document(opts.points), n);
    if (points.empty())
      throw ConfigError("points", "no sample points");

    auto xs = gradients_of(s.conserved, s.metric);
    auto ys = gradients_of(s.dissipated, s.metric);

    std::vector<bool> flagged(points.size(), false);
    std::vector<Point> good;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::vector<Multivectord> values;
      for (const auto &f : ys)
        values.push_back(Multivectord::vector(f(points[i])));
      for (const auto &f : xs)
        values.push_back(Multivectord::vector(f(points[i])));
      const auto rc = check_rank<double>(values, n);
      if (!rc.independent) {
        flagged[i] = true;
        err << "points[" << i << "]: gradients dependent (smallest singular value "
            << format_number(rc.smallest) << ")\n";
      } else {
        good.push_back(points[i]);
      }
    }

    std::vector<Point> completion;
    if (!good.empty() && m < n - 1)
      for (const auto &z : frame_completion_field(xs, ys, good))
        completion.push_back(z(Point::Zero(n)));
    std::optional<AffineDistribution> dist;
    if (!good.empty())
      dist.emplace(xs, ys, s.rates, s.metric, completion);

    std::ostringstream table;
    std::vector<std::string> header;
    for (int i = 1; i <= n; ++i)
      header.push_back("x_" + std::to_string(i));
    if (p > 0)
      for (int i = 1; i <= n; ++i)
        header.push_back("X0_" + std::to_string(i));
    for (int a = 1; a <= n - m; ++a)
      for (int i = 1; i <= n; ++i)
        header.push_back("g" + std::to_string(a) + "_" + std::to_string(i));
    if (p > 0) {
      for (int i = 1; i <= k; ++i)
        header.push_back("res_I_" + std::to_string(i));
      for (int j = 1; j <= p; ++j)
        header.push_back("res_D_" + std::to_string(j));
    }
    header.push_back("flagged");
    for (std::size_t c = 0; c < header.size(); ++c)
      table << (c ? "," : "") << header[c];
    table << '\n';

    const std::size_t value_cols = header.size() - n - 1;
    for (std::size_t r = 0; r < points.size(); ++r) {
      const Point &x = points[r];
      for (int i = 0; i < n; ++i)
        table << (i ? "," : "") << format_number(x(i));
      if (flagged[r]) {
        for (std::size_t c = 0; c < value_cols; ++c)
          table << ',';
        table << ",1\n";
        continue;
      }
      const Metricd g = s.metric.at(x);
      if (p > 0) {
        const Point x0 = dist->particular(x);
        for (int i = 0; i < n; ++i)
          table << ',' << format_number(x0(i));
        for (const auto &gen : dist->generators(x))
          for (int i = 0; i < n; ++i)
            table << ',' << format_number(gen(i));
        for (const auto &f : xs)
          table << ',' << format_number(std::abs(g.inner(x0, f(x))));
        for (int j = 0; j < p; ++j)
          table << ',' << format_number(std::abs(g.inner(x0, ys[j](x)) - s.rates[j](x)));
      } else {
        for (const auto &gen : dist->generators(x))
          for (int i = 0; i < n; ++i)
            table << ',' << format_number(gen(i));
      }
      table << ",0\n";
    }
    emit(opts.output, out, table.str());

    const bool any_flagged = good.size() != points.size();
    return any_flagged ? kExitRankError : kExitOk;
  });
}

int cmd_integrate(const IntegrateOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto cfg = resolve_scenario(opts.scenario);
    const auto &s = cfg.scenario;
    const auto field = synthesize(s);
    Trajectory traj;
    int code = kExitOk;
    try {
      traj = integrate(field, s.x0, s.dt, s.steps);
    } catch (const IntegrationDiverged &e) {
      traj = e.partial();
      err << "integration diverged at step " << e.step() << "; wrote "
          << traj.states.size() << " rows\n";
      code = kExitDiverged;
    }
    record_samples(traj, s);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file_atomically(opts.output, csv.str());
    if (code == kExitOk)
      out << "wrote " << traj.states.size() << " rows to " << opts.output.string() << '\n';
    return code;
  });
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

double parse_cell(const std::string &cell, std::size_t row, std::size_t col) {
  double v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
    throw ConfigError("row " + std::to_string(row) + ", column " + std::to_string(col + 1),
                      "not a number: '" + cell + "'");
  return v;
}

} // namespace

int cmd_check(const CheckOptions &opts, std::ostream &out, std::ostream &err) {
  return guarded(err, [&] {
    const auto cfg = resolve_scenario(opts.scenario);
    const auto &s = cfg.scenario;
    const double tol = opts.tol.value_or(cfg.tolerance);

    std::ifstream in(opts.input);
    if (!in)
      throw ConfigError(opts.input.string(), "cannot open file");
    std::string line;
    if (!std::getline(in, line))
      throw ConfigError("row 0", "missing header");
    const auto expected = trajectory_header(s.dim, s.k(), s.p());
    const auto header = split_csv_line(line);
    if (header.size() != expected.size())
      throw ConfigError("row 0", "expected " + std::to_string(expected.size()) +
                                     " columns for scenario '" + cfg.name + "', found " +
                                     std::to_string(header.size()));
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] != expected[c])
        throw ConfigError("row 0, column " + std::to_string(c + 1),
                          "expected '" + expected[c] + "', found '" + header[c] + "'");

    Trajectory traj;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty())
        continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != expected.size())
        throw ConfigError("row " + std::to_string(row),
                          "expected " + std::to_string(expected.size()) + " cells, found " +
                              std::to_string(cells.size()));
      traj.times.push_back(parse_cell(cells[0], row, 0));
      Point x(s.dim);
      for (int i = 0; i < s.dim; ++i)
        x(i) = parse_cell(cells[1 + i], row, 1 + i);
      traj.states.push_back(std::move(x));
    }
    if (traj.states.empty())
      throw ConfigError("row 1", "trajectory has no rows");
    if (traj.times.size() > 1) {
      const double dt = traj.times[1] - traj.times[0];
      for (std::size_t r = 0; r < traj.times.size(); ++r) {
        const double expect = traj.times[0] + dt * static_cast<double>(r);
        if (!(std::abs(traj.times[r] - expect) <= 1e-9 * std::max(1.0, std::abs(expect))))
          throw ConfigError("row " + std::to_string(r + 1), "time column is not uniformly spaced");
      }
    }

    const auto report = audit(traj, s);
    for (std::size_t i = 0; i < report.conservation_drift.size(); ++i)
      out << "conserved I_" << i + 1 << ": max drift "
          << format_number(report.conservation_drift[i]) << '\n';
    for (std::size_t j = 0; j < report.dissipation_residual.size(); ++j)
      out << "dissipated D_" << j + 1 << ": max budget residual "
          << format_number(report.dissipation_residual[j]) << '\n';
    out << "tolerance: " << format_number(tol) << '\n';
    const bool pass = report.passes(tol);
    out << "result: " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitAuditFail;
  });
}

} // namespace hodgeflow::cli
