#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hodgeflow/dynamics.hpp"

namespace hodgeflow::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitAuditFail = 1,
  kExitInputError = 2,
  kExitRankError = 3,
  kExitDiverged = 4,
};

// Shortest round-trip decimal (at most 17 significant digits).
std::string format_number(double v);

// Header: t, x_1..x_n, I_1..I_k, D_1..D_p, h_1..h_p.
std::vector<std::string> trajectory_header(int dim, int k, int p);
void write_trajectory_csv(std::ostream &out, const Trajectory &traj);

// Writes to a sibling temp file and renames it over path.
void write_file_atomically(const std::filesystem::path &path, const std::string &contents);

struct SolveOptions {
  std::filesystem::path input;
  std::optional<std::filesystem::path> output;
  double tol = 1e-9;
};

struct GeneratorsOptions {
  std::string scenario;
  std::filesystem::path points;
  std::optional<std::filesystem::path> output;
};

struct IntegrateOptions {
  std::string scenario;
  std::filesystem::path output;
};

struct CheckOptions {
  std::filesystem::path input;
  std::string scenario;
  std::optional<double> tol; // defaults to the scenario's declared tolerance
};

int cmd_solve(const SolveOptions &opts, std::ostream &out, std::ostream &err);
int cmd_generators(const GeneratorsOptions &opts, std::ostream &out, std::ostream &err);
int cmd_integrate(const IntegrateOptions &opts, std::ostream &out, std::ostream &err);
int cmd_check(const CheckOptions &opts, std::ostream &out, std::ostream &err);

} // namespace hodgeflow::cli
