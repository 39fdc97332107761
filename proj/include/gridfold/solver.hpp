#pragma once

#include "gridfold/milp.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridfold {

enum class SolveStatus { optimal, feasible_gap, time_limit, infeasible, error };

const char* to_string(SolveStatus s);

struct Solution {
    SolveStatus status = SolveStatus::error;
    double objective = 0.0;
    std::optional<double> best_bound;
    std::optional<double> mip_gap; // (objective - bound) / max(|objective|, eps)
    std::unordered_map<std::string, double> values;
    double wall_time_s = 0.0;
    std::string message;
    std::vector<std::string> warnings;

    double value(const std::string& var_name) const; // 0 when absent
    bool usable() const { return status == SolveStatus::optimal || status == SolveStatus::feasible_gap; }
};

double compute_mip_gap(double objective, double best_bound);

/// Free-format MPS with ROWS/COLUMNS/RHS/RANGES/BOUNDS sections and
/// INTORG/INTEND markers. Deterministic: identical instances produce
/// byte-identical files. Throws on NaN/inf coefficients and names that are
/// empty, contain whitespace, or exceed 255 characters.
void write_mps(const MilpInstance& m, const std::filesystem::path& path);
std::string mps_text(const MilpInstance& m);

/// Reads free-format MPS (the dialect write_mps emits plus common variants).
MilpInstance read_mps(const std::filesystem::path& path);

/// Solution file: optional `=obj= <value>` line, then `<name> <value>` lines;
/// `#` comments ignored. Unknown names and malformed warnings are collected;
/// variables absent from the file default to 0.
Solution parse_solution(const std::filesystem::path& path, const MilpInstance& m);
void write_solution_file(const Solution& sol, const std::filesystem::path& path);

struct BruteforceLimits {
    long long max_lattice = 4096;
    double time_limit_s = 0.0; // 0 = none
};

/// Exact oracle: enumerates every integer/binary assignment and solves the
/// continuous restriction with the dense simplex. Deterministic. Lattice
/// overflow and unbounded relaxations surface as status error.
Solution solve_bruteforce(const MilpInstance& m, const BruteforceLimits& limits = {});

/// Writes MPS to a fresh directory, runs the command template (placeholders
/// {mps} {sol} {gap} {timelimit}), and parses the solution file. Exit code
/// conventions: 0 solved within gap, 2 infeasible, 3 time limit (incumbent
/// parsed when the file exists), anything else is an error. Temp files are
/// kept on failure.
Solution solve_external(const MilpInstance& m, const std::string& solver_cmd, double gap,
                        double time_limit_s);

} // namespace gridfold
