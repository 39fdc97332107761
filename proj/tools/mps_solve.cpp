// Reference MILP solver speaking the gridfold solver-command convention:
//   gridfold-mps-solve <model.mps> <solution.out> [gap] [timelimit-s]
// Exit codes: 0 solved, 2 infeasible, 3 time limit, 4 error.
// The gap argument is accepted for template compatibility; solves are exact.

#include "gridfold/solver.hpp"

#include <cstdio>
#include <string>

using namespace gridfold;

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <model.mps> <solution.out> [gap] [timelimit-s]\n", argv[0]);
        return 4;
    }
    try {
        MilpInstance m = read_mps(argv[1]);
        BruteforceLimits limits;
        if (argc > 4) limits.time_limit_s = std::stod(argv[4]);
        Solution sol = solve_bruteforce(m, limits);
        switch (sol.status) {
        case SolveStatus::optimal:
            write_solution_file(sol, argv[2]);
            return 0;
        case SolveStatus::infeasible:
            return 2;
        case SolveStatus::time_limit:
            if (!sol.values.empty()) write_solution_file(sol, argv[2]);
            return 3;
        default:
            std::fprintf(stderr, "error: %s\n", sol.message.c_str());
            return 4;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
