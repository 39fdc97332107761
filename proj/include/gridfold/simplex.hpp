#pragma once

#include "gridfold/milp.hpp"

#include <vector>

namespace gridfold {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x; // per structural variable, declaration order
    int iterations = 0;
};

struct LpOptions {
    double tol = 1e-9;
    int max_iterations = 0; // 0 = derived from problem size
};

/// Dense two-phase bounded-variable primal simplex with Bland's rule.
/// Integrality markers are ignored; every variable is continuous within its
/// bounds. This is the verification oracle, not a production solver.
LpResult solve_lp(const MilpInstance& m, const LpOptions& opts = {});

/// Bound-tightening presolve used before the dense simplex: variables fixed
/// by equal bounds are substituted out and rows left with at most one free
/// column become bounds. `extra_fixed` (by variable index, NaN = untouched)
/// lets the brute-force search pin integer columns first.
struct PresolvedLp {
    bool infeasible = false;
    std::string reason;
    MilpInstance lp;                // the surviving continuous problem
    std::vector<int> orig_of;       // lp column -> original column
    std::vector<double> value;      // per original column; NaN where lp decides
    double fixed_objective = 0.0;   // objective mass of eliminated columns
};

PresolvedLp presolve_for_lp(const MilpInstance& m, const std::vector<double>& extra_fixed);

/// presolve + simplex + solution scatter, the path used by the oracle and by
/// portfolio evaluation.
struct ContinuousSolve {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x; // per original column
    int iterations = 0;
};

ContinuousSolve solve_continuous(const MilpInstance& m, const std::vector<double>& extra_fixed,
                                 const LpOptions& opts = {});

} // namespace gridfold
