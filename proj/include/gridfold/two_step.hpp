#pragma once

#include "gridfold/cep.hpp"
#include "gridfold/merge_map.hpp"
#include "gridfold/reduction.hpp"

#include <span>

namespace gridfold {

enum class GenStorageMap { map_a, map_b, map_c };
enum class TransmissionMap { map_components, reinforce_all };

struct MappingStrategy {
    GenStorageMap gen_storage = GenStorageMap::map_b;
    TransmissionMap transmission = TransmissionMap::map_components;
};

/// Which backend solves the MILPs of a pipeline.
struct SolverSpec {
    bool use_oracle = true;
    std::string solver_cmd;              // {mps} {sol} {gap} {timelimit} template
    long long oracle_max_lattice = 4096;
};

/// Generation/storage projection. Map A fixes per-site builds (proportional
/// to max_build; integer candidates via largest-remainder whole units);
/// Map B fixes each (reduced bus, tech) group total; Map C fixes one
/// network-wide total per technology.
InvestmentFixing map_investments(const Portfolio& x_tilde, const MergeMap& mm,
                                 GenStorageMap strategy, const Network& original);

/// Transmission projection, merged into `out.fixed_reinforce`.
/// map-components fixes every original constituent of a reduced line to that
/// line's decision (1 wins when compositions overlap); removed lines stay
/// free. reinforce-all fixes every reinforcible original line to 1.
void map_transmission(const Portfolio& x_tilde, const MergeMap& mm, TransmissionMap mode,
                      const Network& original, InvestmentFixing& out);

struct StepReport {
    Solution solution;
    double build_s = 0.0;
    double solve_s = 0.0;
};

struct TwoStepResult {
    Network reduced;
    MergeMap mm;
    ReductionStats stats;
    StepReport step1;
    Portfolio x_tilde;
    InvestmentFixing fixing;
    StepReport step2;
    Portfolio x_prime;
    double f_xprime = 0.0; // step-2 incumbent objective
};

/// Step (1): solve CEP on the reduced network (deterministic when one day is
/// given, extensive form otherwise). Step (2): project the solution through
/// the mapping strategy onto the original network and re-solve.
/// `pre_reduced`/`pre_mm` skip the reduction when already computed.
TwoStepResult run_two_step(const Network& original, const ReductionConfig& rcfg,
                           std::span<const ScenarioDay> days, const CepConfig& cep_cfg,
                           const MappingStrategy& strategy, const SolverSpec& solver,
                           const Network* pre_reduced = nullptr, const MergeMap* pre_mm = nullptr);

/// Solves one CEP MILP through the configured backend.
Solution solve_milp(const MilpInstance& m, const SolverSpec& solver, double gap,
                    double time_limit_s);

} // namespace gridfold
