#pragma once

#include "gridfold/network.hpp"

#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace gridfold {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { continuous, binary, integer_var };

struct MilpVariable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    VarKind kind = VarKind::continuous;
    double objective = 0.0;
};

enum class RowSense { le, ge, eq };

struct MilpRow {
    std::string name;
    std::vector<std::pair<int, double>> terms; // (variable index, coefficient)
    RowSense sense = RowSense::le;
    double rhs = 0.0;
    // range > 0 (sense must be ge): activity constrained to [rhs, rhs + range].
    double range = 0.0;
};

/// Symbol-table entry tying a column to a network element.
struct VarMeta {
    std::string element;  // network element id ("" for model-level variables)
    std::string role;     // e.g. "build", "units", "reinforce", "dispatch", "flow_fwd", "shed"
    std::string scenario; // scenario day id ("" for investment variables)
    int hour = -1;        // -1 for non-hourly variables
};

/// Solver-agnostic minimization MILP.
struct MilpInstance {
    std::string name = "model";
    std::vector<MilpVariable> vars;
    std::vector<VarMeta> meta; // parallel to vars
    std::vector<MilpRow> rows;
    std::unordered_map<std::string, int> var_index;

    int add_variable(MilpVariable v, VarMeta m = {});
    MilpRow& add_row(std::string row_name, RowSense sense, double rhs);
    int index_of(const std::string& var_name) const; // -1 when absent

    /// Throws if a row references an undeclared column or a range is misused.
    void check_consistent() const;
};

} // namespace gridfold
