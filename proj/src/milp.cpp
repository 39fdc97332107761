#include "gridfold/milp.hpp"

#include <cmath>

namespace gridfold {

int MilpInstance::add_variable(MilpVariable v, VarMeta m) {
    if (v.name.empty()) throw Error("variable name must not be empty");
    const int idx = static_cast<int>(vars.size());
    auto [it, inserted] = var_index.emplace(v.name, idx);
    (void)it;
    if (!inserted) throw Error("duplicate variable name '" + v.name + "'");
    vars.push_back(std::move(v));
    meta.push_back(std::move(m));
    return idx;
}

MilpRow& MilpInstance::add_row(std::string row_name, RowSense sense, double rhs) {
    MilpRow row;
    row.name = std::move(row_name);
    row.sense = sense;
    row.rhs = rhs;
    rows.push_back(std::move(row));
    return rows.back();
}

int MilpInstance::index_of(const std::string& var_name) const {
    auto it = var_index.find(var_name);
    return it == var_index.end() ? -1 : it->second;
}

void MilpInstance::check_consistent() const {
    for (const auto& row : rows) {
        for (const auto& [idx, coeff] : row.terms) {
            if (idx < 0 || idx >= static_cast<int>(vars.size()))
                throw Error("row '" + row.name + "' references undeclared column " +
                            std::to_string(idx));
            if (!std::isfinite(coeff))
                throw Error("row '" + row.name + "' has non-finite coefficient");
        }
        if (row.range != 0.0 && (row.sense != RowSense::ge || row.range < 0.0))
            throw Error("row '" + row.name + "' misuses range (must be >= 0 on a ge row)");
    }
    for (const auto& v : vars) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.objective))
            throw Error("variable '" + v.name + "' has NaN bound or non-finite objective");
        if (v.lower > v.upper)
            throw Error("variable '" + v.name + "' has empty bound interval");
    }
}

} // namespace gridfold
