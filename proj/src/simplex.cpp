#include "gridfold/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace gridfold {

namespace {

enum : std::int8_t { kAtLower = 0, kAtUpper = 1, kAtFree = 2, kBasic = 3 };

struct Tableau {
    int m = 0;     // rows
    int ncols = 0; // structural + slack + artificial
    std::vector<double> tab; // row-major, m x ncols (B^-1 A)
    std::vector<double> xb;  // basic values per row
    std::vector<int> basis;  // row -> column
    std::vector<double> lo, up, cost, d;
    std::vector<std::int8_t> state;
    double tol = 1e-9;
    int iterations = 0;

    double* row(int i) { return tab.data() + static_cast<std::size_t>(i) * ncols; }
    const double* row(int i) const { return tab.data() + static_cast<std::size_t>(i) * ncols; }

    double nb_value(int j) const {
        switch (state[j]) {
        case kAtLower: return lo[j];
        case kAtUpper: return up[j];
        default: return 0.0; // free at zero
        }
    }

    void compute_reduced_costs() {
        d = cost;
        for (int i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            const double* r = row(i);
            for (int j = 0; j < ncols; ++j) d[j] -= cb * r[j];
        }
    }

    double objective_value() const {
        double obj = 0.0;
        for (int j = 0; j < ncols; ++j) {
            if (state[j] != kBasic && cost[j] != 0.0) obj += cost[j] * nb_value(j);
        }
        for (int i = 0; i < m; ++i) obj += cost[basis[i]] * xb[i];
        return obj;
    }

    // One simplex phase; returns true when optimal, false when unbounded.
    bool run(int max_iterations) {
        for (;;) {
            if (++iterations > max_iterations)
                throw Error("simplex iteration limit exceeded (" +
                            std::to_string(max_iterations) + ")");

            // Entering column: Bland's rule, smallest eligible index.
            int e = -1, dir = 0;
            for (int j = 0; j < ncols; ++j) {
                if (state[j] == kBasic || lo[j] == up[j]) continue;
                const double dj = d[j];
                if (state[j] == kAtLower && dj < -tol) { e = j; dir = 1; break; }
                if (state[j] == kAtUpper && dj > tol) { e = j; dir = -1; break; }
                if (state[j] == kAtFree && std::abs(dj) > tol) {
                    e = j;
                    dir = dj < 0.0 ? 1 : -1;
                    break;
                }
            }
            if (e < 0) return true; // optimal

            // Ratio test. The entering variable moves by t >= 0 in direction
            // dir; basic variable i moves by -dir * t * tab[i][e].
            double bound_t = kInf;
            if (state[e] != kAtFree && std::isfinite(lo[e]) && std::isfinite(up[e]))
                bound_t = up[e] - lo[e];

            double t_min = bound_t;
            for (int i = 0; i < m; ++i) {
                const double a = dir * row(i)[e];
                const int bi = basis[i];
                double t;
                if (a > tol) {
                    if (!std::isfinite(lo[bi])) continue;
                    t = (xb[i] - lo[bi]) / a;
                } else if (a < -tol) {
                    if (!std::isfinite(up[bi])) continue;
                    t = (up[bi] - xb[i]) / (-a);
                } else {
                    continue;
                }
                if (t < t_min) t_min = t;
            }
            if (t_min < 0.0) t_min = 0.0;
            if (!std::isfinite(t_min)) return false; // unbounded

            // Among blocking rows at the minimum ratio, leave the one with the
            // smallest basic column index (Bland).
            const double tie = t_min + 1e-9 * (1.0 + std::abs(t_min));
            int r = -1;
            for (int i = 0; i < m; ++i) {
                const double a = dir * row(i)[e];
                const int bi = basis[i];
                double t;
                if (a > tol) {
                    if (!std::isfinite(lo[bi])) continue;
                    t = (xb[i] - lo[bi]) / a;
                } else if (a < -tol) {
                    if (!std::isfinite(up[bi])) continue;
                    t = (up[bi] - xb[i]) / (-a);
                } else {
                    continue;
                }
                if (t <= tie && (r == -1 || bi < basis[r])) r = i;
            }

            if (r == -1 || bound_t <= t_min) {
                // Bound flip: entering runs to its opposite bound.
                for (int i = 0; i < m; ++i) xb[i] -= dir * bound_t * row(i)[e];
                state[e] = dir > 0 ? kAtUpper : kAtLower;
                continue;
            }

            const double t = t_min;
            const double enter_value = nb_value(e) + dir * t;
            for (int i = 0; i < m; ++i) xb[i] -= dir * t * row(i)[e];

            const int leaving = basis[r];
            const double a_re = dir * row(r)[e];
            state[leaving] = a_re > 0.0 ? kAtLower : kAtUpper;

            // Pivot on (r, e).
            double* pr = row(r);
            const double p = pr[e];
            const double inv = 1.0 / p;
            for (int j = 0; j < ncols; ++j) pr[j] *= inv;
            pr[e] = 1.0;
            for (int i = 0; i < m; ++i) {
                if (i == r) continue;
                double* ri = row(i);
                const double f = ri[e];
                if (f == 0.0) continue;
                for (int j = 0; j < ncols; ++j) ri[j] -= f * pr[j];
                ri[e] = 0.0;
            }
            {
                const double f = d[e];
                if (f != 0.0) {
                    for (int j = 0; j < ncols; ++j) d[j] -= f * pr[j];
                    d[e] = 0.0;
                }
            }
            basis[r] = e;
            state[e] = kBasic;
            xb[r] = enter_value;
        }
    }
};

} // namespace

LpResult solve_lp(const MilpInstance& m, const LpOptions& opts) {
    m.check_consistent();
    const int n = static_cast<int>(m.vars.size());
    const int nrows = static_cast<int>(m.rows.size());

    Tableau t;
    t.tol = opts.tol;
    t.m = nrows;

    // Columns: structural | slack per row | artificials (appended as needed).
    const int n_slack = nrows;
    int ncols = n + n_slack;

    std::vector<double> lo(ncols), up(ncols);
    for (int j = 0; j < n; ++j) {
        lo[j] = m.vars[j].lower;
        up[j] = m.vars[j].upper;
    }
    for (int i = 0; i < nrows; ++i) {
        const MilpRow& row = m.rows[i];
        double sl = 0.0, su = 0.0;
        switch (row.sense) {
        case RowSense::le: sl = 0.0; su = kInf; break;          // ax + s = rhs, s >= 0
        case RowSense::ge:
            if (row.range > 0.0) { sl = 0.0; su = row.range; }   // ax + s = rhs + range
            else { sl = -kInf; su = 0.0; }                       // ax + s = rhs, s <= 0
            break;
        case RowSense::eq: sl = 0.0; su = 0.0; break;
        }
        lo[n + i] = sl;
        up[n + i] = su;
    }

    // Initial nonbasic values: finite bound nearest zero, else free at 0.
    std::vector<std::int8_t> state(ncols);
    for (int j = 0; j < ncols; ++j) {
        if (std::isfinite(lo[j]))
            state[j] = kAtLower;
        else if (std::isfinite(up[j]))
            state[j] = kAtUpper;
        else
            state[j] = kAtFree;
    }
    auto init_value = [&](int j) {
        return state[j] == kAtLower ? lo[j] : state[j] == kAtUpper ? up[j] : 0.0;
    };

    // target[i]: what the slack would have to be for row i to hold with all
    // structural columns at their initial values.
    std::vector<double> target(nrows);
    for (int i = 0; i < nrows; ++i) {
        const MilpRow& row = m.rows[i];
        target[i] = row.sense == RowSense::ge && row.range > 0.0 ? row.rhs + row.range : row.rhs;
        for (const auto& [j, coeff] : row.terms) target[i] -= coeff * init_value(j);
    }

    // Rows whose slack can absorb the target take the slack as the basic
    // column; the rest park the slack at the nearest bound and get an
    // artificial carrying the remaining residual.
    std::vector<int> art_rows;
    std::vector<int> basis(nrows, -1);
    std::vector<double> art_vals;
    for (int i = 0; i < nrows; ++i) {
        if (target[i] >= lo[n + i] - 1e-12 && target[i] <= up[n + i] + 1e-12) {
            basis[i] = n + i;
        } else {
            if (target[i] < lo[n + i])
                state[n + i] = std::isfinite(lo[n + i]) ? kAtLower : kAtFree;
            else
                state[n + i] = std::isfinite(up[n + i]) ? kAtUpper : kAtFree;
            art_rows.push_back(i);
            art_vals.push_back(target[i] - init_value(n + i));
        }
    }
    const int n_art = static_cast<int>(art_rows.size());
    ncols += n_art;

    t.ncols = ncols;
    t.tab.assign(static_cast<std::size_t>(nrows) * ncols, 0.0);
    t.lo = std::move(lo);
    t.up = std::move(up);
    t.lo.resize(ncols, 0.0);
    t.up.resize(ncols, kInf);
    t.state = std::move(state);
    t.state.resize(ncols, kAtLower);
    t.basis = std::move(basis);
    t.xb.assign(nrows, 0.0);

    for (int i = 0; i < nrows; ++i) {
        double* r = t.row(i);
        for (const auto& [j, coeff] : m.rows[i].terms) r[j] += coeff;
        r[n + i] = 1.0;
    }

    for (int k = 0; k < n_art; ++k) {
        const int i = art_rows[k];
        const double art_val = art_vals[k];
        const int col = n + nrows + k;
        // Normalize so the basic (artificial) column is +1: scale the row.
        if (art_val < 0.0) {
            double* r = t.row(i);
            for (int j = 0; j < ncols; ++j) r[j] = -r[j];
        }
        t.row(i)[col] = 1.0;
        t.basis[i] = col;
        t.state[col] = kBasic;
        t.xb[i] = std::abs(art_val);
    }
    for (int i = 0; i < nrows; ++i) {
        if (t.basis[i] == n + i) {
            t.state[n + i] = kBasic;
            t.xb[i] = target[i];
        }
    }

    const int max_iters =
        opts.max_iterations > 0 ? opts.max_iterations : 20000 + 200 * (nrows + ncols);

    LpResult result;

    // Phase 1: drive artificial mass to zero.
    if (n_art > 0) {
        t.cost.assign(ncols, 0.0);
        for (int k = 0; k < n_art; ++k) t.cost[n + nrows + k] = 1.0;
        t.compute_reduced_costs();
        if (!t.run(max_iters)) throw Error("simplex: phase 1 reported unbounded");
        if (t.objective_value() > 1e-7) {
            result.status = LpStatus::infeasible;
            result.iterations = t.iterations;
            return result;
        }
        // Pin artificials at zero for phase 2.
        for (int k = 0; k < n_art; ++k) {
            const int col = n + nrows + k;
            t.lo[col] = 0.0;
            t.up[col] = 0.0;
            if (t.state[col] != kBasic) t.state[col] = kAtLower;
        }
    }

    t.cost.assign(ncols, 0.0);
    for (int j = 0; j < n; ++j) t.cost[j] = m.vars[j].objective;
    t.compute_reduced_costs();
    if (!t.run(max_iters)) {
        result.status = LpStatus::unbounded;
        result.iterations = t.iterations;
        return result;
    }

    result.status = LpStatus::optimal;
    result.iterations = t.iterations;
    result.x.assign(n, 0.0);
    for (int j = 0; j < n; ++j)
        if (t.state[j] != kBasic) result.x[j] = t.nb_value(j);
    for (int i = 0; i < nrows; ++i)
        if (t.basis[i] < n) result.x[t.basis[i]] = t.xb[i];
    double obj = 0.0;
    for (int j = 0; j < n; ++j) obj += m.vars[j].objective * result.x[j];
    result.objective = obj;
    return result;
}

PresolvedLp presolve_for_lp(const MilpInstance& m, const std::vector<double>& extra_fixed) {
    const int n = static_cast<int>(m.vars.size());
    const int nrows = static_cast<int>(m.rows.size());

    std::vector<double> lo(n), up(n);
    for (int j = 0; j < n; ++j) {
        lo[j] = m.vars[j].lower;
        up[j] = m.vars[j].upper;
    }
    if (!extra_fixed.empty()) {
        if (static_cast<int>(extra_fixed.size()) != n)
            throw Error("presolve: fixed-value vector size mismatch");
        for (int j = 0; j < n; ++j) {
            if (std::isnan(extra_fixed[j])) continue;
            lo[j] = up[j] = extra_fixed[j];
        }
    }

    PresolvedLp out;
    out.value.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> fixed(n, false), row_alive(nrows, true);

    auto mark_infeasible = [&](const std::string& why) {
        out.infeasible = true;
        out.reason = why;
    };

    bool changed = true;
    while (changed && !out.infeasible) {
        changed = false;
        for (int j = 0; j < n; ++j) {
            if (fixed[j]) continue;
            if (lo[j] > up[j] + 1e-7) {
                mark_infeasible("variable '" + m.vars[j].name + "' has empty domain");
                break;
            }
            if (up[j] - lo[j] <= 1e-12) {
                fixed[j] = true;
                out.value[j] = lo[j];
                changed = true;
            }
        }
        if (out.infeasible) break;

        for (int i = 0; i < nrows && !out.infeasible; ++i) {
            if (!row_alive[i]) continue;
            const MilpRow& row = m.rows[i];
            int free_j = -1;
            double free_coeff = 0.0;
            int nfree = 0;
            double fixed_activity = 0.0;
            for (const auto& [j, coeff] : row.terms) {
                if (fixed[j]) {
                    fixed_activity += coeff * out.value[j];
                } else if (coeff != 0.0) {
                    ++nfree;
                    free_j = j;
                    free_coeff = coeff;
                }
            }
            if (nfree > 1) continue;

            const double lo_rhs = row.rhs - fixed_activity;
            const double hi_rhs =
                (row.sense == RowSense::ge && row.range > 0.0) ? lo_rhs + row.range : lo_rhs;

            if (nfree == 0) {
                const double tol = 1e-6;
                bool ok = true;
                switch (row.sense) {
                case RowSense::le: ok = 0.0 <= lo_rhs + tol; break;
                case RowSense::ge: ok = 0.0 >= lo_rhs - tol && (row.range <= 0.0 || 0.0 <= hi_rhs + tol); break;
                case RowSense::eq: ok = std::abs(lo_rhs) <= tol; break;
                }
                if (!ok) {
                    mark_infeasible("row '" + row.name + "' violated after fixing");
                } else {
                    row_alive[i] = false;
                    changed = true;
                }
                continue;
            }

            // Single free column: the row is a bound.
            double xlo = -kInf, xup = kInf;
            switch (row.sense) {
            case RowSense::le:
                if (free_coeff > 0.0) xup = lo_rhs / free_coeff;
                else xlo = lo_rhs / free_coeff;
                break;
            case RowSense::ge:
                if (row.range > 0.0) {
                    const double a = lo_rhs / free_coeff, b = hi_rhs / free_coeff;
                    xlo = std::min(a, b);
                    xup = std::max(a, b);
                } else if (free_coeff > 0.0) {
                    xlo = lo_rhs / free_coeff;
                } else {
                    xup = lo_rhs / free_coeff;
                }
                break;
            case RowSense::eq:
                xlo = xup = lo_rhs / free_coeff;
                break;
            }
            const double new_lo = std::max(lo[free_j], xlo);
            const double new_up = std::min(up[free_j], xup);
            if (new_lo > new_up + 1e-7) {
                mark_infeasible("row '" + row.name + "' forces empty domain for '" +
                                m.vars[free_j].name + "'");
                continue;
            }
            lo[free_j] = new_lo;
            up[free_j] = new_up;
            row_alive[i] = false;
            changed = true;
        }
    }

    if (out.infeasible) return out;

    for (int j = 0; j < n; ++j)
        if (fixed[j]) out.fixed_objective += m.vars[j].objective * out.value[j];

    std::vector<int> new_index(n, -1);
    out.lp.name = m.name;
    for (int j = 0; j < n; ++j) {
        if (fixed[j]) continue;
        MilpVariable v = m.vars[j];
        v.lower = lo[j];
        v.upper = up[j];
        v.kind = VarKind::continuous;
        new_index[j] = out.lp.add_variable(std::move(v));
        out.orig_of.push_back(j);
    }
    for (int i = 0; i < nrows; ++i) {
        if (!row_alive[i]) continue;
        const MilpRow& row = m.rows[i];
        MilpRow& nr = out.lp.add_row(row.name, row.sense, row.rhs);
        nr.range = row.range;
        for (const auto& [j, coeff] : row.terms) {
            if (fixed[j])
                nr.rhs -= coeff * out.value[j];
            else
                nr.terms.emplace_back(new_index[j], coeff);
        }
    }
    return out;
}

ContinuousSolve solve_continuous(const MilpInstance& m, const std::vector<double>& extra_fixed,
                                 const LpOptions& opts) {
    ContinuousSolve out;
    PresolvedLp pre = presolve_for_lp(m, extra_fixed);
    if (pre.infeasible) {
        out.status = LpStatus::infeasible;
        return out;
    }
    if (pre.lp.vars.empty()) {
        out.status = LpStatus::optimal;
        out.objective = pre.fixed_objective;
        out.x = pre.value;
        return out;
    }
    LpResult res = solve_lp(pre.lp, opts);
    out.status = res.status;
    out.iterations = res.iterations;
    if (res.status != LpStatus::optimal) return out;
    out.objective = pre.fixed_objective + res.objective;
    out.x = pre.value;
    for (std::size_t k = 0; k < pre.orig_of.size(); ++k) out.x[pre.orig_of[k]] = res.x[k];
    return out;
}

} // namespace gridfold
