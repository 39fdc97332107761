#include "gridfold/solver.hpp"

#include "gridfold/simplex.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace gridfold {

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible_gap: return "feasible-gap";
    case SolveStatus::time_limit: return "time-limit";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::error: return "error";
    }
    return "?";
}

double Solution::value(const std::string& var_name) const {
    auto it = values.find(var_name);
    return it == values.end() ? 0.0 : it->second;
}

double compute_mip_gap(double objective, double best_bound) {
    return (objective - best_bound) / std::max(std::abs(objective), 1e-10);
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_name(const std::string& name) {
    if (name.empty() || name.size() > 255)
        throw Error("MPS name '" + name + "' must be 1..255 characters");
    for (char c : name)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
            throw Error("MPS name '" + name + "' contains whitespace");
}

} // namespace

std::string mps_text(const MilpInstance& m) {
    m.check_consistent();
    check_name(m.name.empty() ? "MODEL" : m.name);
    for (const auto& v : m.vars) {
        check_name(v.name);
        if (!std::isfinite(v.objective))
            throw Error("variable '" + v.name + "' has unrepresentable objective coefficient");
    }
    for (const auto& r : m.rows) {
        check_name(r.name);
        if (!std::isfinite(r.rhs)) throw Error("row '" + r.name + "' has unrepresentable rhs");
        for (const auto& [idx, coeff] : r.terms) {
            (void)idx;
            if (!std::isfinite(coeff))
                throw Error("row '" + r.name + "' has unrepresentable coefficient");
        }
    }

    std::ostringstream out;
    out << "NAME " << (m.name.empty() ? "MODEL" : m.name) << "\n";
    out << "ROWS\n";
    out << " N COST\n";
    for (const auto& r : m.rows) {
        const char sense = r.sense == RowSense::le ? 'L' : r.sense == RowSense::ge ? 'G' : 'E';
        out << " " << sense << " " << r.name << "\n";
    }

    // Column-major entries in declaration order.
    std::vector<std::vector<std::pair<const std::string*, double>>> by_col(m.vars.size());
    for (const auto& r : m.rows)
        for (const auto& [idx, coeff] : r.terms) by_col[idx].emplace_back(&r.name, coeff);

    if (!m.vars.empty()) {
        out << "COLUMNS\n";
        bool in_int = false;
        int marker_seq = 0;
        for (std::size_t j = 0; j < m.vars.size(); ++j) {
            const auto& v = m.vars[j];
            const bool is_int = v.kind != VarKind::continuous;
            if (is_int && !in_int) {
                out << " MARKER" << marker_seq++ << " 'MARKER' 'INTORG'\n";
                in_int = true;
            } else if (!is_int && in_int) {
                out << " MARKER" << marker_seq++ << " 'MARKER' 'INTEND'\n";
                in_int = false;
            }
            if (v.objective != 0.0) out << " " << v.name << " COST " << num(v.objective) << "\n";
            bool any = v.objective != 0.0;
            for (const auto& [row_name, coeff] : by_col[j]) {
                out << " " << v.name << " " << *row_name << " " << num(coeff) << "\n";
                any = true;
            }
            if (!any) out << " " << v.name << " COST 0\n"; // declare column
        }
        if (in_int) out << " MARKER" << marker_seq++ << " 'MARKER' 'INTEND'\n";
    }

    std::ostringstream rhs;
    for (const auto& r : m.rows)
        if (r.rhs != 0.0) rhs << " RHS " << r.name << " " << num(r.rhs) << "\n";
    if (!rhs.str().empty()) out << "RHS\n" << rhs.str();

    std::ostringstream ranges;
    for (const auto& r : m.rows)
        if (r.range > 0.0) ranges << " RNG " << r.name << " " << num(r.range) << "\n";
    if (!ranges.str().empty()) out << "RANGES\n" << ranges.str();

    std::ostringstream bounds;
    for (const auto& v : m.vars) {
        if (v.kind == VarKind::binary && v.lower == 0.0 && v.upper == 1.0) {
            bounds << " BV BND " << v.name << "\n";
            continue;
        }
        const bool lo_inf = !std::isfinite(v.lower);
        const bool up_inf = !std::isfinite(v.upper);
        if (!lo_inf && !up_inf && v.lower == v.upper) {
            bounds << " FX BND " << v.name << " " << num(v.lower) << "\n";
            continue;
        }
        if (lo_inf && up_inf) {
            bounds << " FR BND " << v.name << "\n";
            continue;
        }
        if (lo_inf)
            bounds << " MI BND " << v.name << "\n";
        else if (v.lower != 0.0 || v.kind != VarKind::continuous)
            bounds << " " << (v.kind == VarKind::continuous ? "LO" : "LI") << " BND " << v.name
                   << " " << num(v.lower) << "\n";
        if (!up_inf)
            bounds << " " << (v.kind == VarKind::continuous ? "UP" : "UI") << " BND " << v.name
                   << " " << num(v.upper) << "\n";
    }
    if (!bounds.str().empty()) out << "BOUNDS\n" << bounds.str();
    out << "ENDATA\n";
    return out.str();
}

void write_mps(const MilpInstance& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write MPS file '" + path.string() + "'");
    out << mps_text(m);
    if (!out) throw Error("write failed for MPS file '" + path.string() + "'");
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_mps_num(const std::string& s, int lineno, const std::string& path) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw Error(path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
    }
}

} // namespace

MilpInstance read_mps(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open MPS file '" + path.string() + "'");

    MilpInstance m;
    m.name = "model";
    enum class Section { none, rows, columns, rhs, ranges, bounds, done };
    Section section = Section::none;

    std::unordered_map<std::string, int> row_index; // constraint rows only
    std::string objective_row;
    bool in_int = false;
    std::vector<bool> saw_lower;

    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) -> void {
        throw Error(path.string() + ":" + std::to_string(lineno) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '*') continue;
        const bool header = line[0] != ' ' && line[0] != '\t';
        auto toks = tokenize(line);
        if (toks.empty()) continue;

        if (header) {
            const std::string& h = toks[0];
            if (h == "NAME") {
                if (toks.size() > 1) m.name = toks[1];
            } else if (h == "ROWS") {
                section = Section::rows;
            } else if (h == "COLUMNS") {
                section = Section::columns;
            } else if (h == "RHS") {
                section = Section::rhs;
            } else if (h == "RANGES") {
                section = Section::ranges;
            } else if (h == "BOUNDS") {
                section = Section::bounds;
            } else if (h == "ENDATA") {
                section = Section::done;
                break;
            } else if (h == "OBJSENSE") {
                section = Section::none; // body handled below; minimize assumed
            } else {
                fail("unknown section '" + h + "'");
            }
            continue;
        }

        switch (section) {
        case Section::rows: {
            if (toks.size() != 2) fail("expected '<sense> <name>'");
            const std::string& sense = toks[0];
            const std::string& name = toks[1];
            if (sense == "N") {
                if (objective_row.empty()) objective_row = name;
            } else {
                RowSense rs;
                if (sense == "L") rs = RowSense::le;
                else if (sense == "G") rs = RowSense::ge;
                else if (sense == "E") rs = RowSense::eq;
                else { fail("bad row sense '" + sense + "'"); return m; }
                if (row_index.count(name)) fail("duplicate row '" + name + "'");
                row_index[name] = static_cast<int>(m.rows.size());
                m.add_row(name, rs, 0.0);
            }
            break;
        }
        case Section::columns: {
            if (toks.size() >= 3 && toks[1] == "'MARKER'") {
                if (toks[2] == "'INTORG'") in_int = true;
                else if (toks[2] == "'INTEND'") in_int = false;
                else fail("bad marker '" + toks[2] + "'");
                break;
            }
            if (toks.size() != 3 && toks.size() != 5) fail("expected column entries");
            const std::string& col = toks[0];
            int idx = m.index_of(col);
            if (idx < 0) {
                MilpVariable v;
                v.name = col;
                v.kind = in_int ? VarKind::integer_var : VarKind::continuous;
                if (in_int) v.upper = 1.0; // MPS integer default bounds, widened by BOUNDS
                idx = m.add_variable(std::move(v));
                saw_lower.push_back(false);
            }
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                const std::string& rname = toks[k];
                const double coeff = parse_mps_num(toks[k + 1], lineno, path.string());
                if (rname == objective_row) {
                    m.vars[idx].objective += coeff;
                } else {
                    auto it = row_index.find(rname);
                    if (it == row_index.end()) fail("unknown row '" + rname + "'");
                    if (coeff != 0.0) m.rows[it->second].terms.emplace_back(idx, coeff);
                }
            }
            break;
        }
        case Section::rhs: {
            if (toks.size() != 3 && toks.size() != 5) fail("expected rhs entries");
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                const double v = parse_mps_num(toks[k + 1], lineno, path.string());
                if (toks[k] == objective_row) continue; // objective offset unsupported
                auto it = row_index.find(toks[k]);
                if (it == row_index.end()) fail("unknown row '" + toks[k] + "'");
                m.rows[it->second].rhs = v;
            }
            break;
        }
        case Section::ranges: {
            if (toks.size() != 3 && toks.size() != 5) fail("expected range entries");
            for (std::size_t k = 1; k + 1 < toks.size(); k += 2) {
                auto it = row_index.find(toks[k]);
                if (it == row_index.end()) fail("unknown row '" + toks[k] + "'");
                const double rv = parse_mps_num(toks[k + 1], lineno, path.string());
                MilpRow& row = m.rows[it->second];
                // Canonicalize to a ge row with activity in [rhs, rhs + range].
                switch (row.sense) {
                case RowSense::ge:
                    row.range = std::abs(rv);
                    break;
                case RowSense::le:
                    row.sense = RowSense::ge;
                    row.range = std::abs(rv);
                    row.rhs -= row.range;
                    break;
                case RowSense::eq:
                    row.sense = RowSense::ge;
                    row.range = std::abs(rv);
                    if (rv < 0.0) row.rhs -= row.range;
                    break;
                }
            }
            break;
        }
        case Section::bounds: {
            if (toks.size() < 3) fail("expected bound entries");
            const std::string& btype = toks[0];
            const std::string& col = toks[2];
            const int idx = m.index_of(col);
            if (idx < 0) fail("bound for unknown column '" + col + "'");
            MilpVariable& v = m.vars[idx];
            auto needval = [&]() -> double {
                if (toks.size() < 4) fail("bound type '" + btype + "' needs a value");
                return parse_mps_num(toks[3], lineno, path.string());
            };
            if (btype == "UP" || btype == "UI") {
                v.upper = needval();
                if (v.upper < 0.0 && !saw_lower[idx]) v.lower = -kInf;
            } else if (btype == "LO" || btype == "LI") {
                v.lower = needval();
                saw_lower[idx] = true;
                if (v.kind != VarKind::continuous && v.upper == 1.0) v.upper = kInf;
            } else if (btype == "FX") {
                v.lower = v.upper = needval();
            } else if (btype == "FR") {
                v.lower = -kInf;
                v.upper = kInf;
            } else if (btype == "MI") {
                v.lower = -kInf;
            } else if (btype == "PL") {
                v.upper = kInf;
            } else if (btype == "BV") {
                v.kind = VarKind::binary;
                v.lower = 0.0;
                v.upper = 1.0;
            } else {
                fail("unsupported bound type '" + btype + "'");
            }
            break;
        }
        case Section::none:
            break; // OBJSENSE body or stray line before sections
        case Section::done:
            break;
        }
    }
    if (section != Section::done) throw Error(path.string() + ": missing ENDATA");

    // Integer columns that never saw an explicit upper keep the MPS [0,1]
    // default; ours always writes bounds so this only affects foreign files.
    return m;
}

Solution parse_solution(const std::filesystem::path& path, const MilpInstance& m) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open solution file '" + path.string() + "'");
    Solution sol;
    sol.status = SolveStatus::optimal;
    bool saw_obj = false;
    bool saw_any_var = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] == "=obj=") {
            if (toks.size() != 2)
                throw Error(path.string() + ":" + std::to_string(lineno) + ": malformed =obj= line");
            sol.objective = parse_mps_num(toks[1], lineno, path.string());
            saw_obj = true;
            continue;
        }
        if (toks.size() != 2)
            throw Error(path.string() + ":" + std::to_string(lineno) +
                        ": expected '<name> <value>'");
        const double v = parse_mps_num(toks[1], lineno, path.string());
        if (m.index_of(toks[0]) < 0) {
            sol.warnings.push_back("unknown variable '" + toks[0] + "' at line " +
                                   std::to_string(lineno) + " ignored");
            continue;
        }
        sol.values[toks[0]] = v;
        saw_any_var = true;
    }

    for (const auto& v : m.vars) {
        if (!sol.values.count(v.name)) {
            sol.values[v.name] = 0.0;
            sol.warnings.push_back("variable '" + v.name + "' missing from solution, defaulted to 0");
        }
    }
    if (!saw_any_var && !m.vars.empty())
        sol.warnings.push_back("solution file contains no variable assignments");
    if (!saw_obj) {
        double obj = 0.0;
        for (const auto& v : m.vars) obj += v.objective * sol.values[v.name];
        sol.objective = obj;
        sol.warnings.push_back("no =obj= line; objective recomputed from assignments");
    }
    return sol;
}

void write_solution_file(const Solution& sol, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write solution file '" + path.string() + "'");
    out << "=obj= " << num(sol.objective) << "\n";
    std::vector<std::pair<std::string, double>> sorted(sol.values.begin(), sol.values.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [name, v] : sorted) out << name << " " << num(v) << "\n";
}

Solution solve_bruteforce(const MilpInstance& m, const BruteforceLimits& limits) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    m.check_consistent();
    Solution sol;

    std::vector<int> int_vars;
    std::vector<long long> lo, width;
    long long lattice = 1;
    for (std::size_t j = 0; j < m.vars.size(); ++j) {
        const auto& v = m.vars[j];
        if (v.kind == VarKind::continuous) continue;
        const double l = std::ceil(v.lower - 1e-9);
        const double u = std::floor(v.upper + 1e-9);
        if (!std::isfinite(l) || !std::isfinite(u)) {
            sol.message = "integer variable '" + v.name + "' has unbounded domain";
            return sol;
        }
        if (l > u) {
            sol.status = SolveStatus::infeasible;
            sol.message = "integer variable '" + v.name + "' has empty domain";
            return sol;
        }
        int_vars.push_back(static_cast<int>(j));
        lo.push_back(static_cast<long long>(l));
        const double w_real = u - l + 1.0;
        if (w_real > static_cast<double>(limits.max_lattice)) {
            sol.message = "integer lattice exceeds limit of " + std::to_string(limits.max_lattice);
            return sol;
        }
        const long long w = static_cast<long long>(w_real);
        width.push_back(w);
        if (lattice > limits.max_lattice / w) {
            sol.message = "integer lattice exceeds limit of " + std::to_string(limits.max_lattice);
            return sol;
        }
        lattice *= w;
    }

    std::vector<double> fixed(m.vars.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<long long> counter(int_vars.size(), 0);

    bool have_best = false;
    double best_obj = 0.0;
    std::vector<double> best_x;
    bool any_infeasible_only = true;

    for (long long point = 0; point < lattice; ++point) {
        if (limits.time_limit_s > 0.0 && elapsed() > limits.time_limit_s) {
            if (have_best) {
                sol.status = SolveStatus::time_limit;
                break;
            }
            sol.status = SolveStatus::time_limit;
            sol.message = "time limit before any feasible point";
            sol.wall_time_s = elapsed();
            return sol;
        }
        for (std::size_t k = 0; k < int_vars.size(); ++k)
            fixed[int_vars[k]] = static_cast<double>(lo[k] + counter[k]);

        ContinuousSolve cs = solve_continuous(m, fixed);
        if (cs.status == LpStatus::unbounded) {
            sol.status = SolveStatus::error;
            sol.message = "continuous relaxation unbounded";
            sol.wall_time_s = elapsed();
            return sol;
        }
        if (cs.status == LpStatus::optimal) {
            any_infeasible_only = false;
            if (!have_best || cs.objective < best_obj - 1e-12) {
                have_best = true;
                best_obj = cs.objective;
                best_x = cs.x;
            }
        }

        // Mixed-radix increment, first declared integer slowest.
        for (std::size_t k = int_vars.size(); k-- > 0;) {
            if (++counter[k] < width[k]) break;
            counter[k] = 0;
        }
    }

    sol.wall_time_s = elapsed();
    if (!have_best) {
        sol.status = any_infeasible_only ? SolveStatus::infeasible : SolveStatus::error;
        if (sol.message.empty()) sol.message = "no feasible integer assignment";
        return sol;
    }
    if (sol.status != SolveStatus::time_limit) sol.status = SolveStatus::optimal;
    sol.objective = best_obj;
    if (sol.status == SolveStatus::optimal) {
        sol.best_bound = best_obj;
        sol.mip_gap = 0.0;
    }
    for (std::size_t j = 0; j < m.vars.size(); ++j) sol.values[m.vars[j].name] = best_x[j];
    return sol;
}

namespace {

std::string substitute(const std::string& tmpl, const std::string& key, const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t hit = tmpl.find(key, pos);
        if (hit == std::string::npos) {
            out += tmpl.substr(pos);
            return out;
        }
        out += tmpl.substr(pos, hit - pos);
        out += value;
        pos = hit + key.size();
    }
}

std::filesystem::path fresh_work_dir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path() / "gridfold";
    std::filesystem::create_directories(base);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        auto dir = base / ("solve-" + std::to_string(::getpid()) + "-" +
                           std::to_string(counter.fetch_add(1)));
        std::error_code ec;
        if (std::filesystem::create_directory(dir, ec)) return dir;
    }
    throw Error("cannot create a unique solver work directory");
}

} // namespace

Solution solve_external(const MilpInstance& m, const std::string& solver_cmd, double gap,
                        double time_limit_s) {
    if (solver_cmd.find("{mps}") == std::string::npos ||
        solver_cmd.find("{sol}") == std::string::npos)
        throw Error("solver command template must contain {mps} and {sol} placeholders");

    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = fresh_work_dir();
    const auto mps = dir / "model.mps";
    const auto solfile = dir / "model.sol";
    write_mps(m, mps);

    std::string cmd = solver_cmd;
    cmd = substitute(cmd, "{mps}", mps.string());
    cmd = substitute(cmd, "{sol}", solfile.string());
    cmd = substitute(cmd, "{gap}", num(gap));
    cmd = substitute(cmd, "{timelimit}", num(time_limit_s));

    const int rc = std::system(cmd.c_str());
    const int exit_code = rc < 0 ? -1 : (rc & 0x7f) ? 128 + (rc & 0x7f) : (rc >> 8);

    Solution sol;
    sol.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto parse_incumbent = [&]() -> bool {
        if (!std::filesystem::exists(solfile)) return false;
        try {
            Solution parsed = parse_solution(solfile, m);
            sol.objective = parsed.objective;
            sol.values = std::move(parsed.values);
            for (auto& w : parsed.warnings) sol.warnings.push_back(std::move(w));
            return true;
        } catch (const Error& e) {
            sol.message = e.what();
            return false;
        }
    };

    switch (exit_code) {
    case 0:
        if (!parse_incumbent()) {
            sol.status = SolveStatus::error;
            if (sol.message.empty())
                sol.message = "solver exited 0 but produced no parsable solution at " +
                              solfile.string();
            return sol;
        }
        sol.status = gap > 0.0 ? SolveStatus::feasible_gap : SolveStatus::optimal;
        break;
    case 2:
        sol.status = SolveStatus::infeasible;
        break;
    case 3:
        sol.status = SolveStatus::time_limit;
        if (parse_incumbent()) sol.message = "time limit; incumbent returned";
        else if (sol.message.empty()) sol.message = "time limit; no incumbent";
        break;
    default:
        sol.status = SolveStatus::error;
        sol.message = "solver command failed with exit code " + std::to_string(exit_code) +
                      "; work dir kept at " + dir.string();
        return sol;
    }

    std::error_code ec;
    std::filesystem::remove_all(dir, ec); // kept on failure paths above
    return sol;
}

} // namespace gridfold
