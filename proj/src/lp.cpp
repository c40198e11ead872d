#include "vdbelief/lp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr int kPivotCap = 200000;
const double kInf = std::numeric_limits<double>::infinity();

void maybe_dump(const LinearProgram& lp) {
    static std::atomic<long> counter{0};
    const char* dir = std::getenv("VDBELIEF_LP_DUMP");
    if (!dir || !*dir) return;
    long id = counter.fetch_add(1);
    std::ostringstream path;
    path << dir << "/lp_" << std::setw(6) << std::setfill('0') << id << ".txt";
    std::ofstream os(path.str());
    if (os) dump_lp(lp, os);
}

// Standard-form copy: every variable nonnegative (free variables split,
// finite lower bounds shifted), finite upper bounds become extra rows.
struct StandardForm {
    int n = 0;                                   // standard variable count
    std::vector<std::pair<int, double>> back;    // std var -> (orig var, sign)
    Vector shift;                                // per orig var
    Vector c;
    std::vector<Vector> a;
    std::vector<Relation> rel;
    Vector b;
};

StandardForm standardize(const LinearProgram& lp) {
    StandardForm sf;
    sf.shift.assign(lp.num_vars, 0.0);
    std::vector<std::vector<std::pair<int, double>>> expand(lp.num_vars);
    for (int v = 0; v < lp.num_vars; ++v) {
        if (std::isinf(lp.lower[v])) { // free
            expand[v] = {{sf.n, 1.0}, {sf.n + 1, -1.0}};
            sf.back.push_back({v, 1.0});
            sf.back.push_back({v, -1.0});
            sf.n += 2;
        } else {
            sf.shift[v] = lp.lower[v];
            expand[v] = {{sf.n, 1.0}};
            sf.back.push_back({v, 1.0});
            sf.n += 1;
        }
    }
    sf.c.assign(sf.n, 0.0);
    for (int v = 0; v < lp.num_vars; ++v)
        for (auto [col, sgn] : expand[v]) sf.c[col] = lp.objective[v] * sgn;

    auto add_row = [&](const Vector& coeffs, Relation r, double rhs) {
        Vector row(sf.n, 0.0);
        double adj = rhs;
        for (int v = 0; v < lp.num_vars; ++v) {
            if (coeffs[v] == 0.0) continue;
            adj -= coeffs[v] * sf.shift[v];
            for (auto [col, sgn] : expand[v]) row[col] += coeffs[v] * sgn;
        }
        sf.a.push_back(std::move(row));
        sf.rel.push_back(r);
        sf.b.push_back(adj);
    };

    for (const auto& r : lp.rows) {
        if (static_cast<int>(r.coeffs.size()) != lp.num_vars)
            throw DomainError("LP row width mismatch");
        for (double x : r.coeffs)
            if (std::isnan(x)) throw DomainError("LP row contains NaN");
        add_row(r.coeffs, r.rel, r.rhs);
    }
    for (int v = 0; v < lp.num_vars; ++v) {
        if (!std::isinf(lp.upper[v])) {
            Vector coeffs(lp.num_vars, 0.0);
            coeffs[v] = 1.0;
            add_row(coeffs, Relation::LessEq, lp.upper[v]);
        }
    }
    return sf;
}

// Fresh solve of the basis system; the tableau accumulates drift over long
// degenerate runs, so the final solution comes from the original data.
std::optional<Vector> solve_basis(const std::vector<Vector>& a0, const Vector& b0,
                                  const std::vector<int>& basis) {
    const int m = static_cast<int>(b0.size());
    std::vector<Vector> g(m, Vector(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < m; ++k) g[i][k] = a0[i][basis[k]];
        g[i][m] = b0[i];
    }
    for (int col = 0; col < m; ++col) {
        int piv = -1;
        double best = 1e-12;
        for (int r = col; r < m; ++r)
            if (std::abs(g[r][col]) > best) { best = std::abs(g[r][col]); piv = r; }
        if (piv < 0) return std::nullopt;
        std::swap(g[col], g[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = g[r][col] / g[col][col];
            if (f == 0.0) continue;
            for (int c = col; c <= m; ++c) g[r][c] -= f * g[col][c];
        }
    }
    Vector x(m);
    for (int i = 0; i < m; ++i) x[i] = g[i][m] / g[i][i];
    return x;
}

struct Tableau {
    // Snap floor and pivot eligibility coincide: every entry that survives
    // the cleanup takes part in the ratio test, so no surviving row can be
    // driven negative past floating-point noise.
    static constexpr double kSnap = 1e-9;

    int m = 0;            // rows
    int n_real = 0;       // structural + slack/surplus columns
    int n_total = 0;      // including artificials
    std::vector<Vector> t; // m rows of n_total + 1 (rhs last)
    Vector obj;            // n_total + 1
    std::vector<int> basis;
    int pivots = 0;

    // Original data and the active phase's cost vector, for refreshes.
    std::vector<Vector> a0;
    Vector b0;
    Vector cost; // size n_total; phase 1: -1 on artificials, else the objective

    void snapshot() {
        a0.assign(m, Vector(n_total, 0.0));
        b0.assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n_total; ++j) a0[i][j] = t[i][j];
            b0[i] = t[i][n_total];
        }
    }

    // Recompute the tableau from the original data under the current basis,
    // wiping out accumulated floating-point drift. Degenerate runs on the
    // equality-heavy switch LPs need this to stay trustworthy.
    void refresh() {
        std::vector<Vector> binv(m, Vector(m, 0.0));
        {
            // Invert B via Gauss-Jordan on [B | I].
            std::vector<Vector> g(m, Vector(2 * m, 0.0));
            for (int i = 0; i < m; ++i) {
                for (int k = 0; k < m; ++k) g[i][k] = a0[i][basis[k]];
                g[i][m + i] = 1.0;
            }
            for (int col = 0; col < m; ++col) {
                int piv = -1;
                double best = 1e-12;
                for (int r = col; r < m; ++r)
                    if (std::abs(g[r][col]) > best) { best = std::abs(g[r][col]); piv = r; }
                if (piv < 0) return; // basis singular; keep the current tableau
                std::swap(g[col], g[piv]);
                double inv = 1.0 / g[col][col];
                for (auto& x : g[col]) x *= inv;
                for (int r = 0; r < m; ++r) {
                    if (r == col) continue;
                    double f = g[r][col];
                    if (f == 0.0) continue;
                    for (int c = 0; c < 2 * m; ++c) g[r][c] -= f * g[col][c];
                }
            }
            // Reduction leaves [I | B^-1] with rows aligned to basis order.
            for (int i = 0; i < m; ++i)
                for (int k = 0; k < m; ++k) binv[i][k] = g[i][m + k];
        }
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n_total; ++j) {
                double acc = 0.0;
                for (int k = 0; k < m; ++k) acc += binv[i][k] * a0[k][j];
                t[i][j] = std::abs(acc) < kSnap ? 0.0 : acc;
            }
            double acc = 0.0;
            for (int k = 0; k < m; ++k) acc += binv[i][k] * b0[k];
            if (acc < -1e-6)
                throw NumericalError("numerically unstable: basis drifted infeasible (" +
                                     std::to_string(acc) + ")");
            t[i][n_total] = std::max(acc, 0.0); // drift-level noise only
        }
        rebuild_objective();
    }

    void rebuild_objective() {
        obj.assign(n_total + 1, 0.0);
        for (int j = 0; j < n_total; ++j) obj[j] = -cost[j];
        for (int i = 0; i < m; ++i) {
            double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j <= n_total; ++j) obj[j] += cb * t[i][j];
        }
        for (int i = 0; i < m; ++i) obj[basis[i]] = 0.0;
    }

    void pivot(int row, int col) {
        double inv = 1.0 / t[row][col];
        for (auto& x : t[row]) x *= inv;
        t[row][col] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = t[i][col];
            if (std::abs(f) <= 0.0) continue;
            for (int j = 0; j <= n_total; ++j) {
                t[i][j] -= f * t[row][j];
                if (std::abs(t[i][j]) < kSnap) t[i][j] = 0.0; // drop fp debris
            }
            t[i][col] = 0.0;
        }
        double f = obj[col];
        if (f != 0.0) {
            for (int j = 0; j <= n_total; ++j) obj[j] -= f * t[row][j];
            obj[col] = 0.0;
        }
        basis[row] = col;
        ++pivots;
    }

    // Bland: entering = lowest column index with obj < -eps; leaving = min
    // ratio, ties by lowest basis index. Returns false when unbounded.
    bool run(int limit_cols) {
        int since_refresh = 0;
        for (;;) {
            if (pivots > kPivotCap)
                throw NumericalError("numerically unstable: simplex pivot cap exceeded (" +
                                     std::to_string(m) + " rows, " + std::to_string(n_total) +
                                     " cols)");
            if (++since_refresh > 40) {
                refresh();
                since_refresh = 0;
            }
            int col = -1;
            for (int j = 0; j < limit_cols; ++j)
                if (obj[j] < -kPivotEps) { col = j; break; }
            if (col < 0) return true;
            int row = -1;
            double best = kInf;
            for (int i = 0; i < m; ++i) {
                if (t[i][col] > kPivotEps) {
                    double ratio = t[i][n_total] / t[i][col];
                    // Bland needs the exact minimum ratio; ties go to the
                    // smallest basis index.
                    if (ratio < best) {
                        best = ratio;
                        row = i;
                    } else if (ratio == best && row >= 0 && basis[i] < basis[row]) {
                        row = i;
                    }
                }
            }
            if (row < 0) return false; // unbounded direction
            pivot(row, col);
#ifdef VDBELIEF_LP_PARANOID
            for (int i = 0; i < m; ++i)
                if (t[i][n_total] < -1e-7)
                    throw NumericalError("paranoid: rhs " + std::to_string(i) + " = " +
                                         std::to_string(t[i][n_total]) + " after pivot col " +
                                         std::to_string(col) + " row " + std::to_string(row) +
                                         " pivots " + std::to_string(pivots));
#endif
        }
    }
};

} // namespace

LpResult solve_lp(const LinearProgram& lp) {
    maybe_dump(lp);
    StandardForm sf = standardize(lp);
    const int m = static_cast<int>(sf.a.size());

    // Row equilibration: divide every row by its largest coefficient. The
    // switch LPs mix unit simplex rows with reward differences in the
    // thousands, which otherwise wrecks the pivot tolerance.
    for (int i = 0; i < m; ++i) {
        double scale = 0.0;
        for (double x : sf.a[i]) scale = std::max(scale, std::abs(x));
        if (scale > 0.0) {
            for (auto& x : sf.a[i]) x /= scale;
            sf.b[i] /= scale;
        }
    }

    // Flip rows to nonnegative rhs, then add slack/surplus columns.
    for (int i = 0; i < m; ++i) {
        if (sf.b[i] < 0.0) {
            for (auto& x : sf.a[i]) x = -x;
            sf.b[i] = -sf.b[i];
            if (sf.rel[i] == Relation::LessEq) sf.rel[i] = Relation::GreaterEq;
            else if (sf.rel[i] == Relation::GreaterEq) sf.rel[i] = Relation::LessEq;
        }
    }
    int n_slack = 0;
    for (int i = 0; i < m; ++i)
        if (sf.rel[i] != Relation::Equal) ++n_slack;
    int n_art = 0;
    std::vector<int> art_row;
    for (int i = 0; i < m; ++i)
        if (sf.rel[i] != Relation::LessEq) ++n_art;

    Tableau tab;
    tab.m = m;
    tab.n_real = sf.n + n_slack;
    tab.n_total = tab.n_real + n_art;
    tab.t.assign(m, Vector(tab.n_total + 1, 0.0));
    tab.basis.assign(m, -1);

    int slack_at = sf.n, art_at = tab.n_real;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < sf.n; ++j) tab.t[i][j] = sf.a[i][j];
        tab.t[i][tab.n_total] = sf.b[i];
        switch (sf.rel[i]) {
        case Relation::LessEq:
            tab.t[i][slack_at] = 1.0;
            tab.basis[i] = slack_at++;
            break;
        case Relation::GreaterEq:
            tab.t[i][slack_at] = -1.0;
            ++slack_at;
            tab.t[i][art_at] = 1.0;
            tab.basis[i] = art_at++;
            art_row.push_back(i);
            break;
        case Relation::Equal:
            tab.t[i][art_at] = 1.0;
            tab.basis[i] = art_at++;
            art_row.push_back(i);
            break;
        }
    }

    tab.snapshot();

    LpResult res;
    if (n_art > 0) {
        // Phase 1: maximize -(sum of artificials).
        tab.cost.assign(tab.n_total, 0.0);
        for (int k = tab.n_real; k < tab.n_total; ++k) tab.cost[k] = -1.0;
        tab.rebuild_objective();
        tab.run(tab.n_total);
        if (-tab.obj[tab.n_total] > kFeasTol) {
            res.status = LpStatus::Infeasible;
            res.pivots = tab.pivots;
            return res;
        }
        // Drive remaining artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < tab.n_real) continue;
            int col = -1;
            for (int j = 0; j < tab.n_real; ++j)
                if (std::abs(tab.t[i][j]) > kPivotEps) { col = j; break; }
            if (col >= 0) tab.pivot(i, col);
            // Else the row is redundant; the artificial stays basic at zero.
        }
    }

    // Phase 2.
    tab.cost.assign(tab.n_total, 0.0);
    for (int j = 0; j < sf.n; ++j) tab.cost[j] = sf.c[j];
    tab.rebuild_objective();
    bool bounded = tab.run(tab.n_real);
    res.pivots = tab.pivots;
    if (!bounded) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    Vector x_std(tab.n_real, 0.0);
    auto refined = solve_basis(tab.a0, tab.b0, tab.basis);
    if (refined) {
        for (int i = 0; i < m; ++i)
            if ((*refined)[i] < -1e-7) { refined.reset(); break; }
    }
    if (refined) {
        for (int i = 0; i < m; ++i)
            if (tab.basis[i] < tab.n_real) x_std[tab.basis[i]] = std::max(0.0, (*refined)[i]);
    } else {
        for (int i = 0; i < m; ++i)
            if (tab.basis[i] < tab.n_real) x_std[tab.basis[i]] = tab.t[i][tab.n_total];
    }

    res.solution.assign(lp.num_vars, 0.0);
    for (int v = 0; v < lp.num_vars; ++v) res.solution[v] = sf.shift[v];
    for (std::size_t col = 0; col < sf.back.size(); ++col)
        res.solution[sf.back[col].first] += sf.back[col].second * x_std[col];

    res.objective = 0.0;
    for (int v = 0; v < lp.num_vars; ++v) res.objective += lp.objective[v] * res.solution[v];
    res.status = LpStatus::Optimal;

    // Sanity: optimal solutions must satisfy every constraint within kFeasTol.
    for (std::size_t ri = 0; ri < lp.rows.size(); ++ri) {
        const auto& row = lp.rows[ri];
        double lhs = 0.0, scale = 1.0;
        for (int v = 0; v < lp.num_vars; ++v) {
            lhs += row.coeffs[v] * res.solution[v];
            scale = std::max(scale, std::abs(row.coeffs[v]));
        }
        double viol = 0.0;
        if (row.rel == Relation::LessEq) viol = lhs - row.rhs;
        else if (row.rel == Relation::GreaterEq) viol = row.rhs - lhs;
        else viol = std::abs(lhs - row.rhs);
        if (viol > 1e-6 * scale)
            throw NumericalError("numerically unstable: constraint " + std::to_string(ri) +
                                 " violated by " + std::to_string(viol));
    }
    return res;
}

void dump_lp(const LinearProgram& lp, std::ostream& os) {
    os << "VDBELIEF-LP v1\n";
    os << "vars " << lp.num_vars << "\n";
    os << "maximize";
    for (double c : lp.objective) os << " " << std::setprecision(17) << c;
    os << "\n";
    os << "bounds\n";
    for (int v = 0; v < lp.num_vars; ++v)
        os << "  " << v << " " << lp.lower[v] << " " << lp.upper[v] << "\n";
    os << "rows " << lp.rows.size() << "\n";
    for (const auto& r : lp.rows) {
        os << " ";
        for (double c : r.coeffs) os << " " << c;
        os << (r.rel == Relation::LessEq ? " <= " : r.rel == Relation::Equal ? " == " : " >= ");
        os << r.rhs << "\n";
    }
}

DominanceOutcome dominance_test(const Vector& alpha, const std::vector<Vector>& others) {
    const int n = static_cast<int>(alpha.size());
    DominanceOutcome out;
    if (others.empty()) {
        out.dominated = false;
        out.margin = kInf;
        out.witness = BeliefState{Vector(n, 1.0 / n)};
        return out;
    }
    LinearProgram lp = LinearProgram::make(n + 1);
    const int d = n;
    lp.mark_free(d);
    lp.objective[d] = 1.0;
    for (const auto& o : others) {
        LinearProgram::Row row;
        row.coeffs.assign(n + 1, 0.0);
        for (int s = 0; s < n; ++s) row.coeffs[s] = alpha[s] - o[s];
        row.coeffs[d] = -1.0;
        row.rel = Relation::GreaterEq;
        row.rhs = 0.0;
        lp.rows.push_back(std::move(row));
    }
    LinearProgram::Row sum;
    sum.coeffs.assign(n + 1, 0.0);
    for (int s = 0; s < n; ++s) sum.coeffs[s] = 1.0;
    sum.rel = Relation::Equal;
    sum.rhs = 1.0;
    lp.rows.push_back(std::move(sum));

    LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal)
        throw NumericalError("dominance LP did not reach an optimum");
    out.margin = r.objective;
    out.dominated = r.objective <= kDomTol;
    if (!out.dominated) {
        Vector b(r.solution.begin(), r.solution.begin() + n);
        double s = 0.0;
        for (double& x : b) { x = std::max(0.0, x); s += x; }
        for (double& x : b) x /= s;
        out.witness = BeliefState{std::move(b)};
    }
    return out;
}

std::vector<LinearProgram::Row> marginal_equality_rows(const ProjectionScheme& scheme,
                                                       const StateSpace& space) {
    // One equality per assignment of each marginal. The equalities for the
    // proper subsets of a marginal follow by summation, so emitting them
    // would only add redundant (and degeneracy-inducing) rows; marginals
    // contained in other marginals are already absent from the canonical
    // scheme form.
    const int n = static_cast<int>(space.size());
    std::vector<LinearProgram::Row> rows;
    for (const auto& marginal : scheme.marginals) {
        const std::int64_t cells = space.sub_size(marginal);
        for (std::int64_t cell = 0; cell < cells; ++cell) {
            LinearProgram::Row row;
            row.coeffs.assign(2 * n + 1, 0.0);
            for (int s = 0; s < n; ++s) {
                if (space.sub_index(s, marginal) == cell) {
                    row.coeffs[s] = 1.0;      // b
                    row.coeffs[n + s] = -1.0; // b'
                }
            }
            row.rel = Relation::Equal;
            row.rhs = 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SwitchOutcome switch_test_with_rows(int i, int j, const std::vector<Vector>& vectors,
                                    const std::vector<LinearProgram::Row>& coupling_rows,
                                    const SwitchOptions& opts) {
    const int n = static_cast<int>(vectors[i].size());
    const int nv = 2 * n + 1;
    const int d = 2 * n;
    LinearProgram lp = LinearProgram::make(nv);
    lp.mark_free(d);
    lp.objective[d] = 1.0;

    auto optimality_rows = [&](int target, int offset) {
        for (std::size_t l = 0; l < vectors.size(); ++l) {
            if (static_cast<int>(l) == target) continue;
            LinearProgram::Row row;
            row.coeffs.assign(nv, 0.0);
            for (int s = 0; s < n; ++s) row.coeffs[offset + s] = vectors[target][s] - vectors[l][s];
            row.coeffs[d] = -1.0;
            row.rel = Relation::GreaterEq;
            row.rhs = 0.0;
            lp.rows.push_back(std::move(row));
        }
    };
    optimality_rows(i, 0);
    optimality_rows(j, n);

    for (const auto& row : coupling_rows) lp.rows.push_back(row);

    for (int offset : {0, n}) {
        LinearProgram::Row sum;
        sum.coeffs.assign(nv, 0.0);
        for (int s = 0; s < n; ++s) sum.coeffs[offset + s] = 1.0;
        sum.rel = Relation::Equal;
        sum.rhs = 1.0;
        lp.rows.push_back(std::move(sum));
    }

    SwitchOutcome out;
    try {
        LpResult r = solve_lp(lp);
        if (r.status != LpStatus::Optimal) {
            out.lp_failed = true;
            return out;
        }
        out.d_star = r.objective;
        out.feasible_positive =
            opts.include_ties ? (r.objective >= -kSwitchTol) : (r.objective > kSwitchTol);
    } catch (const NumericalError&) {
        out.lp_failed = true;
    }
    return out;
}

SwitchOutcome switch_test(int i, int j, const std::vector<Vector>& vectors,
                          const ProjectionScheme& scheme, const StateSpace& space,
                          const SwitchOptions& opts) {
    return switch_test_with_rows(i, j, vectors, marginal_equality_rows(scheme, space), opts);
}

} // namespace vdbelief
