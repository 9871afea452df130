#ifndef JLW_LP_HPP
#define JLW_LP_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "jlw/rational.hpp"

namespace jlw {

// ============================================================================
// Exact rational linear programming
// ============================================================================

enum class Relation { less_equal, equal, greater_equal };

/**
 * minimize objective . x  subject to  rows, x >= 0.
 * Free variables are expressed by callers as differences of two columns.
 */
struct LinearProgram {
    int vars = 0;
    std::vector<Rational> objective;  // size vars
    struct Row {
        std::vector<Rational> coeffs;  // size vars
        Relation relation = Relation::less_equal;
        Rational rhs;
    };
    std::vector<Row> rows;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Rational value;
    std::vector<Rational> x;  // size vars when optimal
};

namespace detail {

/// Dense simplex tableau. Column layout: structural, slack, artificial; the
/// trailing column holds the right-hand side. Basic columns stay unit.
struct Tableau {
    std::vector<std::vector<Rational>> t;  // m rows of (cols + 1)
    std::vector<int> basis;                // size m
    int cols = 0;

    void pivot(std::size_t row, int col) {
        const Rational p = t[row][static_cast<std::size_t>(col)];
        for (auto& v : t[row]) v /= p;
        for (std::size_t r = 0; r < t.size(); ++r) {
            if (r == row) continue;
            const Rational f = t[r][static_cast<std::size_t>(col)];
            if (f == 0) continue;
            for (std::size_t c = 0; c < t[r].size(); ++c) t[r][c] -= f * t[row][c];
        }
        basis[row] = col;
    }
};

/**
 * Minimizes cost over the tableau with Bland's rule (lowest eligible entering
 * column, lowest basic index on ratio ties), which excludes cycling. Columns
 * with allowed[c] == false are never entered. Returns false when unbounded.
 */
inline bool simplex(Tableau& tab, const std::vector<Rational>& cost, const std::vector<bool>& allowed) {
    const std::size_t m = tab.t.size();
    while (true) {
        // reduced costs against the current basis
        int entering = -1;
        for (int c = 0; c < tab.cols; ++c) {
            if (!allowed[static_cast<std::size_t>(c)]) continue;
            Rational reduced = cost[static_cast<std::size_t>(c)];
            for (std::size_t r = 0; r < m; ++r) {
                const Rational& a = tab.t[r][static_cast<std::size_t>(c)];
                if (a != 0) reduced -= cost[static_cast<std::size_t>(tab.basis[r])] * a;
            }
            if (reduced < 0) {
                entering = c;
                break;
            }
        }
        if (entering < 0) return true;

        std::size_t leaving = m;
        Rational best_ratio;
        for (std::size_t r = 0; r < m; ++r) {
            const Rational& a = tab.t[r][static_cast<std::size_t>(entering)];
            if (a <= 0) continue;
            const Rational ratio = tab.t[r].back() / a;
            if (leaving == m || ratio < best_ratio ||
                (ratio == best_ratio && tab.basis[r] < tab.basis[leaving])) {
                leaving = r;
                best_ratio = ratio;
            }
        }
        if (leaving == m) return false;
        tab.pivot(leaving, entering);
    }
}

}  // namespace detail

/**
 * Two-phase exact simplex. Every pivot is rational, so optima and feasibility
 * are exact; callers may compare returned values with ==.
 */
inline LpSolution solve(const LinearProgram& lp) {
    for (const auto& row : lp.rows)
        if (static_cast<int>(row.coeffs.size()) != lp.vars)
            throw std::invalid_argument("linear program row width does not match variable count");
    if (static_cast<int>(lp.objective.size()) != lp.vars)
        throw std::invalid_argument("linear program objective width does not match variable count");

    const std::size_t m = lp.rows.size();
    int n_slack = 0;
    for (const auto& row : lp.rows)
        if (row.relation != Relation::equal) ++n_slack;

    detail::Tableau tab;
    tab.basis.assign(m, -1);
    std::vector<bool> is_artificial;
    // First pass: normalize rhs >= 0, lay out slack columns, then artificials.
    std::vector<LinearProgram::Row> rows = lp.rows;
    for (auto& row : rows) {
        if (row.rhs < 0) {
            for (auto& c : row.coeffs) c = -c;
            row.rhs = -row.rhs;
            if (row.relation == Relation::less_equal)
                row.relation = Relation::greater_equal;
            else if (row.relation == Relation::greater_equal)
                row.relation = Relation::less_equal;
        }
    }
    int n_art = 0;
    for (const auto& row : rows)
        if (row.relation != Relation::less_equal) ++n_art;
    tab.cols = lp.vars + n_slack + n_art;
    is_artificial.assign(static_cast<std::size_t>(tab.cols), false);

    tab.t.assign(m, std::vector<Rational>(static_cast<std::size_t>(tab.cols) + 1));
    int slack_at = lp.vars;
    int art_at = lp.vars + n_slack;
    for (std::size_t r = 0; r < m; ++r) {
        auto& out = tab.t[r];
        for (int c = 0; c < lp.vars; ++c) out[static_cast<std::size_t>(c)] = rows[r].coeffs[static_cast<std::size_t>(c)];
        out.back() = rows[r].rhs;
        switch (rows[r].relation) {
            case Relation::less_equal:
                out[static_cast<std::size_t>(slack_at)] = 1;
                tab.basis[r] = slack_at++;
                break;
            case Relation::greater_equal:
                out[static_cast<std::size_t>(slack_at)] = -1;
                ++slack_at;
                [[fallthrough]];
            case Relation::equal:
                out[static_cast<std::size_t>(art_at)] = 1;
                is_artificial[static_cast<std::size_t>(art_at)] = true;
                tab.basis[r] = art_at++;
                break;
        }
    }

    std::vector<bool> all_cols(static_cast<std::size_t>(tab.cols), true);
    if (n_art > 0) {
        std::vector<Rational> phase1(static_cast<std::size_t>(tab.cols));
        for (int c = 0; c < tab.cols; ++c)
            if (is_artificial[static_cast<std::size_t>(c)]) phase1[static_cast<std::size_t>(c)] = 1;
        detail::simplex(tab, phase1, all_cols);  // bounded below by 0
        Rational infeasibility = 0;
        for (std::size_t r = 0; r < tab.t.size(); ++r)
            if (is_artificial[static_cast<std::size_t>(tab.basis[r])]) infeasibility += tab.t[r].back();
        if (infeasibility != 0) return {LpStatus::infeasible, Rational(0), {}};
        // Drive surviving artificials out of the basis; drop redundant rows.
        for (std::size_t r = 0; r < tab.t.size();) {
            if (!is_artificial[static_cast<std::size_t>(tab.basis[r])]) {
                ++r;
                continue;
            }
            int col = -1;
            for (int c = 0; c < tab.cols; ++c)
                if (!is_artificial[static_cast<std::size_t>(c)] && tab.t[r][static_cast<std::size_t>(c)] != 0) {
                    col = c;
                    break;
                }
            if (col >= 0) {
                tab.pivot(r, col);
                ++r;
            } else {
                tab.t.erase(tab.t.begin() + static_cast<std::ptrdiff_t>(r));
                tab.basis.erase(tab.basis.begin() + static_cast<std::ptrdiff_t>(r));
            }
        }
    }

    std::vector<bool> structural_and_slack(static_cast<std::size_t>(tab.cols));
    for (int c = 0; c < tab.cols; ++c) structural_and_slack[static_cast<std::size_t>(c)] = !is_artificial[static_cast<std::size_t>(c)];
    std::vector<Rational> cost(static_cast<std::size_t>(tab.cols));
    for (int c = 0; c < lp.vars; ++c) cost[static_cast<std::size_t>(c)] = lp.objective[static_cast<std::size_t>(c)];
    if (!detail::simplex(tab, cost, structural_and_slack)) return {LpStatus::unbounded, Rational(0), {}};

    LpSolution solution;
    solution.status = LpStatus::optimal;
    solution.x.assign(static_cast<std::size_t>(lp.vars), Rational(0));
    for (std::size_t r = 0; r < tab.t.size(); ++r)
        if (tab.basis[r] < lp.vars) solution.x[static_cast<std::size_t>(tab.basis[r])] = tab.t[r].back();
    solution.value = 0;
    for (int c = 0; c < lp.vars; ++c) solution.value += lp.objective[static_cast<std::size_t>(c)] * solution.x[static_cast<std::size_t>(c)];
    return solution;
}

}  // namespace jlw

#endif  // JLW_LP_HPP
