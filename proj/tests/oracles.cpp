#include "oracles.hpp"

#include <algorithm>
#include <set>

namespace rshedge::oracles {

std::optional<std::vector<Rat>> gauss_solve(std::vector<std::vector<Rat>> A,
                                            std::vector<Rat> b) {
    const int n = static_cast<int>(A.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (sgn(A[r][col]) != 0) {
                piv = r;
                break;
            }
        if (piv < 0) return std::nullopt;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col || sgn(A[r][col]) == 0) continue;
            Rat f = A[r][col] / A[col][col];
            for (int j = col; j < n; ++j) A[r][j] -= f * A[col][j];
            b[r] -= f * b[col];
        }
    }
    std::vector<Rat> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

namespace {

struct LinCon {  // a.x = rhs candidates (rows tight, or bounds tight)
    std::vector<Rat> a;
    Rat rhs;
};

bool feasible_point(const lp::LinearProgram& lp, const std::vector<Rat>& x) {
    for (int j = 0; j < lp.num_vars(); ++j) {
        if (lp.bounds[j].lo && x[j] < *lp.bounds[j].lo) return false;
        if (lp.bounds[j].hi && x[j] > *lp.bounds[j].hi) return false;
    }
    for (const auto& r : lp.rows) {
        Rat v = 0;
        for (const auto& t : r.terms) v += t.coef * x[t.var];
        if (r.rel == lp::Rel::LE && v > r.rhs) return false;
        if (r.rel == lp::Rel::GE && v < r.rhs) return false;
        if (r.rel == lp::Rel::EQ && v != r.rhs) return false;
    }
    return true;
}

}  // namespace

std::vector<std::vector<Rat>> enumerate_vertices(const lp::LinearProgram& lp_in) {
    const lp::LinearProgram lp = lp::normalized_copy(lp_in);
    const int n = lp.num_vars();
    std::vector<LinCon> cons;
    for (const auto& r : lp.rows) {
        LinCon c;
        c.a.assign(n, Rat(0));
        for (const auto& t : r.terms) c.a[t.var] += t.coef;
        c.rhs = r.rhs;
        cons.push_back(std::move(c));
    }
    for (int j = 0; j < n; ++j) {
        if (lp.bounds[j].lo) {
            LinCon c;
            c.a.assign(n, Rat(0));
            c.a[j] = 1;
            c.rhs = *lp.bounds[j].lo;
            cons.push_back(std::move(c));
        }
        if (lp.bounds[j].hi) {
            LinCon c;
            c.a.assign(n, Rat(0));
            c.a[j] = 1;
            c.rhs = *lp.bounds[j].hi;
            cons.push_back(std::move(c));
        }
    }
    const int m = static_cast<int>(cons.size());
    std::vector<std::vector<Rat>> out;
    std::set<std::vector<std::string>> seen;
    std::vector<int> idx(n, 0);
    // enumerate n-subsets of cons
    std::vector<int> comb(n);
    for (int i = 0; i < n; ++i) comb[i] = i;
    if (m < n) return out;
    while (true) {
        std::vector<std::vector<Rat>> A(n, std::vector<Rat>(n));
        std::vector<Rat> b(n);
        for (int i = 0; i < n; ++i) {
            A[i] = cons[comb[i]].a;
            b[i] = cons[comb[i]].rhs;
        }
        auto x = gauss_solve(A, b);
        if (x && feasible_point(lp, *x)) {
            std::vector<std::string> key;
            for (const auto& v : *x) key.push_back(rat_to_string(v));
            if (seen.insert(key).second) out.push_back(*x);
        }
        // next combination
        int i = n - 1;
        while (i >= 0 && comb[i] == m - n + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < n; ++j) comb[j] = comb[j - 1] + 1;
    }
    return out;
}

std::optional<Rat> brute_force_optimum(const lp::LinearProgram& lp_in) {
    const lp::LinearProgram lp = lp::normalized_copy(lp_in);
    auto verts = enumerate_vertices(lp);
    if (verts.empty()) return std::nullopt;
    std::optional<Rat> best;
    for (const auto& v : verts) {
        Rat obj = lp.objective_constant;
        for (const auto& t : lp.objective) obj += t.coef * v[t.var];
        if (!best) {
            best = obj;
        } else if (lp.sense == lp::Sense::Min ? obj < *best : obj > *best) {
            best = obj;
        }
    }
    return best;
}

std::vector<std::vector<Rat>> martingale_polytope_vertices(
    const std::vector<std::vector<Rat>>& dS) {
    const int n = static_cast<int>(dS.size());
    const int d = n == 0 ? 0 : static_cast<int>(dS[0].size());
    lp::LinearProgram lp;
    for (int i = 0; i < n; ++i) lp.add_var("q" + std::to_string(i), Rat(0), Rat(1));
    auto& mass = lp.add_row(lp::Rel::EQ, Rat(1), "mass");
    for (int i = 0; i < n; ++i) mass.terms.push_back({i, Rat(1)});
    for (int j = 0; j < d; ++j) {
        auto& row = lp.add_row(lp::Rel::EQ, Rat(0), "mart" + std::to_string(j));
        for (int i = 0; i < n; ++i)
            if (sgn(dS[i][j]) != 0) row.terms.push_back({i, dS[i][j]});
    }
    return enumerate_vertices(lp);
}

}  // namespace rshedge::oracles
