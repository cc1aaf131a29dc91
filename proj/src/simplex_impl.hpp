// Internal two-phase tableau simplex over an exact or floating scalar.
// Not installed; included by lp_core.cpp only.
#ifndef RSHEDGE_SIMPLEX_IMPL_HPP
#define RSHEDGE_SIMPLEX_IMPL_HPP

#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "rshedge/lp_core.hpp"

namespace rshedge::lp::detail {

// Computational standard form: min c.z + c0  s.t.  A z = b, z >= 0, b >= 0.
// Built once in exact arithmetic; the float solver converts afterwards.
struct StdModel {
    int m = 0;        // rows
    int nstruct = 0;  // structural columns
    int ncols = 0;    // structural + slack + artificial
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;
    std::vector<Rat> c;
    Rat c0 = 0;
    std::vector<int> basis0;          // initial basic column per row
    std::vector<char> is_art;         // per column
    std::vector<int> dual_col;        // per row: column whose A-column is +-e_r
    std::vector<int> dual_col_sign;   // its coefficient (+1 or -1)
    std::vector<int> row_sign;        // per canonical row: +-1 vs original
    struct VMap {
        int pos = -1, neg = -1;  // structural columns
        Rat shift = 0;
        int sign = +1;  // x = sign*(z_pos [- z_neg]) + shift
    };
    std::vector<VMap> vmap;
    int ncanon = 0;  // canonical rows = lp.rows + one LE row per boxed var
    bool maximize = false;
    bool trivially_infeasible = false;  // some var has hi < lo
    int bad_var = -1;
};

// Fully canonicalized copy of an LP. GMP rationals constructed from raw
// num/den pairs are not reduced automatically; exact comparisons require
// canonical form, so every entry point normalizes once.
inline LinearProgram normalized(const LinearProgram& lp) {
    LinearProgram out = lp;
    auto cc = [](Rat& x) { x.canonicalize(); };
    for (auto& t : out.objective) cc(t.coef);
    cc(out.objective_constant);
    for (auto& b : out.bounds) {
        if (b.lo) cc(*b.lo);
        if (b.hi) cc(*b.hi);
    }
    for (auto& r : out.rows) {
        cc(r.rhs);
        for (auto& t : r.terms) cc(t.coef);
    }
    return out;
}

// Canonical row view: original rows followed by "x_j <= hi_j" for every
// boxed variable (finite lo and hi), ordered by variable index. Certificate
// vectors are indexed against this list.
inline std::vector<Row> canonical_rows(const LinearProgram& lp) {
    std::vector<Row> rows = lp.rows;
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& bd = lp.bounds[j];
        if (bd.lo.has_value() && bd.hi.has_value()) {
            Row r;
            r.terms.push_back({j, Rat(1)});
            r.rel = Rel::LE;
            r.rhs = *bd.hi;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

inline StdModel build_std(const LinearProgram& lp) {
    StdModel sm;
    sm.maximize = (lp.sense == Sense::Max);
    const int nv = lp.num_vars();
    sm.vmap.resize(nv);

    // structural columns
    int col = 0;
    for (int j = 0; j < nv; ++j) {
        const auto& bd = lp.bounds[j];
        auto& vm = sm.vmap[j];
        if (bd.lo.has_value() && bd.hi.has_value() && *bd.hi < *bd.lo) {
            sm.trivially_infeasible = true;
            sm.bad_var = j;
        }
        if (bd.lo.has_value()) {
            vm.pos = col++;
            vm.shift = *bd.lo;
            vm.sign = +1;
        } else if (bd.hi.has_value()) {
            vm.pos = col++;
            vm.shift = *bd.hi;
            vm.sign = -1;  // x = hi - z
        } else {
            vm.pos = col++;
            vm.neg = col++;
            vm.sign = +1;  // x = z_pos - z_neg
        }
    }
    sm.nstruct = col;

    std::vector<Row> rows = canonical_rows(lp);
    sm.ncanon = static_cast<int>(rows.size());
    sm.m = sm.ncanon;

    // objective over structural columns (sense-normalized to Min)
    std::vector<Rat> cobj(sm.nstruct, Rat(0));
    for (const auto& t : lp.objective) {
        Rat cj = sm.maximize ? Rat(-t.coef) : t.coef;
        const auto& vm = sm.vmap[t.var];
        cobj[vm.pos] += cj * vm.sign;
        if (vm.neg >= 0) cobj[vm.neg] -= cj;
        sm.c0 += cj * vm.shift;
    }

    // dense rows over structural columns, rhs adjusted by shifts
    std::vector<std::vector<Rat>> dense(sm.m, std::vector<Rat>(sm.nstruct, Rat(0)));
    std::vector<Rat> rhs(sm.m);
    std::vector<Rel> rel(sm.m);
    for (int r = 0; r < sm.m; ++r) {
        rel[r] = rows[r].rel;
        Rat b = rows[r].rhs;
        for (const auto& t : rows[r].terms) {
            const auto& vm = sm.vmap[t.var];
            dense[r][vm.pos] += t.coef * vm.sign;
            if (vm.neg >= 0) dense[r][vm.neg] -= t.coef;
            b -= t.coef * vm.shift;
        }
        rhs[r] = std::move(b);
    }

    // slack columns
    int nslack = 0;
    for (int r = 0; r < sm.m; ++r)
        if (rel[r] != Rel::EQ) ++nslack;

    sm.row_sign.assign(sm.m, +1);
    std::vector<int> slack_col(sm.m, -1), slack_sign(sm.m, 0);
    int scol = sm.nstruct;
    for (int r = 0; r < sm.m; ++r) {
        if (rel[r] == Rel::LE) {
            slack_col[r] = scol++;
            slack_sign[r] = +1;
        } else if (rel[r] == Rel::GE) {
            slack_col[r] = scol++;
            slack_sign[r] = -1;
        }
    }
    // sign rows so rhs >= 0
    for (int r = 0; r < sm.m; ++r) {
        if (sgn(rhs[r]) < 0) {
            sm.row_sign[r] = -1;
            rhs[r] = -rhs[r];
            for (auto& a : dense[r]) a = -a;
            slack_sign[r] = -slack_sign[r];
        }
    }
    // artificials where the slack cannot seed the basis
    std::vector<int> art_col(sm.m, -1);
    int acol = sm.nstruct + nslack;
    for (int r = 0; r < sm.m; ++r)
        if (!(slack_col[r] >= 0 && slack_sign[r] == +1)) art_col[r] = acol++;
    sm.ncols = acol;

    sm.A.assign(sm.m, std::vector<Rat>(sm.ncols, Rat(0)));
    sm.b = rhs;
    for (int r = 0; r < sm.m; ++r) {
        for (int j = 0; j < sm.nstruct; ++j) sm.A[r][j] = std::move(dense[r][j]);
        if (slack_col[r] >= 0) sm.A[r][slack_col[r]] = slack_sign[r];
        if (art_col[r] >= 0) sm.A[r][art_col[r]] = 1;
    }
    sm.c.assign(sm.ncols, Rat(0));
    for (int j = 0; j < sm.nstruct; ++j) sm.c[j] = std::move(cobj[j]);
    sm.is_art.assign(sm.ncols, 0);
    for (int r = 0; r < sm.m; ++r)
        if (art_col[r] >= 0) sm.is_art[art_col[r]] = 1;

    sm.basis0.resize(sm.m);
    sm.dual_col.resize(sm.m);
    sm.dual_col_sign.resize(sm.m);
    for (int r = 0; r < sm.m; ++r) {
        sm.basis0[r] = art_col[r] >= 0 ? art_col[r] : slack_col[r];
        if (art_col[r] >= 0) {
            sm.dual_col[r] = art_col[r];
            sm.dual_col_sign[r] = +1;
        } else {
            sm.dual_col[r] = slack_col[r];
            sm.dual_col_sign[r] = slack_sign[r];
        }
    }
    return sm;
}

template <class Num>
struct NumOps;

template <>
struct NumOps<Rat> {
    int sign(const Rat& x) const { return sgn(x); }
    bool feasible_rhs(const Rat& x) const { return sgn(x) >= 0; }
};

template <>
struct NumOps<double> {
    double eps_zero;
    explicit NumOps(double e = 1e-11) : eps_zero(e) {}
    int sign(double x) const { return x > eps_zero ? 1 : (x < -eps_zero ? -1 : 0); }
    bool feasible_rhs(double x) const { return x >= -eps_zero; }
};

// Tableau simplex. Entering rule: most negative reduced cost with
// smallest-index tie-break; after a run of degenerate pivots it falls back
// to Bland's smallest-index rule until the objective strictly improves,
// which guarantees termination. Leaving rule: minimum ratio, ties broken
// by smallest basic column index. Fully deterministic.
template <class Num>
class Tableau {
  public:
    enum class RunStatus { Optimal, Infeasible, Unbounded };

    Tableau(const StdModel& sm, NumOps<Num> ops) : ops_(ops), m_(sm.m), n_(sm.ncols) {
        T_.assign(m_, std::vector<Num>(n_, Num(0)));
        tb_.assign(m_, Num(0));
        c_.assign(n_, Num(0));
        for (int r = 0; r < m_; ++r) {
            for (int j = 0; j < n_; ++j) T_[r][j] = conv(sm.A[r][j]);
            tb_[r] = conv(sm.b[r]);
        }
        for (int j = 0; j < n_; ++j) c_[j] = conv(sm.c[j]);
        is_art_ = sm.is_art;
        basis_ = sm.basis0;
        in_basis_.assign(n_, 0);
        for (int r = 0; r < m_; ++r) in_basis_[basis_[r]] = 1;
        barred_.assign(n_, 0);

        z2_ = c_;
        z2val_ = Num(0);
        z1_.assign(n_, Num(0));
        z1val_ = Num(0);
        has_art_ = false;
        for (int j = 0; j < n_; ++j)
            if (is_art_[j]) {
                z1_[j] = Num(1);
                has_art_ = true;
            }
        // reduce cost rows against the initial basis
        for (int r = 0; r < m_; ++r) {
            int bc = basis_[r];
            if (ops_.sign(z1_[bc]) != 0) sub_scaled(z1_, z1val_, z1_[bc], r);
            if (ops_.sign(z2_[bc]) != 0) sub_scaled(z2_, z2val_, z2_[bc], r);
        }
    }

    RunStatus run() {
        if (has_art_) {
            iterate(/*phase1=*/true);
            if (ops_.sign(z1val_) != 0) return RunStatus::Infeasible;
            purge_artificials();
        }
        return iterate(/*phase1=*/false) ? RunStatus::Optimal : RunStatus::Unbounded;
    }

    // current basic solution over std columns
    std::vector<Num> solution() const {
        std::vector<Num> z(n_, Num(0));
        for (int r = 0; r < m_; ++r) z[basis_[r]] = tb_[r];
        return z;
    }
    // y_r recovered from the requested cost row via the row's unit column
    std::vector<Num> duals(const StdModel& sm, bool phase1) const {
        const std::vector<Num>& z = phase1 ? z1_ : z2_;
        std::vector<Num> y(m_, Num(0));
        for (int r = 0; r < m_; ++r) {
            Num v = z[sm.dual_col[r]];
            // reduced cost of a +-e_r column with zero objective coefficient
            // (phase 2) is -+y_r; in phase 1 artificials cost 1.
            if (phase1 && is_art_[sm.dual_col[r]]) v = v - Num(1);
            if (sm.dual_col_sign[r] == +1)
                y[r] = -v;
            else
                y[r] = v;
        }
        return y;
    }
    Num objective(bool phase1) const { return phase1 ? -z1val_ : -z2val_; }
    int ray_col() const { return ray_col_; }
    std::vector<Num> ray_direction() const {
        std::vector<Num> d(n_, Num(0));
        d[ray_col_] = Num(1);
        for (int r = 0; r < m_; ++r) {
            if (ops_.sign(T_[r][ray_col_]) != 0) d[basis_[r]] = -T_[r][ray_col_];
        }
        return d;
    }
    long pivots() const { return pivots_; }

  private:
    Num conv(const Rat& x) const {
        if constexpr (std::is_same_v<Num, Rat>)
            return x;
        else
            return x.get_d();
    }

    // cost_row -= factor * T[r];  val -= factor * tb[r]
    void sub_scaled(std::vector<Num>& zrow, Num& zval, Num factor, int r) {
        Num f = factor;
        const auto& row = T_[r];
        for (int j = 0; j < n_; ++j) {
            if (ops_.sign(row[j]) != 0) {
                tmp_ = f;
                tmp_ *= row[j];
                zrow[j] -= tmp_;
            }
        }
        tmp_ = f;
        tmp_ *= tb_[r];
        zval -= tmp_;
    }

    void pivot(int p, int q, bool phase1) {
        // normalize pivot row
        Num piv = T_[p][q];
        if (ops_.sign(piv) != 1 && ops_.sign(piv) != -1)
            throw std::logic_error("simplex: zero pivot");
        nz_.clear();
        for (int j = 0; j < n_; ++j) {
            if (ops_.sign(T_[p][j]) != 0) {
                T_[p][j] /= piv;
                nz_.push_back(j);
            }
        }
        tb_[p] /= piv;
        for (int r = 0; r < m_; ++r) {
            if (r == p) continue;
            Num f = T_[r][q];
            if (ops_.sign(f) == 0) continue;
            for (int j : nz_) {
                tmp_ = f;
                tmp_ *= T_[p][j];
                T_[r][j] -= tmp_;
            }
            tmp_ = f;
            tmp_ *= tb_[p];
            tb_[r] -= tmp_;
        }
        auto update_cost = [&](std::vector<Num>& zrow, Num& zval) {
            Num f = zrow[q];
            if (ops_.sign(f) == 0) return;
            for (int j : nz_) {
                tmp_ = f;
                tmp_ *= T_[p][j];
                zrow[j] -= tmp_;
            }
            tmp_ = f;
            tmp_ *= tb_[p];
            zval -= tmp_;
        };
        update_cost(z1_, z1val_);
        update_cost(z2_, z2val_);
        if (phase1 && is_art_[basis_[p]]) barred_[basis_[p]] = 1;
        in_basis_[basis_[p]] = 0;
        basis_[p] = q;
        in_basis_[q] = 1;
        ++pivots_;
        if (pivots_ > pivot_cap_) throw std::runtime_error("simplex: pivot cap exceeded");
    }

    bool eligible(int j, bool phase1) const {
        if (in_basis_[j] || barred_[j]) return false;
        if (!phase1 && is_art_[j]) return false;
        return true;
    }

    int choose_entering(const std::vector<Num>& z, bool phase1, bool bland) const {
        int best = -1;
        for (int j = 0; j < n_; ++j) {
            if (!eligible(j, phase1)) continue;
            if (ops_.sign(z[j]) < 0) {
                if (bland) return j;
                if (best < 0 || z[j] < z[best]) best = j;
            }
        }
        return best;
    }

    int choose_leaving(int q) const {
        int best = -1;
        for (int r = 0; r < m_; ++r) {
            if (ops_.sign(T_[r][q]) <= 0) continue;
            if (best < 0) {
                best = r;
                continue;
            }
            // compare tb[r]/T[r][q] vs tb[best]/T[best][q] without division
            tmpa_ = tb_[r];
            tmpa_ *= T_[best][q];
            tmpb_ = tb_[best];
            tmpb_ *= T_[r][q];
            if (tmpa_ < tmpb_ || (tmpa_ == tmpb_ && basis_[r] < basis_[best])) best = r;
        }
        return best;
    }

    // returns false on unbounded (phase 2 only)
    bool iterate(bool phase1) {
        std::vector<Num>& z = phase1 ? z1_ : z2_;
        Num& zval = phase1 ? z1val_ : z2val_;
        int degen = 0;
        bool bland = false;
        while (true) {
            if (phase1 && ops_.sign(zval) == 0) return true;  // feasibility reached
            int q = choose_entering(z, phase1, bland);
            if (q < 0) return true;
            int p = choose_leaving(q);
            if (p < 0) {
                if (phase1) throw std::logic_error("simplex: phase-1 unbounded");
                ray_col_ = q;
                return false;
            }
            bool was_degen = (ops_.sign(tb_[p]) == 0);
            pivot(p, q, phase1);
            if (was_degen) {
                if (++degen > degen_limit_) bland = true;
            } else {
                degen = 0;
                bland = false;
            }
        }
    }

    // After a feasible phase 1, pivot remaining artificials out of the basis
    // where the row has structural support; rows without it are redundant and
    // keep their zero-valued artificial.
    void purge_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (!is_art_[basis_[r]]) continue;
            int q = -1;
            for (int j = 0; j < n_; ++j) {
                if (is_art_[j] || in_basis_[j]) continue;
                if (ops_.sign(T_[r][j]) != 0) {
                    q = j;
                    break;
                }
            }
            if (q >= 0) pivot(r, q, /*phase1=*/true);
        }
    }

    NumOps<Num> ops_;
    int m_, n_;
    std::vector<std::vector<Num>> T_;
    std::vector<Num> tb_;
    std::vector<Num> c_, z1_, z2_;
    Num z1val_{0}, z2val_{0};
    Num tmp_{0};
    mutable Num tmpa_{0}, tmpb_{0};
    std::vector<char> is_art_, in_basis_, barred_;
    std::vector<int> basis_;
    std::vector<int> nz_;
    bool has_art_ = false;
    int ray_col_ = -1;
    long pivots_ = 0;
    long pivot_cap_ = 4000000;
    static constexpr int degen_limit_ = 32;
};

}  // namespace rshedge::lp::detail

#endif
