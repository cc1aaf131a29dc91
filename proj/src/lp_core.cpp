#include "rshedge/lp_core.hpp"

#include <cmath>
#include <sstream>

#include "rshedge/errors.hpp"
#include "simplex_impl.hpp"

namespace rshedge::lp {

using detail::StdModel;
using detail::Tableau;

namespace {

template <class Num>
std::vector<Num> map_point(const StdModel& sm, const std::vector<Num>& z) {
    std::vector<Num> x(sm.vmap.size(), Num(0));
    for (std::size_t j = 0; j < sm.vmap.size(); ++j) {
        const auto& vm = sm.vmap[j];
        Num v = z[vm.pos];
        if (vm.sign < 0) v = -v;
        if (vm.neg >= 0) v -= z[vm.neg];
        if constexpr (std::is_same_v<Num, Rat>)
            x[j] = v + vm.shift;
        else
            x[j] = v + vm.shift.get_d();
    }
    return x;
}

template <class Num>
std::vector<Num> map_ray(const StdModel& sm, const std::vector<Num>& d) {
    std::vector<Num> x(sm.vmap.size(), Num(0));
    for (std::size_t j = 0; j < sm.vmap.size(); ++j) {
        const auto& vm = sm.vmap[j];
        Num v = d[vm.pos];
        if (vm.sign < 0) v = -v;
        if (vm.neg >= 0) v -= d[vm.neg];
        x[j] = v;
    }
    return x;
}

template <class Num>
std::vector<Num> map_duals(const StdModel& sm, std::vector<Num> y, bool flip_sense) {
    for (int r = 0; r < sm.ncanon; ++r) {
        if (sm.row_sign[r] < 0) y[r] = -y[r];
        if (flip_sense) y[r] = -y[r];
    }
    return y;
}

}  // namespace

LpOutcome solve_rational(const LinearProgram& lp_in) {
    const LinearProgram lp = detail::normalized(lp_in);
    StdModel sm = detail::build_std(lp);
    LpOutcome out;
    if (sm.trivially_infeasible) {
        out.status = Status::Infeasible;
        out.value = lp.sense == Sense::Min ? XR::pos_inf() : XR::neg_inf();
        out.farkas.assign(sm.ncanon, Rat(0));
        // multiplier -1 on the synthesized row x_j <= hi_j; the lower bound
        // lo_j > hi_j closes the contradiction.
        int extra = static_cast<int>(lp.rows.size());
        for (int j = 0; j < lp.num_vars(); ++j) {
            const auto& bd = lp.bounds[j];
            if (bd.lo.has_value() && bd.hi.has_value()) {
                if (j == sm.bad_var) {
                    out.farkas[extra] = Rat(-1);
                    break;
                }
                ++extra;
            }
        }
        return out;
    }
    Tableau<Rat> tab(sm, detail::NumOps<Rat>{});
    auto rs = tab.run();
    out.pivots = tab.pivots();
    switch (rs) {
        case Tableau<Rat>::RunStatus::Infeasible: {
            out.status = Status::Infeasible;
            out.value = lp.sense == Sense::Min ? XR::pos_inf() : XR::neg_inf();
            out.farkas = map_duals(sm, tab.duals(sm, /*phase1=*/true), false);
            break;
        }
        case Tableau<Rat>::RunStatus::Unbounded: {
            out.status = Status::Unbounded;
            out.value = lp.sense == Sense::Min ? XR::neg_inf() : XR::pos_inf();
            out.primal = map_point(sm, tab.solution());
            out.ray = map_ray(sm, tab.ray_direction());
            break;
        }
        case Tableau<Rat>::RunStatus::Optimal: {
            out.status = Status::Optimal;
            out.primal = map_point(sm, tab.solution());
            Rat v = tab.objective(/*phase1=*/false) + sm.c0;
            if (sm.maximize) v = -v;
            out.value = XR(v + lp.objective_constant);
            out.row_duals = map_duals(sm, tab.duals(sm, false), sm.maximize);
            break;
        }
    }
    return out;
}

namespace {

// Effective bound view used by the certificate checks: boxed variables have
// their upper bound expressed as a canonical row, so only the lower bound
// remains on the variable itself.
struct EffBound {
    std::optional<Rat> lo, hi;
};

std::vector<EffBound> effective_bounds(const LinearProgram& lp) {
    std::vector<EffBound> eb(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& bd = lp.bounds[j];
        eb[j].lo = bd.lo;
        eb[j].hi = (bd.lo.has_value() && bd.hi.has_value()) ? std::nullopt : bd.hi;
    }
    return eb;
}

bool fail(std::string* why, const std::string& msg) {
    if (why) *why = msg;
    return false;
}

}  // namespace

bool check_certificate(const LinearProgram& lp_in, const LpOutcome& out, std::string* why) {
    const LinearProgram lp = detail::normalized(lp_in);
    const auto canon = detail::canonical_rows(lp);
    const auto eb = effective_bounds(lp);
    const int nv = lp.num_vars();
    const int nr = static_cast<int>(canon.size());
    const bool maximize = lp.sense == Sense::Max;

    auto row_value = [&](const Row& r, const std::vector<Rat>& x) {
        Rat v = 0;
        for (const auto& t : r.terms) v += t.coef * x[t.var];
        return v;
    };
    auto primal_feasible = [&](const std::vector<Rat>& x) -> bool {
        if (static_cast<int>(x.size()) != nv) return false;
        for (int j = 0; j < nv; ++j) {
            if (lp.bounds[j].lo && x[j] < *lp.bounds[j].lo) return false;
            if (lp.bounds[j].hi && x[j] > *lp.bounds[j].hi) return false;
        }
        for (const auto& r : lp.rows) {
            Rat v = row_value(r, x);
            if (r.rel == Rel::LE && v > r.rhs) return false;
            if (r.rel == Rel::GE && v < r.rhs) return false;
            if (r.rel == Rel::EQ && v != r.rhs) return false;
        }
        return true;
    };

    if (out.status == Status::Optimal) {
        if (!out.value.finite()) return fail(why, "optimal value not finite");
        if (!primal_feasible(out.primal)) return fail(why, "primal witness infeasible");
        Rat pobj = lp.objective_constant;
        for (const auto& t : lp.objective) pobj += t.coef * out.primal[t.var];
        if (pobj != out.value.val()) return fail(why, "objective mismatch");
        if (static_cast<int>(out.row_duals.size()) != nr)
            return fail(why, "dual vector size");
        // min-space conversion
        std::vector<Rat> y(out.row_duals);
        if (maximize)
            for (auto& v : y) v = -v;
        for (int r = 0; r < nr; ++r) {
            if (canon[r].rel == Rel::GE && sgn(y[r]) < 0)
                return fail(why, "dual sign on >= row");
            if (canon[r].rel == Rel::LE && sgn(y[r]) > 0)
                return fail(why, "dual sign on <= row");
        }
        std::vector<Rat> d(nv, Rat(0));
        for (const auto& t : lp.objective)
            d[t.var] += maximize ? Rat(-t.coef) : t.coef;
        for (int r = 0; r < nr; ++r) {
            if (sgn(y[r]) == 0) continue;
            for (const auto& t : canon[r].terms) d[t.var] -= y[r] * t.coef;
        }
        Rat dobj = 0;
        for (int r = 0; r < nr; ++r) dobj += y[r] * canon[r].rhs;
        for (int j = 0; j < nv; ++j) {
            const bool lo = eb[j].lo.has_value(), hi = eb[j].hi.has_value();
            if (!lo && !hi) {
                if (sgn(d[j]) != 0) return fail(why, "reduced cost on free var");
            } else if (lo) {
                if (sgn(d[j]) < 0) return fail(why, "negative reduced cost at lower bound");
                dobj += d[j] * *eb[j].lo;
            } else {
                if (sgn(d[j]) > 0) return fail(why, "positive reduced cost at upper bound");
                dobj += d[j] * *eb[j].hi;
            }
        }
        Rat pmin = maximize ? Rat(-(pobj - lp.objective_constant))
                            : Rat(pobj - lp.objective_constant);
        if (dobj != pmin) return fail(why, "strong duality gap");
        return true;
    }

    if (out.status == Status::Infeasible) {
        if (static_cast<int>(out.farkas.size()) != nr) return fail(why, "farkas size");
        const auto& f = out.farkas;
        for (int r = 0; r < nr; ++r) {
            if (canon[r].rel == Rel::GE && sgn(f[r]) < 0)
                return fail(why, "farkas sign on >= row");
            if (canon[r].rel == Rel::LE && sgn(f[r]) > 0)
                return fail(why, "farkas sign on <= row");
        }
        std::vector<Rat> phi(nv, Rat(0));
        Rat L = 0;
        for (int r = 0; r < nr; ++r) {
            if (sgn(f[r]) == 0) continue;
            L += f[r] * canon[r].rhs;
            for (const auto& t : canon[r].terms) phi[t.var] += f[r] * t.coef;
        }
        Rat U = 0;
        for (int j = 0; j < nv; ++j) {
            const bool lo = eb[j].lo.has_value(), hi = eb[j].hi.has_value();
            if (!lo && !hi) {
                if (sgn(phi[j]) != 0) return fail(why, "farkas leaks onto free var");
            } else if (lo) {
                if (sgn(phi[j]) > 0) return fail(why, "farkas unbounded above");
                U += phi[j] * *eb[j].lo;
            } else {
                if (sgn(phi[j]) < 0) return fail(why, "farkas unbounded above");
                U += phi[j] * *eb[j].hi;
            }
        }
        if (!(U < L)) return fail(why, "farkas gap not positive");
        return true;
    }

    // Unbounded
    if (!primal_feasible(out.primal)) return fail(why, "unbounded: point infeasible");
    if (static_cast<int>(out.ray.size()) != nv) return fail(why, "ray size");
    const auto& r = out.ray;
    for (int j = 0; j < nv; ++j) {
        if (lp.bounds[j].lo && sgn(r[j]) < 0) return fail(why, "ray violates lower bound");
        if (lp.bounds[j].hi && sgn(r[j]) > 0) return fail(why, "ray violates upper bound");
    }
    for (const auto& row : lp.rows) {
        Rat v = 0;
        for (const auto& t : row.terms) v += t.coef * r[t.var];
        if (row.rel == Rel::EQ && sgn(v) != 0) return fail(why, "ray breaks equality");
        if (row.rel == Rel::GE && sgn(v) < 0) return fail(why, "ray breaks >=");
        if (row.rel == Rel::LE && sgn(v) > 0) return fail(why, "ray breaks <=");
    }
    Rat cr = 0;
    for (const auto& t : lp.objective) cr += t.coef * r[t.var];
    if (maximize ? sgn(cr) <= 0 : sgn(cr) >= 0) return fail(why, "ray not improving");
    return true;
}

FloatOutcome solve_float(const LinearProgram& lp_in, double tol) {
    const LinearProgram lp = detail::normalized(lp_in);
    StdModel sm = detail::build_std(lp);
    FloatOutcome out;
    if (sm.trivially_infeasible) {
        out.status = Status::Infeasible;
        out.value = lp.sense == Sense::Min ? HUGE_VAL : -HUGE_VAL;
        auto rat = solve_rational(lp);
        out.farkas.assign(rat.farkas.size(), 0.0);
        for (std::size_t i = 0; i < rat.farkas.size(); ++i)
            out.farkas[i] = rat.farkas[i].get_d();
        return out;
    }
    Tableau<double> tab(sm, detail::NumOps<double>{1e-9});
    auto rs = tab.run();
    out.pivots = tab.pivots();
    auto to_d = [](const std::vector<double>& v) { return v; };
    switch (rs) {
        case Tableau<double>::RunStatus::Infeasible:
            out.status = Status::Infeasible;
            out.value = lp.sense == Sense::Min ? HUGE_VAL : -HUGE_VAL;
            out.farkas = to_d(map_duals(sm, tab.duals(sm, true), false));
            break;
        case Tableau<double>::RunStatus::Unbounded:
            out.status = Status::Unbounded;
            out.value = lp.sense == Sense::Min ? -HUGE_VAL : HUGE_VAL;
            out.primal = map_point(sm, tab.solution());
            out.ray = map_ray(sm, tab.ray_direction());
            break;
        case Tableau<double>::RunStatus::Optimal: {
            out.status = Status::Optimal;
            out.primal = map_point(sm, tab.solution());
            double v = tab.objective(false) + sm.c0.get_d();
            if (sm.maximize) v = -v;
            out.value = v + lp.objective_constant.get_d();
            out.row_duals = to_d(map_duals(sm, tab.duals(sm, false), sm.maximize));
            break;
        }
    }
    std::string why;
    if (!check_certificate_float(lp, out, tol, &why))
        throw numerical_breakdown("float solve failed verification: " + why);
    return out;
}

bool check_certificate_float(const LinearProgram& lp, const FloatOutcome& out,
                             double tol, std::string* why) {
    const auto canon = detail::canonical_rows(lp);
    const auto eb = effective_bounds(lp);
    const int nv = lp.num_vars();
    const int nr = static_cast<int>(canon.size());
    const bool maximize = lp.sense == Sense::Max;
    const double obj_rtol = 1e-7;

    auto primal_feasible = [&](const std::vector<double>& x) -> bool {
        if (static_cast<int>(x.size()) != nv) return false;
        for (int j = 0; j < nv; ++j) {
            if (lp.bounds[j].lo && x[j] < lp.bounds[j].lo->get_d() - tol) return false;
            if (lp.bounds[j].hi && x[j] > lp.bounds[j].hi->get_d() + tol) return false;
        }
        for (const auto& r : lp.rows) {
            double v = 0;
            for (const auto& t : r.terms) v += t.coef.get_d() * x[t.var];
            double b = r.rhs.get_d();
            if (r.rel == Rel::LE && v > b + tol) return false;
            if (r.rel == Rel::GE && v < b - tol) return false;
            if (r.rel == Rel::EQ && std::abs(v - b) > tol) return false;
        }
        return true;
    };
    auto close_rel = [&](double a, double b) {
        return std::abs(a - b) <= obj_rtol * std::max({1.0, std::abs(a), std::abs(b)});
    };

    if (out.status == Status::Optimal) {
        if (!primal_feasible(out.primal)) return fail(why, "primal witness infeasible");
        double pobj = lp.objective_constant.get_d();
        for (const auto& t : lp.objective) pobj += t.coef.get_d() * out.primal[t.var];
        if (!close_rel(pobj, out.value)) return fail(why, "objective mismatch");
        if (static_cast<int>(out.row_duals.size()) != nr) return fail(why, "dual size");
        std::vector<double> y(out.row_duals);
        if (maximize)
            for (auto& v : y) v = -v;
        for (int r = 0; r < nr; ++r) {
            if (canon[r].rel == Rel::GE && y[r] < -tol) return fail(why, "dual sign");
            if (canon[r].rel == Rel::LE && y[r] > tol) return fail(why, "dual sign");
        }
        std::vector<double> d(nv, 0.0);
        for (const auto& t : lp.objective)
            d[t.var] += (maximize ? -1.0 : 1.0) * t.coef.get_d();
        for (int r = 0; r < nr; ++r)
            for (const auto& t : canon[r].terms) d[t.var] -= y[r] * t.coef.get_d();
        double dobj = 0;
        for (int r = 0; r < nr; ++r) dobj += y[r] * canon[r].rhs.get_d();
        for (int j = 0; j < nv; ++j) {
            const bool lo = eb[j].lo.has_value(), hi = eb[j].hi.has_value();
            if (!lo && !hi) {
                if (std::abs(d[j]) > tol) return fail(why, "reduced cost on free var");
            } else if (lo) {
                if (d[j] < -tol) return fail(why, "reduced cost sign");
                dobj += d[j] * eb[j].lo->get_d();
            } else {
                if (d[j] > tol) return fail(why, "reduced cost sign");
                dobj += d[j] * eb[j].hi->get_d();
            }
        }
        double pmin = maximize ? -(pobj - lp.objective_constant.get_d())
                               : pobj - lp.objective_constant.get_d();
        if (!close_rel(dobj, pmin)) return fail(why, "duality gap");
        return true;
    }
    if (out.status == Status::Infeasible) {
        if (static_cast<int>(out.farkas.size()) != nr) return fail(why, "farkas size");
        const auto& f = out.farkas;
        std::vector<double> phi(nv, 0.0);
        double L = 0;
        for (int r = 0; r < nr; ++r) {
            if (canon[r].rel == Rel::GE && f[r] < -tol) return fail(why, "farkas sign");
            if (canon[r].rel == Rel::LE && f[r] > tol) return fail(why, "farkas sign");
            L += f[r] * canon[r].rhs.get_d();
            for (const auto& t : canon[r].terms) phi[t.var] += f[r] * t.coef.get_d();
        }
        double U = 0;
        for (int j = 0; j < nv; ++j) {
            const bool lo = eb[j].lo.has_value(), hi = eb[j].hi.has_value();
            if (!lo && !hi) {
                if (std::abs(phi[j]) > tol) return fail(why, "farkas leak");
            } else if (lo) {
                if (phi[j] > tol) return fail(why, "farkas unbounded");
                U += phi[j] * eb[j].lo->get_d();
            } else {
                if (phi[j] < -tol) return fail(why, "farkas unbounded");
                U += phi[j] * eb[j].hi->get_d();
            }
        }
        if (!(U < L - tol)) return fail(why, "farkas gap");
        return true;
    }
    // Unbounded
    if (!primal_feasible(out.primal)) return fail(why, "unbounded point infeasible");
    double cr = 0;
    for (const auto& t : lp.objective) cr += t.coef.get_d() * out.ray[t.var];
    if (maximize ? cr <= tol : cr >= -tol) return fail(why, "ray not improving");
    for (const auto& row : lp.rows) {
        double v = 0;
        for (const auto& t : row.terms) v += t.coef.get_d() * out.ray[t.var];
        if (row.rel == Rel::EQ && std::abs(v) > tol) return fail(why, "ray eq");
        if (row.rel == Rel::GE && v < -tol) return fail(why, "ray ge");
        if (row.rel == Rel::LE && v > tol) return fail(why, "ray le");
    }
    return true;
}

DualizedLp dualize(const LinearProgram& lp_in) {
    const LinearProgram lp = detail::normalized(lp_in);
    for (const auto& bd : lp.bounds) {
        const bool nonneg = bd.lo.has_value() && sgn(*bd.lo) == 0 && !bd.hi.has_value();
        const bool free_ = !bd.lo.has_value() && !bd.hi.has_value();
        if (!nonneg && !free_)
            throw std::logic_error("dualize: bounds must be [0,inf) or free");
    }
    const bool min = lp.sense == Sense::Min;
    DualizedLp dz;
    LinearProgram& d = dz.dual;
    d.sense = min ? Sense::Max : Sense::Min;
    d.objective_constant = lp.objective_constant;

    dz.dual_var_of_row.resize(lp.rows.size());
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        const auto& row = lp.rows[r];
        std::optional<Rat> lo, hi;
        switch (row.rel) {
            case Rel::EQ:
                break;  // free
            case Rel::GE:
                if (min)
                    lo = Rat(0);
                else
                    hi = Rat(0);
                break;
            case Rel::LE:
                if (min)
                    hi = Rat(0);
                else
                    lo = Rat(0);
                break;
        }
        int v = d.add_var("y_" + (row.name.empty() ? std::to_string(r) : row.name),
                          lo, hi);
        dz.dual_var_of_row[r] = v;
        if (sgn(row.rhs) != 0) d.set_objective(v, row.rhs);
    }

    std::vector<Rat> cvec(lp.num_vars(), Rat(0));
    for (const auto& t : lp.objective) cvec[t.var] += t.coef;
    std::vector<std::vector<Term>> cols(lp.num_vars());
    for (std::size_t r = 0; r < lp.rows.size(); ++r)
        for (const auto& t : lp.rows[r].terms)
            cols[t.var].push_back({dz.dual_var_of_row[r], t.coef});

    dz.dual_row_of_var.resize(lp.num_vars());
    for (int j = 0; j < lp.num_vars(); ++j) {
        const bool fr = !lp.bounds[j].lo.has_value();
        Rel rel = fr ? Rel::EQ : (min ? Rel::LE : Rel::GE);
        auto& row = d.add_row(rel, cvec[j],
                              lp.var_names.empty() || lp.var_names[j].empty()
                                  ? "rc_" + std::to_string(j)
                                  : "rc_" + lp.var_names[j]);
        row.terms = cols[j];
        dz.dual_row_of_var[j] = static_cast<int>(d.rows.size()) - 1;
    }
    return dz;
}

LinearProgram normalized_copy(const LinearProgram& lp) { return detail::normalized(lp); }

std::string to_lp_format(const LinearProgram& lp) {
    std::ostringstream os;
    auto vname = [&](int j) {
        if (j < static_cast<int>(lp.var_names.size()) && !lp.var_names[j].empty())
            return lp.var_names[j];
        return std::string("x") + std::to_string(j);
    };
    auto num = [](const Rat& r) {
        std::ostringstream t;
        t.precision(17);
        t << r.get_d();
        return t.str();
    };
    auto expr = [&](const std::vector<Term>& ts) {
        std::ostringstream t;
        bool first = true;
        for (const auto& tm : ts) {
            Rat c = tm.coef;
            if (sgn(c) == 0) continue;
            if (first) {
                if (sgn(c) < 0) t << "- ";
            } else {
                t << (sgn(c) < 0 ? " - " : " + ");
            }
            t << num(abs(c)) << " " << vname(tm.var);
            first = false;
        }
        if (first) t << "0 " << vname(0);
        return t.str();
    };
    os << (lp.sense == Sense::Min ? "Minimize" : "Maximize") << "\n obj: "
       << expr(lp.objective) << "\nSubject To\n";
    for (std::size_t r = 0; r < lp.rows.size(); ++r) {
        const auto& row = lp.rows[r];
        os << " " << (row.name.empty() ? "c" + std::to_string(r) : row.name) << ": "
           << expr(row.terms)
           << (row.rel == Rel::LE ? " <= " : row.rel == Rel::GE ? " >= " : " = ")
           << num(row.rhs) << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.num_vars(); ++j) {
        const auto& bd = lp.bounds[j];
        if (!bd.lo && !bd.hi) {
            os << " " << vname(j) << " free\n";
        } else {
            if (bd.lo && (sgn(*bd.lo) != 0)) os << " " << vname(j) << " >= " << num(*bd.lo) << "\n";
            if (!bd.lo) os << " " << vname(j) << " >= -1e30\n";
            if (bd.hi) os << " " << vname(j) << " <= " << num(*bd.hi) << "\n";
        }
    }
    os << "End\n";
    return os.str();
}

}  // namespace rshedge::lp
