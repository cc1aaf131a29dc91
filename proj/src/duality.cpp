#include "rshedge/duality.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rshedge {

namespace {

lp::LpOutcome solve_checked(const lp::LinearProgram& lp) {
    auto out = lp::solve_rational(lp);
    std::string why;
    if (!lp::check_certificate(lp, out, &why))
        throw std::logic_error("LP certificate rejected: " + why);
    return out;
}

// Assembled superhedging LP plus the variable map needed to read witnesses.
struct PrimalLp {
    lp::LinearProgram lp;
    int x_var = 0;
    std::vector<int> h_vars;
    // (node, action-prefix-with-current-action id) -> first component var
    std::map<std::pair<int, long>, int> H_vars;
    long rows = 0;
};

// Original-space assembly: strategies discovered lazily from the
// (reachable leaf, feasible plan) rows they must serve.
PrimalLp assemble_primal_original(const BoundPayoff& bp) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    PrimalLp P;
    P.x_var = P.lp.add_free_var("x");
    for (int l = 0; l < m.num_options(); ++l)
        P.h_vars.push_back(P.lp.add_free_var("h" + std::to_string(l)));
    auto H_of = [&](int node, long pref) {
        auto it = P.H_vars.find({node, pref});
        if (it != P.H_vars.end()) return it->second;
        const int base = P.lp.num_vars();
        P.H_vars[{node, pref}] = base;
        for (int j = 0; j < m.dim; ++j)
            P.lp.add_free_var("H_" + t.key(node) + "|" + std::to_string(pref) + "#" +
                              std::to_string(j));
        return base;
    };
    for (int leaf : bp.support().reachable_leaves) {
        const int ll = t.leaf_local(leaf);
        for (long p = 0; p < bp.plans().count; ++p) {
            const XR phi = bp.phi(ll, p);
            if (!phi.finite()) continue;
            auto& row = P.lp.add_row(lp::Rel::GE, phi.val());
            row.terms.push_back({P.x_var, Rat(1)});
            for (int k = 0; k < t.horizon; ++k) {
                const int node = t.prefix_of(leaf, k);
                const int base = H_of(node, bp.plans().prefix_of(p, k + 1));
                auto dS = m.delta_S(t.prefix_of(leaf, k + 1));
                for (int j = 0; j < m.dim; ++j)
                    if (sgn(dS[j]) != 0) row.terms.push_back({base + j, dS[j]});
            }
            for (int l = 0; l < m.num_options(); ++l) {
                const Rat& g = m.options[l][ll];
                if (sgn(g) != 0) row.terms.push_back({P.h_vars[l], g});
            }
            ++P.rows;
        }
    }
    P.lp.set_objective(P.x_var, Rat(1));
    return P;
}

// Enlarged-space assembly: strategy variables enumerated over enlarged
// atoms in canonical order, rows over the tagged path set.
PrimalLp assemble_primal_enlarged(const BoundPayoff& bp) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto paths = enumerate_enlarged(bp);
    EnlargedAtoms atoms(t, bp.plans());
    PrimalLp P;
    P.x_var = P.lp.add_free_var("x");
    for (int l = 0; l < m.num_options(); ++l)
        P.h_vars.push_back(P.lp.add_free_var("h" + std::to_string(l)));
    // mark plus atoms reached by some constraint row
    std::vector<std::vector<char>> used(t.horizon);
    for (int k = 0; k < t.horizon; ++k) used[k].assign(atoms.plus_count(k), 0);
    for (int i = 0; i < paths.num_leaves; ++i) {
        if (!paths.leaf_reachable[i]) continue;
        const int leaf = t.leaves()[i];
        for (long p = 0; p < paths.num_plans; ++p) {
            if (!paths.feasible(i, p)) continue;
            for (int k = 0; k < t.horizon; ++k)
                used[k][atoms.plus_id(t.prefix_of(leaf, k), bp.plans().prefix_of(p, k + 1))] = 1;
        }
    }
    for (int k = 0; k < t.horizon; ++k) {
        for (long id = 0; id < atoms.plus_count(k); ++id) {
            if (!used[k][id]) continue;
            auto [node, pref] = atoms.plus_parts(k, id);
            P.H_vars[{node, pref}] = P.lp.num_vars();
            for (int j = 0; j < m.dim; ++j)
                P.lp.add_free_var("H_" + atoms.atom_key(node, pref, k + 1, bp.model().actions) +
                                  "#" + std::to_string(j));
        }
    }
    for (int i = 0; i < paths.num_leaves; ++i) {
        if (!paths.leaf_reachable[i]) continue;
        const int leaf = t.leaves()[i];
        for (long p = 0; p < paths.num_plans; ++p) {
            if (!paths.feasible(i, p)) continue;
            auto& row = P.lp.add_row(lp::Rel::GE, bp.phi(i, p).val());
            row.terms.push_back({P.x_var, Rat(1)});
            for (int k = 0; k < t.horizon; ++k) {
                const int base =
                    P.H_vars.at({t.prefix_of(leaf, k), bp.plans().prefix_of(p, k + 1)});
                auto dS = m.delta_S(t.prefix_of(leaf, k + 1));
                for (int j = 0; j < m.dim; ++j)
                    if (sgn(dS[j]) != 0) row.terms.push_back({base + j, dS[j]});
            }
            for (int l = 0; l < m.num_options(); ++l) {
                const Rat& g = m.options[l][i];
                if (sgn(g) != 0) row.terms.push_back({P.h_vars[l], g});
            }
            ++P.rows;
        }
    }
    P.lp.set_objective(P.x_var, Rat(1));
    return P;
}

PortfolioWitness witness_from_primal(const PrimalLp& P, const std::vector<Rat>& primal,
                                     const Rat& shift, int dim) {
    PortfolioWitness w;
    w.x = primal[P.x_var] + shift;
    for (int hv : P.h_vars) w.static_positions.push_back(primal[hv]);
    for (const auto& [key, base] : P.H_vars) {
        std::vector<Rat> pos(dim);
        for (int j = 0; j < dim; ++j) pos[j] = primal[base + j];
        w.positions[key] = std::move(pos);
    }
    return w;
}

PortfolioWitness witness_from_hedge(const BoundPayoff& bp, const ExtractedHedge& h) {
    const auto& t = bp.market().tree;
    EnlargedAtoms atoms(t, bp.plans());
    PortfolioWitness w;
    w.x = h.x;
    for (int l = 0; l < bp.market().num_options(); ++l)
        w.static_positions.push_back(Rat(0));
    for (int k = 0; k < t.horizon; ++k) {
        for (long id = 0; id < atoms.plus_count(k); ++id) {
            auto [node, pref] = atoms.plus_parts(k, id);
            if (!bp.support().node_reachable[node]) continue;
            w.positions[{node, pref}] = h.y[k][id];
        }
    }
    return w;
}

// Shift every >=-row rhs down by the payoff bound so that the zero
// portfolio with x = 0 is basic-feasible; prices translate back exactly.
lp::LinearProgram shifted_copy(const lp::LinearProgram& lp, const Rat& shift) {
    lp::LinearProgram s = lp;
    for (auto& row : s.rows) row.rhs -= shift;
    return s;
}

PriceResult solve_primal(const BoundPayoff& bp, PrimalLp P, const PricingOptions& opts) {
    PriceResult res;
    if (P.rows == 0) {  // nothing to dominate: infimum over free x
        res.price = XR::neg_inf();
        res.method = "simplex";
        return res;
    }
    const Rat M = *bp.upper_bound();
    const auto shifted = shifted_copy(P.lp, M);
    if (P.rows <= opts.direct_primal_row_cap) {
        auto out = solve_checked(shifted);
        res.pivots = out.pivots;
        res.method = "simplex";
        if (out.status == lp::Status::Unbounded) {
            res.price = XR::neg_inf();
            return res;
        }
        res.price = XR(out.value.val() + M);
        res.portfolio = witness_from_primal(P, out.primal, M, bp.market().dim);
        return res;
    }
    if (bp.market().num_options() == 0) {
        auto bracket = verify_by_witnesses(bp);
        if (bracket.value.finite() && bracket.hedge_verified && bracket.measure_verified) {
            res.price = bracket.value;
            res.method = "dp-witness";
            res.portfolio = witness_from_hedge(bp, *bracket.hedge);
            return res;
        }
    }
    // general fallback: solve through the LP dual and recover the portfolio
    // from the dual multipliers, then re-verify against the primal.
    auto dz = lp::dualize(shifted);
    auto dout = solve_checked(dz.dual);
    res.pivots = dout.pivots;
    res.method = "via-dual";
    if (dout.status == lp::Status::Infeasible) {
        res.price = XR::neg_inf();  // primal unbounded below
        return res;
    }
    if (dout.status != lp::Status::Optimal)
        throw std::logic_error("dual of a feasible primal cannot be unbounded");
    lp::LpOutcome rec;
    rec.status = lp::Status::Optimal;
    rec.value = dout.value;
    rec.primal.resize(shifted.num_vars());
    for (int j = 0; j < shifted.num_vars(); ++j)
        rec.primal[j] = dout.row_duals[dz.dual_row_of_var[j]];
    rec.row_duals.resize(shifted.rows.size());
    for (std::size_t r = 0; r < shifted.rows.size(); ++r)
        rec.row_duals[r] = dout.primal[dz.dual_var_of_row[r]];
    std::string why;
    if (!lp::check_certificate(shifted, rec, &why))
        throw std::logic_error("primal witness recovered from dual rejected: " + why);
    res.price = XR(rec.value.val() + M);
    res.portfolio = witness_from_primal(P, rec.primal, M, bp.market().dim);
    return res;
}

}  // namespace

PriceResult superhedge_primal_original(const BoundPayoff& bp, const PricingOptions& opts) {
    return solve_primal(bp, assemble_primal_original(bp), opts);
}

PriceResult superhedge_primal_enlarged(const BoundPayoff& bp, const PricingOptions& opts) {
    return solve_primal(bp, assemble_primal_enlarged(bp), opts);
}

PriceResult dual_enlarged(const BoundPayoff& bp, bool with_calibration,
                          const PricingOptions& opts) {
    PriceResult res;
    auto sys = enlarged_martingale_constraints(bp, with_calibration, PlanSupport::FeasibleOnly);
    if (sys.vars.empty()) {
        res.price = XR::neg_inf();
        res.method = "simplex";
        return res;
    }
    const long cells = static_cast<long>(sys.lp.rows.size()) * sys.vars.size();
    if (cells > opts.dual_lp_cell_cap &&
        (!with_calibration || bp.market().num_options() == 0)) {
        auto bracket = verify_by_witnesses(bp);
        if (bracket.value.finite() && bracket.hedge_verified && bracket.measure_verified) {
            res.price = bracket.value;
            res.method = "dp-witness";
            res.measure = bracket.measure;
            return res;
        }
    }
    lp::LinearProgram lp = sys.lp;
    lp.sense = lp::Sense::Max;
    for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v) {
        const Rat& phi = bp.phi(sys.vars[v].first, sys.vars[v].second).val();
        if (sgn(phi) != 0) lp.set_objective(v, phi);
    }
    auto out = solve_checked(lp);
    res.pivots = out.pivots;
    res.method = "simplex";
    if (out.status == lp::Status::Infeasible) {
        res.price = XR::neg_inf();  // no calibrated martingale measure on the support
        return res;
    }
    if (out.status != lp::Status::Optimal)
        throw std::logic_error("bounded dual LP cannot be unbounded");
    res.price = out.value;
    LiftedMeasure q;
    for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v)
        if (sgn(out.primal[v]) > 0)
            q.entries.push_back({sys.vars[v].first, sys.vars[v].second, out.primal[v]});
    q.sort_and_merge();
    res.measure = std::move(q);
    return res;
}

WitnessBracket verify_by_witnesses(const BoundPayoff& bp) {
    WitnessBracket b;
    auto dp = backward_induction(bp);
    b.value = dp.value;
    if (!b.value.finite()) return b;
    b.hedge = extract_hedge(bp, dp.table);
    b.hedge_verified = check_hedge_domination(bp, *b.hedge);
    auto q = optimal_lifted_measure(bp, dp.table);
    Rat expectation = 0;
    for (const auto& e : q.entries) expectation += e.weight * bp.phi(e.leaf_local, e.plan_id).val();
    b.measure_verified =
        measure_in_martingale_set(bp, q, /*with_calibration=*/false) &&
        expectation == b.value.val();
    b.measure = std::move(q);
    return b;
}

NaivePriceResult naive_model_price(const BoundPayoff& bp, const PricingOptions& opts) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    const int N = t.horizon;
    NaivePriceResult res;

    // interior policy slots: nodes of depth < N; the terminal action is
    // optimized pointwise inside terminal_op
    std::vector<int> slots;
    for (int d = 0; d < N; ++d)
        for (int node : t.by_depth[d])
            if (sup.node_reachable[node]) slots.push_back(node);
    const int A = bp.model().actions.size();
    double logcount = slots.size() * std::log2(double(A));
    if (logcount > 62 ||
        static_cast<long>(std::pow(double(A), double(slots.size()))) > opts.budgets.max_policies) {
        throw budget_exceeded("policy enumeration exceeds budget " +
                              std::to_string(opts.budgets.max_policies));
    }

    std::vector<int> assign(slots.size(), 0);
    std::map<std::string, std::pair<XR, std::optional<std::vector<Rat>>>> cache;
    XR best = XR::neg_inf();
    std::vector<int> best_assign;
    std::optional<std::vector<Rat>> best_measure;
    bool first = true;

    std::vector<int> slot_of_node(t.nodes.size(), -1);
    for (std::size_t s = 0; s < slots.size(); ++s) slot_of_node[slots[s]] = static_cast<int>(s);

    while (true) {
        ++res.policies_enumerated;
        // induced reduced payoff per reachable leaf
        std::vector<XR> tilde(t.leaf_count(), XR::neg_inf());
        std::string key;
        for (int leaf : sup.reachable_leaves) {
            long pref = 0;
            for (int k = 0; k < N; ++k) {
                const int node = t.prefix_of(leaf, k);
                pref = bp.plans().extend(pref, k, assign[slot_of_node[node]]);
            }
            const int ll = t.leaf_local(leaf);
            tilde[ll] = terminal_op(bp, ll, pref);
            key += tilde[ll].str();
            key += ";";
        }
        auto it = cache.find(key);
        if (it == cache.end()) {
            ++res.lp_solves;
            std::vector<char> filter(t.leaf_count(), 0);
            bool any = false;
            for (int leaf : sup.reachable_leaves) {
                const int ll = t.leaf_local(leaf);
                if (tilde[ll].finite()) {
                    filter[ll] = 1;
                    any = true;
                }
            }
            XR value = XR::neg_inf();
            std::optional<std::vector<Rat>> measure;
            if (any) {
                auto sys = original_martingale_constraints(m, sup, true, &filter);
                lp::LinearProgram lp = sys.lp;
                lp.sense = lp::Sense::Max;
                for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v) {
                    const Rat& c = tilde[sys.leaves_local[v]].val();
                    if (sgn(c) != 0) lp.set_objective(v, c);
                }
                auto out = solve_checked(lp);
                if (out.status == lp::Status::Optimal) {
                    value = out.value;
                    std::vector<Rat> dist(t.leaf_count(), Rat(0));
                    for (std::size_t v = 0; v < sys.leaves_local.size(); ++v)
                        dist[sys.leaves_local[v]] = out.primal[v];
                    measure = std::move(dist);
                }
            }
            it = cache.emplace(key, std::make_pair(value, std::move(measure))).first;
        }
        if (first || best < it->second.first) {
            best = it->second.first;
            best_assign = assign;
            best_measure = it->second.second;
            first = false;
        }
        // next assignment
        std::size_t i = 0;
        while (i < assign.size() && assign[i] == A - 1) assign[i++] = 0;
        if (i == assign.size()) break;
        ++assign[i];
    }

    res.price = best;
    res.measure = best_measure;
    // complete the best reduced policy with pointwise-optimal terminal actions
    ActionPolicy pol(t.nodes.size(), 0);
    for (std::size_t s = 0; s < slots.size(); ++s) pol[slots[s]] = best_assign[s];
    for (int leaf : sup.reachable_leaves) {
        long pref = 0;
        for (int k = 0; k < N; ++k)
            pref = bp.plans().extend(pref, k, pol[t.prefix_of(leaf, k)]);
        const int ll = t.leaf_local(leaf);
        const XR target = terminal_op(bp, ll, pref);
        int best_a = 0;
        for (int a = 0; a < A; ++a)
            if (bp.phi(ll, bp.plans().extend(pref, N, a)) == target) {
                best_a = a;
                break;
            }
        pol[t.leaves()[ll]] = best_a;
    }
    res.policy = std::move(pol);
    return res;
}

XR policy_value(const BoundPayoff& bp, const ActionPolicy& pol) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    std::vector<XR> phi_chi(t.leaf_count(), XR::neg_inf());
    std::vector<char> filter(t.leaf_count(), 0);
    bool any = false;
    for (int leaf : sup.reachable_leaves) {
        const int ll = t.leaf_local(leaf);
        phi_chi[ll] = bp.phi(ll, bp.plans().from_plan(policy_plan(pol, t, leaf)));
        if (phi_chi[ll].finite()) {
            filter[ll] = 1;
            any = true;
        }
    }
    if (!any) return XR::neg_inf();
    auto sys = original_martingale_constraints(m, sup, /*with_calibration=*/false, &filter);
    lp::LinearProgram lp = sys.lp;
    lp.sense = lp::Sense::Max;
    for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v) {
        const Rat& c = phi_chi[sys.leaves_local[v]].val();
        if (sgn(c) != 0) lp.set_objective(v, c);
    }
    auto out = solve_checked(lp);
    if (out.status != lp::Status::Optimal) return XR::neg_inf();
    return out.value;
}

DynamicExtensionReport dynamic_extension_check(const BoundPayoff& bp,
                                               const PricingOptions& opts) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const int N = t.horizon;
    const int L = m.num_options();
    DynamicExtensionReport rep;
    auto dual = dual_enlarged(bp, /*with_calibration=*/true, opts);
    auto primal = superhedge_primal_original(bp, opts);
    rep.dual_value = dual.price;
    rep.primal_value = primal.price;
    rep.applicable = dual.measure.has_value();
    if (!rep.applicable) return rep;
    const LiftedMeasure& q = *dual.measure;
    EnlargedAtoms atoms(t, bp.plans());

    // masses and conditional option values per level-k atom (ω-prefix k,
    // action-prefix k)
    std::vector<std::map<long, Rat>> mass(N + 1);
    std::vector<std::map<long, std::vector<Rat>>> gsum(N + 1);
    for (const auto& e : q.entries) {
        const int leaf = t.leaves()[e.leaf_local];
        for (int k = 0; k <= N; ++k) {
            const long id =
                atoms.minus_id(t.prefix_of(leaf, k), bp.plans().prefix_of(e.plan_id, k));
            mass[k][id] += e.weight;
            auto& acc = gsum[k][id];
            if (acc.empty()) acc.assign(L, Rat(0));
            for (int l = 0; l < L; ++l)
                acc[l] += e.weight * m.options[l][e.leaf_local];
        }
    }
    rep.y_process.resize(N + 1);
    std::vector<std::map<long, std::vector<Rat>>> Y(N + 1);
    for (int k = 0; k <= N; ++k) {
        for (const auto& [id, w] : mass[k]) {
            std::vector<Rat> y(L);
            for (int l = 0; l < L; ++l) y[l] = gsum[k][id][l] / w;
            auto [node, pref] = atoms.minus_parts(k, id);
            rep.y_process[k][atoms.atom_key(node, pref, k, bp.model().actions)] = y;
            Y[k][id] = std::move(y);
        }
    }

    // (i) initial values vanish: calibration
    rep.calibration_ok = true;
    for (const auto& [id, y] : Y[0])
        for (int l = 0; l < L; ++l)
            if (sgn(y[l]) != 0) rep.calibration_ok = false;
    // (ii) terminal values equal the payoffs on the support
    rep.terminal_ok = true;
    for (const auto& [id, y] : Y[N]) {
        auto [leaf, pref] = atoms.minus_parts(N, id);
        for (int l = 0; l < L; ++l)
            if (y[l] != m.options[l][t.leaf_local(leaf)]) rep.terminal_ok = false;
    }
    // (iii) martingale identity: mass-weighted successor values aggregate
    rep.martingale_ok = true;
    for (int k = 0; k < N; ++k) {
        for (const auto& [id, w] : mass[k]) {
            std::vector<Rat> agg(L, Rat(0));
            auto [node, pref] = atoms.minus_parts(k, id);
            for (const auto& [id2, w2] : mass[k + 1]) {
                auto [node2, pref2] = atoms.minus_parts(k + 1, id2);
                if (t.nodes[node2].parent != node) continue;
                if (bp.plans().prefix_of(pref2, k) != pref) continue;
                for (int l = 0; l < L; ++l) agg[l] += w2 * Y[k + 1][id2][l];
            }
            for (int l = 0; l < L; ++l)
                if (agg[l] != w * Y[k][id][l]) rep.martingale_ok = false;
        }
    }
    // (iv) the optimal calibrated measure attains the superhedging price
    rep.value_matches_primal = (rep.dual_value == rep.primal_value);

    // induced (ω, Y-path) representation
    std::map<std::pair<int, std::string>, std::pair<std::vector<std::vector<Rat>>, Rat>> groups;
    for (const auto& e : q.entries) {
        const int leaf = t.leaves()[e.leaf_local];
        std::vector<std::vector<Rat>> ypath;
        std::string sig;
        for (int k = 1; k < N; ++k) {
            const long id =
                atoms.minus_id(t.prefix_of(leaf, k), bp.plans().prefix_of(e.plan_id, k));
            ypath.push_back(Y[k][id]);
            for (const auto& v : ypath.back()) sig += rat_to_string(v) + ",";
            sig += ";";
        }
        auto key = std::make_pair(e.leaf_local, sig);
        auto it = groups.find(key);
        if (it == groups.end())
            groups.emplace(key, std::make_pair(std::move(ypath), e.weight));
        else
            it->second.second += e.weight;
    }
    for (auto& [key, val] : groups) {
        DynamicExtensionReport::QHatEntry entry;
        entry.leaf_key = t.key(t.leaves()[key.first]);
        entry.y_path = std::move(val.first);
        entry.mass = val.second;
        rep.qhat.push_back(std::move(entry));
    }
    return rep;
}

PriceReport price_report(const BoundPayoff& bp, const PricingOptions& opts) {
    PriceReport rep;
    rep.na = check_na(bp, SpaceTag::Original);
    auto run = [&](const char* name, auto fn) {
        try {
            fn();
        } catch (const budget_exceeded& e) {
            rep.errors[name] = e.what();
        } catch (const hedge_infeasible& e) {
            rep.errors[name] = e.what();
        }
    };
    run("primal_original", [&] {
        rep.primal_original_result = superhedge_primal_original(bp, opts);
        rep.primal_original = rep.primal_original_result->price;
    });
    run("primal_enlarged", [&] {
        rep.primal_enlarged_result = superhedge_primal_enlarged(bp, opts);
        rep.primal_enlarged = rep.primal_enlarged_result->price;
    });
    run("dual_enlarged", [&] {
        rep.dual_result = dual_enlarged(bp, /*with_calibration=*/true, opts);
        rep.dual_enlarged_price = rep.dual_result->price;
    });
    run("naive_model_price", [&] {
        rep.naive_result = naive_model_price(bp, opts);
        rep.naive_price = rep.naive_result->price;
    });
    if (rep.naive_result && rep.dual_result && rep.naive_price > rep.dual_enlarged_price)
        throw std::logic_error("weak duality violated: naive > dual");
    if (rep.dual_result && rep.primal_enlarged_result &&
        rep.dual_enlarged_price > rep.primal_enlarged)
        throw std::logic_error("weak duality violated: dual > primal");
    rep.flag_naive_lt_dual = rep.naive_price < rep.dual_enlarged_price;
    rep.flag_primal_eq_dual = rep.primal_enlarged == rep.dual_enlarged_price &&
                              rep.primal_original == rep.dual_enlarged_price;
    return rep;
}

FloatPrices float_prices(const BoundPayoff& bp, double tol, const PricingOptions& opts) {
    FloatPrices fp{};
    const Rat M = bp.upper_bound() ? *bp.upper_bound() : Rat(0);
    auto solve_primal_float = [&](PrimalLp P) -> double {
        if (P.rows == 0) return -HUGE_VAL;
        auto shifted = shifted_copy(P.lp, M);
        if (P.rows <= opts.direct_primal_row_cap) {
            auto out = lp::solve_float(shifted, tol);
            return out.status == lp::Status::Unbounded ? -HUGE_VAL
                                                       : out.value + M.get_d();
        }
        auto dz = lp::dualize(shifted);
        auto out = lp::solve_float(dz.dual, tol);
        return out.status == lp::Status::Infeasible ? -HUGE_VAL : out.value + M.get_d();
    };
    fp.primal_original = solve_primal_float(assemble_primal_original(bp));
    fp.primal_enlarged = solve_primal_float(assemble_primal_enlarged(bp));
    {
        auto sys = enlarged_martingale_constraints(bp, true, PlanSupport::FeasibleOnly);
        if (sys.vars.empty()) {
            fp.dual_enlarged = -HUGE_VAL;
        } else {
            lp::LinearProgram lp = sys.lp;
            lp.sense = lp::Sense::Max;
            for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v) {
                const Rat& phi = bp.phi(sys.vars[v].first, sys.vars[v].second).val();
                if (sgn(phi) != 0) lp.set_objective(v, phi);
            }
            auto out = lp::solve_float(lp, tol);
            fp.dual_enlarged = out.status == lp::Status::Infeasible ? -HUGE_VAL : out.value;
        }
    }
    {
        // naive in float mode: same reduced enumeration, float inner LPs
        const auto& m = bp.market();
        const auto& t = m.tree;
        const auto& sup = bp.support();
        const int N = t.horizon;
        std::vector<int> slots;
        for (int d = 0; d < N; ++d)
            for (int node : t.by_depth[d])
                if (sup.node_reachable[node]) slots.push_back(node);
        const int A = bp.model().actions.size();
        std::vector<int> slot_of_node(t.nodes.size(), -1);
        for (std::size_t s = 0; s < slots.size(); ++s)
            slot_of_node[slots[s]] = static_cast<int>(s);
        std::vector<int> assign(slots.size(), 0);
        std::map<std::string, double> cache;
        double best = -HUGE_VAL;
        while (true) {
            std::vector<XR> tilde(t.leaf_count(), XR::neg_inf());
            std::string key;
            for (int leaf : sup.reachable_leaves) {
                long pref = 0;
                for (int k = 0; k < N; ++k)
                    pref = bp.plans().extend(pref, k, assign[slot_of_node[t.prefix_of(leaf, k)]]);
                const int ll = t.leaf_local(leaf);
                tilde[ll] = terminal_op(bp, ll, pref);
                key += tilde[ll].str();
                key += ";";
            }
            auto it = cache.find(key);
            if (it == cache.end()) {
                std::vector<char> filter(t.leaf_count(), 0);
                bool any = false;
                for (int leaf : sup.reachable_leaves) {
                    const int ll = t.leaf_local(leaf);
                    if (tilde[ll].finite()) {
                        filter[ll] = 1;
                        any = true;
                    }
                }
                double value = -HUGE_VAL;
                if (any) {
                    auto sys = original_martingale_constraints(m, sup, true, &filter);
                    lp::LinearProgram lp = sys.lp;
                    lp.sense = lp::Sense::Max;
                    for (int v = 0; v < static_cast<int>(sys.leaves_local.size()); ++v) {
                        const Rat& c = tilde[sys.leaves_local[v]].val();
                        if (sgn(c) != 0) lp.set_objective(v, c);
                    }
                    auto out = lp::solve_float(lp, tol);
                    if (out.status == lp::Status::Optimal) value = out.value;
                }
                it = cache.emplace(key, value).first;
            }
            best = std::max(best, it->second);
            std::size_t i = 0;
            while (i < assign.size() && assign[i] == A - 1) assign[i++] = 0;
            if (i == assign.size()) break;
            ++assign[i];
        }
        fp.naive = best;
    }
    return fp;
}

nlohmann::json portfolio_to_json(const BoundPayoff& bp, const PortfolioWitness& w) {
    const auto& t = bp.market().tree;
    EnlargedAtoms atoms(t, bp.plans());
    nlohmann::json j;
    j["x"] = rat_to_string(w.x);
    nlohmann::json pos = nlohmann::json::object();
    for (const auto& [key, v] : w.positions) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : v) arr.push_back(rat_to_string(c));
        pos[atoms.atom_key(key.first, key.second, t.nodes[key.first].depth + 1,
                           bp.model().actions)] = std::move(arr);
    }
    j["positions"] = std::move(pos);
    nlohmann::json hs = nlohmann::json::array();
    for (const auto& c : w.static_positions) hs.push_back(rat_to_string(c));
    j["static_positions"] = std::move(hs);
    return j;
}

nlohmann::json measure_to_json(const BoundPayoff& bp, const LiftedMeasure& q) {
    const auto& t = bp.market().tree;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& e : q.entries)
        j[t.key(t.leaves()[e.leaf_local]) + "|" +
          plan_key(bp.plans().to_plan(e.plan_id), bp.model().actions)] =
            rat_to_string(e.weight);
    return j;
}

nlohmann::json PriceReport::to_json(const BoundPayoff& bp) const {
    nlohmann::json j;
    j["primal_original"] = primal_original.str();
    j["primal_enlarged"] = primal_enlarged.str();
    j["dual_enlarged"] = dual_enlarged_price.str();
    j["naive_model_price"] = naive_price.str();
    j["na"] = na.to_json(bp);
    nlohmann::json w = nlohmann::json::object();
    if (primal_original_result && primal_original_result->portfolio)
        w["portfolio"] = portfolio_to_json(bp, *primal_original_result->portfolio);
    if (dual_result && dual_result->measure)
        w["measure"] = measure_to_json(bp, *dual_result->measure);
    if (naive_result && naive_result->policy) {
        nlohmann::json pol = nlohmann::json::object();
        const auto& t = bp.market().tree;
        for (std::size_t v = 0; v < t.nodes.size(); ++v)
            pol[t.key(static_cast<int>(v))] =
                bp.model().actions.labels[(*naive_result->policy)[v]];
        w["policy"] = std::move(pol);
    }
    j["witnesses"] = std::move(w);
    j["flags"] = {{"naive_lt_dual", flag_naive_lt_dual},
                  {"primal_eq_dual", flag_primal_eq_dual}};
    nlohmann::json errs = nlohmann::json::object();
    for (const auto& [k, v] : errors) errs[k] = v;
    j["errors"] = std::move(errs);
    nlohmann::json methods = nlohmann::json::object();
    if (primal_original_result) methods["primal_original"] = primal_original_result->method;
    if (primal_enlarged_result) methods["primal_enlarged"] = primal_enlarged_result->method;
    if (dual_result) methods["dual_enlarged"] = dual_result->method;
    j["methods"] = std::move(methods);
    return j;
}

}  // namespace rshedge
