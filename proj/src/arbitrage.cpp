#include "rshedge/arbitrage.hpp"

#include <algorithm>
#include <set>

namespace rshedge {

namespace {

lp::LpOutcome solve_checked(const lp::LinearProgram& lp) {
    auto out = lp::solve_rational(lp);
    std::string why;
    if (!lp::check_certificate(lp, out, &why))
        throw std::logic_error("LP certificate rejected: " + why);
    return out;
}

// Iterative covering on the original system: maximize the mass of the
// still-uncovered leaves; one certificate usually covers most of them.
void cover_original(const MarketModel& m, const SupportStructure& sup, NaReport& rep) {
    const auto& t = m.tree;
    rep.cert_of_leaf.assign(t.leaf_count(), -1);
    auto sys = original_martingale_constraints(m, sup, /*with_calibration=*/true);
    std::set<int> uncovered(sys.leaves_local.begin(), sys.leaves_local.end());
    while (!uncovered.empty()) {
        lp::LinearProgram lp = sys.lp;
        lp.sense = lp::Sense::Max;
        for (int ll : uncovered) lp.set_objective(sys.var_of_leaf[ll], Rat(1));
        auto out = solve_checked(lp);
        if (out.status != lp::Status::Optimal || !out.value.finite() ||
            sgn(out.value.val()) == 0)
            break;  // no calibrated measure charges anything left
        std::vector<Rat> dist(t.leaf_count(), Rat(0));
        for (std::size_t v = 0; v < sys.leaves_local.size(); ++v)
            dist[sys.leaves_local[v]] = out.primal[v];
        const int cert = static_cast<int>(rep.leaf_certificates.size());
        rep.leaf_certificates.push_back(dist);
        bool progress = false;
        for (auto it = uncovered.begin(); it != uncovered.end();) {
            if (sgn(dist[*it]) > 0) {
                rep.cert_of_leaf[*it] = cert;
                it = uncovered.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
        if (!progress) break;
    }
    rep.polar_leaves.assign(uncovered.begin(), uncovered.end());
    rep.holds = rep.polar_leaves.empty() && !sup.reachable_leaves.empty();
}

// Direct covering on the full enlarged system (used to certify polarity and
// as a fallback when lifting fails).
void cover_enlarged_direct(const BoundPayoff& bp, NaReport& rep,
                           std::set<int>& uncovered) {
    auto sys = enlarged_martingale_constraints(bp, /*with_calibration=*/true,
                                               PlanSupport::All);
    while (!uncovered.empty()) {
        lp::LinearProgram lp = sys.lp;
        lp.sense = lp::Sense::Max;
        for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v)
            if (uncovered.count(sys.vars[v].first)) lp.set_objective(v, Rat(1));
        auto out = solve_checked(lp);
        if (out.status != lp::Status::Optimal || !out.value.finite() ||
            sgn(out.value.val()) == 0)
            break;
        LiftedMeasure q;
        for (int v = 0; v < static_cast<int>(sys.vars.size()); ++v)
            if (sgn(out.primal[v]) > 0)
                q.entries.push_back({sys.vars[v].first, sys.vars[v].second, out.primal[v]});
        q.sort_and_merge();
        std::string why;
        if (!measure_in_martingale_set(bp, q, true, &why))
            throw std::logic_error("enlarged LP witness rejected: " + why);
        auto marginal = q.omega_marginal(bp.market().tree.leaf_count());
        const int cert = static_cast<int>(rep.enlarged_certificates.size());
        rep.enlarged_certificates.push_back(std::move(q));
        bool progress = false;
        for (auto it = uncovered.begin(); it != uncovered.end();) {
            if (sgn(marginal[*it]) > 0) {
                rep.cert_of_leaf[*it] = cert;
                it = uncovered.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
        if (!progress) break;
    }
}

void extract_witness_original(const MarketModel& m, const SupportStructure& sup,
                              const NaOptions& opts, NaReport& rep) {
    const auto& t = m.tree;
    const long rows = 2L * static_cast<long>(sup.reachable_leaves.size());
    if (rows > opts.witness_row_cap) return;
    lp::LinearProgram lp;
    lp.sense = lp::Sense::Max;
    // H per reachable non-leaf node, h per option; all free
    std::map<int, int> var_of_node;
    for (int d = 0; d < t.horizon; ++d)
        for (int node : t.by_depth[d])
            if (sup.node_reachable[node])
                for (int j = 0; j < m.dim; ++j) {
                    if (j == 0) var_of_node[node] = lp.num_vars();
                    lp.add_free_var("H_" + t.key(node) + "#" + std::to_string(j));
                }
    std::vector<int> hvar;
    for (int l = 0; l < m.num_options(); ++l)
        hvar.push_back(lp.add_free_var("h" + std::to_string(l)));

    auto payoff_terms = [&](int leaf) {
        std::vector<lp::Term> terms;
        for (int k = 0; k < t.horizon; ++k) {
            const int node = t.prefix_of(leaf, k);
            auto dS = m.delta_S(t.prefix_of(leaf, k + 1));
            for (int j = 0; j < m.dim; ++j)
                if (sgn(dS[j]) != 0) terms.push_back({var_of_node[node] + j, dS[j]});
        }
        for (int l = 0; l < m.num_options(); ++l) {
            const Rat& g = m.options[l][t.leaf_local(leaf)];
            if (sgn(g) != 0) terms.push_back({hvar[l], g});
        }
        return terms;
    };
    for (int leaf : sup.reachable_leaves) {
        auto terms = payoff_terms(leaf);
        // payoff >= 0 written as -payoff <= 0; payoff <= 1 caps the cone
        auto& lo = lp.add_row(lp::Rel::LE, Rat(0), "lo[" + t.key(leaf) + "]");
        for (auto tt : terms) {
            tt.coef = -tt.coef;
            lo.terms.push_back(tt);
        }
        auto& hi = lp.add_row(lp::Rel::LE, Rat(1), "hi[" + t.key(leaf) + "]");
        hi.terms = terms;
        for (const auto& tt : terms) lp.set_objective(tt.var, tt.coef);
    }
    auto out = solve_checked(lp);
    if (out.status != lp::Status::Optimal || !out.value.finite() ||
        sgn(out.value.val()) <= 0)
        return;  // no arbitrage found (should not happen when polar set nonempty)
    ArbitrageWitness w;
    for (const auto& [node, var] : var_of_node) {
        std::vector<Rat> pos(m.dim);
        bool nz = false;
        for (int j = 0; j < m.dim; ++j) {
            pos[j] = out.primal[var + j];
            nz = nz || sgn(pos[j]) != 0;
        }
        if (nz) w.positions[t.key(node)] = std::move(pos);
    }
    for (int l = 0; l < m.num_options(); ++l)
        w.static_positions.push_back(out.primal[hvar[l]]);
    for (int leaf : sup.reachable_leaves) {
        Rat v = 0;
        for (const auto& tt : payoff_terms(leaf)) v += tt.coef * out.primal[tt.var];
        w.payoffs[t.key(leaf)] = v;
    }
    rep.witness = std::move(w);
}

void extract_witness_enlarged(const BoundPayoff& bp, const NaOptions& opts,
                              NaReport& rep) {
    const auto& m = bp.market();
    const auto& t = m.tree;
    const auto& sup = bp.support();
    const long P = bp.plans().count;
    const long rows = 2L * static_cast<long>(sup.reachable_leaves.size()) * P;
    if (rows > opts.witness_row_cap) return;
    EnlargedAtoms atoms(t, bp.plans());
    lp::LinearProgram lp;
    lp.sense = lp::Sense::Max;
    std::map<std::pair<int, long>, int> var_of_atom;  // (node, plus prefix) -> var base
    auto atom_var = [&](int node, long pref) {
        auto it = var_of_atom.find({node, pref});
        if (it != var_of_atom.end()) return it->second;
        const int base = lp.num_vars();
        var_of_atom[{node, pref}] = base;
        for (int j = 0; j < m.dim; ++j)
            lp.add_free_var("H_" + atoms.atom_key(node, pref, t.nodes[node].depth + 1,
                                                  bp.model().actions) +
                            "#" + std::to_string(j));
        return base;
    };
    std::vector<int> hvar;
    for (int l = 0; l < m.num_options(); ++l)
        hvar.push_back(lp.add_free_var("h" + std::to_string(l)));

    auto payoff_terms = [&](int leaf, long plan) {
        std::vector<lp::Term> terms;
        for (int k = 0; k < t.horizon; ++k) {
            const int node = t.prefix_of(leaf, k);
            const int base = atom_var(node, bp.plans().prefix_of(plan, k + 1));
            auto dS = m.delta_S(t.prefix_of(leaf, k + 1));
            for (int j = 0; j < m.dim; ++j)
                if (sgn(dS[j]) != 0) terms.push_back({base + j, dS[j]});
        }
        for (int l = 0; l < m.num_options(); ++l) {
            const Rat& g = m.options[l][t.leaf_local(leaf)];
            if (sgn(g) != 0) terms.push_back({hvar[l], g});
        }
        return terms;
    };
    for (int leaf : sup.reachable_leaves) {
        for (long p = 0; p < P; ++p) {
            auto terms = payoff_terms(leaf, p);
            auto& lo = lp.add_row(lp::Rel::LE, Rat(0));
            for (auto tt : terms) {
                tt.coef = -tt.coef;
                lo.terms.push_back(tt);
            }
            auto& hi = lp.add_row(lp::Rel::LE, Rat(1));
            hi.terms = terms;
            for (const auto& tt : terms) lp.set_objective(tt.var, tt.coef);
        }
    }
    auto out = solve_checked(lp);
    if (out.status != lp::Status::Optimal || !out.value.finite() ||
        sgn(out.value.val()) <= 0)
        return;
    ArbitrageWitness w;
    for (const auto& [key, base] : var_of_atom) {
        std::vector<Rat> pos(m.dim);
        bool nz = false;
        for (int j = 0; j < m.dim; ++j) {
            pos[j] = out.primal[base + j];
            nz = nz || sgn(pos[j]) != 0;
        }
        if (nz)
            w.positions[atoms.atom_key(key.first, key.second,
                                       t.nodes[key.first].depth + 1,
                                       bp.model().actions)] = std::move(pos);
    }
    for (int l = 0; l < m.num_options(); ++l)
        w.static_positions.push_back(out.primal[hvar[l]]);
    for (int leaf : sup.reachable_leaves)
        for (long p = 0; p < P; ++p) {
            Rat v = 0;
            for (const auto& tt : payoff_terms(leaf, p)) v += tt.coef * out.primal[tt.var];
            if (sgn(v) != 0)
                w.payoffs[t.key(leaf) + "|" +
                          plan_key(bp.plans().to_plan(p), bp.model().actions)] = v;
        }
    rep.witness = std::move(w);
}

}  // namespace

NaReport check_na(const BoundPayoff& bp, SpaceTag space, const NaOptions& opts) {
    const auto& m = bp.market();
    const auto& sup = bp.support();
    NaReport rep;
    rep.space = space;
    if (space == SpaceTag::Original) {
        cover_original(m, sup, rep);
        if (!rep.holds) extract_witness_original(m, sup, opts, rep);
        return rep;
    }

    // Enlarged space. Certificates found on the original system are lifted
    // with a fixed plan and verified against the full enlarged constraint
    // system; paths left uncovered are certified polar by direct LPs.
    const auto& t = m.tree;
    rep.cert_of_leaf.assign(t.leaf_count(), -1);
    NaReport orig;
    cover_original(m, sup, orig);
    std::set<int> uncovered;
    for (int leaf : sup.reachable_leaves) uncovered.insert(t.leaf_local(leaf));
    for (std::size_t c = 0; c < orig.leaf_certificates.size(); ++c) {
        LiftedMeasure q = lift_measure(orig.leaf_certificates[c], {{0, Rat(1)}});
        std::string why;
        if (!measure_in_martingale_set(bp, q, true, &why)) {
            // lift rejected: fall back to direct enlarged search below
            break;
        }
        auto marginal = q.omega_marginal(t.leaf_count());
        const int cert = static_cast<int>(rep.enlarged_certificates.size());
        rep.enlarged_certificates.push_back(std::move(q));
        for (auto it = uncovered.begin(); it != uncovered.end();)
            if (sgn(marginal[*it]) > 0) {
                rep.cert_of_leaf[*it] = cert;
                it = uncovered.erase(it);
            } else {
                ++it;
            }
    }
    if (!uncovered.empty()) {
        const long vars = static_cast<long>(sup.reachable_leaves.size()) * bp.plans().count;
        if (vars <= opts.direct_enlarged_var_cap)
            cover_enlarged_direct(bp, rep, uncovered);
    }
    rep.polar_leaves.assign(uncovered.begin(), uncovered.end());
    rep.holds = rep.polar_leaves.empty() && !sup.reachable_leaves.empty();
    if (!rep.holds) extract_witness_enlarged(bp, opts, rep);
    return rep;
}

NaEquivalence na_equivalence_suite(const BoundPayoff& bp, const NaOptions& opts) {
    NaEquivalence eq;
    eq.original = check_na(bp, SpaceTag::Original, opts);
    eq.enlarged = check_na(bp, SpaceTag::Enlarged, opts);
    eq.holds_equal = (eq.original.holds == eq.enlarged.holds);
    eq.polar_sets_equal = (eq.original.polar_leaves == eq.enlarged.polar_leaves);
    return eq;
}

nlohmann::json NaReport::to_json(const BoundPayoff& bp) const {
    const auto& t = bp.market().tree;
    nlohmann::json j;
    j["space"] = space == SpaceTag::Original ? "original" : "enlarged";
    j["holds"] = holds;
    nlohmann::json polar = nlohmann::json::array();
    for (int ll : polar_leaves) polar.push_back(t.key(t.leaves()[ll]));
    j["polar_paths"] = std::move(polar);
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& d : leaf_certificates) {
        nlohmann::json c = nlohmann::json::object();
        for (int i = 0; i < t.leaf_count(); ++i)
            if (sgn(d[i]) != 0) c[t.key(t.leaves()[i])] = rat_to_string(d[i]);
        certs.push_back(std::move(c));
    }
    for (const auto& q : enlarged_certificates) {
        nlohmann::json c = nlohmann::json::object();
        for (const auto& e : q.entries)
            c[t.key(t.leaves()[e.leaf_local]) + "|" +
              plan_key(bp.plans().to_plan(e.plan_id), bp.model().actions)] =
                rat_to_string(e.weight);
        certs.push_back(std::move(c));
    }
    j["certificates"] = std::move(certs);
    if (witness) {
        nlohmann::json w;
        nlohmann::json pos = nlohmann::json::object();
        for (const auto& [key, v] : witness->positions) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& x : v) arr.push_back(rat_to_string(x));
            pos[key] = std::move(arr);
        }
        w["positions"] = std::move(pos);
        nlohmann::json hs = nlohmann::json::array();
        for (const auto& x : witness->static_positions) hs.push_back(rat_to_string(x));
        w["static_positions"] = std::move(hs);
        nlohmann::json pays = nlohmann::json::object();
        for (const auto& [key, v] : witness->payoffs) pays[key] = rat_to_string(v);
        w["payoffs"] = std::move(pays);
        j["arbitrage_witness"] = std::move(w);
    }
    return j;
}

}  // namespace rshedge
