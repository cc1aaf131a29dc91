#ifndef RSHEDGE_ENLARGED_SPACE_HPP
#define RSHEDGE_ENLARGED_SPACE_HPP

#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rshedge/action_model.hpp"
#include "rshedge/market_model.hpp"

namespace rshedge {

/// Atom addressing on the enlarged space Ω x C.
///
/// A "minus" atom at level k is an (ω-prefix of length k, action-prefix of
/// length k) pair: the information available before the time-k action.
/// A "plus" atom additionally reveals the time-k action (prefix length k+1).
/// Plan prefixes use PlanIndexer ids; node-locals index by_depth[k].
struct EnlargedAtoms {
    const ScenarioTree* tree = nullptr;
    PlanIndexer idx;

    EnlargedAtoms() = default;
    EnlargedAtoms(const ScenarioTree& t, const PlanIndexer& plans)
        : tree(&t), idx(plans) {}

    int nodes_at(int depth) const { return static_cast<int>(tree->by_depth[depth].size()); }
    int node_local(int node) const {
        return node - tree->by_depth[tree->nodes[node].depth].front();
    }
    int node_at(int depth, int local) const { return tree->by_depth[depth][local]; }

    long minus_count(int k) const { return nodes_at(k) * idx.prefix_count(k); }
    long plus_count(int k) const { return nodes_at(k) * idx.prefix_count(k + 1); }
    long minus_id(int node, long prefix_id) const {
        const int k = tree->nodes[node].depth;
        return node_local(node) * idx.prefix_count(k) + prefix_id;
    }
    long plus_id(int node, long prefix_id) const {
        const int k = tree->nodes[node].depth;
        return node_local(node) * idx.prefix_count(k + 1) + prefix_id;
    }
    std::pair<int, long> minus_parts(int k, long atom_id) const {
        const long pc = idx.prefix_count(k);
        return {node_at(k, static_cast<int>(atom_id / pc)), atom_id % pc};
    }
    std::pair<int, long> plus_parts(int k, long atom_id) const {
        const long pc = idx.prefix_count(k + 1);
        return {node_at(k, static_cast<int>(atom_id / pc)), atom_id % pc};
    }

    std::string atom_key(int node, long prefix_id, int prefix_len,
                         const ActionSpace& a) const {
        return tree->key(node) + "|" + plan_key(idx.to_prefix(prefix_id, prefix_len), a);
    }
};

/// Full product enumeration with reachability/feasibility tags.
struct EnlargedPathSet {
    int num_leaves = 0;
    long num_plans = 0;
    std::vector<char> leaf_reachable;      // per leaf_local
    std::vector<char> pair_feasible;       // per leaf_local * num_plans + plan
    long count() const { return static_cast<long>(num_leaves) * num_plans; }
    long feasible_count() const;
    bool feasible(int leaf_local, long plan) const {
        return pair_feasible[static_cast<long>(leaf_local) * num_plans + plan] != 0;
    }
};

EnlargedPathSet enumerate_enlarged(const BoundPayoff& bp);

/// Nonnegative weights on enlarged paths (leaf_local, plan_id), with
/// optional mixing metadata from a lift.
struct LiftedMeasure {
    struct Entry {
        int leaf_local;
        long plan_id;
        Rat weight;
    };
    std::vector<Entry> entries;  // sorted by (leaf_local, plan_id), weights > 0

    Rat total_mass() const;
    Rat weight(int leaf_local, long plan_id) const;
    /// ω-marginal over leaf_local
    std::vector<Rat> omega_marginal(int num_leaves) const;
    void sort_and_merge();
};

/// Product lift of a leaf distribution and a plan distribution:
/// weight(ω,c) = P(ω) ν(c).
LiftedMeasure lift_measure(const std::vector<Rat>& leaf_dist,
                           const std::map<long, Rat>& plan_dist);

/// Mixture lift sum_c ν(c) P_c ⊗ δ_c for plan-dependent components.
LiftedMeasure lift_mixture(const std::map<long, std::pair<Rat, std::vector<Rat>>>&
                               nu_and_components);

struct Disintegration {
    std::map<long, Rat> nu;                              // plan -> mass
    std::map<long, std::vector<Rat>> components;         // plan -> leaf distribution
};

/// nu(c) = sum_ω Q(ω,c); component_c(ω) = Q(ω,c)/nu(c) on nu(c) > 0.
/// Lifting the result reproduces the measure exactly.
Disintegration disintegrate(const LiftedMeasure& q, int num_leaves);

enum class PlanSupport { All, FeasibleOnly };

/// Linear description of the enlarged (calibrated) martingale measure set
/// over path weights:
///   w >= 0, total mass 1, support in {reachable ω} x {plans per filter},
///   for every step k and every level-(k-1) atom extended by the time-(k-1)
///   action: sum over the atom's paths of w * ΔS_k = 0 componentwise,
///   optional calibration rows sum w * g_λ = 0.
struct EnlargedSystem {
    std::vector<std::pair<int, long>> vars;  // (leaf_local, plan_id), in order
    std::map<std::pair<int, long>, int> var_index;
    lp::LinearProgram lp;  // constraint rows only; objective left empty
    int mass_row = -1;
    std::vector<int> calibration_rows;
    EnlargedAtoms atoms;

    int var_of(int leaf_local, long plan_id) const {
        auto it = var_index.find({leaf_local, plan_id});
        return it == var_index.end() ? -1 : it->second;
    }
};

EnlargedSystem enlarged_martingale_constraints(const BoundPayoff& bp,
                                               bool with_calibration,
                                               PlanSupport filter);

/// Membership check of a measure in the enlarged (calibrated) martingale
/// set, evaluated directly from the definition; independent of any LP.
bool measure_in_martingale_set(const BoundPayoff& bp, const LiftedMeasure& q,
                               bool with_calibration, std::string* why = nullptr);

/// Debug dump: one line per (row, variable) coefficient.
void dump_constraints_csv(std::ostream& os, const EnlargedSystem& sys,
                          const BoundPayoff& bp);

}  // namespace rshedge

#endif
