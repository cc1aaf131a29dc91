#ifndef RSHEDGE_DP_ENGINE_HPP
#define RSHEDGE_DP_ENGINE_HPP

#include <ostream>
#include <string>
#include <vector>

#include "rshedge/enlarged_space.hpp"

namespace rshedge {

/// Backward-induction values on enlarged atoms.
/// minus[k] holds the level-k values (before the time-k action);
/// plus[k] holds the one-step operator values after fixing the time-k
/// action, kept for policy and hedge extraction. Atoms under unreachable
/// nodes are not computed and read as -inf.
struct ValueTable {
    EnlargedAtoms atoms;
    std::vector<std::vector<XR>> minus;  // [k][minus_atom_id], k = 0..N
    std::vector<std::vector<XR>> plus;   // [k][plus_atom_id],  k = 0..N-1
    XR root_value = XR::neg_inf();
};

/// Best payoff over the final action given the length-N action prefix.
XR terminal_op(const BoundPayoff& bp, int leaf_local, long prefix_id);

/// One-step operator for a single action: restricted LP maximum of the
/// expected next value over the node's martingale polytope. Successors
/// carrying -inf are excluded from the support; when no measure can avoid
/// them the value is -inf.
XR one_step_action_value(const MarketModel& m, const SupportStructure& sup, int node,
                         const std::vector<XR>& value_per_branch);

/// Max over actions of one_step_action_value; `next_by_action[a][b]` is the
/// next value when taking action a and moving along branch b.
XR one_step_value(const MarketModel& m, const SupportStructure& sup, int node,
                  const std::vector<std::vector<XR>>& next_by_action);

struct BackwardResult {
    XR value;
    ValueTable table;
};

BackwardResult backward_induction(const BoundPayoff& bp);

/// Exact argmax policy from a value table; epsilon is 0 for finite action
/// sets. Ties break to the smallest action index.
struct ExtractedPolicy {
    std::vector<std::vector<int>> choice;  // [k][minus_atom_id] -> action, -1 if n/a
    Rat epsilon = 0;

    Plan plan_for_leaf(const BoundPayoff& bp, int leaf_local) const;
    /// Collapse to an adapted per-node policy by following own trajectory.
    ActionPolicy to_action_policy(const BoundPayoff& bp) const;
};

ExtractedPolicy extract_policy(const BoundPayoff& bp, const ValueTable& table);

/// One-step superhedge vectors per plus atom solving
///   y . dS_{k+1}(b) >= V_{k+1}(b) - V_k   for every reachable successor b,
/// minimum |y|_1 selection. Requires finite values on reachable atoms with
/// feasible continuations; infeasibility signals a no-arbitrage violation.
struct ExtractedHedge {
    Rat x;                                          // initial capital
    std::vector<std::vector<std::vector<Rat>>> y;   // [k][plus_atom_id][component]
};

ExtractedHedge extract_hedge(const BoundPayoff& bp, const ValueTable& table);

/// Exhaustive check of x + (hedge gains) >= phi over every reachable leaf and
/// feasible plan.
bool check_hedge_domination(const BoundPayoff& bp, const ExtractedHedge& h,
                            std::string* why = nullptr);

/// Measure attaining the backward-induction value: follows argmax actions
/// forward, mixing with the optimal one-step measures. Verified against the
/// martingale-set definition by callers.
LiftedMeasure optimal_lifted_measure(const BoundPayoff& bp, const ValueTable& table);

/// CSV dump (level, atom_key, value) of reachable minus atoms.
void dump_values_csv(std::ostream& os, const BoundPayoff& bp, const ValueTable& table);

}  // namespace rshedge

#endif
