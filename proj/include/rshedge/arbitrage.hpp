#ifndef RSHEDGE_ARBITRAGE_HPP
#define RSHEDGE_ARBITRAGE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rshedge/enlarged_space.hpp"

namespace rshedge {

enum class SpaceTag { Original, Enlarged };

/// Explicit arbitrage: positions whose terminal wealth is >= 0 on every
/// reachable path and > 0 on at least one.
struct ArbitrageWitness {
    std::map<std::string, std::vector<Rat>> positions;  // atom key -> position vector
    std::vector<Rat> static_positions;                  // per option
    std::map<std::string, Rat> payoffs;                 // path key -> achieved wealth
};

/// Quasi-sure no-arbitrage report via the calibrated-martingale-measure
/// characterization: the condition holds iff every reachable path is charged
/// by some calibrated martingale measure. Certificates are shared: one
/// measure typically covers many leaves.
struct NaReport {
    SpaceTag space = SpaceTag::Original;
    bool holds = false;
    std::vector<int> polar_leaves;  // leaf_local of reachable-but-never-charged leaves
    std::vector<int> cert_of_leaf;  // per leaf_local: certificate index or -1

    // Original-space certificates are leaf distributions; enlarged-space
    // certificates are measures on (leaf, plan) paths.
    std::vector<std::vector<Rat>> leaf_certificates;
    std::vector<LiftedMeasure> enlarged_certificates;

    std::optional<ArbitrageWitness> witness;  // populated on failure when in budget

    nlohmann::json to_json(const BoundPayoff& bp) const;
};

struct NaOptions {
    // direct enlarged LPs are used to certify polar paths up to this many
    // path variables; certificate measures are always verified against the
    // full enlarged constraint system regardless of size
    long direct_enlarged_var_cap = 20000;
    long witness_row_cap = 20000;
};

NaReport check_na(const BoundPayoff& bp, SpaceTag space, const NaOptions& opts = {});

/// Asserts that the two spaces agree on no-arbitrage, and that the
/// reachable-path polar sets coincide.
struct NaEquivalence {
    bool holds_equal = false;
    bool polar_sets_equal = false;
    NaReport original;
    NaReport enlarged;
    bool passed() const { return holds_equal && polar_sets_equal; }
};

NaEquivalence na_equivalence_suite(const BoundPayoff& bp, const NaOptions& opts = {});

}  // namespace rshedge

#endif
