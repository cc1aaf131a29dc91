#ifndef RSHEDGE_DUALITY_HPP
#define RSHEDGE_DUALITY_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rshedge/arbitrage.hpp"
#include "rshedge/dp_engine.hpp"
#include "rshedge/enlarged_space.hpp"

namespace rshedge {

struct PricingOptions {
    /// Primal superhedging LPs are solved directly while their row count
    /// stays under this cap; larger instances go through the dual LP with
    /// certificate-based witness recovery, or through DP witnesses when no
    /// static options are present.
    long direct_primal_row_cap = 400;
    /// Dual LPs switch to DP-witness certification (no static options only)
    /// when rows x columns exceeds this.
    long dual_lp_cell_cap = 200000;
    Budgets budgets;
};

/// Superhedging portfolio: initial capital, dynamic positions indexed by
/// (time-k node, action prefix including the time-k action), and static
/// positions in the options.
struct PortfolioWitness {
    Rat x;
    std::map<std::pair<int, long>, std::vector<Rat>> positions;
    std::vector<Rat> static_positions;
};

struct PriceResult {
    XR price = XR::neg_inf();
    std::string method;  // "simplex" | "via-dual" | "dp-witness"
    std::optional<PortfolioWitness> portfolio;
    std::optional<LiftedMeasure> measure;
    long pivots = 0;
};

/// Least initial capital superhedging phi quasi-surely for every plan,
/// assembled on the original space: one inequality row per (reachable leaf,
/// feasible plan) pair.
PriceResult superhedge_primal_original(const BoundPayoff& bp,
                                       const PricingOptions& opts = {});

/// Same value through the enlarged-space assembly (strategies indexed by
/// enlarged atoms); equality with the original assembly is a theorem.
PriceResult superhedge_primal_enlarged(const BoundPayoff& bp,
                                       const PricingOptions& opts = {});

/// sup of E[phi] over (calibrated) enlarged martingale measures. Paths with
/// phi = -inf are excluded from the support; infeasibility reports -inf.
PriceResult dual_enlarged(const BoundPayoff& bp, bool with_calibration,
                          const PricingOptions& opts = {});

/// max over adapted policies of the calibrated model value of the induced
/// payoff. Exact: the terminal action is optimized pointwise per leaf, the
/// remaining policy prefixes are enumerated (deduplicated by induced payoff
/// vector), each evaluated by one LP over the original measure set.
struct NaivePriceResult {
    XR price = XR::neg_inf();
    std::optional<ActionPolicy> policy;
    std::optional<std::vector<Rat>> measure;  // per leaf_local
    long policies_enumerated = 0;
    long lp_solves = 0;
};

NaivePriceResult naive_model_price(const BoundPayoff& bp, const PricingOptions& opts = {});

/// sup over uncalibrated martingale measures of E[phi_chi] for a fixed
/// adapted policy.
XR policy_value(const BoundPayoff& bp, const ActionPolicy& pol);

/// Certified pricing without large LPs (no static options): the value is the
/// backward-induction value v, bracketed by an exhaustively checked hedge at
/// x = v and a verified martingale measure attaining v.
struct WitnessBracket {
    XR value = XR::neg_inf();
    std::optional<ExtractedHedge> hedge;
    std::optional<LiftedMeasure> measure;
    bool hedge_verified = false;
    bool measure_verified = false;
};

WitnessBracket verify_by_witnesses(const BoundPayoff& bp);

/// Dual-side verification of the dynamic-extension equality: from the
/// optimal calibrated enlarged measure, the option price processes
/// Y_k = E[g | level-k atoms] satisfy Y_0 = 0, Y_N = g, the martingale
/// identity, and the measure's value equals the superhedging price.
struct DynamicExtensionReport {
    bool applicable = false;  // a calibrated optimal measure exists
    bool calibration_ok = false;
    bool terminal_ok = false;
    bool martingale_ok = false;
    bool value_matches_primal = false;
    XR dual_value = XR::neg_inf();
    XR primal_value = XR::neg_inf();
    /// Y values per level k = 0..N: atom key -> per-option value
    std::vector<std::map<std::string, std::vector<Rat>>> y_process;
    /// induced measure on (leaf, Y-path) pairs as evidence
    struct QHatEntry {
        std::string leaf_key;
        std::vector<std::vector<Rat>> y_path;  // per k = 1..N-1, per option
        Rat mass;
    };
    std::vector<QHatEntry> qhat;

    bool passed() const {
        return applicable && calibration_ok && terminal_ok && martingale_ok &&
               value_matches_primal;
    }
};

DynamicExtensionReport dynamic_extension_check(const BoundPayoff& bp,
                                               const PricingOptions& opts = {});

/// The four prices with witnesses and consistency flags. Weak duality
/// (naive <= dual <= primal) is asserted before emission.
struct PriceReport {
    XR primal_original = XR::neg_inf();
    XR primal_enlarged = XR::neg_inf();
    XR dual_enlarged_price = XR::neg_inf();
    XR naive_price = XR::neg_inf();
    NaReport na;
    std::optional<PriceResult> primal_original_result;
    std::optional<PriceResult> primal_enlarged_result;
    std::optional<PriceResult> dual_result;
    std::optional<NaivePriceResult> naive_result;
    std::map<std::string, std::string> errors;  // component -> message
    bool flag_naive_lt_dual = false;
    bool flag_primal_eq_dual = false;

    nlohmann::json to_json(const BoundPayoff& bp) const;
};

PriceReport price_report(const BoundPayoff& bp, const PricingOptions& opts = {});

/// Float-mode prices (LP layer in double precision, tolerance `tol`).
struct FloatPrices {
    double primal_original;
    double primal_enlarged;
    double dual_enlarged;
    double naive;
};
FloatPrices float_prices(const BoundPayoff& bp, double tol,
                         const PricingOptions& opts = {});

nlohmann::json portfolio_to_json(const BoundPayoff& bp, const PortfolioWitness& w);
nlohmann::json measure_to_json(const BoundPayoff& bp, const LiftedMeasure& q);

}  // namespace rshedge

#endif
