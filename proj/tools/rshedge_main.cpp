// Command-line front end: load market/action documents, run the requested
// computation, emit JSON/CSV reports.
//
// Exit codes: 0 success, 1 input error, 2 no-arbitrage failure (the report
// is still written when computable).
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "rshedge/duality.hpp"

using namespace rshedge;

namespace {

struct RunConfig {
    std::string market_path;
    std::string actions_path;
    std::string mode = "rational";
    double tol = 1e-9;
    long budget_paths = 200000;
    long budget_policies = 200000;
    std::string out_path;
    std::string dump_values_path;
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--market", cfg.market_path, "market JSON document")->required();
    cmd->add_option("--actions", cfg.actions_path, "action JSON document")->required();
    cmd->add_option("--mode", cfg.mode, "number mode: rational|float")
        ->check(CLI::IsMember({"rational", "float"}));
    cmd->add_option("--tol", cfg.tol, "float-mode tolerance");
    cmd->add_option("--budget-paths", cfg.budget_paths, "max enlarged paths");
    cmd->add_option("--budget-policies", cfg.budget_policies, "max enumerated policies");
    cmd->add_option("--out", cfg.out_path, "output file (default: stdout)");
    cmd->add_option("--dump-values", cfg.dump_values_path,
                    "also dump the value table as CSV to this path");
}

void write_text(const RunConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(cfg.out_path);
    if (!out) throw config_error("cannot write output file '" + cfg.out_path + "'");
    out << text;
}

BoundPayoff load_bound(const RunConfig& cfg) {
    MarketModel m = load_market_file(cfg.market_path);
    SupportStructure sup = support_structure(m);
    Budgets budgets;
    budgets.max_paths = cfg.budget_paths;
    budgets.max_policies = cfg.budget_policies;
    return BoundPayoff(m, sup, load_actions_file(cfg.actions_path), budgets);
}

PricingOptions pricing_options(const RunConfig& cfg) {
    PricingOptions opts;
    opts.budgets.max_paths = cfg.budget_paths;
    opts.budgets.max_policies = cfg.budget_policies;
    return opts;
}

std::string format_double(double v) {
    if (v == -HUGE_VAL) return "-inf";
    if (v == HUGE_VAL) return "+inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void maybe_dump_values(const RunConfig& cfg, const BoundPayoff& bp) {
    if (cfg.dump_values_path.empty()) return;
    auto r = backward_induction(bp);
    std::ofstream out(cfg.dump_values_path);
    if (!out)
        throw config_error("cannot write value dump '" + cfg.dump_values_path + "'");
    dump_values_csv(out, bp, r.table);
}

int cmd_price(const RunConfig& cfg) {
    auto bp = load_bound(cfg);
    auto opts = pricing_options(cfg);
    nlohmann::json doc;
    bool na_ok = true;
    if (cfg.mode == "rational") {
        auto rep = price_report(bp, opts);
        doc = rep.to_json(bp);
        na_ok = rep.na.holds;
    } else {
        auto fp = float_prices(bp, cfg.tol, opts);
        auto na = check_na(bp, SpaceTag::Original);
        doc["primal_original"] = format_double(fp.primal_original);
        doc["primal_enlarged"] = format_double(fp.primal_enlarged);
        doc["dual_enlarged"] = format_double(fp.dual_enlarged);
        doc["naive_model_price"] = format_double(fp.naive);
        doc["na"] = na.to_json(bp);
        doc["flags"] = {
            {"naive_lt_dual", fp.naive < fp.dual_enlarged - cfg.tol},
            {"primal_eq_dual", std::abs(fp.primal_enlarged - fp.dual_enlarged) <= cfg.tol}};
        na_ok = na.holds;
    }
    write_text(cfg, doc.dump(2) + "\n");
    maybe_dump_values(cfg, bp);
    return na_ok ? 0 : 2;
}

int cmd_hedge(const RunConfig& cfg) {
    auto bp = load_bound(cfg);
    if (bp.market().num_options() > 0)
        throw config_error(
            "hedge extraction requires a market without statically traded options");
    auto na = check_na(bp, SpaceTag::Original);
    if (!na.holds) {
        std::ostringstream os;
        os << "no-arbitrage fails";
        if (!na.polar_leaves.empty())
            os << "; uncharged path '"
               << bp.market().tree.key(
                      bp.market().tree.leaves()[na.polar_leaves.front()])
               << "'";
        write_text(cfg, os.str() + "\n");
        return 2;
    }
    auto r = backward_induction(bp);
    auto h = extract_hedge(bp, r.table);
    std::string why;
    if (!check_hedge_domination(bp, h, &why))
        throw std::logic_error("extracted hedge fails domination: " + why);
    std::ostringstream os;
    os << "x," << rat_to_string(h.x) << "\n";
    os << "level,atom_key";
    for (int j = 0; j < bp.market().dim; ++j) os << ",y" << j;
    os << "\n";
    const auto& t = bp.market().tree;
    for (int k = 0; k < t.horizon; ++k) {
        for (long id = 0; id < r.table.atoms.plus_count(k); ++id) {
            auto [node, pref] = r.table.atoms.plus_parts(k, id);
            if (!bp.support().node_reachable[node]) continue;
            os << k << ","
               << r.table.atoms.atom_key(node, pref, k + 1, bp.model().actions);
            for (int j = 0; j < bp.market().dim; ++j)
                os << "," << rat_to_string(h.y[k][id][j]);
            os << "\n";
        }
    }
    write_text(cfg, os.str());
    maybe_dump_values(cfg, bp);
    return 0;
}

int cmd_gap(const RunConfig& cfg) {
    auto bp = load_bound(cfg);
    auto opts = pricing_options(cfg);
    auto naive = naive_model_price(bp, opts);
    auto dual = dual_enlarged(bp, /*with_calibration=*/true, opts);
    auto primal = superhedge_primal_original(bp, opts);
    auto na = check_na(bp, SpaceTag::Original);
    nlohmann::json doc;
    doc["naive_model_price"] = naive.price.str();
    doc["dual_enlarged"] = dual.price.str();
    doc["primal_original"] = primal.price.str();
    doc["na"] = na.holds;
    bool gap = naive.price < dual.price;
    doc["flags"] = {{"naive_lt_dual", gap}, {"primal_eq_dual", primal.price == dual.price}};
    if (gap && naive.price.finite() && dual.price.finite())
        doc["gap"] = rat_to_string(dual.price.val() - naive.price.val());
    write_text(cfg, doc.dump(2) + "\n");
    return na.holds ? 0 : 2;
}

int cmd_check_na(const RunConfig& cfg) {
    auto bp = load_bound(cfg);
    NaOptions opts;
    opts.direct_enlarged_var_cap = cfg.budget_paths;
    auto eq = na_equivalence_suite(bp, opts);
    nlohmann::json doc;
    doc["original"] = eq.original.to_json(bp);
    doc["enlarged"] = eq.enlarged.to_json(bp);
    doc["holds_equal"] = eq.holds_equal;
    doc["polar_sets_equal"] = eq.polar_sets_equal;
    write_text(cfg, doc.dump(2) + "\n");
    if (!eq.passed()) throw std::logic_error("no-arbitrage equivalence check failed");
    return eq.original.holds ? 0 : 2;
}

int cmd_dump_values(const RunConfig& cfg) {
    auto bp = load_bound(cfg);
    auto r = backward_induction(bp);
    std::ostringstream os;
    dump_values_csv(os, bp, r.table);
    write_text(cfg, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust superhedging and dual pricing on finite scenario trees"};
    app.require_subcommand(1);
    RunConfig cfg;
    auto* price = app.add_subcommand("price", "compute the four prices and a report");
    add_common(price, cfg);
    auto* hedge = app.add_subcommand("hedge", "extract the superhedging strategy");
    add_common(hedge, cfg);
    auto* gap = app.add_subcommand("gap", "compare the model price with the dual price");
    add_common(gap, cfg);
    auto* checkna = app.add_subcommand("check-na", "no-arbitrage on both spaces");
    add_common(checkna, cfg);
    auto* dump = app.add_subcommand("dump-values", "dump the backward-induction table");
    add_common(dump, cfg);

    CLI11_PARSE(app, argc, argv);
    try {
        if (app.got_subcommand(price)) return cmd_price(cfg);
        if (app.got_subcommand(hedge)) return cmd_hedge(cfg);
        if (app.got_subcommand(gap)) return cmd_gap(cfg);
        if (app.got_subcommand(checkna)) return cmd_check_na(cfg);
        if (app.got_subcommand(dump)) return cmd_dump_values(cfg);
    } catch (const config_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const budget_exceeded& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 1;
    } catch (const hedge_infeasible& e) {
        std::cerr << "no-arbitrage failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
