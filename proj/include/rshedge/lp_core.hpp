#ifndef RSHEDGE_LP_CORE_HPP
#define RSHEDGE_LP_CORE_HPP

#include <optional>
#include <string>
#include <vector>

#include "rshedge/numbers.hpp"

namespace rshedge::lp {

enum class Rel { LE, EQ, GE };
enum class Sense { Min, Max };
enum class Status { Optimal, Infeasible, Unbounded };

struct Term {
    int var;
    Rat coef;
};

struct Row {
    std::vector<Term> terms;
    Rel rel = Rel::EQ;
    Rat rhs = 0;
    std::string name;
};

/// Variable bound; default is [0, +inf). nullopt = unbounded on that side.
struct VarBound {
    std::optional<Rat> lo = Rat(0);
    std::optional<Rat> hi = std::nullopt;
};

struct LinearProgram {
    Sense sense = Sense::Min;
    std::vector<Term> objective;
    Rat objective_constant = 0;
    std::vector<VarBound> bounds;
    std::vector<std::string> var_names;
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(bounds.size()); }

    int add_var(std::string name = {}, std::optional<Rat> lo = Rat(0),
                std::optional<Rat> hi = std::nullopt) {
        bounds.push_back(VarBound{std::move(lo), std::move(hi)});
        var_names.push_back(std::move(name));
        return num_vars() - 1;
    }
    int add_free_var(std::string name = {}) {
        return add_var(std::move(name), std::nullopt, std::nullopt);
    }
    void set_objective(int var, Rat c) { objective.push_back({var, std::move(c)}); }
    Row& add_row(Rel rel, Rat rhs, std::string name = {}) {
        rows.push_back(Row{{}, rel, std::move(rhs), std::move(name)});
        return rows.back();
    }
};

/// Solver result with self-contained optimality / infeasibility evidence.
///
/// Optimal:    `primal` is a feasible point attaining `value`; `row_duals`
///             are multipliers (one per row, textbook sign conventions for
///             the problem's sense) whose dual objective equals `value`.
/// Infeasible: `farkas` are row multipliers proving emptiness.
/// Unbounded:  `primal` is feasible and `ray` is an improving direction.
struct LpOutcome {
    Status status = Status::Optimal;
    XR value;
    std::vector<Rat> primal;
    std::vector<Rat> row_duals;
    std::vector<Rat> farkas;
    std::vector<Rat> ray;
    long pivots = 0;
};

/// Deterministic exact solve. Same input always yields the same outcome.
LpOutcome solve_rational(const LinearProgram& lp);

/// Independent re-verification of an outcome. Does not trust solver state:
/// feasibility, dual feasibility and objective agreement are recomputed
/// from scratch in exact arithmetic.
bool check_certificate(const LinearProgram& lp, const LpOutcome& out,
                       std::string* why = nullptr);

struct FloatOutcome {
    Status status = Status::Optimal;
    double value = 0;
    std::vector<double> primal;
    std::vector<double> row_duals;
    std::vector<double> farkas;
    std::vector<double> ray;
    long pivots = 0;
};

/// Double-precision solve with tolerance `tol` on constraint residuals.
/// Throws numerical_breakdown when the certificate cannot be validated.
FloatOutcome solve_float(const LinearProgram& lp, double tol = 1e-9);

bool check_certificate_float(const LinearProgram& lp, const FloatOutcome& out,
                             double tol, std::string* why = nullptr);

/// LP dual of `lp`. Requires every variable bound to be [0, inf) or free.
/// dual_row_of_var[j] is the dual row expressing primal variable j's
/// reduced-cost condition; dual_var_of_row[r] the dual variable of row r.
/// For an Optimal dual outcome, row_duals[dual_row_of_var[j]] recovers the
/// primal optimizer.
struct DualizedLp {
    LinearProgram dual;
    std::vector<int> dual_row_of_var;
    std::vector<int> dual_var_of_row;
};
DualizedLp dualize(const LinearProgram& lp);

/// CPLEX LP text format, for external cross-checking.
std::string to_lp_format(const LinearProgram& lp);

/// Copy of `lp` with every rational coefficient put in canonical form.
/// All lp_core entry points normalize internally; external consumers of raw
/// LinearProgram data (oracles, dumps) should normalize first.
LinearProgram normalized_copy(const LinearProgram& lp);

}  // namespace rshedge::lp

#endif
