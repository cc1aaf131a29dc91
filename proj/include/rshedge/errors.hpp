#ifndef RSHEDGE_ERRORS_HPP
#define RSHEDGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rshedge {

/// Malformed or inconsistent input document.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An enumeration (paths, plans, policies) exceeds the configured budget.
struct budget_exceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One-step superhedge system infeasible; indicates a no-arbitrage violation.
struct hedge_infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Float-mode solve lost too much precision to certify the result.
struct numerical_breakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Budgets {
    long max_paths = 200000;     // enlarged paths |leaves| * |A|^(N+1)
    long max_policies = 200000;  // adapted policies (reduced count for model price)
};

}  // namespace rshedge

#endif
