// Test-only brute-force oracles. Deliberately independent of the library's
// solver internals: everything here is direct enumeration plus dense
// rational Gaussian elimination.
#ifndef RSHEDGE_TESTS_ORACLES_HPP
#define RSHEDGE_TESTS_ORACLES_HPP

#include <optional>
#include <vector>

#include "rshedge/lp_core.hpp"
#include "rshedge/numbers.hpp"

namespace rshedge::oracles {

// Solves A x = b for square A; nullopt if singular.
std::optional<std::vector<Rat>> gauss_solve(std::vector<std::vector<Rat>> A,
                                            std::vector<Rat> b);

// All vertices of the feasible set of an LP whose variables are all boxed
// (finite lo and hi) or which is otherwise bounded by rows. Enumerates every
// n-subset of {rows as equalities} u {x_j = lo_j} u {x_j = hi_j}, solves, and
// keeps feasible unique solutions.
std::vector<std::vector<Rat>> enumerate_vertices(const lp::LinearProgram& lp);

// Best objective over the enumerated vertices; nullopt when no feasible
// vertex exists (for boxed instances this means infeasibility).
std::optional<Rat> brute_force_optimum(const lp::LinearProgram& lp);

// Vertices of the simplex-with-martingale-rows polytope
//   { q >= 0, sum q = 1, sum_i q_i * dS[i] = 0 (componentwise) }
// used as the independent check for one-step martingale polytopes.
std::vector<std::vector<Rat>> martingale_polytope_vertices(
    const std::vector<std::vector<Rat>>& dS);

}  // namespace rshedge::oracles

#endif
