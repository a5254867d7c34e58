#pragma once

#include <map>
#include <optional>
#include <string>

#include "proxid/graph.hpp"
#include "proxid/rng.hpp"
#include "proxid/table.hpp"

namespace proxid {

// Finite structural causal model over a DAG (hidden vertices included).
// CPTs are tables over {v} ∪ pa(v); for every parent configuration the
// column over v sums to one.
struct DiscreteScm {
    Admg graph;  // directed edges only
    std::map<VertexId, int> card;
    std::map<VertexId, Table> cpt;

    std::vector<VertexId> topo_order() const;
    void validate() const;
};

// Full joint p over every vertex via the DAG factorization.
Table scm_joint(const DiscreteScm& scm);

// Truncated factorization: intervened CPTs replaced by point masses, so the
// result keeps all axes. Marginalize afterwards as needed.
Table interventional(const DiscreteScm& scm, const std::map<VertexId, int>& do_values);

// Joint over the observed vertices only (the estimand evaluation env).
Table observed_joint(const DiscreteScm& scm);

// p(Y | do(A)) as a table over y-axes plus the do-axes (one slice per value).
Table interventional_margin_all(const DiscreteScm& scm, const VertexSet& outcomes,
                                const VertexSet& treatments);

// CPT entries drawn uniformly on the simplex, floored at `floor` and
// renormalized; identical output for identical seeds.
DiscreteScm random_scm(const Admg& graph, const std::map<VertexId, int>& cards, uint64_t seed,
                       double floor);

// Canonical DAG of an ADMG: each bidirected edge a <-> b is replaced by a
// fresh unresolvable hidden common parent L_a_b. SCMs are built on this
// expansion; identification keeps working on the original mixed graph.
Admg canonical_dag(const Admg& g);

// i.i.d. forward samples; columns in graph vertex order
std::map<VertexId, std::vector<int>> sample_rows(const DiscreteScm& scm, int n, uint64_t seed);

// --- bridge machinery --------------------------------------------------------

struct BridgeSolveOutcome {
    Table bridge;         // axes: unknowns ∪ (lhs-only axes) ∪ (shared axes \ instruments)
    double max_residual;  // max-abs violation of the defining equation
};

struct BridgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solves lhs(r, s) = Σ_m* bridge(m*, r, s\z) rhs(m*, s) as a linear system
// per stratum of (r, s\z), where s are the shared axes of lhs and rhs and
// z ⊆ s are the instrument axes. Minimum-norm least-squares per stratum.
BridgeSolveOutcome solve_bridge_tables(const Table& lhs, const Table& rhs, const VarList& unknowns,
                                       const VarList& instruments);

// Categorical completeness surrogate: within every stratum the matrix
// [instrument-combo x target-combo] of the kernel has full column rank
// (smallest singular value > rel_tol * largest, and enough rows).
bool rank_completeness_check(const Table& kernel, const VarList& targets,
                             const VarList& instruments, double rel_tol = 1e-9);

}  // namespace proxid
