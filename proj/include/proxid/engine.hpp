#pragma once

#include <optional>
#include <string>
#include <vector>

#include "proxid/estimand.hpp"
#include "proxid/evaluate.hpp"
#include "proxid/graph.hpp"

namespace proxid {

struct QueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicySpec {
    VertexId treatment;
    VertexSet inputs;  // must be non-descendants of the treatment
    std::string function_id;
};

struct CausalQuery {
    VertexSet outcomes;
    std::vector<std::pair<VertexId, std::string>> treatments;  // vertex, value label
    VertexSet proxies;                                         // empty for classical queries
    std::vector<PolicySpec> policies;

    VertexSet treatment_set() const;
};

struct TraceStep {
    std::string district;
    std::string kind;  // ordinary | marginalize | proximal
    std::string target;
    std::string m_star, z_set, u_star;
    std::string inductive_scope, reusing_scope;
    std::string note;
};

struct IdSuccess {
    ExprPtr estimand;
    AssumptionLedger ledger;
    std::vector<TraceStep> trace;
};

struct IdFailure {
    VertexSet witness_district;
    VertexSet stuck;
};

struct IdVerdict {
    bool identified = false;
    IdSuccess success;
    IdFailure failure;
};

// The classical ID algorithm. Hidden vertices of every kind are projected
// out first; proxies and policies in q must be empty.
IdVerdict identify(const Admg& g, const CausalQuery& q);

// One district term: folds the fixing sequence into a chain of quotients
// against the current kernel, splitting into conditionals where the chain
// rule allows. `g` must contain no hidden vertices.
ExprPtr derive_district(const Admg& g, const VertexSet& district,
                        const std::vector<VertexId>& seq);

// --- policies ----------------------------------------------------------------

struct PolicyReduction {
    CausalQuery joint_query;  // p(Y ∪ all W_A under do(a)); policies removed
    VertexSet sum_over;       // union of the policy input sets
    std::vector<PolicySpec> plugs;
};

// Reduces a policy query to the joint interventional query plus the marginal
// recipe p(Y(f)) = Σ_{w} p(Y(a), W(a)=w)|_{a := f(w)}.
PolicyReduction reduce_policy_query(const Admg& g, const CausalQuery& q);

// Applies the recipe: evaluates the joint estimand with treatment axes kept
// free and composes the policy tables (axes = inputs, entries = chosen
// category index).
Table evaluate_policy_response(const ExprPtr& joint_estimand, const EvalEnv& env,
                               const CausalQuery& joint_query, const PolicyReduction& reduction,
                               const std::map<VertexId, Table>& policy_tables);

// shared assembly used by both engines
ExprPtr assemble_query_estimand(std::vector<ExprPtr> district_terms, const VertexSet& ystar,
                                const CausalQuery& q);

void validate_query(const Admg& g, const CausalQuery& q, bool allow_proxies);

}  // namespace proxid
