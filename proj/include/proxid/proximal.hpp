#pragma once

#include "proxid/engine.hpp"

namespace proxid {

struct ProximalOptions {
    int max_m_star = 3;  // proxy subset size cap per step
    int max_z = 3;       // instrument subset size cap per step
};

// The two interventional kernels threaded through a district derivation.
// The inductive margin covers v_cur ∪ m2; the reusing margin covers v1 ∪ m1
// and survives only while non-empty.
struct MarginState {
    ExprPtr inductive;
    VertexSet v_cur, m2;
    ExprPtr reusing;  // null once dropped
    VertexSet v1, m1;

    VertexSet inductive_scope() const { return set_union(v_cur, m2); }
    VertexSet reusing_scope() const { return set_union(v1, m1); }
};

// Full per-district derivation state.
struct ProxState {
    Admg g;  // current CADMG, all original vertices, fixed ones marked
    MarginState margins;
    VertexSet u_pool;     // resolvable hidden ∪ consumed proxies
    VertexSet corrupted;  // descendant instruments already spent cross-world
    VarList do_ctx;
};

struct StepCheck {
    bool ok = false;
    std::string reason;
    VertexSet r, t, u_star;
    bool reuse_route = false;  // true: kernels drawn from the reusing margin
    AssumptionLedger records;
};

// Decides the conditions of one proximal step: the m-condition against the
// margins, fixability given u_star on the projected graph, and the three
// counterfactual independences on the split graph. Bridge existence and
// completeness are recorded as assumptions, never decided.
StepCheck check_proximal_step(const ProxState& st, const VertexId& a, const VertexSet& m_star,
                              const VertexSet& z, const VertexSet& u_star,
                              const VertexSet& remaining, const VertexSet& district);

// Applies a checked proximal step: emits the bridge nodes, rewrites the
// inductive margin to p(r, t | do(w, a)) and updates the reusing margin.
struct AppliedStep {
    ProxState state;
    std::shared_ptr<const BridgeSpec> bridge;
};
AppliedStep proximal_fix(const ProxState& st, const VertexId& a, const VertexSet& m_star,
                         const VertexSet& z, const StepCheck& check, FreshVars& fresh,
                         int bridge_index);

// Ordinary fixing step on both margins; requires fixability in the
// m2-projected graph. Corrupted vertices may only leave by marginalization.
struct OrdinaryCheck {
    bool ok = false;
    std::string reason;
    bool pure_marginalization = false;
};
OrdinaryCheck check_ordinary_step(const ProxState& st, const VertexId& a);
ProxState ordinary_fix_margins(const ProxState& st, const VertexId& a, FreshVars& fresh);

struct AdmissibleStep {
    VertexId target;
    bool proximal = false;
    VertexSet m_star, z, u_star;
};

struct AdmissibleSearchResult {
    bool ok = false;
    std::vector<AdmissibleStep> steps;
    ExprPtr term;  // district term when ok
    VertexSet stuck;
    AssumptionLedger records;
    std::vector<TraceStep> trace;
};

// Depth-first search for an admissible sequence fixing v_star \ district;
// ordinary steps preferred, then proximal candidates by increasing subset
// size in canonical order.
AdmissibleSearchResult search_admissible_sequence(const Admg& g0, const VertexSet& v_star,
                                                  const VertexSet& district,
                                                  const VertexSet& proxies,
                                                  const ProximalOptions& opt);

// The proximal ID algorithm over an ADMG with resolvable (u) and
// unresolvable (l) hidden vertices.
IdVerdict proximal_identify(const Admg& g, const CausalQuery& q, const ProximalOptions& opt = {});

}  // namespace proxid
