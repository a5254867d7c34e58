#pragma once

#include "proxid/engine.hpp"
#include "proxid/proximal.hpp"
#include "proxid/scm.hpp"

namespace proxid {

// Random-SCM verification of an identification verdict: the independent
// oracle behind every identification claim.
struct VerifyConfig {
    int trials = 100;
    uint64_t seed = 1;
    double tol = 1e-8;   // estimand-vs-truth tolerance
    double floor = 0.05; // cpt probability floor
    bool proximal = false;
    ProximalOptions prox_options;
};

struct VerifyReport {
    bool identified = false;
    IdVerdict verdict;
    int trials = 0;
    int passed = 0;
    int skipped_rank = 0;  // rank-deficient constructions, detected and skipped
    int failed = 0;
    int bridge_failures = 0;  // residual beyond tolerance despite rank checks
    double max_err = 0;       // over evaluated trials
    std::string first_failure_scm;  // JSON for replay
    std::map<VertexId, int> cards;  // the cardinalities used
};

// Cardinalities for the canonical DAG of g: observed and hidden default to 2;
// every proxy and instrument set of an emitted bridge is enlarged until its
// joint state space covers the bridge's u_star joint space.
std::map<VertexId, int> bridge_sized_cards(const Admg& dag, const ExprPtr& estimand);

// Runs identification once and then `trials` random SCM comparisons.
VerifyReport verify_query(const Admg& g, const CausalQuery& q, const VerifyConfig& cfg);

}  // namespace proxid
