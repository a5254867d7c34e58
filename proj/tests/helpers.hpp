#pragma once

#include "proxid/engine.hpp"
#include "proxid/evaluate.hpp"
#include "proxid/rng.hpp"
#include "proxid/scm.hpp"

// shared helpers for the engine test suites
namespace helpers {

using namespace proxid;

// random DAG over n observed vertices plus a few hidden confounders, each
// hidden vertex pointing at >= 2 observed ones
inline Admg random_hidden_dag(Rng& rng, int n_obs, int n_hidden, double p_edge) {
    std::map<VertexId, VertexKind> vs;
    std::vector<VertexId> obs;
    for (int i = 0; i < n_obs; i++) {
        VertexId v("V" + std::to_string(i));
        obs.push_back(v);
        vs[v] = VertexKind::Observed;
    }
    std::set<Admg::Edge> dir;
    for (int i = 0; i < n_obs; i++)
        for (int j = i + 1; j < n_obs; j++)
            if (rng.uniform() < p_edge) dir.insert({obs[i], obs[j]});
    for (int h = 0; h < n_hidden; h++) {
        VertexId u("H" + std::to_string(h));
        vs[u] = VertexKind::UnresolvableHidden;
        int a = rng.uniform_int(n_obs), b = rng.uniform_int(n_obs);
        while (b == a) b = rng.uniform_int(n_obs);
        dir.insert({u, obs[a]});
        dir.insert({u, obs[b]});
        if (rng.uniform() < 0.3) dir.insert({u, obs[rng.uniform_int(n_obs)]});
    }
    return Admg(vs, dir, {});
}

inline std::map<VertexId, int> random_cards(Rng& rng, const Admg& g, int max_card) {
    std::map<VertexId, int> cards;
    for (const auto& [v, k] : g.vertices()) cards[v] = 2 + rng.uniform_int(max_card - 1);
    return cards;
}

// evaluates the estimand with treatment axes kept free and compares against
// the truncated-factorization truth for every treatment value
inline double estimand_error_vs_truth(const ExprPtr& estimand, const DiscreteScm& scm,
                                      const VertexSet& outcomes, const VertexSet& treatments,
                                      double bridge_tol = 1e-8) {
    EvalEnv env{observed_joint(scm), {}, bridge_tol};
    Table est = evaluate(estimand, env);
    Table truth = interventional_margin_all(scm, outcomes, treatments);
    // est may legitimately lack treatment axes it is constant in; the
    // broadcasting difference handles that
    return max_abs_diff(est, truth);
}

}  // namespace helpers
