#include "proxid/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "proxid/evaluate.hpp"
#include "proxid/json_io.hpp"

namespace proxid {

namespace {

void collect_bridges(const ExprPtr& e, std::vector<std::shared_ptr<const BridgeSpec>>& out) {
    switch (e->kind) {
        case ExprKind::Sum:
        case ExprKind::Plug:
            collect_bridges(e->child, out);
            return;
        case ExprKind::Product:
            for (const auto& c : e->children) collect_bridges(c, out);
            return;
        case ExprKind::Quotient:
            collect_bridges(e->num, out);
            collect_bridges(e->den, out);
            return;
        case ExprKind::BridgeSolve:
            out.push_back(e->bridge);
            collect_bridges(e->bridge->lhs, out);
            collect_bridges(e->bridge->rhs, out);
            collect_bridges(e->child, out);
            return;
        default:
            return;
    }
}

size_t joint_card(const std::map<VertexId, int>& cards, const VarList& vs) {
    size_t n = 1;
    for (const auto& v : vs) n *= static_cast<size_t>(cards.at(v.vertex));
    return n;
}

// raise the first member until the set's joint space covers `need`
void cover(std::map<VertexId, int>& cards, const VarList& vs, size_t need) {
    if (vs.empty()) return;
    while (joint_card(cards, vs) < need) cards[vs.front().vertex]++;
}

// completeness surrogate in the step's own interventional world
bool bridge_rank_ok(const DiscreteScm& scm, const BridgeSpec& spec, const Table& rhs_kernel) {
    // observable side: the rhs kernel must have full column rank over the
    // instrument strata
    if (!rank_completeness_check(rhs_kernel, spec.sum_vars, spec.instruments)) return false;

    // oracle side: p(u_star | target, t) across instrument values, within
    // every do-context of the step
    if (spec.u_star.empty()) return true;
    VarList cond = spec.target;
    for (const auto& t : spec.t_vars) cond.push_back(t);
    std::sort(cond.begin(), cond.end());
    std::vector<int> ctx_cards;
    for (const auto& c : spec.do_ctx) ctx_cards.push_back(scm.card.at(c.vertex));
    bool ok = true;
    for_each_index(ctx_cards, [&](const std::vector<int>& ctx_idx) {
        if (!ok) return;
        std::map<VertexId, int> do_values;
        for (size_t i = 0; i < spec.do_ctx.size(); i++)
            do_values[spec.do_ctx[i].vertex] = ctx_idx[i];
        Table world = interventional(scm, do_values);
        VarList keep = spec.u_star;
        keep.insert(keep.end(), cond.begin(), cond.end());
        std::sort(keep.begin(), keep.end());
        Table margin = marginalize(world, keep);
        Table kernel = conditional_from_joint(margin, spec.u_star, cond);
        if (!rank_completeness_check(kernel, spec.u_star, spec.instruments)) ok = false;
    });
    return ok;
}

}  // namespace

std::map<VertexId, int> bridge_sized_cards(const Admg& dag, const ExprPtr& estimand) {
    std::map<VertexId, int> cards;
    for (const auto& [v, k] : dag.vertices()) cards[v] = 2;
    std::vector<std::shared_ptr<const BridgeSpec>> bridges;
    collect_bridges(estimand, bridges);
    for (const auto& b : bridges) {
        // members of u_star that are consumed proxies keep whatever size
        // earlier bridges forced; plain hidden confounders stay at 2
        size_t need = joint_card(cards, b->u_star);
        cover(cards, b->sum_vars, need);
        cover(cards, b->instruments, need);
    }
    return cards;
}

VerifyReport verify_query(const Admg& g, const CausalQuery& q, const VerifyConfig& cfg) {
    VerifyReport report;
    report.verdict = cfg.proximal ? proximal_identify(g, q, cfg.prox_options) : identify(g, q);
    report.identified = report.verdict.identified;
    if (!report.identified) return report;

    const ExprPtr& estimand = report.verdict.success.estimand;
    Admg dag = canonical_dag(g);
    report.cards = bridge_sized_cards(dag, estimand);

    std::vector<std::shared_ptr<const BridgeSpec>> bridges;
    collect_bridges(estimand, bridges);

    VertexSet a_set = q.treatment_set();
    for (int trial = 0; trial < cfg.trials; trial++) {
        report.trials++;
        DiscreteScm scm = random_scm(dag, report.cards, derive_seed(cfg.seed, 0xbeef, trial), cfg.floor);
        Table observed = observed_joint(scm);

        // one diagnostic evaluation gives the estimate, the solved bridges and
        // their kernel tables; rank checks decide whether the trial counts
        EvalEnv env{observed, {}, 1e30};
        EvalDiagnostics diag;
        Table est = evaluate(estimand, env, &diag);

        bool rank_ok = true;
        double worst_residual = 0;
        for (const auto& bd : diag.bridges) {
            const BridgeSpec* spec = nullptr;
            for (const auto& b : bridges)
                if (b->id == bd.id) spec = b.get();
            if (!spec) continue;
            if (!bridge_rank_ok(scm, *spec, bd.rhs_kernel)) rank_ok = false;
            worst_residual = std::max(worst_residual, bd.residual);
        }
        if (!rank_ok) {
            report.skipped_rank++;
            continue;
        }
        if (worst_residual > cfg.tol) {
            report.bridge_failures++;
            report.failed++;
            if (report.first_failure_scm.empty())
                report.first_failure_scm = scm_to_json(scm).dump(2);
            continue;
        }

        Table truth = interventional_margin_all(scm, q.outcomes, a_set);
        double err = max_abs_diff(est, truth);
        report.max_err = std::max(report.max_err, err);
        if (err <= cfg.tol) {
            report.passed++;
        } else {
            report.failed++;
            if (report.first_failure_scm.empty())
                report.first_failure_scm = scm_to_json(scm).dump(2);
        }
    }
    return report;
}

}  // namespace proxid
