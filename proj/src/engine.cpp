#include "proxid/engine.hpp"

#include <algorithm>

namespace proxid {

VertexSet CausalQuery::treatment_set() const {
    VertexSet out;
    for (const auto& [v, label] : treatments) out.insert(v);
    return out;
}

void validate_query(const Admg& g, const CausalQuery& q, bool allow_proxies) {
    if (q.outcomes.empty()) throw QueryError("query has no outcomes");
    VertexSet a = q.treatment_set();
    if (a.size() != q.treatments.size()) throw QueryError("duplicate treatment vertex");
    if (!set_intersect(q.outcomes, a).empty())
        throw QueryError("outcomes and treatments must be disjoint");
    for (const auto& v : set_union(q.outcomes, a)) {
        if (!g.has_vertex(v)) throw QueryError("unknown query vertex: " + v.str());
        if (g.kind(v) != VertexKind::Observed)
            throw QueryError("query vertex must be observed: " + v.str());
    }
    if (!allow_proxies && !q.proxies.empty()) throw QueryError("classical query cannot use proxies");
    for (const auto& v : q.proxies) {
        if (!g.has_vertex(v) || g.kind(v) != VertexKind::Observed)
            throw QueryError("proxy must be an observed vertex: " + v.str());
        if (q.outcomes.count(v) || a.count(v))
            throw QueryError("proxy overlaps outcomes/treatments: " + v.str());
    }
    for (const auto& p : q.policies) {
        if (!a.count(p.treatment))
            throw QueryError("policy treatment not in treatment set: " + p.treatment.str());
        for (const auto& w : p.inputs) {
            if (!g.has_vertex(w) || g.kind(w) != VertexKind::Observed)
                throw QueryError("policy input must be observed: " + w.str());
            if (descendants(g, p.treatment).count(w))
                throw QueryError("policy input " + w.str() + " is a descendant of " +
                                 p.treatment.str());
        }
    }
}

ExprPtr derive_district(const Admg& g, const VertexSet& district, const std::vector<VertexId>& seq) {
    if (!g.hidden_vertices().empty())
        throw QueryError("derive_district expects a fully projected graph");
    FreshVars fresh;
    Admg cur = g;
    VertexSet scope = g.random_vertices();
    ExprPtr expr = density(to_vars(scope), {});
    for (const auto& j : seq) {
        if (district.count(j)) throw QueryError("sequence fixes district member " + j.str());
        VertexSet mb = mb_star(cur, j);
        if (mb == set_minus(scope, VertexSet{j})) {
            // blanket covers the rest: fixing is plain marginalization
            expr = kernel_marginal(expr, scope, set_minus(scope, VertexSet{j}), fresh);
        } else {
            ExprPtr cond = kernel_conditional(expr, scope, {j}, mb, fresh);
            expr = simplify(quotient(expr, cond));
        }
        cur = fix(cur, j);
        scope.erase(j);
    }
    if (scope != district) throw QueryError("sequence does not fix the district complement");
    return canonicalize_bound(expr);
}

ExprPtr assemble_query_estimand(std::vector<ExprPtr> district_terms, const VertexSet& ystar,
                                const CausalQuery& q) {
    ExprPtr expr = product(std::move(district_terms));
    for (const auto& [v, label] : q.treatments) expr = plug(Var(v), label, expr);
    VertexSet bound = set_minus(ystar, q.outcomes);
    expr = sum(to_vars(bound), expr);
    expr = simplify(expr);

    // any surviving context symbol is provably constant under the model; fold
    // it away by averaging so evaluation yields a clean table
    VertexSet expected = set_union(q.outcomes, q.treatment_set());
    std::set<Var> leftovers;
    for (const auto& v : free_vars(expr))
        if (v.copy == 0 && !expected.count(v.vertex)) leftovers.insert(v);
    if (!leftovers.empty()) {
        FreshVars fresh;
        fresh.seed_above(expr);
        for (const auto& v : leftovers) {
            Var b = fresh.fresh(v.vertex);
            Var b2 = fresh.fresh(v.vertex);
            ExprPtr avg = quotient(sum({b}, substitute(expr, {{v, b}})), sum({b2}, one()));
            expr = simplify(avg);
        }
    }
    return canonicalize_bound(expr);
}

IdVerdict identify(const Admg& g, const CausalQuery& q) {
    validate_query(g, q, false);
    if (!q.policies.empty())
        throw QueryError("identify: reduce policy queries with reduce_policy_query first");

    Admg gp = latent_project(g, g.hidden_vertices());
    VertexSet a = q.treatment_set();
    VertexSet ystar = ancestral_set(gp, q.outcomes, a);
    VertexSet all_random = gp.random_vertices();

    IdVerdict verdict;
    std::vector<ExprPtr> terms;
    for (const auto& d : districts(gp, ystar)) {
        SequenceResult seq = find_valid_sequence(gp, set_minus(all_random, d));
        if (!seq.ok) {
            verdict.identified = false;
            verdict.failure = IdFailure{d, seq.stuck};
            return verdict;
        }
        terms.push_back(derive_district(gp, d, seq.sequence));
        TraceStep step;
        step.district = join_names(d);
        step.kind = "ordinary";
        step.target = "";
        std::string order;
        for (const auto& v : seq.sequence) order += (order.empty() ? "" : ",") + v.str();
        step.note = "valid sequence <" + order + ">";
        verdict.success.trace.push_back(step);
    }
    verdict.identified = true;
    verdict.success.estimand = assemble_query_estimand(std::move(terms), ystar, q);
    return verdict;
}

// ---------------------------------------------------------------------------

PolicyReduction reduce_policy_query(const Admg& g, const CausalQuery& q) {
    validate_query(g, q, true);
    PolicyReduction red;
    red.joint_query = q;
    red.joint_query.policies.clear();
    for (const auto& p : q.policies) {
        red.joint_query.outcomes = set_union(red.joint_query.outcomes, p.inputs);
        red.sum_over = set_union(red.sum_over, p.inputs);
        red.plugs.push_back(p);
    }
    // inputs may overlap the outcome set; treatments must stay disjoint
    if (!set_intersect(red.joint_query.outcomes, red.joint_query.treatment_set()).empty())
        throw QueryError("policy inputs overlap treatments");
    return red;
}

Table evaluate_policy_response(const ExprPtr& joint_estimand, const EvalEnv& env,
                               const CausalQuery& joint_query, const PolicyReduction& reduction,
                               const std::map<VertexId, Table>& policy_tables) {
    EvalEnv free_env = env;
    for (const auto& [v, label] : joint_query.treatments) free_env.assignments.erase(label);
    Table t = evaluate(joint_estimand, free_env);

    VertexSet y = set_minus(joint_query.outcomes, reduction.sum_over);
    VarList out_axes = to_vars(y);
    std::vector<int> out_cards;
    for (const auto& v : out_axes) out_cards.push_back(t.card_of(v));
    Table out(out_axes, out_cards);

    VarList w_axes = to_vars(reduction.sum_over);
    std::vector<int> w_cards;
    for (const auto& v : w_axes) w_cards.push_back(t.card_of(v));

    for_each_index(out.cards(), [&](const std::vector<int>& yidx) {
        double total = 0;
        for_each_index(w_cards, [&](const std::vector<int>& widx) {
            std::vector<int> idx(t.axes().size(), 0);
            for (size_t i = 0; i < t.axes().size(); i++) {
                const Var& ax = t.axes()[i];
                auto yi = std::find(out_axes.begin(), out_axes.end(), ax);
                if (yi != out_axes.end()) {
                    idx[i] = yidx[yi - out_axes.begin()];
                    continue;
                }
                auto wi = std::find(w_axes.begin(), w_axes.end(), ax);
                if (wi != w_axes.end()) {
                    idx[i] = widx[wi - w_axes.begin()];
                    continue;
                }
                // a treatment axis: read off the policy value at this w
                const PolicySpec* spec = nullptr;
                for (const auto& p : reduction.plugs)
                    if (p.treatment == ax.vertex) spec = &p;
                if (!spec) throw EvalError("unbound axis in policy evaluation: " + ax.str());
                const Table& f = policy_tables.at(spec->treatment);
                std::vector<int> fidx(f.axes().size(), 0);
                for (size_t k = 0; k < f.axes().size(); k++) {
                    auto wi2 = std::find(w_axes.begin(), w_axes.end(), f.axes()[k]);
                    if (wi2 == w_axes.end())
                        throw EvalError("policy table axis outside inputs: " + f.axes()[k].str());
                    fidx[k] = widx[wi2 - w_axes.begin()];
                }
                idx[i] = static_cast<int>(f.at(fidx));
            }
            total += t.at(idx);
        });
        out.at(yidx) = total;
    });
    return out;
}

}  // namespace proxid
