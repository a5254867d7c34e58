#include "proxid/proximal.hpp"

#include <algorithm>
#include <functional>

namespace proxid {

namespace {

// edge-removal fixing without the classical fixability precondition; the
// distributional side is carried by the margins
Admg force_fix(const Admg& g, const VertexId& v) {
    std::map<VertexId, VertexKind> vs = g.vertices();
    vs[v] = VertexKind::Fixed;
    std::set<Admg::Edge> dir, bidir;
    for (const auto& e : g.directed())
        if (e.second != v) dir.insert(e);
    for (const auto& e : g.bidirected())
        if (e.first != v && e.second != v) bidir.insert(e);
    return Admg(std::move(vs), std::move(dir), std::move(bidir));
}

std::vector<VertexSet> subsets_by_size(const VertexSet& pool, int min_size, int max_size) {
    std::vector<VertexId> items(pool.begin(), pool.end());
    std::vector<VertexSet> out;
    int n = static_cast<int>(items.size());
    max_size = std::min(max_size, n);
    for (int size = min_size; size <= max_size; size++) {
        std::vector<int> pick(size);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == size) {
                VertexSet s;
                for (int i : pick) s.insert(items[i]);
                out.push_back(s);
                return;
            }
            for (int i = start; i < n; i++) {
                pick[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
    return out;
}

std::string scope_string(const VertexSet& s) { return "{" + join_names(s) + "}"; }

std::string independence_statement(const VertexSet& lhs, const VertexSet& rhs,
                                   const VertexSet& cond, const VertexId& a) {
    return scope_string(lhs) + "(" + Var(a).str() + ") _||_ " + scope_string(rhs) + " | " +
           scope_string(cond);
}

}  // namespace

StepCheck check_proximal_step(const ProxState& st, const VertexId& a, const VertexSet& m_star,
                              const VertexSet& z, const VertexSet& u_star,
                              const VertexSet& remaining, const VertexSet& district) {
    StepCheck out;
    auto fail = [&](const std::string& why) {
        out.ok = false;
        out.reason = why;
        return out;
    };
    const MarginState& m = st.margins;
    VertexSet avail_proxies = set_union(m.m1, m.m2);

    if (m_star.empty()) return fail("empty proxy set");
    if (!is_subset(m_star, avail_proxies)) return fail("proxy set not available");
    if (m_star.count(a) || z.count(a)) return fail("target inside proxy/instrument set");
    if (!set_intersect(m_star, z).empty()) return fail("proxy and instrument sets overlap");
    if (z.empty()) return fail("empty instrument set");
    if (!set_intersect(m_star, st.corrupted).empty() || !set_intersect(z, st.corrupted).empty())
        return fail("corrupted vertex used as proxy or instrument");
    if (!is_subset(z, set_minus(m.inductive_scope(), VertexSet{a}))) return fail("instrument outside scope");
    for (const auto& u : u_star)
        if (!st.u_pool.count(u)) return fail("u* member not resolvable: " + u.str());
    if (!set_intersect(u_star, m_star).empty() || !set_intersect(u_star, z).empty() ||
        u_star.count(a))
        return fail("u* overlaps the step's working sets");

    // descendants in the projection keeping v_cur ∪ (m2 \ m*)
    Admg g_r = project_keeping(st.g, set_union(m.v_cur, set_minus(m.m2, m_star)));
    VertexSet de_a = set_intersect(descendants(g_r, a), g_r.random_vertices());
    out.r = set_minus(de_a, set_union(VertexSet{a}, z));
    if (out.r.empty()) return fail("no outcome variables remain for the bridge");
    if (!set_intersect(out.r, st.corrupted).empty()) return fail("corrupted vertex in outcome set");
    out.t = set_minus(m.inductive_scope(), set_union(out.r, set_union(m_star, VertexSet{a})));
    if (!set_intersect(out.t, st.corrupted).empty())
        return fail("corrupted vertex would be conditioned on");

    // m-condition
    bool at_in_v1 = is_subset(set_union(VertexSet{a}, out.t), m.v1);
    if (is_subset(m_star, m.m2)) {
        out.reuse_route = false;
    } else if (at_in_v1 && is_subset(m_star, m.m1) && m.reusing) {
        out.reuse_route = true;
    } else {
        return fail("m-condition violated");
    }

    // equicardinality surrogate of min(d_z, d_w) >= d_u, counting only
    // original hidden members (consumed proxies carry their own history)
    VertexSet u_fresh = set_minus(u_star, set_intersect(u_star, set_union(m.m1, st.corrupted)));
    u_fresh = set_intersect(u_star, set_minus(st.u_pool, avail_proxies));
    size_t u_core = 0;
    for (const auto& u : u_star)
        if (st.g.has_vertex(u) && is_hidden(st.g.kind(u))) u_core++;
    if (m_star.size() < u_core || z.size() < u_core)
        return fail("proxy/instrument sets too small for u*");

    // graphical fixability given u*
    Admg g_u = project_keeping(st.g, set_union(m.v_cur, u_star));
    VertexSet de_u = descendants(g_u, a);
    VertexSet dis_u = district_of(g_u, a);
    VertexSet both = set_intersect(de_u, dis_u);
    if (!(both.size() == 1 && both.count(a))) return fail("not fixable given u*");

    // counterfactual independences on the split graph
    SplitGraph split = split_intervene(st.g, {a});
    VertexSet t_minus_z = set_minus(out.t, z);
    VertexSet cond1 = set_union(u_star, t_minus_z);
    if (!m_separated(split.graph, out.r, z, cond1)) return fail("outcome-pre-proxy check failed");
    if (!m_separated(split.graph, m_star, set_union(VertexSet{a}, z), cond1))
        return fail("treatment-post-proxy check failed");
    if (!m_separated(split.graph, out.r, {a}, set_union(u_star, out.t)))
        return fail("fix-ignore check failed");

    // relevance screens: proxies and instruments must be able to carry
    // information about u* at all
    if (m_separated(st.g, m_star, u_star, t_minus_z)) return fail("proxy set independent of u*");
    if (m_separated(st.g, z, u_star, set_union(VertexSet{a}, t_minus_z)))
        return fail("instrument set independent of u*");

    // descendant instruments couple the step's output margin to the natural
    // (pre-treatment) instrument values; that is sound only if they are
    // marginalized out afterwards, so they may never sit inside the district
    (void)remaining;
    VertexSet z_desc = set_intersect(z, descendants(st.g, a));
    if (!set_intersect(z_desc, district).empty())
        return fail("descendant instrument inside the district");

    out.ok = true;
    out.u_star = u_star;
    std::string bid = "b?";  // assigned by proximal_fix
    AssumptionRecord ind1{AssumptionRecord::Kind::CounterfactualIndependence, "",
                          independence_statement(out.r, z, cond1, a), true};
    AssumptionRecord ind2{AssumptionRecord::Kind::CounterfactualIndependence, "",
                          scope_string(m_star) + " _||_ " + a.str() + "," + scope_string(z) +
                              " | " + scope_string(cond1),
                          true};
    AssumptionRecord ind3{AssumptionRecord::Kind::CounterfactualIndependence, "",
                          independence_statement(out.r, {a}, set_union(u_star, out.t), a), true};
    out.records = {ind1, ind2, ind3};
    return out;
}

AppliedStep proximal_fix(const ProxState& st, const VertexId& a, const VertexSet& m_star,
                         const VertexSet& z, const StepCheck& check, FreshVars& fresh,
                         int bridge_index) {
    if (!check.ok) throw QueryError("proximal_fix on unchecked step");
    const MarginState& m = st.margins;
    VertexSet at = set_union(VertexSet{a}, check.t);

    ExprPtr lhs, rhs, base;
    if (!check.reuse_route) {
        lhs = kernel_conditional(m.inductive, m.inductive_scope(), check.r, at, fresh);
        rhs = kernel_conditional(m.inductive, m.inductive_scope(), m_star, at, fresh);
        base = kernel_marginal(m.inductive, m.inductive_scope(), set_union(m_star, check.t), fresh);
    } else {
        lhs = kernel_conditional(m.inductive, m.inductive_scope(), check.r, at, fresh);
        rhs = kernel_conditional(m.reusing, m.reusing_scope(), m_star, at, fresh);
        base = kernel_marginal(m.reusing, m.reusing_scope(), set_union(m_star, check.t), fresh);
    }

    auto spec = std::make_shared<BridgeSpec>();
    spec->id = "b" + std::to_string(bridge_index);
    spec->sum_vars = to_vars(m_star);
    VertexSet arg_set = set_union(set_union(m_star, check.r), set_union(VertexSet{a}, set_minus(check.t, z)));
    spec->args = to_vars(arg_set);
    spec->instruments = to_vars(z);
    spec->lhs = lhs;
    spec->rhs = rhs;
    spec->target = {Var(a)};
    spec->r_vars = to_vars(check.r);
    spec->t_vars = to_vars(check.t);
    spec->u_star = to_vars(check.u_star);
    spec->do_ctx = st.do_ctx;

    ExprPtr apply_node = bridge_apply(spec->id, spec->args);
    ExprPtr new_inductive = simplify(sum(to_vars(m_star), product({apply_node, base})));

    AppliedStep out;
    out.bridge = spec;
    out.state = st;
    out.state.margins.inductive = new_inductive;
    out.state.margins.v_cur = set_minus(m.v_cur, VertexSet{a});
    out.state.margins.m2 = set_minus(m.m2, m_star);
    out.state.u_pool = set_union(out.state.u_pool, m_star);  // consumed proxies become resolvable confounders
    out.state.corrupted =
        set_union(out.state.corrupted, set_intersect(z, descendants(st.g, a)));
    out.state.do_ctx.push_back(Var(a));

    // reusing margin follows the ordinary rules for the same target
    MarginState& nm = out.state.margins;
    if (m.reusing) {
        Admg g_reuse = project_keeping(st.g, m.reusing_scope());
        if (m.v1.count(a) && fixable(g_reuse, a)) {
            ExprPtr cond =
                kernel_conditional(m.reusing, m.reusing_scope(), {a}, mb_star(g_reuse, a), fresh);
            nm.reusing = simplify(quotient(m.reusing, cond));
            nm.v1 = set_minus(m.v1, VertexSet{a});
            nm.m1 = m.m1;
        } else {
            VertexSet de = descendants(st.g, a);
            nm.v1 = set_minus(m.v1, de);
            nm.m1 = set_minus(m.m1, de);
            if (nm.v1.empty() && nm.m1.empty()) {
                nm.reusing = nullptr;
            } else {
                nm.reusing =
                    kernel_marginal(m.reusing, m.reusing_scope(), set_union(nm.v1, nm.m1), fresh);
            }
        }
    }
    out.state.g = force_fix(st.g, a);
    return out;
}

OrdinaryCheck check_ordinary_step(const ProxState& st, const VertexId& a) {
    OrdinaryCheck out;
    const MarginState& m = st.margins;
    Admg g_ind = project_keeping(st.g, m.inductive_scope());
    if (!fixable(g_ind, a)) {
        out.reason = "not fixable in the m2-projected graph";
        return out;
    }
    VertexSet mb = mb_star(g_ind, a);
    VertexSet rest = set_minus(set_intersect(m.inductive_scope(), g_ind.random_vertices()), VertexSet{a});
    out.pure_marginalization = (mb == rest);
    if (st.corrupted.count(a) && !out.pure_marginalization) {
        out.reason = "corrupted vertex can only be marginalized";
        return out;
    }
    if (!set_intersect(mb, st.corrupted).empty() && !out.pure_marginalization) {
        out.reason = "blanket touches corrupted vertex";
        return out;
    }
    out.ok = true;
    return out;
}

ProxState ordinary_fix_margins(const ProxState& st, const VertexId& a, FreshVars& fresh) {
    OrdinaryCheck chk = check_ordinary_step(st, a);
    if (!chk.ok) throw QueryError("ordinary_fix_margins: " + chk.reason);
    const MarginState& m = st.margins;
    Admg g_ind = project_keeping(st.g, m.inductive_scope());

    ProxState out = st;
    if (chk.pure_marginalization) {
        out.margins.inductive = kernel_marginal(m.inductive, m.inductive_scope(),
                                                set_minus(m.inductive_scope(), VertexSet{a}), fresh);
    } else {
        ExprPtr cond =
            kernel_conditional(m.inductive, m.inductive_scope(), {a}, mb_star(g_ind, a), fresh);
        out.margins.inductive = simplify(quotient(m.inductive, cond));
    }
    out.margins.v_cur = set_minus(m.v_cur, VertexSet{a});
    out.margins.m2 = set_minus(m.m2, VertexSet{a});
    out.corrupted = set_minus(st.corrupted, VertexSet{a});
    out.do_ctx.push_back(Var(a));

    if (m.reusing) {
        Admg g_reuse = project_keeping(st.g, m.reusing_scope());
        if (m.v1.count(a) && fixable(g_reuse, a)) {
            ExprPtr cond =
                kernel_conditional(m.reusing, m.reusing_scope(), {a}, mb_star(g_reuse, a), fresh);
            out.margins.reusing = simplify(quotient(m.reusing, cond));
            out.margins.v1 = set_minus(m.v1, VertexSet{a});
        } else {
            VertexSet de = descendants(st.g, a);
            out.margins.v1 = set_minus(m.v1, de);
            out.margins.m1 = set_minus(m.m1, de);
            if (out.margins.v1.empty() && out.margins.m1.empty()) {
                out.margins.reusing = nullptr;
            } else {
                out.margins.reusing = kernel_marginal(
                    m.reusing, m.reusing_scope(), set_union(out.margins.v1, out.margins.m1), fresh);
            }
        }
    }
    out.g = force_fix(st.g, a);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Searcher {
    const ProximalOptions& opt;
    VertexSet district;
    VertexSet stuck_frontier;  // maximal remaining set seen at failure
    FreshVars fresh;

    struct Found {
        ProxState state;
        std::vector<AdmissibleStep> steps;
        std::vector<std::shared_ptr<const BridgeSpec>> bridges;
        AssumptionLedger records;
        std::vector<TraceStep> trace;
    };
    std::optional<Found> result;

    void note_stuck(const VertexSet& remaining) {
        if (remaining.size() > stuck_frontier.size()) stuck_frontier = remaining;
        if (stuck_frontier.empty()) stuck_frontier = remaining;
    }

    bool dfs(const ProxState& st, const VertexSet& remaining, std::vector<AdmissibleStep>& steps,
             std::vector<std::shared_ptr<const BridgeSpec>>& bridges, AssumptionLedger& records,
             std::vector<TraceStep>& trace) {
        if (remaining.empty()) {
            result = Found{st, steps, bridges, records, trace};
            return true;
        }
        for (const auto& tgt : remaining) {
            VertexSet rest = set_minus(remaining, VertexSet{tgt});
            // ordinary step first
            OrdinaryCheck oc = check_ordinary_step(st, tgt);
            if (oc.ok) {
                ProxState next = ordinary_fix_margins(st, tgt, fresh);
                steps.push_back({tgt, false, {}, {}, {}});
                TraceStep ts;
                ts.district = join_names(district);
                ts.kind = oc.pure_marginalization ? "marginalize" : "ordinary";
                ts.target = tgt.str();
                ts.inductive_scope = scope_string(next.margins.inductive_scope());
                ts.reusing_scope = next.margins.reusing ? scope_string(next.margins.reusing_scope()) : "-";
                trace.push_back(ts);
                if (dfs(next, rest, steps, bridges, records, trace)) return true;
                trace.pop_back();
                steps.pop_back();
            }
            // proximal candidates
            VertexSet avail = set_union(st.margins.m1, st.margins.m2);
            avail = set_minus(avail, st.corrupted);
            VertexSet z_pool = set_minus(set_minus(st.margins.inductive_scope(), VertexSet{tgt}),
                                         st.corrupted);
            for (const auto& u_star : subsets_by_size(st.u_pool, 1, static_cast<int>(st.u_pool.size()))) {
                for (const auto& m_star : subsets_by_size(set_minus(avail, VertexSet{tgt}), 1, opt.max_m_star)) {
                    for (const auto& z : subsets_by_size(set_minus(z_pool, m_star), 1, opt.max_z)) {
                        StepCheck chk = check_proximal_step(st, tgt, m_star, z, u_star, remaining, district);
                        if (!chk.ok) continue;
                        AppliedStep ap = proximal_fix(st, tgt, m_star, z, chk, fresh,
                                                      static_cast<int>(bridges.size()) + 1);
                        size_t rec_base = records.size();
                        for (auto rec : chk.records) records.push_back(rec);
                        AssumptionRecord bridge_rec{AssumptionRecord::Kind::BridgeExistence,
                                                    ap.bridge->id,
                                                    "bridge " + ap.bridge->id + "(" +
                                                        join_vars(ap.bridge->args) +
                                                        ") solves its step equation",
                                                    false};
                        AssumptionRecord comp_rec{AssumptionRecord::Kind::Completeness,
                                                  ap.bridge->id,
                                                  "completeness of p(" + join_names(u_star) +
                                                      " | " + tgt.str() + "," +
                                                      join_names(chk.t) + ") in " + join_names(z),
                                                  false};
                        records.push_back(bridge_rec);
                        records.push_back(comp_rec);
                        bridges.push_back(ap.bridge);
                        steps.push_back({tgt, true, m_star, z, u_star});
                        TraceStep ts;
                        ts.district = join_names(district);
                        ts.kind = "proximal";
                        ts.target = tgt.str();
                        ts.m_star = scope_string(m_star);
                        ts.z_set = scope_string(z);
                        ts.u_star = scope_string(u_star);
                        ts.inductive_scope = scope_string(ap.state.margins.inductive_scope());
                        ts.reusing_scope =
                            ap.state.margins.reusing ? scope_string(ap.state.margins.reusing_scope()) : "-";
                        trace.push_back(ts);
                        if (dfs(ap.state, rest, steps, bridges, records, trace)) return true;
                        trace.pop_back();
                        steps.pop_back();
                        bridges.pop_back();
                        records.resize(rec_base);
                    }
                }
            }
        }
        // unused proxies may be dropped from the margins by marginalization;
        // sometimes that is what unblocks the remaining targets
        for (const auto& w : st.margins.m2) {
            OrdinaryCheck oc = check_ordinary_step(st, w);
            if (!oc.ok || !oc.pure_marginalization) continue;
            ProxState next = ordinary_fix_margins(st, w, fresh);
            next.u_pool = set_union(next.u_pool, VertexSet{w});  // it still confounds
            steps.push_back({w, false, {}, {}, {}});
            TraceStep ts;
            ts.district = join_names(district);
            ts.kind = "marginalize";
            ts.target = w.str();
            ts.note = "unused proxy dropped";
            ts.inductive_scope = scope_string(next.margins.inductive_scope());
            ts.reusing_scope = next.margins.reusing ? scope_string(next.margins.reusing_scope()) : "-";
            trace.push_back(ts);
            if (dfs(next, remaining, steps, bridges, records, trace)) return true;
            trace.pop_back();
            steps.pop_back();
        }
        note_stuck(remaining);
        return false;
    }
};

}  // namespace

AdmissibleSearchResult search_admissible_sequence(const Admg& g0, const VertexSet& v_star,
                                                  const VertexSet& district,
                                                  const VertexSet& proxies,
                                                  const ProximalOptions& opt) {
    AdmissibleSearchResult out;
    ProxState st;
    st.g = g0;
    st.margins.v_cur = set_minus(set_intersect(g0.observed_vertices(), v_star), VertexSet{});
    // v_cur = all observed non-proxy vertices (= v_star); m1 = m2 = proxies
    st.margins.v_cur = set_minus(g0.observed_vertices(), proxies);
    st.margins.m2 = proxies;
    st.margins.m1 = proxies;
    st.margins.v1 = st.margins.v_cur;
    ExprPtr joint = density(to_vars(set_union(st.margins.v_cur, proxies)), {});
    st.margins.inductive = joint;
    st.margins.reusing = joint;
    st.u_pool = g0.vertices_of_kind(VertexKind::ResolvableHidden);

    Searcher searcher{opt, district, {}, {}, std::nullopt};
    std::vector<AdmissibleStep> steps;
    std::vector<std::shared_ptr<const BridgeSpec>> bridges;
    AssumptionLedger records;
    std::vector<TraceStep> trace;
    VertexSet remaining = set_minus(v_star, district);
    bool ok = searcher.dfs(st, remaining, steps, bridges, records, trace);
    if (!ok) {
        out.ok = false;
        out.stuck = searcher.stuck_frontier;
        return out;
    }
    const auto& found = *searcher.result;
    out.ok = true;
    out.steps = found.steps;
    out.records = found.records;
    out.trace = found.trace;

    // final term: marginalize leftover proxies down to the district
    const MarginState& m = found.state.margins;
    if (!is_subset(district, m.inductive_scope()))
        throw QueryError("district lost from the inductive margin");
    ExprPtr term = kernel_marginal(m.inductive, m.inductive_scope(), district, searcher.fresh);
    // bind the bridge solves around the term, first bridge outermost
    for (auto it = found.bridges.rbegin(); it != found.bridges.rend(); ++it)
        term = bridge_solve(*it, term);
    out.term = canonicalize_bound(simplify(term));
    return out;
}

IdVerdict proximal_identify(const Admg& g, const CausalQuery& q, const ProximalOptions& opt) {
    validate_query(g, q, true);
    if (!q.policies.empty())
        throw QueryError("proximal_identify: reduce policy queries first");

    // project unresolvable hidden vertices only; resolvable ones stay
    Admg g0 = latent_project(g, g.vertices_of_kind(VertexKind::UnresolvableHidden));
    VertexSet v_obs = g0.observed_vertices();
    VertexSet v_star = set_minus(v_obs, q.proxies);
    VertexSet a = q.treatment_set();
    if (!is_subset(set_union(q.outcomes, a), v_star))
        throw QueryError("outcomes/treatments cannot be proxies");

    Admg g_vstar = project_keeping(g0, v_star);
    VertexSet ystar = ancestral_set(g_vstar, q.outcomes, a);

    IdVerdict verdict;
    std::vector<ExprPtr> terms;
    for (const auto& d : districts(g_vstar, ystar)) {
        AdmissibleSearchResult res = search_admissible_sequence(g0, v_star, d, q.proxies, opt);
        if (!res.ok) {
            verdict.identified = false;
            verdict.failure = IdFailure{d, res.stuck};
            return verdict;
        }
        terms.push_back(res.term);
        for (const auto& rec : res.records) verdict.success.ledger.push_back(rec);
        for (const auto& ts : res.trace) verdict.success.trace.push_back(ts);
    }
    verdict.identified = true;
    verdict.success.estimand = assemble_query_estimand(std::move(terms), ystar, q);
    return verdict;
}

}  // namespace proxid
