#include "proxid/json_io.hpp"

#include <fstream>
#include <sstream>

namespace proxid {

namespace {

ordered_json vars_json(const VarList& vs) {
    ordered_json out = ordered_json::array();
    for (const auto& v : vs) out.push_back(v.str());
    return out;
}

ordered_json names_json(const VertexSet& s) {
    ordered_json out = ordered_json::array();
    for (const auto& v : s) out.push_back(v.str());
    return out;
}

}  // namespace

CausalQuery parse_query_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw QueryError(std::string("query JSON parse error: ") + e.what());
    }
    CausalQuery q;
    if (!j.contains("outcomes") || !j["outcomes"].is_array())
        throw QueryError("query needs an 'outcomes' array");
    for (const auto& o : j["outcomes"]) q.outcomes.insert(VertexId(o.get<std::string>()));
    if (j.contains("treatments")) {
        for (auto it = j["treatments"].begin(); it != j["treatments"].end(); ++it)
            q.treatments.emplace_back(VertexId(it.key()), it.value().get<std::string>());
    }
    std::sort(q.treatments.begin(), q.treatments.end());
    if (j.contains("proxies"))
        for (const auto& p : j["proxies"]) q.proxies.insert(VertexId(p.get<std::string>()));
    if (j.contains("policies")) {
        for (const auto& p : j["policies"]) {
            PolicySpec spec{VertexId(p.at("treatment").get<std::string>()), {}, ""};
            for (const auto& w : p.at("inputs")) spec.inputs.insert(VertexId(w.get<std::string>()));
            if (p.contains("function")) spec.function_id = p["function"].get<std::string>();
            q.policies.push_back(std::move(spec));
        }
    }
    return q;
}

CausalQuery load_query_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QueryError("cannot open query file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_query_json(buf.str());
}

ordered_json estimand_to_json(const ExprPtr& e) {
    ordered_json j;
    switch (e->kind) {
        case ExprKind::One:
            j["kind"] = "one";
            return j;
        case ExprKind::Density: {
            j["kind"] = "density";
            j["vars"] = vars_json(e->vars);
            j["given"] = vars_json(e->given);
            switch (e->ref.tag) {
                case MarginTag::Observed: j["margin"] = "observed"; break;
                case MarginTag::Interventional: j["margin"] = "interventional"; break;
                case MarginTag::InductiveMargin: j["margin"] = "inductive"; break;
                case MarginTag::ReusingMargin: j["margin"] = "reusing"; break;
            }
            if (!e->ref.do_vars.empty()) j["do"] = vars_json(e->ref.do_vars);
            return j;
        }
        case ExprKind::Sum:
            j["kind"] = "sum";
            j["over"] = vars_json(e->bound);
            j["child"] = estimand_to_json(e->child);
            return j;
        case ExprKind::Product: {
            j["kind"] = "product";
            ordered_json cs = ordered_json::array();
            for (const auto& c : e->children) cs.push_back(estimand_to_json(c));
            j["children"] = cs;
            return j;
        }
        case ExprKind::Quotient:
            j["kind"] = "quotient";
            j["num"] = estimand_to_json(e->num);
            j["den"] = estimand_to_json(e->den);
            return j;
        case ExprKind::Plug:
            j["kind"] = "plug";
            j["var"] = e->plug_var->str();
            j["value"] = e->plug_label;
            j["child"] = estimand_to_json(e->child);
            return j;
        case ExprKind::BridgeSolve:
            j["kind"] = "bridge_solve";
            j["id"] = e->bridge->id;
            j["unknown"] = vars_json(e->bridge->args);
            j["sum_vars"] = vars_json(e->bridge->sum_vars);
            j["instruments"] = vars_json(e->bridge->instruments);
            if (!e->bridge->u_star.empty()) j["u_star"] = vars_json(e->bridge->u_star);
            if (!e->bridge->do_ctx.empty()) j["do_context"] = vars_json(e->bridge->do_ctx);
            j["lhs"] = estimand_to_json(e->bridge->lhs);
            j["rhs"] = estimand_to_json(e->bridge->rhs);
            j["body"] = estimand_to_json(e->child);
            return j;
        case ExprKind::BridgeApply:
            j["kind"] = "bridge_apply";
            j["id"] = e->apply_id;
            j["args"] = vars_json(e->apply_args);
            return j;
    }
    throw EstimandError("unreachable");
}

ordered_json ledger_to_json(const AssumptionLedger& ledger) {
    ordered_json out = ordered_json::array();
    for (const auto& rec : ledger) {
        ordered_json r;
        switch (rec.kind) {
            case AssumptionRecord::Kind::Completeness: r["kind"] = "completeness"; break;
            case AssumptionRecord::Kind::BridgeExistence: r["kind"] = "bridge_existence"; break;
            case AssumptionRecord::Kind::CounterfactualIndependence:
                r["kind"] = "counterfactual_independence";
                break;
        }
        if (!rec.bridge_id.empty()) r["bridge"] = rec.bridge_id;
        r["statement"] = rec.statement;
        if (rec.kind == AssumptionRecord::Kind::CounterfactualIndependence)
            r["checked_graphically"] = rec.checked_graphically;
        out.push_back(r);
    }
    return out;
}

ordered_json trace_to_json(const std::vector<TraceStep>& trace) {
    ordered_json out = ordered_json::array();
    for (const auto& t : trace) {
        ordered_json r;
        r["district"] = t.district;
        r["kind"] = t.kind;
        if (!t.target.empty()) r["target"] = t.target;
        if (!t.m_star.empty()) r["m_star"] = t.m_star;
        if (!t.z_set.empty()) r["z"] = t.z_set;
        if (!t.u_star.empty()) r["u_star"] = t.u_star;
        if (!t.inductive_scope.empty()) r["inductive_scope"] = t.inductive_scope;
        if (!t.reusing_scope.empty()) r["reusing_scope"] = t.reusing_scope;
        if (!t.note.empty()) r["note"] = t.note;
        out.push_back(r);
    }
    return out;
}

ordered_json verdict_to_json(const IdVerdict& v) {
    ordered_json j;
    if (v.identified) {
        j["verdict"] = "identified";
        j["estimand"] = estimand_to_json(v.success.estimand);
        j["render"] = render_text(v.success.estimand);
        j["latex"] = render_latex(v.success.estimand);
        j["assumptions"] = ledger_to_json(v.success.ledger);
        j["trace"] = trace_to_json(v.success.trace);
    } else {
        j["verdict"] = "not_identified";
        j["witness_district"] = names_json(v.failure.witness_district);
        j["stuck"] = names_json(v.failure.stuck);
    }
    return j;
}

ordered_json scm_to_json(const DiscreteScm& scm) {
    ordered_json j;
    ordered_json vs = ordered_json::array();
    for (const auto& [v, kind] : scm.graph.vertices()) {
        ordered_json rec;
        rec["name"] = v.str();
        switch (kind) {
            case VertexKind::Observed: rec["kind"] = "observed"; break;
            case VertexKind::ResolvableHidden: rec["kind"] = "u"; break;
            case VertexKind::UnresolvableHidden: rec["kind"] = "l"; break;
            case VertexKind::Fixed: rec["kind"] = "fixed"; break;
        }
        rec["card"] = scm.card.at(v);
        rec["parents"] = names_json(parents(scm.graph, v));
        rec["cpt"] = scm.cpt.at(v).data();  // row-major over sorted (v ∪ parents)
        vs.push_back(rec);
    }
    j["vertices"] = vs;
    return j;
}

DiscreteScm scm_from_json(const ordered_json& j) {
    std::map<VertexId, VertexKind> kinds;
    std::map<VertexId, VertexSet> parent_sets;
    DiscreteScm scm;
    for (const auto& rec : j.at("vertices")) {
        VertexId v(rec.at("name").get<std::string>());
        std::string k = rec.at("kind").get<std::string>();
        VertexKind kind = k == "u"          ? VertexKind::ResolvableHidden
                          : k == "l"        ? VertexKind::UnresolvableHidden
                          : k == "fixed"    ? VertexKind::Fixed
                                            : VertexKind::Observed;
        kinds[v] = kind;
        scm.card[v] = rec.at("card").get<int>();
        VertexSet pa;
        for (const auto& p : rec.at("parents")) pa.insert(VertexId(p.get<std::string>()));
        parent_sets[v] = pa;
    }
    std::set<Admg::Edge> directed;
    for (const auto& [v, pa] : parent_sets)
        for (const auto& p : pa) directed.insert({p, v});
    scm.graph = Admg(kinds, directed, {});
    for (const auto& rec : j.at("vertices")) {
        VertexId v(rec.at("name").get<std::string>());
        VarList axes = to_vars(set_union(parent_sets[v], VertexSet{v}));
        std::vector<int> cards;
        for (const auto& a : axes) cards.push_back(scm.card.at(a.vertex));
        std::vector<double> data = rec.at("cpt").get<std::vector<double>>();
        scm.cpt.emplace(v, Table(axes, cards, std::move(data)));
    }
    scm.validate();
    return scm;
}

}  // namespace proxid
