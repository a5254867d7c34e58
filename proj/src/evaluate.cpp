#include "proxid/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace proxid {

namespace {

struct SolvedBridge {
    Table table;
    VarList slots;  // the spec's arg vars, aligned with apply-site args
};

struct EvalCtx {
    const EvalEnv* env;
    EvalDiagnostics* diag;
    std::map<std::string, SolvedBridge> bridges;  // id -> solved table
};

int vertex_card(const EvalEnv& env, const VertexId& v) {
    for (size_t i = 0; i < env.joint.axes().size(); i++)
        if (env.joint.axes()[i].vertex == v) return env.joint.cards()[i];
    throw EvalError("vertex not in evaluation environment: " + v.str());
}

Table eval_rec(const ExprPtr& e, EvalCtx& ctx);

Table eval_density(const ExprPtr& e, EvalCtx& ctx) {
    if (e->ref.tag != MarginTag::Observed)
        throw EvalError("unresolvable kernel reference in density node");
    // map expression vars to joint axes by vertex, then relabel to the node vars
    VarList all = e->vars;
    all.insert(all.end(), e->given.begin(), e->given.end());
    std::set<VertexId> seen;
    VarList joint_axes;
    std::map<Var, Var> renames;
    for (const auto& v : all) {
        if (!seen.insert(v.vertex).second)
            throw EvalError("density references vertex twice: " + v.vertex.str());
        joint_axes.emplace_back(v.vertex);
        if (v.copy != 0) renames.emplace(Var(v.vertex), v);
    }
    VarList keep_vars, keep_given;
    for (const auto& v : e->vars) keep_vars.emplace_back(v.vertex);
    for (const auto& v : e->given) keep_given.emplace_back(v.vertex);
    Table cond = conditional_from_joint(ctx.env->joint, keep_vars, keep_given);
    return renames.empty() ? cond : relabel(cond, renames);
}

Table eval_sum(const ExprPtr& e, EvalCtx& ctx) {
    Table t = eval_rec(e->child, ctx);
    VarList keep;
    double absent_mult = 1.0;
    for (const auto& b : e->bound) {
        if (!t.has_axis(b)) absent_mult *= vertex_card(*ctx.env, b.vertex);
    }
    for (const auto& a : t.axes())
        if (std::find(e->bound.begin(), e->bound.end(), a) == e->bound.end()) keep.push_back(a);
    Table out = marginalize(t, keep);
    if (absent_mult != 1.0) out = multiply(out, Table(absent_mult));
    return out;
}

Table eval_bridge_solve(const ExprPtr& e, EvalCtx& ctx) {
    const BridgeSpec& spec = *e->bridge;
    Table lhs = eval_rec(spec.lhs, ctx);
    Table rhs = eval_rec(spec.rhs, ctx);
    BridgeSolveOutcome out = solve_bridge_tables(lhs, rhs, spec.sum_vars, spec.instruments);
    if (ctx.diag)
        ctx.diag->bridges.push_back(
            {spec.id, out.bridge, lhs, rhs, out.max_residual, spec.sum_vars, spec.instruments});
    if (out.max_residual > ctx.env->bridge_residual_tol)
        throw BridgeError("bridge system " + spec.id + " inconsistent: residual " +
                          std::to_string(out.max_residual));
    ctx.bridges[spec.id] = SolvedBridge{out.bridge, spec.args};
    Table body = eval_rec(e->child, ctx);
    ctx.bridges.erase(spec.id);
    return body;
}

Table eval_rec(const ExprPtr& e, EvalCtx& ctx) {
    switch (e->kind) {
        case ExprKind::One:
            return Table(1.0);
        case ExprKind::Density:
            return eval_density(e, ctx);
        case ExprKind::Sum:
            return eval_sum(e, ctx);
        case ExprKind::Product: {
            Table acc(1.0);
            for (const auto& c : e->children) acc = multiply(acc, eval_rec(c, ctx));
            return acc;
        }
        case ExprKind::Quotient:
            return divide(eval_rec(e->num, ctx), eval_rec(e->den, ctx));
        case ExprKind::Plug: {
            Table t = eval_rec(e->child, ctx);
            auto it = ctx.env->assignments.find(e->plug_label);
            if (it == ctx.env->assignments.end()) return t;  // keep the axis free
            if (!t.has_axis(*e->plug_var)) return t;
            return slice(t, *e->plug_var, it->second);
        }
        case ExprKind::BridgeSolve:
            return eval_bridge_solve(e, ctx);
        case ExprKind::BridgeApply: {
            auto it = ctx.bridges.find(e->apply_id);
            if (it == ctx.bridges.end())
                throw EvalError("bridge applied outside its solve scope: " + e->apply_id);
            const SolvedBridge& sb = it->second;
            if (e->apply_args.size() != sb.slots.size())
                throw EvalError("bridge arity mismatch at " + e->apply_id);
            std::map<Var, Var> renames;
            for (size_t i = 0; i < sb.slots.size(); i++)
                if (!(sb.slots[i] == e->apply_args[i])) renames.emplace(sb.slots[i], e->apply_args[i]);
            return renames.empty() ? sb.table : relabel(sb.table, renames);
        }
    }
    throw EvalError("unreachable");
}

}  // namespace

Table evaluate(const ExprPtr& e, const EvalEnv& env, EvalDiagnostics* diag) {
    EvalCtx ctx{&env, diag, {}};
    return eval_rec(e, ctx);
}

}  // namespace proxid
