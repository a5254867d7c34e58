#include "proxid/estimand.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace proxid {

namespace {

VarList sorted_unique(VarList v) {
    std::sort(v.begin(), v.end());
    auto it = std::unique(v.begin(), v.end());
    if (it != v.end()) throw EstimandError("duplicate variable in list");
    return v;
}

bool contains(const VarList& l, const Var& v) {
    return std::find(l.begin(), l.end(), v) != l.end();
}

VarList list_minus(const VarList& a, const VarList& b) {
    VarList out;
    for (const auto& v : a)
        if (!contains(b, v)) out.push_back(v);
    return out;
}

VarList list_union(VarList a, const VarList& b) {
    for (const auto& v : b)
        if (!contains(a, v)) a.push_back(v);
    return sorted_unique(std::move(a));
}

}  // namespace

ExprPtr one() {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::One;
    return e;
}

ExprPtr density(VarList vars, VarList given, KernelRef ref) {
    if (vars.empty()) return one();
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Density;
    e->vars = sorted_unique(std::move(vars));
    e->given = sorted_unique(std::move(given));
    for (const auto& v : e->vars)
        if (contains(e->given, v)) throw EstimandError("density var also in given: " + v.str());
    e->ref = std::move(ref);
    return e;
}

ExprPtr sum(VarList bound, ExprPtr child) {
    if (bound.empty()) return child;
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Sum;
    e->bound = sorted_unique(std::move(bound));
    e->child = std::move(child);
    return e;
}

ExprPtr product(std::vector<ExprPtr> children) {
    std::vector<ExprPtr> flat;
    for (auto& c : children) {
        if (!c) throw EstimandError("null factor");
        if (c->kind == ExprKind::One) continue;
        if (c->kind == ExprKind::Product) {
            flat.insert(flat.end(), c->children.begin(), c->children.end());
        } else {
            flat.push_back(std::move(c));
        }
    }
    if (flat.empty()) return one();
    if (flat.size() == 1) return flat[0];
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Product;
    e->children = std::move(flat);
    return e;
}

ExprPtr quotient(ExprPtr num, ExprPtr den) {
    if (den->kind == ExprKind::One) return num;
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Quotient;
    e->num = std::move(num);
    e->den = std::move(den);
    return e;
}

ExprPtr plug(Var v, std::string value_label, ExprPtr child) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Plug;
    e->plug_var = std::move(v);
    e->plug_label = std::move(value_label);
    e->child = std::move(child);
    return e;
}

ExprPtr bridge_solve(std::shared_ptr<const BridgeSpec> spec, ExprPtr body) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BridgeSolve;
    e->bridge = std::move(spec);
    e->child = std::move(body);
    return e;
}

ExprPtr bridge_apply(std::string id, VarList args) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::BridgeApply;
    e->apply_id = std::move(id);
    e->apply_args = sorted_unique(std::move(args));
    return e;
}

// ---------------------------------------------------------------------------

static void collect_free(const ExprPtr& e, std::set<Var>& acc, std::set<Var> bound) {
    switch (e->kind) {
        case ExprKind::One:
            return;
        case ExprKind::Density:
            for (const auto& v : e->vars)
                if (!bound.count(v)) acc.insert(v);
            for (const auto& v : e->given)
                if (!bound.count(v)) acc.insert(v);
            for (const auto& v : e->ref.do_vars)
                if (!bound.count(v)) acc.insert(v);
            return;
        case ExprKind::Sum: {
            for (const auto& v : e->bound) bound.insert(v);
            collect_free(e->child, acc, bound);
            return;
        }
        case ExprKind::Product:
            for (const auto& c : e->children) collect_free(c, acc, bound);
            return;
        case ExprKind::Quotient:
            collect_free(e->num, acc, bound);
            collect_free(e->den, acc, bound);
            return;
        case ExprKind::Plug:
            collect_free(e->child, acc, bound);
            return;
        case ExprKind::BridgeSolve: {
            // the instruments and the summed unknown axes are internal to the
            // defining equation: the solve consumes them
            std::set<Var> eq;
            collect_free(e->bridge->lhs, eq, bound);
            collect_free(e->bridge->rhs, eq, bound);
            for (const auto& v : e->bridge->sum_vars) eq.erase(v);
            for (const auto& v : e->bridge->instruments) eq.erase(v);
            // signature slots are re-bound at every apply site in the body
            for (const auto& v : e->bridge->args) eq.erase(v);
            acc.insert(eq.begin(), eq.end());
            collect_free(e->child, acc, bound);
            return;
        }
        case ExprKind::BridgeApply:
            for (const auto& v : e->apply_args)
                if (!bound.count(v)) acc.insert(v);
            return;
    }
}

std::set<Var> free_vars(const ExprPtr& e) {
    std::set<Var> acc;
    collect_free(e, acc, {});
    return acc;
}

ExprPtr substitute(const ExprPtr& e, const std::map<Var, Var>& renames) {
    if (renames.empty()) return e;
    auto map_var = [&](const Var& v) {
        auto it = renames.find(v);
        return it == renames.end() ? v : it->second;
    };
    auto map_list = [&](const VarList& l) {
        VarList out;
        for (const auto& v : l) out.push_back(map_var(v));
        return sorted_unique(std::move(out));
    };
    switch (e->kind) {
        case ExprKind::One:
            return e;
        case ExprKind::Density: {
            KernelRef ref = e->ref;
            ref.do_vars = map_list(ref.do_vars);
            return density(map_list(e->vars), map_list(e->given), std::move(ref));
        }
        case ExprKind::Sum: {
            std::map<Var, Var> inner = renames;
            for (const auto& b : e->bound) inner.erase(b);
            for (const auto& [from, to] : inner)
                if (contains(e->bound, to))
                    throw EstimandError("substitution would capture " + to.str());
            return sum(e->bound, substitute(e->child, inner));
        }
        case ExprKind::Product: {
            std::vector<ExprPtr> cs;
            for (const auto& c : e->children) cs.push_back(substitute(c, renames));
            return product(std::move(cs));
        }
        case ExprKind::Quotient:
            return quotient(substitute(e->num, renames), substitute(e->den, renames));
        case ExprKind::Plug:
            return plug(map_var(*e->plug_var), e->plug_label, substitute(e->child, renames));
        case ExprKind::BridgeSolve: {
            auto spec = std::make_shared<BridgeSpec>(*e->bridge);
            spec->sum_vars = map_list(spec->sum_vars);
            spec->args = map_list(spec->args);
            spec->instruments = map_list(spec->instruments);
            spec->lhs = substitute(spec->lhs, renames);
            spec->rhs = substitute(spec->rhs, renames);
            return bridge_solve(spec, substitute(e->child, renames));
        }
        case ExprKind::BridgeApply:
            return bridge_apply(e->apply_id, map_list(e->apply_args));
    }
    throw EstimandError("unreachable");
}

// ---------------------------------------------------------------------------

namespace {

void key_rec(const ExprPtr& e, std::ostringstream& out, std::map<Var, int>& bound_ids,
             int& next_id) {
    auto var_key = [&](const Var& v) {
        auto it = bound_ids.find(v);
        if (it != bound_ids.end()) return "b" + std::to_string(it->second);
        return "f" + v.vertex.str() + "~" + std::to_string(v.copy);
    };
    auto list_key = [&](const VarList& l) {
        std::string s;
        for (const auto& v : l) s += var_key(v) + ",";
        return s;
    };
    switch (e->kind) {
        case ExprKind::One:
            out << "1";
            return;
        case ExprKind::Density:
            out << "D[" << list_key(e->vars) << "|" << list_key(e->given) << "|"
                << static_cast<int>(e->ref.tag) << ":" << list_key(e->ref.do_vars) << "]";
            return;
        case ExprKind::Sum: {
            auto saved = bound_ids;
            out << "S[";
            for (const auto& b : e->bound) {
                bound_ids[b] = next_id++;
                out << "b" << bound_ids[b] << ",";
            }
            out << "](";
            key_rec(e->child, out, bound_ids, next_id);
            out << ")";
            bound_ids = saved;
            return;
        }
        case ExprKind::Product: {
            out << "P(";
            for (const auto& c : e->children) {
                key_rec(c, out, bound_ids, next_id);
                out << ",";
            }
            out << ")";
            return;
        }
        case ExprKind::Quotient:
            out << "Q(";
            key_rec(e->num, out, bound_ids, next_id);
            out << ";";
            key_rec(e->den, out, bound_ids, next_id);
            out << ")";
            return;
        case ExprKind::Plug:
            out << "G[" << var_key(*e->plug_var) << ":=" << e->plug_label << "](";
            key_rec(e->child, out, bound_ids, next_id);
            out << ")";
            return;
        case ExprKind::BridgeSolve:
            out << "BS[" << e->bridge->id << ":" << list_key(e->bridge->sum_vars) << "|"
                << list_key(e->bridge->args) << "|" << list_key(e->bridge->instruments) << "](";
            key_rec(e->bridge->lhs, out, bound_ids, next_id);
            out << ";";
            key_rec(e->bridge->rhs, out, bound_ids, next_id);
            out << ";";
            key_rec(e->child, out, bound_ids, next_id);
            out << ")";
            return;
        case ExprKind::BridgeApply:
            out << "BA[" << e->apply_id << ":" << list_key(e->apply_args) << "]";
            return;
    }
}

}  // namespace

std::string canonical_key(const ExprPtr& e) {
    std::ostringstream out;
    std::map<Var, int> bound_ids;
    int next_id = 0;
    key_rec(e, out, bound_ids, next_id);
    return out.str();
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return canonical_key(a) == canonical_key(b); }

// ---------------------------------------------------------------------------
// simplification

namespace {

std::vector<ExprPtr> factors_of(const ExprPtr& e) {
    if (e->kind == ExprKind::Product) return e->children;
    if (e->kind == ExprKind::One) return {};
    return {e};
}

// Σ_x p(x, rest | given) -> p(rest | given), for every bound var eliminable
ExprPtr sum_over_density(const VarList& bound, const ExprPtr& d) {
    VarList eliminable, remaining_bound;
    for (const auto& b : bound) {
        if (contains(d->vars, b))
            eliminable.push_back(b);
        else
            remaining_bound.push_back(b);
    }
    if (eliminable.empty()) return nullptr;
    ExprPtr reduced = density(list_minus(d->vars, eliminable), d->given, d->ref);
    return sum(remaining_bound, reduced);
}

// group product factors into connected components linked by shared bound vars
ExprPtr split_sum_product(const VarList& bound, const std::vector<ExprPtr>& fs) {
    size_t n = fs.size();
    std::vector<std::set<Var>> touch(n);
    for (size_t i = 0; i < n; i++) {
        auto fv = free_vars(fs[i]);
        for (const auto& b : bound)
            if (fv.count(b)) touch[i].insert(b);
    }
    // a bound var free in exactly one factor sums inside that factor alone
    {
        std::map<Var, int> touch_count;
        for (const auto& b : bound) touch_count[b] = 0;
        for (size_t i = 0; i < n; i++)
            for (const auto& b : touch[i]) touch_count[b]++;
        VarList local;
        for (const auto& [b, c] : touch_count)
            if (c == 1) local.push_back(b);
        if (!local.empty()) {
            std::vector<ExprPtr> out;
            for (size_t i = 0; i < n; i++) {
                VarList mine;
                for (const auto& b : local)
                    if (touch[i].count(b)) mine.push_back(b);
                out.push_back(mine.empty() ? fs[i] : sum(mine, fs[i]));
            }
            VarList rest;
            for (const auto& b : bound)
                if (std::find(local.begin(), local.end(), b) == local.end()) rest.push_back(b);
            return sum(rest, product(std::move(out)));
        }
    }
    // union-find over factors
    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; i++) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& b : bound) {
        size_t first = n;
        for (size_t i = 0; i < n; i++) {
            if (!touch[i].count(b)) continue;
            if (first == n)
                first = i;
            else
                parent[find(i)] = find(first);
        }
    }
    std::map<size_t, std::vector<ExprPtr>> groups;
    std::map<size_t, VarList> group_bound;
    std::vector<ExprPtr> untouched;
    for (size_t i = 0; i < n; i++) {
        if (touch[i].empty()) {
            untouched.push_back(fs[i]);
            continue;
        }
        size_t r = find(i);
        groups[r].push_back(fs[i]);
        for (const auto& b : touch[i])
            if (!contains(group_bound[r], b)) group_bound[r].push_back(b);
    }
    size_t covered = 0;
    for (auto& [r, bs] : group_bound) covered += bs.size();
    if (covered != bound.size()) return nullptr;  // some bound var free nowhere; leave alone
    if (groups.size() <= 1 && untouched.empty()) return nullptr;  // nothing to split
    std::vector<ExprPtr> out = untouched;
    for (auto& [r, gs] : groups) out.push_back(sum(group_bound[r], product(gs)));
    return product(std::move(out));
}

// quotient of two densities with the same ref: chain-rule split
ExprPtr density_quotient(const ExprPtr& num, const ExprPtr& den) {
    if (num->kind != ExprKind::Density || den->kind != ExprKind::Density) return nullptr;
    if (!(num->ref == den->ref)) return nullptr;
    // num = p(S | c), den = p(X | extra ∪ c) with X ∪ extra ⊆ S
    const VarList& c = num->given;
    for (const auto& g : c)
        if (!contains(den->given, g)) return nullptr;
    VarList extra = list_minus(den->given, c);
    for (const auto& x : den->vars)
        if (!contains(num->vars, x)) return nullptr;
    for (const auto& x : extra)
        if (!contains(num->vars, x)) return nullptr;
    VarList rest = list_minus(list_minus(num->vars, den->vars), extra);
    ExprPtr first = density(rest, list_union(list_union(den->vars, extra), c), num->ref);
    ExprPtr second = density(extra, c, num->ref);
    return product({first, second});
}

ExprPtr simplify_once(const ExprPtr& e, bool& changed);

ExprPtr simplify_children(const ExprPtr& e, bool& changed) {
    switch (e->kind) {
        case ExprKind::One:
        case ExprKind::BridgeApply:
        case ExprKind::Density:
            return e;
        case ExprKind::Sum: {
            ExprPtr c = simplify_once(e->child, changed);
            return c == e->child ? e : sum(e->bound, c);
        }
        case ExprKind::Plug: {
            ExprPtr c = simplify_once(e->child, changed);
            return c == e->child ? e : plug(*e->plug_var, e->plug_label, c);
        }
        case ExprKind::Product: {
            std::vector<ExprPtr> cs;
            bool any = false;
            for (const auto& c : e->children) {
                ExprPtr s = simplify_once(c, changed);
                any = any || s != c;
                cs.push_back(s);
            }
            return any ? product(std::move(cs)) : e;
        }
        case ExprKind::Quotient: {
            ExprPtr n = simplify_once(e->num, changed);
            ExprPtr d = simplify_once(e->den, changed);
            return (n == e->num && d == e->den) ? e : quotient(n, d);
        }
        case ExprKind::BridgeSolve: {
            auto spec = std::make_shared<BridgeSpec>(*e->bridge);
            bool any = false;
            ExprPtr l = simplify_once(spec->lhs, changed);
            ExprPtr r = simplify_once(spec->rhs, changed);
            ExprPtr b = simplify_once(e->child, changed);
            any = l != spec->lhs || r != spec->rhs || b != e->child;
            if (!any) return e;
            spec->lhs = l;
            spec->rhs = r;
            return bridge_solve(spec, b);
        }
    }
    throw EstimandError("unreachable");
}

ExprPtr simplify_once(const ExprPtr& e0, bool& changed) {
    ExprPtr e = simplify_children(e0, changed);

    switch (e->kind) {
        case ExprKind::Product: {
            // lift nested quotients so every expression normalizes to a
            // single quotient of pure products; cancellation needs this
            std::vector<ExprPtr> nums, dens;
            bool lifted = false;
            for (const auto& c : e->children) {
                if (c->kind == ExprKind::Quotient) {
                    nums.push_back(c->num);
                    dens.push_back(c->den);
                    lifted = true;
                } else {
                    nums.push_back(c);
                }
            }
            if (lifted) {
                changed = true;
                return quotient(product(std::move(nums)), product(std::move(dens)));
            }
            return e;
        }
        case ExprKind::Sum: {
            // factories already merged empty bounds
            if (e->child->kind == ExprKind::Sum) {
                changed = true;
                return sum(list_union(e->bound, e->child->bound), e->child->child);
            }
            if (e->child->kind == ExprKind::Density) {
                if (ExprPtr r = sum_over_density(e->bound, e->child)) {
                    changed = true;
                    return r;
                }
            }
            if (e->child->kind == ExprKind::Product) {
                if (ExprPtr r = split_sum_product(e->bound, e->child->children)) {
                    changed = true;
                    return r;
                }
            }
            if (e->child->kind == ExprKind::Quotient) {
                auto den_free = free_vars(e->child->den);
                bool indep = true;
                for (const auto& b : e->bound)
                    if (den_free.count(b)) indep = false;
                if (indep) {
                    changed = true;
                    return quotient(sum(e->bound, e->child->num), e->child->den);
                }
            }
            return e;
        }
        case ExprKind::Quotient: {
            if (e->num->kind == ExprKind::Quotient) {
                changed = true;
                return quotient(e->num->num, product({e->num->den, e->den}));
            }
            if (e->den->kind == ExprKind::Quotient) {
                changed = true;
                return quotient(product({e->num, e->den->den}), e->den->num);
            }
            // cancellation of structurally identical factors
            auto nf = factors_of(e->num);
            auto df = factors_of(e->den);
            std::vector<std::string> dkeys;
            for (const auto& d : df) dkeys.push_back(canonical_key(d));
            std::vector<bool> d_used(df.size(), false);
            std::vector<ExprPtr> n_keep;
            bool cancelled = false;
            for (const auto& n : nf) {
                std::string nk = canonical_key(n);
                bool matched = false;
                for (size_t i = 0; i < df.size(); i++) {
                    if (!d_used[i] && dkeys[i] == nk) {
                        d_used[i] = true;
                        matched = true;
                        cancelled = true;
                        break;
                    }
                }
                if (!matched) n_keep.push_back(n);
            }
            if (cancelled) {
                std::vector<ExprPtr> d_keep;
                for (size_t i = 0; i < df.size(); i++)
                    if (!d_used[i]) d_keep.push_back(df[i]);
                changed = true;
                return quotient(product(std::move(n_keep)), product(std::move(d_keep)));
            }
            if (ExprPtr r = density_quotient(e->num, e->den)) {
                changed = true;
                return r;
            }
            return e;
        }
        case ExprKind::Plug: {
            const Var& v = *e->plug_var;
            auto fv = free_vars(e->child);
            if (!fv.count(v)) {
                changed = true;
                return e->child;
            }
            switch (e->child->kind) {
                case ExprKind::Product: {
                    std::vector<ExprPtr> cs;
                    for (const auto& c : e->child->children) {
                        auto cf = free_vars(c);
                        cs.push_back(cf.count(v) ? plug(v, e->plug_label, c) : c);
                    }
                    changed = true;
                    return product(std::move(cs));
                }
                case ExprKind::Sum: {
                    if (contains(e->child->bound, v)) throw EstimandError("plug of bound var");
                    changed = true;
                    return sum(e->child->bound, plug(v, e->plug_label, e->child->child));
                }
                case ExprKind::Quotient: {
                    auto nf = free_vars(e->child->num);
                    auto df = free_vars(e->child->den);
                    ExprPtr n = nf.count(v) ? plug(v, e->plug_label, e->child->num) : e->child->num;
                    ExprPtr d = df.count(v) ? plug(v, e->plug_label, e->child->den) : e->child->den;
                    changed = true;
                    return quotient(n, d);
                }
                default:
                    return e;  // Density / bridge nodes keep the plug wrapper
            }
        }
        default:
            return e;
    }
}

}  // namespace

ExprPtr simplify(const ExprPtr& e) {
    ExprPtr cur = e;
    for (int iter = 0; iter < 200; iter++) {
        bool changed = false;
        ExprPtr next = simplify_once(cur, changed);
        if (!changed) return next;
        cur = next;
    }
    return cur;  // give up rather than loop; evaluation stays correct
}

// ---------------------------------------------------------------------------
// rendering

namespace {

struct RenderCtx {
    bool latex = false;
    std::map<Var, std::string> labels;  // plug substitutions
};

std::string render_var(const Var& v, const RenderCtx& ctx) {
    auto it = ctx.labels.find(v);
    if (it != ctx.labels.end()) return it->second;
    if (ctx.latex && v.copy > 0) {
        std::string base = v.str();
        base.resize(base.find('~'));
        std::string sub = v.copy > 1 ? "^{(" + std::to_string(v.copy) + ")}" : "";
        return "\\tilde{" + base + "}" + sub;
    }
    return v.str();
}

std::string render_vars(const VarList& l, const RenderCtx& ctx) {
    std::string out;
    for (const auto& v : l) {
        if (!out.empty()) out += ",";
        out += render_var(v, ctx);
    }
    return out;
}

std::string render_rec(const ExprPtr& e, RenderCtx& ctx, bool atom_context);

std::string render_factor(const ExprPtr& e, RenderCtx& ctx) {
    bool needs_parens = e->kind == ExprKind::Sum || e->kind == ExprKind::Quotient;
    std::string s = render_rec(e, ctx, false);
    if (needs_parens) return ctx.latex ? "\\left(" + s + "\\right)" : "(" + s + ")";
    return s;
}

std::string render_rec(const ExprPtr& e, RenderCtx& ctx, bool atom_context) {
    switch (e->kind) {
        case ExprKind::One:
            return "1";
        case ExprKind::Density: {
            std::string head = "p";
            std::string inner = render_vars(e->vars, ctx);
            if (!e->given.empty() || e->ref.tag == MarginTag::Interventional) {
                inner += ctx.latex ? " \\mid " : " | ";
                inner += render_vars(e->given, ctx);
            }
            if (e->ref.tag == MarginTag::Interventional) {
                if (!e->given.empty()) inner += ", ";
                inner += "do(" + render_vars(e->ref.do_vars, ctx) + ")";
            }
            return head + "(" + inner + ")";
        }
        case ExprKind::Sum: {
            std::string head =
                ctx.latex ? "\\sum_{" + render_vars(e->bound, ctx) + "} "
                          : "Σ_{" + render_vars(e->bound, ctx) + "} ";
            return head + render_rec(e->child, ctx, false);
        }
        case ExprKind::Product: {
            std::string out;
            for (const auto& c : e->children) {
                if (!out.empty()) out += " ";
                out += render_factor(c, ctx);
            }
            return out;
        }
        case ExprKind::Quotient: {
            if (ctx.latex)
                return "\\frac{" + render_rec(e->num, ctx, false) + "}{" +
                       render_rec(e->den, ctx, false) + "}";
            std::string n = render_factor(e->num, ctx);
            std::string d = render_factor(e->den, ctx);
            return n + " / " + d;
        }
        case ExprKind::Plug: {
            auto saved = ctx.labels;
            ctx.labels[*e->plug_var] = e->plug_label;
            std::string s = render_rec(e->child, ctx, atom_context);
            ctx.labels = saved;
            return s;
        }
        case ExprKind::BridgeSolve: {
            const auto& b = *e->bridge;
            std::string sum_head = ctx.latex ? "\\sum_{" + render_vars(b.sum_vars, ctx) + "} "
                                             : "Σ_{" + render_vars(b.sum_vars, ctx) + "} ";
            std::string inst = b.instruments.empty()
                                   ? ""
                                   : (ctx.latex ? " \\;\\forall " : " for all ") +
                                         render_vars(b.instruments, ctx);
            std::string head = "let " + b.id + "(" + render_vars(b.args, ctx) + ") solve " +
                               render_rec(b.lhs, ctx, false) + " = " + sum_head + b.id +
                               "·" + render_factor(b.rhs, ctx) + inst + " in ";
            if (ctx.latex) {
                head = "\\text{let } " + b.id + "(" + render_vars(b.args, ctx) +
                       ") \\text{ solve } " + render_rec(b.lhs, ctx, false) + " = " + sum_head +
                       b.id + " \\cdot " + render_factor(b.rhs, ctx) + inst + " \\text{ in } ";
            }
            return head + render_rec(e->child, ctx, false);
        }
        case ExprKind::BridgeApply:
            return e->apply_id + "(" + render_vars(e->apply_args, ctx) + ")";
    }
    throw EstimandError("unreachable");
}

}  // namespace

std::string render_text(const ExprPtr& e) {
    RenderCtx ctx;
    return render_rec(e, ctx, false);
}

std::string render_latex(const ExprPtr& e) {
    RenderCtx ctx;
    ctx.latex = true;
    return render_rec(e, ctx, false);
}

// ---------------------------------------------------------------------------
// kernel algebra used by the derivation engines

namespace {

void collect_all_vars(const ExprPtr& e, std::set<Var>& acc) {
    switch (e->kind) {
        case ExprKind::One:
            return;
        case ExprKind::Density:
            acc.insert(e->vars.begin(), e->vars.end());
            acc.insert(e->given.begin(), e->given.end());
            acc.insert(e->ref.do_vars.begin(), e->ref.do_vars.end());
            return;
        case ExprKind::Sum:
            acc.insert(e->bound.begin(), e->bound.end());
            collect_all_vars(e->child, acc);
            return;
        case ExprKind::Product:
            for (const auto& c : e->children) collect_all_vars(c, acc);
            return;
        case ExprKind::Quotient:
            collect_all_vars(e->num, acc);
            collect_all_vars(e->den, acc);
            return;
        case ExprKind::Plug:
            acc.insert(*e->plug_var);
            collect_all_vars(e->child, acc);
            return;
        case ExprKind::BridgeSolve:
            acc.insert(e->bridge->sum_vars.begin(), e->bridge->sum_vars.end());
            acc.insert(e->bridge->args.begin(), e->bridge->args.end());
            acc.insert(e->bridge->instruments.begin(), e->bridge->instruments.end());
            collect_all_vars(e->bridge->lhs, acc);
            collect_all_vars(e->bridge->rhs, acc);
            collect_all_vars(e->child, acc);
            return;
        case ExprKind::BridgeApply:
            acc.insert(e->apply_args.begin(), e->apply_args.end());
            return;
    }
}

// prefer_plain: binders take the plain copy-0 name when it is free to use in
// the current scope (outer marginalization sums render as "Σ_{c}"), falling
// back to tilde copies otherwise
ExprPtr renumber_rec(const ExprPtr& e, std::map<VertexId, int>& next,
                     const std::set<Var>& reserved, std::set<Var>& in_scope, bool prefer_plain) {
    switch (e->kind) {
        case ExprKind::One:
        case ExprKind::Density:
        case ExprKind::BridgeApply:
            return e;
        case ExprKind::Sum: {
            std::map<Var, Var> renames;
            VarList bound;
            std::vector<Var> added;
            for (const auto& b : e->bound) {
                Var plain(b.vertex, 0);
                Var nb = plain;
                if (!prefer_plain || reserved.count(plain) || in_scope.count(plain)) {
                    int c = next[b.vertex];
                    nb = Var(b.vertex, ++c);
                    while (reserved.count(nb) || in_scope.count(nb)) nb = Var(b.vertex, ++c);
                    next[b.vertex] = c;
                }
                in_scope.insert(nb);
                added.push_back(nb);
                if (!(nb == b)) renames.emplace(b, nb);
                bound.push_back(nb);
            }
            ExprPtr child = renames.empty() ? e->child : substitute(e->child, renames);
            ExprPtr out = sum(bound, renumber_rec(child, next, reserved, in_scope, prefer_plain));
            for (const auto& v : added) in_scope.erase(v);
            return out;
        }
        case ExprKind::Product: {
            std::vector<ExprPtr> cs;
            for (const auto& c : e->children)
                cs.push_back(renumber_rec(c, next, reserved, in_scope, prefer_plain));
            return product(std::move(cs));
        }
        case ExprKind::Quotient:
            return quotient(renumber_rec(e->num, next, reserved, in_scope, prefer_plain),
                            renumber_rec(e->den, next, reserved, in_scope, prefer_plain));
        case ExprKind::Plug:
            return plug(*e->plug_var, e->plug_label,
                        renumber_rec(e->child, next, reserved, in_scope, prefer_plain));
        case ExprKind::BridgeSolve: {
            auto spec = std::make_shared<BridgeSpec>(*e->bridge);
            spec->lhs = renumber_rec(spec->lhs, next, reserved, in_scope, prefer_plain);
            spec->rhs = renumber_rec(spec->rhs, next, reserved, in_scope, prefer_plain);
            return bridge_solve(spec,
                                renumber_rec(e->child, next, reserved, in_scope, prefer_plain));
        }
    }
    throw EstimandError("unreachable");
}

}  // namespace

void FreshVars::seed_above(const ExprPtr& e) {
    std::set<Var> all;
    collect_all_vars(e, all);
    for (const auto& v : all) next_[v.vertex] = std::max(next_[v.vertex], v.copy);
}

ExprPtr canonicalize_bound(const ExprPtr& e) {
    // pass 1: move every binder to a copy above anything in the tree, so the
    // canonical pass below can never capture an inner binder
    std::set<Var> all;
    collect_all_vars(e, all);
    int max_copy = 0;
    for (const auto& v : all) max_copy = std::max(max_copy, v.copy);
    std::map<VertexId, int> high;
    for (const auto& v : all) high[v.vertex] = max_copy;
    std::set<Var> scope1;
    ExprPtr lifted = renumber_rec(e, high, {}, scope1, false);
    // pass 2: plain names where available, then 1, 2, ... per vertex
    std::set<Var> reserved = free_vars(e);
    std::map<VertexId, int> next;
    std::set<Var> scope2;
    return renumber_rec(lifted, next, reserved, scope2, true);
}

namespace {

ExprPtr marg_drop(const ExprPtr& e, const VertexSet& drop, FreshVars& fresh) {
    if (drop.empty()) return e;
    std::map<Var, Var> renames;
    VarList bound;
    for (const auto& v : drop) {
        Var b = fresh.fresh(v);
        renames.emplace(Var(v), b);
        bound.push_back(b);
    }
    return sum(bound, substitute(e, renames));
}

}  // namespace

ExprPtr kernel_conditional(const ExprPtr& e, const VertexSet& scope, const VertexSet& vars,
                           const VertexSet& given, FreshVars& fresh) {
    if (!is_subset(vars, scope) || !is_subset(given, scope))
        throw EstimandError("kernel_conditional: vars/given outside scope");
    VertexSet drop_num = set_minus(scope, set_union(vars, given));
    VertexSet drop_den = set_minus(scope, given);
    ExprPtr num = marg_drop(e, drop_num, fresh);
    ExprPtr den = marg_drop(e, drop_den, fresh);
    return simplify(quotient(num, den));
}

ExprPtr kernel_marginal(const ExprPtr& e, const VertexSet& scope, const VertexSet& keep,
                        FreshVars& fresh) {
    if (!is_subset(keep, scope)) throw EstimandError("kernel_marginal: keep outside scope");
    return simplify(marg_drop(e, set_minus(scope, keep), fresh));
}

}  // namespace proxid
