#include "proxid/graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace proxid {

bool is_hidden(VertexKind k) {
    return k == VertexKind::ResolvableHidden || k == VertexKind::UnresolvableHidden;
}

Admg::Admg(std::map<VertexId, VertexKind> vertices, std::set<Edge> directed,
           std::set<Edge> bidirected)
    : vertices_(std::move(vertices)), directed_(std::move(directed)) {
    for (const auto& e : bidirected) {
        if (e.second < e.first)
            bidirected_.emplace(e.second, e.first);
        else
            bidirected_.insert(e);
    }
    validate();
}

void Admg::validate() const {
    auto check_endpoint = [&](const VertexId& v) {
        if (!has_vertex(v)) throw GraphError("edge endpoint not declared: " + v.str());
    };
    for (const auto& [a, b] : directed_) {
        check_endpoint(a);
        check_endpoint(b);
        if (a == b) throw GraphError("self-loop on " + a.str());
    }
    for (const auto& [a, b] : bidirected_) {
        check_endpoint(a);
        check_endpoint(b);
        if (a == b) throw GraphError("bidirected self-loop on " + a.str());
    }
    // fixed vertices have no incoming edges of any type
    for (const auto& [a, b] : directed_) {
        if (kind(b) == VertexKind::Fixed)
            throw GraphError("fixed vertex " + b.str() + " has incoming edge");
    }
    for (const auto& [a, b] : bidirected_) {
        if (kind(a) == VertexKind::Fixed || kind(b) == VertexKind::Fixed)
            throw GraphError("fixed vertex on bidirected edge " + a.str() + " <-> " + b.str());
    }
    // acyclicity via Kahn's algorithm
    std::map<VertexId, int> indeg;
    for (const auto& [v, k] : vertices_) indeg[v] = 0;
    for (const auto& [a, b] : directed_) indeg[b]++;
    std::deque<VertexId> queue;
    for (const auto& [v, d] : indeg)
        if (d == 0) queue.push_back(v);
    size_t seen = 0;
    while (!queue.empty()) {
        VertexId v = queue.front();
        queue.pop_front();
        seen++;
        for (const auto& [a, b] : directed_) {
            if (a == v && --indeg[b] == 0) queue.push_back(b);
        }
    }
    if (seen != vertices_.size()) throw GraphError("directed part has a cycle");
}

VertexKind Admg::kind(const VertexId& v) const {
    auto it = vertices_.find(v);
    if (it == vertices_.end()) throw GraphError("unknown vertex: " + v.str());
    return it->second;
}

bool Admg::has_directed(const VertexId& a, const VertexId& b) const {
    return directed_.count({a, b}) > 0;
}

bool Admg::has_bidirected(const VertexId& a, const VertexId& b) const {
    return a < b ? bidirected_.count({a, b}) > 0 : bidirected_.count({b, a}) > 0;
}

VertexSet Admg::vertex_set() const {
    VertexSet out;
    for (const auto& [v, k] : vertices_) out.insert(v);
    return out;
}

VertexSet Admg::vertices_of_kind(VertexKind k) const {
    VertexSet out;
    for (const auto& [v, kk] : vertices_)
        if (kk == k) out.insert(v);
    return out;
}

VertexSet Admg::random_vertices() const {
    VertexSet out;
    for (const auto& [v, k] : vertices_)
        if (k != VertexKind::Fixed) out.insert(v);
    return out;
}

VertexSet Admg::fixed_vertices() const { return vertices_of_kind(VertexKind::Fixed); }
VertexSet Admg::observed_vertices() const { return vertices_of_kind(VertexKind::Observed); }

VertexSet Admg::hidden_vertices() const {
    VertexSet out;
    for (const auto& [v, k] : vertices_)
        if (is_hidden(k)) out.insert(v);
    return out;
}

Admg Admg::with_kind(const VertexId& v, VertexKind k) const {
    if (!has_vertex(v)) throw GraphError("unknown vertex: " + v.str());
    auto vs = vertices_;
    vs[v] = k;
    return Admg(std::move(vs), directed_, bidirected_);
}

// ---------------------------------------------------------------------------

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    VertexSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

VertexSet set_minus(const VertexSet& a, const VertexSet& b) {
    VertexSet out;
    for (const auto& v : a)
        if (!b.count(v)) out.insert(v);
    return out;
}

VertexSet set_intersect(const VertexSet& a, const VertexSet& b) {
    VertexSet out;
    for (const auto& v : a)
        if (b.count(v)) out.insert(v);
    return out;
}

bool is_subset(const VertexSet& a, const VertexSet& b) {
    return std::all_of(a.begin(), a.end(), [&](const VertexId& v) { return b.count(v) > 0; });
}

std::string join_names(const VertexSet& s, const std::string& sep) {
    std::string out;
    for (const auto& v : s) {
        if (!out.empty()) out += sep;
        out += v.str();
    }
    return out;
}

static void require_known(const Admg& g, const VertexSet& s) {
    for (const auto& v : s)
        if (!g.has_vertex(v)) throw GraphError("unknown vertex: " + v.str());
}

VertexSet parents(const Admg& g, const VertexSet& s) {
    require_known(g, s);
    VertexSet out;
    for (const auto& [a, b] : g.directed())
        if (s.count(b)) out.insert(a);
    return out;
}

VertexSet parents(const Admg& g, const VertexId& v) { return parents(g, VertexSet{v}); }

VertexSet children(const Admg& g, const VertexSet& s) {
    require_known(g, s);
    VertexSet out;
    for (const auto& [a, b] : g.directed())
        if (s.count(a)) out.insert(b);
    return out;
}

static VertexSet closure(const Admg& g, const VertexSet& s, bool forward) {
    require_known(g, s);
    VertexSet out = s;
    std::deque<VertexId> queue(s.begin(), s.end());
    while (!queue.empty()) {
        VertexId v = queue.front();
        queue.pop_front();
        for (const auto& [a, b] : g.directed()) {
            const VertexId& from = forward ? a : b;
            const VertexId& to = forward ? b : a;
            if (from == v && !out.count(to)) {
                out.insert(to);
                queue.push_back(to);
            }
        }
    }
    return out;
}

VertexSet descendants(const Admg& g, const VertexSet& s) { return closure(g, s, true); }
VertexSet descendants(const Admg& g, const VertexId& v) { return closure(g, {v}, true); }
VertexSet ancestors(const Admg& g, const VertexSet& s) { return closure(g, s, false); }

VertexSet siblings(const Admg& g, const VertexId& v) {
    require_known(g, {v});
    VertexSet out;
    for (const auto& [a, b] : g.bidirected()) {
        if (a == v) out.insert(b);
        if (b == v) out.insert(a);
    }
    return out;
}

std::vector<VertexSet> districts(const Admg& g, const VertexSet& scope) {
    require_known(g, scope);
    for (const auto& v : scope)
        if (!g.is_random(v)) throw GraphError("district scope contains fixed vertex " + v.str());
    VertexSet todo = scope;
    std::vector<VertexSet> out;
    while (!todo.empty()) {
        VertexId seed = *todo.begin();
        VertexSet comp{seed};
        std::deque<VertexId> queue{seed};
        while (!queue.empty()) {
            VertexId v = queue.front();
            queue.pop_front();
            for (const auto& s : siblings(g, v)) {
                if (scope.count(s) && !comp.count(s)) {
                    comp.insert(s);
                    queue.push_back(s);
                }
            }
        }
        out.push_back(comp);
        todo = set_minus(todo, comp);
    }
    std::sort(out.begin(), out.end(),
              [](const VertexSet& a, const VertexSet& b) { return *a.begin() < *b.begin(); });
    return out;
}

std::vector<VertexSet> districts(const Admg& g) { return districts(g, g.random_vertices()); }

VertexSet district_of(const Admg& g, const VertexId& v, const VertexSet& scope) {
    for (const auto& d : districts(g, scope))
        if (d.count(v)) return d;
    throw GraphError("vertex " + v.str() + " not in district scope");
}

VertexSet district_of(const Admg& g, const VertexId& v) {
    return district_of(g, v, g.random_vertices());
}

// ---------------------------------------------------------------------------

static Admg eliminate_one(const Admg& g, const VertexId& h) {
    VertexSet pa, ch, sib;
    for (const auto& [a, b] : g.directed()) {
        if (b == h) pa.insert(a);
        if (a == h) ch.insert(b);
    }
    sib = siblings(g, h);

    std::map<VertexId, VertexKind> vs = g.vertices();
    vs.erase(h);
    std::set<Admg::Edge> dir, bidir;
    for (const auto& e : g.directed())
        if (e.first != h && e.second != h) dir.insert(e);
    for (const auto& e : g.bidirected())
        if (e.first != h && e.second != h) bidir.insert(e);

    auto add_bidir = [&](const VertexId& a, const VertexId& b) {
        if (a == b) return;
        bidir.insert(a < b ? Admg::Edge{a, b} : Admg::Edge{b, a});
    };
    for (const auto& a : pa)
        for (const auto& b : ch)
            if (a != b) dir.insert({a, b});
    for (const auto& s : sib)
        for (const auto& b : ch) add_bidir(s, b);
    for (const auto& b1 : ch)
        for (const auto& b2 : ch)
            if (b1 < b2) add_bidir(b1, b2);
    return Admg(std::move(vs), std::move(dir), std::move(bidir));
}

Admg latent_project(const Admg& g, const VertexSet& hide) {
    require_known(g, hide);
    for (const auto& v : hide)
        if (g.kind(v) == VertexKind::Fixed)
            throw GraphError("cannot hide fixed vertex " + v.str());
    Admg cur = g;
    for (const auto& h : hide) cur = eliminate_one(cur, h);
    return cur;
}

Admg project_keeping(const Admg& g, const VertexSet& keep) {
    VertexSet hide = set_minus(set_minus(g.vertex_set(), keep), g.fixed_vertices());
    return latent_project(g, hide);
}

// ---------------------------------------------------------------------------

namespace {

// directed endpoint marks for path traversal
enum class Mark { Tail, Head };

struct Adjacent {
    VertexId other;
    Mark at_here;   // mark at the current vertex
    Mark at_other;  // mark at the far endpoint
};

std::map<VertexId, std::vector<Adjacent>> adjacency(const Admg& g) {
    std::map<VertexId, std::vector<Adjacent>> adj;
    for (const auto& [v, k] : g.vertices()) adj[v];
    for (const auto& [a, b] : g.directed()) {
        adj[a].push_back({b, Mark::Tail, Mark::Head});
        adj[b].push_back({a, Mark::Head, Mark::Tail});
    }
    for (const auto& [a, b] : g.bidirected()) {
        adj[a].push_back({b, Mark::Head, Mark::Head});
        adj[b].push_back({a, Mark::Head, Mark::Head});
    }
    return adj;
}

}  // namespace

bool m_separated(const Admg& g, const VertexSet& x, const VertexSet& y, const VertexSet& z) {
    require_known(g, x);
    require_known(g, y);
    require_known(g, z);
    if (!set_intersect(x, y).empty() || !set_intersect(x, z).empty() ||
        !set_intersect(y, z).empty())
        throw GraphError("m_separated: x, y, z must be disjoint");

    VertexSet z_eff = set_union(z, g.fixed_vertices());
    VertexSet an_z = ancestors(g, z_eff);
    auto adj = adjacency(g);

    // states: (vertex, mark of the incoming edge at that vertex)
    std::set<std::pair<VertexId, Mark>> visited;
    std::deque<std::pair<VertexId, Mark>> queue;
    for (const auto& xv : x) {
        if (z_eff.count(xv)) continue;  // disjointness keeps z out of x anyway
        for (const auto& e : adj[xv]) {
            auto state = std::make_pair(e.other, e.at_other);
            if (visited.insert(state).second) queue.push_back(state);
        }
    }
    while (!queue.empty()) {
        auto [v, in_mark] = queue.front();
        queue.pop_front();
        if (y.count(v)) return false;
        for (const auto& e : adj[v]) {
            bool collider = (in_mark == Mark::Head && e.at_here == Mark::Head);
            bool passable = collider ? an_z.count(v) > 0 : z_eff.count(v) == 0;
            if (!passable) continue;
            auto state = std::make_pair(e.other, e.at_other);
            if (visited.insert(state).second) queue.push_back(state);
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

bool fixable(const Admg& g, const VertexId& v) {
    if (!g.has_vertex(v)) throw GraphError("unknown vertex: " + v.str());
    if (g.kind(v) == VertexKind::Fixed) throw GraphError("vertex already fixed: " + v.str());
    VertexSet de = descendants(g, v);
    VertexSet dis = district_of(g, v);
    VertexSet both = set_intersect(de, dis);
    return both.size() == 1 && both.count(v) == 1;
}

Admg fix(const Admg& g, const VertexId& v) {
    if (!fixable(g, v)) throw GraphError("vertex not fixable: " + v.str());
    std::map<VertexId, VertexKind> vs = g.vertices();
    vs[v] = VertexKind::Fixed;
    std::set<Admg::Edge> dir, bidir;
    for (const auto& e : g.directed())
        if (e.second != v) dir.insert(e);
    for (const auto& e : g.bidirected())
        if (e.first != v && e.second != v) bidir.insert(e);
    return Admg(std::move(vs), std::move(dir), std::move(bidir));
}

SequenceResult find_valid_sequence(const Admg& g, const VertexSet& j) {
    require_known(g, j);
    SequenceResult res;
    Admg cur = g;
    VertexSet rest = j;
    while (!rest.empty()) {
        bool advanced = false;
        for (const auto& v : rest) {
            if (fixable(cur, v)) {
                cur = fix(cur, v);
                res.sequence.push_back(v);
                rest.erase(v);
                advanced = true;
                break;
            }
        }
        if (!advanced) {
            res.stuck = rest;
            return res;
        }
    }
    res.ok = true;
    return res;
}

VertexSet mb_star(const Admg& g, const VertexId& v) {
    if (!g.has_vertex(v)) throw GraphError("unknown vertex: " + v.str());
    if (!g.is_random(v)) throw GraphError("mb_star of fixed vertex: " + v.str());
    VertexSet dis = district_of(g, v);
    VertexSet blanket = set_union(dis, parents(g, dis));
    blanket.erase(v);
    return set_intersect(blanket, g.random_vertices());
}

// ---------------------------------------------------------------------------

SplitGraph split_intervene(const Admg& g, const VertexSet& a_set) {
    require_known(g, a_set);
    for (const auto& a : a_set) {
        if (is_hidden(g.kind(a))) throw GraphError("cannot split hidden vertex " + a.str());
        if (g.kind(a) == VertexKind::Fixed) throw GraphError("cannot split fixed vertex " + a.str());
    }
    SplitGraph out;
    std::map<VertexId, VertexKind> vs = g.vertices();
    for (const auto& a : a_set) {
        VertexId copy(a.str() + "$");
        vs.emplace(copy, VertexKind::Fixed);
        out.fixed_copy.emplace(a, copy);
    }
    std::set<Admg::Edge> dir, bidir;
    for (const auto& [t, h] : g.directed()) {
        VertexId tail = a_set.count(t) ? out.fixed_copy.at(t) : t;
        dir.insert({tail, h});  // heads stay on the random copy
    }
    for (const auto& e : g.bidirected()) bidir.insert(e);
    out.graph = Admg(std::move(vs), std::move(dir), std::move(bidir));
    return out;
}

VertexSet ancestral_set(const Admg& g, const VertexSet& y, const VertexSet& a) {
    require_known(g, y);
    require_known(g, a);
    if (!set_intersect(y, a).empty()) throw GraphError("ancestral_set: y and a must be disjoint");
    VertexSet out = y;
    std::deque<VertexId> queue(y.begin(), y.end());
    while (!queue.empty()) {
        VertexId v = queue.front();
        queue.pop_front();
        for (const auto& [p, c] : g.directed()) {
            if (c == v && !a.count(p) && !out.count(p)) {
                out.insert(p);
                queue.push_back(p);
            }
        }
    }
    return out;
}

}  // namespace proxid
