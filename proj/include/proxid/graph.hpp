#pragma once

#include <compare>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace proxid {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vertex identifier. Equality and ordering are by name, which fixes the
// canonical order used by every set-valued output in this library.
class VertexId {
  public:
    VertexId(std::string name) : name_(std::move(name)) {
        if (name_.empty()) throw GraphError("vertex name must be non-empty");
    }
    VertexId(const char* name) : VertexId(std::string(name)) {}
    const std::string& str() const { return name_; }
    auto operator<=>(const VertexId&) const = default;

  private:
    std::string name_;
};

using VertexSet = std::set<VertexId>;

enum class VertexKind {
    Observed,
    ResolvableHidden,    // "u" vertices: hidden but addressable by proxies
    UnresolvableHidden,  // "l" vertices: hidden for good
    Fixed,               // already intervened on; context of a CADMG
};

bool is_hidden(VertexKind k);

// Acyclic directed mixed graph. When some vertices carry the Fixed kind this
// doubles as a CADMG (random/fixed partition). Immutable after construction;
// every operation below is pure and returns fresh values.
class Admg {
  public:
    using Edge = std::pair<VertexId, VertexId>;

    Admg() = default;
    Admg(std::map<VertexId, VertexKind> vertices, std::set<Edge> directed,
         std::set<Edge> bidirected);

    const std::map<VertexId, VertexKind>& vertices() const { return vertices_; }
    const std::set<Edge>& directed() const { return directed_; }
    const std::set<Edge>& bidirected() const { return bidirected_; }

    bool has_vertex(const VertexId& v) const { return vertices_.count(v) > 0; }
    VertexKind kind(const VertexId& v) const;
    bool is_random(const VertexId& v) const { return kind(v) != VertexKind::Fixed; }
    bool has_directed(const VertexId& a, const VertexId& b) const;
    bool has_bidirected(const VertexId& a, const VertexId& b) const;

    VertexSet vertex_set() const;
    VertexSet random_vertices() const;
    VertexSet fixed_vertices() const;
    VertexSet observed_vertices() const;
    VertexSet hidden_vertices() const;
    VertexSet vertices_of_kind(VertexKind k) const;

    Admg with_kind(const VertexId& v, VertexKind k) const;

  private:
    std::map<VertexId, VertexKind> vertices_;
    std::set<Edge> directed_;    // (tail, head)
    std::set<Edge> bidirected_;  // stored with first < second
    void validate() const;
};

using Cadmg = Admg;

// --- basic relatives -------------------------------------------------------

VertexSet parents(const Admg& g, const VertexSet& s);
VertexSet parents(const Admg& g, const VertexId& v);
VertexSet children(const Admg& g, const VertexSet& s);
// Reflexive transitive closures along directed edges.
VertexSet descendants(const Admg& g, const VertexSet& s);
VertexSet descendants(const Admg& g, const VertexId& v);
VertexSet ancestors(const Admg& g, const VertexSet& s);
VertexSet siblings(const Admg& g, const VertexId& v);

// --- districts -------------------------------------------------------------

// Connected components of the bidirected subgraph restricted to `scope`,
// sorted by least member. `scope` must contain random vertices only.
std::vector<VertexSet> districts(const Admg& g, const VertexSet& scope);
std::vector<VertexSet> districts(const Admg& g);
// Component of v within the given scope (defaults to all random vertices).
VertexSet district_of(const Admg& g, const VertexId& v);
VertexSet district_of(const Admg& g, const VertexId& v, const VertexSet& scope);

// --- latent projection ------------------------------------------------------

// Projects the vertices in `hide` out of g, preserving directed reachability
// through hidden chains and confounding through hidden forks. Fixed vertices
// may not be hidden. Implemented by single-vertex elimination to fixpoint.
Admg latent_project(const Admg& g, const VertexSet& hide);
// Keeps exactly `keep` (plus all fixed vertices) and projects out the rest.
Admg project_keeping(const Admg& g, const VertexSet& keep);

// --- m-separation -----------------------------------------------------------

// True iff every path between x and y is blocked given z. Bidirected marks
// count as arrowheads; fixed vertices are implicitly part of the
// conditioning set.
bool m_separated(const Admg& g, const VertexSet& x, const VertexSet& y,
                 const VertexSet& z);

// --- fixing -----------------------------------------------------------------

bool fixable(const Admg& g, const VertexId& v);
Admg fix(const Admg& g, const VertexId& v);

struct SequenceResult {
    bool ok = false;
    std::vector<VertexId> sequence;  // valid order when ok
    VertexSet stuck;                 // non-empty remainder when !ok
};

// Greedy search: repeatedly fix the least-named fixable vertex of j.
// Sound because all valid sequences over the same set yield the same graph.
SequenceResult find_valid_sequence(const Admg& g, const VertexSet& j);

// Markov blanket used by the fixing operator: the district of v together
// with the parents of that district, minus v, restricted to random vertices.
VertexSet mb_star(const Admg& g, const VertexId& v);

// --- node splitting ---------------------------------------------------------

struct SplitGraph {
    Admg graph;
    // original treatment name -> name of its fixed (outgoing) copy
    std::map<VertexId, VertexId> fixed_copy;
};

// Splits every a in `a_set`: the fixed copy keeps outgoing directed edges,
// the random copy keeps incoming and bidirected edges. Counterfactual
// independences X(a) _||_ Y(a) | Z are decided by m_separated on the result.
SplitGraph split_intervene(const Admg& g, const VertexSet& a_set);

// --- ancestral set for identification ---------------------------------------

// Vertices with a directed path to y avoiding a (reflexively includes y).
VertexSet ancestral_set(const Admg& g, const VertexSet& y, const VertexSet& a);

// --- set helpers -------------------------------------------------------------

VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_minus(const VertexSet& a, const VertexSet& b);
VertexSet set_intersect(const VertexSet& a, const VertexSet& b);
bool is_subset(const VertexSet& a, const VertexSet& b);
std::string join_names(const VertexSet& s, const std::string& sep = ",");

}  // namespace proxid
