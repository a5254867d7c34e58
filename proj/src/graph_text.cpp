#include "proxid/graph_text.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace proxid {

namespace {

bool valid_token(const std::string& t) {
    if (t.empty()) return false;
    for (char c : t) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream in(line);
    std::string t;
    while (in >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

// reachability along already-inserted directed edges
bool reaches(const std::set<Admg::Edge>& dir, const VertexId& from, const VertexId& to) {
    std::vector<VertexId> stack{from};
    VertexSet seen{from};
    while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        if (v == to) return true;
        for (const auto& [a, b] : dir) {
            if (a == v && !seen.count(b)) {
                seen.insert(b);
                stack.push_back(b);
            }
        }
    }
    return false;
}

}  // namespace

Admg parse_graph_text(const std::string& text) {
    std::map<VertexId, VertexKind> vertices;
    std::set<Admg::Edge> directed, bidirected;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto toks = tokenize(line);
        if (toks.empty()) continue;

        if (toks[0] == "vertex" || toks[0] == "fixed") {
            bool fixed = toks[0] == "fixed";
            if (toks.size() < 2 || toks.size() > (fixed ? 2u : 3u))
                throw ParseError(lineno, "expected: " + toks[0] + " <name>" +
                                             (fixed ? "" : " [observed|u|l]"));
            if (!valid_token(toks[1])) throw ParseError(lineno, "bad vertex name '" + toks[1] + "'");
            VertexKind kind = VertexKind::Observed;
            if (fixed) {
                kind = VertexKind::Fixed;
            } else if (toks.size() == 3) {
                if (toks[2] == "observed")
                    kind = VertexKind::Observed;
                else if (toks[2] == "u")
                    kind = VertexKind::ResolvableHidden;
                else if (toks[2] == "l")
                    kind = VertexKind::UnresolvableHidden;
                else
                    throw ParseError(lineno, "unknown vertex kind '" + toks[2] + "'");
            }
            VertexId v(toks[1]);
            if (vertices.count(v)) throw ParseError(lineno, "duplicate vertex '" + toks[1] + "'");
            vertices.emplace(v, kind);
            continue;
        }

        if (toks.size() == 3 && (toks[1] == "->" || toks[1] == "<->")) {
            if (!valid_token(toks[0]) || !valid_token(toks[2]))
                throw ParseError(lineno, "bad vertex name in edge");
            VertexId a(toks[0]), b(toks[2]);
            if (!vertices.count(a)) throw ParseError(lineno, "undeclared vertex '" + a.str() + "'");
            if (!vertices.count(b)) throw ParseError(lineno, "undeclared vertex '" + b.str() + "'");
            if (a == b) throw ParseError(lineno, "self-loop on '" + a.str() + "'");
            if (toks[1] == "->") {
                if (directed.count({a, b})) throw ParseError(lineno, "duplicate edge");
                if (reaches(directed, b, a))
                    throw ParseError(lineno, "edge " + a.str() + " -> " + b.str() + " creates a cycle");
                directed.insert({a, b});
            } else {
                Admg::Edge e = a < b ? Admg::Edge{a, b} : Admg::Edge{b, a};
                if (bidirected.count(e)) throw ParseError(lineno, "duplicate edge");
                bidirected.insert(e);
            }
            continue;
        }
        throw ParseError(lineno, "cannot parse '" + line + "'");
    }
    try {
        return Admg(std::move(vertices), std::move(directed), std::move(bidirected));
    } catch (const GraphError& e) {
        throw ParseError(lineno, e.what());
    }
}

Admg load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GraphError("cannot open graph file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_graph_text(buf.str());
}

std::string graph_to_text(const Admg& g) {
    std::ostringstream out;
    for (const auto& [v, k] : g.vertices()) {
        switch (k) {
            case VertexKind::Observed: out << "vertex " << v.str() << "\n"; break;
            case VertexKind::ResolvableHidden: out << "vertex " << v.str() << " u\n"; break;
            case VertexKind::UnresolvableHidden: out << "vertex " << v.str() << " l\n"; break;
            case VertexKind::Fixed: out << "fixed " << v.str() << "\n"; break;
        }
    }
    for (const auto& [a, b] : g.directed()) out << a.str() << " -> " << b.str() << "\n";
    for (const auto& [a, b] : g.bidirected()) out << a.str() << " <-> " << b.str() << "\n";
    return out.str();
}

}  // namespace proxid
