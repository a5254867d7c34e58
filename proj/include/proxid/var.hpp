#pragma once

#include <compare>
#include <string>
#include <vector>

#include "proxid/graph.hpp"

namespace proxid {

// A value symbol tied to a graph vertex. copy == 0 is the canonical symbol of
// the vertex; higher copies are fresh bound variables (rendered "a~", "a~2").
struct Var {
    VertexId vertex;
    int copy = 0;

    Var(VertexId v, int c = 0) : vertex(std::move(v)), copy(c) {}
    Var(const char* name) : vertex(name) {}
    auto operator<=>(const Var&) const = default;

    std::string str() const {
        std::string s = vertex.str();
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (copy == 1) return s + "~";
        if (copy > 1) return s + "~" + std::to_string(copy);
        return s;
    }
};

using VarList = std::vector<Var>;

inline VarList to_vars(const VertexSet& s) {
    VarList out;
    for (const auto& v : s) out.emplace_back(v);
    return out;
}

std::string join_vars(const VarList& vs, const std::string& sep = ",");

}  // namespace proxid
