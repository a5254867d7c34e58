#pragma once

#include <string>

#include "proxid/graph.hpp"

namespace proxid {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Text format, one declaration per line, '#' starts a comment:
//   vertex <name> [observed|u|l]     (kind defaults to observed)
//   fixed <name>
//   <a> -> <b>
//   <a> <-> <b>
// Rejects cycles, duplicate edges and undeclared vertices with the offending
// line number.
Admg parse_graph_text(const std::string& text);
Admg load_graph_file(const std::string& path);
std::string graph_to_text(const Admg& g);

}  // namespace proxid
