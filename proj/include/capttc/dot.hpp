#pragma once

#include <cstdio>
#include <string>

#include "capttc/engine.hpp"

namespace capttc {

namespace detail {

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace detail

// One digraph per round: real agents as circles labeled with their current
// target, virtual owners dashed, edges labeled with the satisfaction loss,
// and the round's resolution order in the graph label.
inline std::string to_dot(const RoundTrace& trace) {
    using detail::dot_escape;
    using detail::two_decimals;

    std::string order;
    int position = 0;
    for (const auto& cand : trace.candidates) {
        order += "\\n" + std::to_string(++position) + ". ";
        order += cand.is_chain ? "chain(" : "cycle(";
        for (std::size_t i = 0; i < cand.vertices.size(); ++i) {
            if (i > 0) order += ",";
            order += dot_escape(cand.vertices[i]);
        }
        order += ") score=" + two_decimals(cand.score);
        if (!cand.resolved) order += " [skipped]";
    }

    std::string out = "digraph round" + std::to_string(trace.round) + " {\n";
    out += "  label=\"round " + std::to_string(trace.round) + order + "\";\n";
    out += "  labelloc=top;\n  rankdir=LR;\n";
    for (const auto& v : trace.vertices) {
        out += "  \"" + dot_escape(v.label) + "\" [";
        if (v.is_virtual) {
            out += "shape=circle, style=dashed, label=\"" + dot_escape(v.label) + "\\n" +
                   dot_escape(v.owned) + "\"";
        } else {
            out += "shape=circle, label=\"" + dot_escape(v.label);
            if (!v.target.empty()) out += "\\n-> " + dot_escape(v.target);
            out += "\"";
        }
        out += "];\n";
    }
    for (const auto& e : trace.edges) {
        std::string from, to;
        for (const auto& v : trace.vertices) {
            if (v.id == e.from) from = v.label;
            if (v.id == e.to) to = v.label;
        }
        out += "  \"" + dot_escape(from) + "\" -> \"" + dot_escape(to) + "\" [label=\"" +
               two_decimals(e.weight) + "\"];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace capttc
