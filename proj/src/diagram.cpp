#include "ssmi/diagram.hpp"

#include <sstream>

namespace ssmi {

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string node_attributes(const Variable& v) {
    switch (v.kind) {
        case VarKind::Input: return "shape=box";
        case VarKind::Parameter: return "shape=box, style=rounded";
        case VarKind::Calculated: return v.is_output ? "shape=ellipse, peripheries=2" : "shape=ellipse";
    }
    return {};
}

}  // namespace

std::string to_dot(const ValidatedModel& vm) {
    const Model& model = vm.model;
    std::ostringstream out;
    out << "digraph " << quote(model.title) << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [fontname=\"Helvetica\"];\n";
    for (const auto& v : model.variables) {
        if (v.is_repeating()) continue;
        out << "  " << quote(v.name) << " [" << node_attributes(v) << "];\n";
    }
    for (const auto& e : model.entities) {
        out << "  subgraph " << quote("cluster_" + e.name) << " {\n";
        out << "    label=" << quote(e.name) << ";\n";
        out << "    labeljust=r;\n    labelloc=t;\n    style=dashed;\n";
        for (const auto& v : model.variables) {
            if (v.scope.entity != e.name) continue;
            out << "    " << quote(v.name) << " [" << node_attributes(v) << "];\n";
        }
        out << "  }\n";
    }
    for (const auto& edge : vm.graph) out << "  " << quote(edge.used) << " -> " << quote(edge.user) << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace ssmi
