#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssmi/model.hpp"
#include "ssmi/result.hpp"

namespace ssmi {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    std::optional<std::string> variable;
    std::optional<SourceSpan> span;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

// (user, used): `user`'s definition references `used`.
struct Edge {
    std::string user;
    std::string used;

    bool operator==(const Edge&) const = default;
};

using Graph = std::vector<Edge>;

struct ValidatedModel {
    Model model;
    Graph graph;
    std::vector<std::string> topo_order;
    std::map<std::string, Scope> scopes;
    Diagnostics warnings;
};

struct ValidateOptions {
    bool strict = false;  // promote warnings to errors
};

Result<Graph, Diagnostics> build_graph(const Model& model);

// Kahn's algorithm; ties broken by declaration order.
Result<std::vector<std::string>, Diagnostic> check_cycles(const Model& model, const Graph& graph);

Result<std::map<std::string, Scope>, Diagnostics> check_scopes(const Model& model, const Graph& graph);

Diagnostics lint_model(const Model& model);

Result<ValidatedModel, Diagnostics> validate(const Model& model, ValidateOptions options = {});

// `SEVERITY CODE at line:col`, a dash, the message, then `(variable)`.
std::string render(const Diagnostic& d);

std::string to_json(const Diagnostics& diagnostics);

}  // namespace ssmi
