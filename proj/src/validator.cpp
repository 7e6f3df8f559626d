#include "ssmi/validator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ssmi {

namespace {

Diagnostic error_at(const Variable& v, std::string code, std::string message) {
    return {Severity::Error, std::move(code), std::move(message), v.name, v.span};
}

Diagnostic warning_at(const Variable& v, std::string code, std::string message) {
    return {Severity::Warning, std::move(code), std::move(message), v.name, v.span};
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

Diagnostics structural_checks(const Model& model) {
    Diagnostics out;
    for (const auto& v : model.variables) {
        if (v.scope.entity && !model.find_entity(*v.scope.entity)) {
            out.push_back(error_at(v, "UnknownEntity", "'" + v.name + "' is declared over undeclared entity '" +
                                                           *v.scope.entity + "'"));
            continue;
        }
        if (v.kind == VarKind::Input && v.is_repeating()) {
            out.push_back(error_at(v, "RepeatingInput",
                                   "input '" + v.name + "' cannot repeat over " + *v.scope.entity +
                                       "; inputs are single values on the Interface sheet"));
            continue;
        }
        if (v.kind == VarKind::Parameter && v.is_repeating()) {
            const EntityDef* e = model.find_entity(*v.scope.entity);
            if (v.values.size() != e->size()) {
                out.push_back(error_at(v, "ParamArity",
                                       "'" + v.name + "' has " + std::to_string(v.values.size()) +
                                           " value(s) but " + e->name + " has " + std::to_string(e->size()) +
                                           " instance(s)"));
            }
        }
    }
    return out;
}

}  // namespace

Result<Graph, Diagnostics> build_graph(const Model& model) {
    Graph graph;
    Diagnostics errors;
    for (const auto& v : model.variables) {
        if (!v.definition) continue;
        for (const auto& used : free_vars(*v.definition)) {
            if (!model.find_variable(used)) {
                std::string why = model.find_entity(used) ? "entity '" + used + "', which is not a variable"
                                                          : "undeclared '" + used + "'";
                errors.push_back(error_at(v, "UnknownVariable", "'" + v.name + "' references " + why));
                continue;
            }
            graph.push_back({v.name, used});
        }
    }
    if (!errors.empty()) return errors;
    return graph;
}

Result<std::vector<std::string>, Diagnostic> check_cycles(const Model& model, const Graph& graph) {
    const std::size_t n = model.variables.size();
    std::vector<std::vector<std::size_t>> users(n), deps(n);
    std::vector<std::size_t> pending(n, 0);
    for (const auto& e : graph) {
        auto u = *model.index_of(e.user);
        auto d = *model.index_of(e.used);
        users[d].push_back(u);
        deps[u].push_back(d);
        ++pending[u];
    }
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (pending[i] == 0) ready.insert(i);
    std::vector<std::string> order;
    std::vector<bool> done(n, false);
    while (!ready.empty()) {
        std::size_t i = *ready.begin();
        ready.erase(ready.begin());
        done[i] = true;
        order.push_back(model.variables[i].name);
        for (auto u : users[i])
            if (--pending[u] == 0) ready.insert(u);
    }
    if (order.size() == n) return order;

    std::size_t start = 0;
    while (done[start]) ++start;
    std::vector<std::size_t> path;
    std::vector<int> position(n, -1);
    std::size_t cur = start;
    while (position[cur] < 0) {
        position[cur] = static_cast<int>(path.size());
        path.push_back(cur);
        for (auto d : deps[cur]) {
            if (!done[d]) {
                cur = d;
                break;
            }
        }
    }
    std::string cycle;
    for (std::size_t k = static_cast<std::size_t>(position[cur]); k < path.size(); ++k)
        cycle += model.variables[path[k]].name + " → ";
    cycle += model.variables[cur].name;
    const Variable& head = model.variables[cur];
    return error_at(head, "CircularDefinition", "circular definition " + cycle);
}

Result<std::map<std::string, Scope>, Diagnostics> check_scopes(const Model& model, const Graph&) {
    std::map<std::string, Scope> scopes;
    for (const auto& v : model.variables) scopes[v.name] = v.scope;
    Diagnostics errors;
    for (const auto& v : model.variables) {
        if (!v.definition) continue;
        auto inferred = infer_scope(*v.definition, scopes);
        if (!inferred) {
            errors.push_back(error_at(v, std::string(to_string(inferred.error().code)),
                                      "in '" + v.name + "': " + inferred.error().message));
            continue;
        }
        const Scope& s = *inferred;
        if (v.scope.is_scalar() && !s.is_scalar()) {
            errors.push_back(error_at(v, "RepeatingIntoScalar",
                                      "single-valued '" + v.name + "' uses values repeating over " + *s.entity +
                                          " outside an aggregate function"));
        } else if (!v.scope.is_scalar() && !s.is_scalar() && s != v.scope) {
            errors.push_back(error_at(v, "EntityMismatch",
                                      "'" + v.name + "' is declared over " + *v.scope.entity +
                                          " but its formula repeats over " + *s.entity));
        }
    }
    if (!errors.empty()) return errors;
    return scopes;
}

Diagnostics lint_model(const Model& model) {
    Diagnostics out;
    // Excel compares defined names case-insensitively.
    std::map<std::string, std::string> owners;
    auto claim = [&](const std::string& label, const Variable* v, const SourceSpan& span) {
        auto name = defined_name(label);
        if (!name) {
            out.push_back({Severity::Error, "InvalidLabel", "'" + label + "': " + name.error().message,
                           v ? std::optional<std::string>(v->name) : std::nullopt, span});
            return;
        }
        auto [it, inserted] = owners.emplace(lower(*name), label);
        if (!inserted) {
            out.push_back({Severity::Error, "NameCollision",
                           "'" + label + "' and '" + it->second + "' both map to defined name '" + *name + "'",
                           v ? std::optional<std::string>(v->name) : std::nullopt, span});
        }
    };
    for (const auto& e : model.entities) claim(e.name, nullptr, e.span);
    for (const auto& v : model.variables) claim(v.name, &v, v.span);

    for (const auto& v : model.variables) {
        if (v.definition) {
            int ops = operator_count(*v.definition);
            if (ops > 1)
                out.push_back(warning_at(v, "OperatorCount",
                                         "definition of '" + v.name + "' uses " + std::to_string(ops) +
                                             " operators; split it so each formula has at most one"));
        }
        bool distribution = v.kind == VarKind::Parameter && v.is_repeating() &&
                            (v.name.find("Distribution") != std::string::npos || v.format == NumberFormat::Percent);
        if (distribution && !v.values.empty()) {
            double total = std::accumulate(v.values.begin(), v.values.end(), 0.0);
            if (std::fabs(total - 1.0) > 1e-9) {
                std::ostringstream msg;
                msg << "values of '" << v.name << "' sum to " << total * 100.0 << "%, not 100%";
                out.push_back(warning_at(v, "DistributionSum", msg.str()));
            }
        }
    }
    return out;
}

Result<ValidatedModel, Diagnostics> validate(const Model& model, ValidateOptions options) {
    Diagnostics all = structural_checks(model);
    bool entities_ok = std::none_of(all.begin(), all.end(), [](const Diagnostic& d) { return d.code == "UnknownEntity"; });

    ValidatedModel vm;
    vm.model = model;
    auto graph = build_graph(model);
    if (graph) {
        vm.graph = *graph;
        auto order = check_cycles(model, vm.graph);
        if (order) {
            vm.topo_order = *order;
            if (entities_ok) {
                auto scopes = check_scopes(model, vm.graph);
                if (scopes)
                    vm.scopes = *scopes;
                else
                    all.insert(all.end(), scopes.error().begin(), scopes.error().end());
            }
        } else {
            all.push_back(order.error());
        }
    } else {
        all.insert(all.end(), graph.error().begin(), graph.error().end());
    }
    Diagnostics lints = lint_model(model);
    all.insert(all.end(), lints.begin(), lints.end());

    if (options.strict)
        for (auto& d : all) d.severity = Severity::Error;

    bool failed = std::any_of(all.begin(), all.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
    if (failed) return all;
    vm.warnings = std::move(all);
    return vm;
}

std::string render(const Diagnostic& d) {
    std::ostringstream out;
    out << (d.severity == Severity::Error ? "ERROR" : "WARNING") << " " << d.code;
    if (d.span) out << " at " << d.span->line << ":" << d.span->column;
    out << " — " << d.message;
    if (d.variable) out << " (" << *d.variable << ")";
    return out.str();
}

std::string to_json(const Diagnostics& diagnostics) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& d : diagnostics) {
        nlohmann::ordered_json j;
        j["severity"] = d.severity == Severity::Error ? "error" : "warning";
        j["code"] = d.code;
        j["message"] = d.message;
        j["variable"] = d.variable ? nlohmann::ordered_json(*d.variable) : nlohmann::ordered_json(nullptr);
        if (d.span) {
            j["line"] = d.span->line;
            j["column"] = d.span->column;
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

}  // namespace ssmi
