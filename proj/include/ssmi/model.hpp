#pragma once

// Domain types of a structured spreadsheet model: entities, variables with
// their scopes, and the formula expression tree.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssmi/result.hpp"

namespace ssmi {

struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 0;

    bool operator==(const SourceSpan&) const = default;
};

struct EntityDef {
    std::string name;
    std::vector<std::string> instances;
    SourceSpan span;

    std::size_t size() const { return instances.size(); }
    bool operator==(const EntityDef& o) const { return name == o.name && instances == o.instances; }
};

// Scalar when `entity` is empty, otherwise repeating over that entity.
struct Scope {
    std::optional<std::string> entity;

    static Scope scalar() { return {}; }
    static Scope repeating(std::string e) { return Scope{std::move(e)}; }

    bool is_scalar() const { return !entity.has_value(); }
    bool operator==(const Scope&) const = default;
};

std::string to_string(const Scope& scope);

enum class AggregateKind { Sum, Average, Min, Max, Variance, Stdev, Npv, Irr };

std::string_view aggregate_name(AggregateKind kind);
std::optional<AggregateKind> aggregate_from_name(std::string_view name);

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

char op_symbol(BinaryOp op);

struct Expr {
    enum class Kind { Number, Ref, Neg, Binary, Aggregate };

    Kind kind = Kind::Number;
    double number = 0.0;           // Number
    std::string name;              // Ref: variable; Aggregate: argument variable
    BinaryOp op = BinaryOp::Add;   // Binary
    AggregateKind aggregate = AggregateKind::Sum;
    // Neg: [child]; Binary: [left, right]; Aggregate: [rate] for NPV, else empty.
    std::vector<Expr> args;

    static Expr num(double v);
    static Expr ref(std::string name);
    static Expr neg(Expr child);
    static Expr binary(BinaryOp op, Expr left, Expr right);
    static Expr agg(AggregateKind kind, std::string arg, std::optional<Expr> rate = std::nullopt);

    bool operator==(const Expr&) const = default;
};

enum class VarKind { Input, Parameter, Calculated };
enum class NumberFormat { None, Currency, Percent, Count };

std::string_view to_string(VarKind kind);
std::string_view to_string(NumberFormat fmt);

struct Variable {
    std::string name;  // display label, words separated by single spaces
    VarKind kind = VarKind::Calculated;
    bool is_output = false;
    Scope scope;
    NumberFormat format = NumberFormat::None;
    std::optional<Expr> definition;   // Calculated only
    std::vector<double> values;       // Input / Parameter literal(s)
    bool list_literal = false;        // values were written as a [..] list
    SourceSpan span;

    bool is_repeating() const { return !scope.is_scalar(); }

    bool operator==(const Variable& o) const {
        return name == o.name && kind == o.kind && is_output == o.is_output && scope == o.scope &&
               format == o.format && definition == o.definition && values == o.values &&
               list_literal == o.list_literal;
    }
};

struct Model {
    std::string title;
    std::vector<EntityDef> entities;
    std::vector<Variable> variables;

    const Variable* find_variable(std::string_view name) const;
    const EntityDef* find_entity(std::string_view name) const;
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const Model&) const = default;
};

// Referenced variables in first-occurrence order (each name once), including
// aggregate arguments and NPV rate sub-expressions.
std::vector<std::string> free_vars(const Expr& expr);

// Binary operators plus aggregate calls; unary minus is not counted.
int operator_count(const Expr& expr);

enum class ScopeErrorCode { UnknownVariable, MixedEntities, AggregateOfScalar, NonScalarRate };

std::string_view to_string(ScopeErrorCode code);

struct ScopeError {
    ScopeErrorCode code;
    std::string message;
};

using ScopeLookup = std::function<std::optional<Scope>(const std::string&)>;

Result<Scope, ScopeError> infer_scope(const Expr& expr, const std::map<std::string, Scope>& env);
Result<Scope, ScopeError> infer_scope(const Expr& expr, const ScopeLookup& lookup);

struct InvalidLabel {
    std::string message;
};

// Spreadsheet defined name for a display label: words joined by '_'.
Result<std::string, InvalidLabel> defined_name(std::string_view label);

// Expression in DSL surface syntax with minimal parentheses.
std::string to_source(const Expr& expr);

}  // namespace ssmi
