#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssmi/model.hpp"
#include "ssmi/validator.hpp"

namespace ssmi {

// A single value, or one value per instance of `entity`.
struct Value {
    std::optional<std::string> entity;
    std::vector<double> values;

    static Value scalar(double v) { return {std::nullopt, {v}}; }
    static Value vector(std::string entity, std::vector<double> v) { return {std::move(entity), std::move(v)}; }

    bool is_scalar() const { return !entity.has_value(); }
    double scalar_value() const { return values.at(0); }
    // Scalars broadcast: the same value for every instance.
    double at(std::size_t instance) const { return is_scalar() ? values.at(0) : values.at(instance); }

    bool operator==(const Value&) const = default;
};

using Overrides = std::map<std::string, std::vector<double>>;

struct ValueTable {
    std::map<std::string, Value> values;
    Overrides overrides;  // as applied, keyed by variable name

    const Value& at(const std::string& name) const { return values.at(name); }
};

enum class EvalErrorCode {
    DivisionByZero,
    NonFiniteResult,
    OverrideShapeMismatch,
    OverrideUnknownName,
    EmptyVector,
    VarianceOfSingleton,
    IrrNoSignChange,
    IrrNoConvergence,
};

std::string_view to_string(EvalErrorCode code);

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorCode code, const std::string& message, std::optional<std::string> variable = {},
              std::optional<std::size_t> instance = {})
        : std::runtime_error(message), code_(code), variable_(std::move(variable)), instance_(instance) {}

    EvalErrorCode code() const { return code_; }
    const std::optional<std::string>& variable() const { return variable_; }
    const std::optional<std::size_t>& instance() const { return instance_; }

private:
    EvalErrorCode code_;
    std::optional<std::string> variable_;
    std::optional<std::size_t> instance_;
};

// Reduces a vector with the spreadsheet aggregate semantics: VARIANCE and STDEV
// are sample statistics, NPV discounts the first value by one period, IRR is
// solved by bracketing and bisection. `rate` is required for NPV only.
double apply_aggregate(AggregateKind kind, std::span<const double> values, std::optional<double> rate = {});

double npv(double rate, std::span<const double> values);

// Overrides are keyed by variable name or its defined name (underscores).
ValueTable evaluate(const ValidatedModel& vm, const Overrides& overrides = {});

// Scalars section, then one table per entity with instances as columns.
std::string render_report(const ValidatedModel& vm, const ValueTable& table);
std::string to_json(const ValidatedModel& vm, const ValueTable& table);

}  // namespace ssmi
