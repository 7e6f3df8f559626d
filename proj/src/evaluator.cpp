#include "ssmi/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "ssmi/numbers.hpp"

namespace ssmi {

std::string_view to_string(EvalErrorCode code) {
    switch (code) {
        case EvalErrorCode::DivisionByZero: return "DivisionByZero";
        case EvalErrorCode::NonFiniteResult: return "NonFiniteResult";
        case EvalErrorCode::OverrideShapeMismatch: return "OverrideShapeMismatch";
        case EvalErrorCode::OverrideUnknownName: return "OverrideUnknownName";
        case EvalErrorCode::EmptyVector: return "EmptyVector";
        case EvalErrorCode::VarianceOfSingleton: return "VarianceOfSingleton";
        case EvalErrorCode::IrrNoSignChange: return "IrrNoSignChange";
        case EvalErrorCode::IrrNoConvergence: return "IrrNoConvergence";
    }
    return "?";
}

double npv(double rate, std::span<const double> values) {
    double total = 0.0;
    double factor = 1.0;
    for (double v : values) {
        factor *= 1.0 + rate;
        total += v / factor;
    }
    return total;
}

namespace {

constexpr double kIrrLow = -0.999999;
constexpr double kIrrHigh = 1e6;
constexpr int kIrrMaxIterations = 2000;
constexpr int kIrrScanPoints = 2000;
constexpr double kIrrGuess = 0.1;

double sample_variance(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size() - 1);
}

double irr(std::span<const double> values) {
    bool positive = std::any_of(values.begin(), values.end(), [](double v) { return v > 0; });
    bool negative = std::any_of(values.begin(), values.end(), [](double v) { return v < 0; });
    if (!positive || !negative)
        throw EvalError(EvalErrorCode::IrrNoSignChange, "IRR needs both positive and negative cash flows");

    // Scan log(1 + r) uniformly, then bisect the sign change nearest the guess.
    const double g_lo = std::log1p(kIrrLow);
    const double g_hi = std::log1p(kIrrHigh);
    std::vector<double> rates(kIrrScanPoints + 1);
    std::vector<double> f(kIrrScanPoints + 1);
    for (int k = 0; k <= kIrrScanPoints; ++k) {
        double g = g_lo + (g_hi - g_lo) * k / kIrrScanPoints;
        rates[k] = k == 0 ? kIrrLow : (k == kIrrScanPoints ? kIrrHigh : std::expm1(g));
        f[k] = npv(rates[k], values);
    }
    std::optional<std::pair<double, double>> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kIrrScanPoints; ++k) {
        if (f[k] == 0.0) {
            double d = std::fabs(rates[k] - kIrrGuess);
            if (d < best_distance) {
                best_distance = d;
                best = {rates[k], rates[k]};
            }
        }
        if (k == kIrrScanPoints || std::isnan(f[k]) || std::isnan(f[k + 1])) continue;
        if ((f[k] < 0) != (f[k + 1] < 0) && f[k] != 0.0 && f[k + 1] != 0.0) {
            double d = std::fabs(0.5 * (rates[k] + rates[k + 1]) - kIrrGuess);
            if (d < best_distance) {
                best_distance = d;
                best = {rates[k], rates[k + 1]};
            }
        }
    }
    if (!best) throw EvalError(EvalErrorCode::IrrNoConvergence, "IRR found no rate where NPV changes sign");
    auto [lo, hi] = *best;
    if (lo == hi) return lo;
    double f_lo = npv(lo, values);
    // Bisect until the bracket holds adjacent doubles.
    for (int i = 0; i < kIrrMaxIterations; ++i) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double f_mid = npv(mid, values);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0) == (f_lo < 0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    double mid = 0.5 * (lo + hi);
    double candidates[] = {lo, mid, hi};
    return *std::min_element(std::begin(candidates), std::end(candidates), [&](double a, double b) {
        return std::fabs(npv(a, values)) < std::fabs(npv(b, values));
    });
}

}  // namespace

double apply_aggregate(AggregateKind kind, std::span<const double> values, std::optional<double> rate) {
    if (values.empty())
        throw EvalError(EvalErrorCode::EmptyVector, std::string(aggregate_name(kind)) + " of an empty set of values");
    if ((kind == AggregateKind::Npv) != rate.has_value())
        throw std::invalid_argument("a rate is required for NPV and only for NPV");
    switch (kind) {
        case AggregateKind::Sum: {
            double total = 0.0;
            for (double v : values) total += v;
            return total;
        }
        case AggregateKind::Average: {
            double total = 0.0;
            for (double v : values) total += v;
            return total / static_cast<double>(values.size());
        }
        case AggregateKind::Min: return *std::min_element(values.begin(), values.end());
        case AggregateKind::Max: return *std::max_element(values.begin(), values.end());
        case AggregateKind::Variance:
        case AggregateKind::Stdev: {
            if (values.size() < 2)
                throw EvalError(EvalErrorCode::VarianceOfSingleton,
                                std::string(aggregate_name(kind)) + " needs at least two values");
            double var = sample_variance(values);
            return kind == AggregateKind::Variance ? var : std::sqrt(var);
        }
        case AggregateKind::Npv: return npv(*rate, values);
        case AggregateKind::Irr: return irr(values);
    }
    return 0.0;
}

namespace {

class Evaluation {
public:
    Evaluation(const ValidatedModel& vm, ValueTable& table) : vm_(vm), table_(table) {}

    double at(const Expr& e, std::size_t instance, const Variable& owner) {
        switch (e.kind) {
            case Expr::Kind::Number: return e.number;
            case Expr::Kind::Ref: return table_.values.at(e.name).at(instance);
            case Expr::Kind::Neg: return -at(e.args[0], instance, owner);
            case Expr::Kind::Binary: {
                double l = at(e.args[0], instance, owner);
                double r = at(e.args[1], instance, owner);
                double out = 0.0;
                switch (e.op) {
                    case BinaryOp::Add: out = l + r; break;
                    case BinaryOp::Sub: out = l - r; break;
                    case BinaryOp::Mul: out = l * r; break;
                    case BinaryOp::Div:
                        if (r == 0.0) fail(EvalErrorCode::DivisionByZero, "division by zero", owner, instance);
                        out = l / r;
                        break;
                    case BinaryOp::Pow: out = std::pow(l, r); break;
                }
                if (!std::isfinite(out))
                    fail(EvalErrorCode::NonFiniteResult,
                         shortest_repr(l) + " " + op_symbol(e.op) + " " + shortest_repr(r) + " is not a finite number",
                         owner, instance);
                return out;
            }
            case Expr::Kind::Aggregate: {
                std::optional<double> rate;
                if (!e.args.empty()) rate = at(e.args[0], instance, owner);
                const Value& arg = table_.values.at(e.name);
                double out = 0.0;
                try {
                    out = apply_aggregate(e.aggregate, arg.values, rate);
                } catch (const EvalError& err) {
                    fail(err.code(), err.what(), owner, instance);
                }
                if (!std::isfinite(out))
                    fail(EvalErrorCode::NonFiniteResult,
                         std::string(aggregate_name(e.aggregate)) + " is not a finite number", owner, instance);
                return out;
            }
        }
        return 0.0;
    }

    [[noreturn]] void fail(EvalErrorCode code, const std::string& what, const Variable& owner, std::size_t instance) {
        std::string where = "'" + owner.name + "'";
        std::optional<std::size_t> inst;
        if (owner.is_repeating()) {
            const EntityDef* e = vm_.model.find_entity(*owner.scope.entity);
            where += " for " + e->instances.at(instance);
            inst = instance;
        }
        throw EvalError(code, "evaluating " + where + ": " + what, owner.name, inst);
    }

private:
    const ValidatedModel& vm_;
    ValueTable& table_;
};

const Variable* resolve_override(const Model& model, const std::string& key) {
    if (const Variable* v = model.find_variable(key)) return v;
    for (const auto& v : model.variables) {
        auto dn = defined_name(v.name);
        if (dn && *dn == key) return &v;
    }
    return nullptr;
}

}  // namespace

ValueTable evaluate(const ValidatedModel& vm, const Overrides& overrides) {
    const Model& model = vm.model;
    ValueTable table;
    for (const auto& [key, values] : overrides) {
        const Variable* v = resolve_override(model, key);
        if (!v) throw EvalError(EvalErrorCode::OverrideUnknownName, "no variable named '" + key + "'", key);
        if (v->kind == VarKind::Calculated)
            throw EvalError(EvalErrorCode::OverrideUnknownName,
                            "'" + v->name + "' is calculated; only inputs and parameters can be set", v->name);
        std::size_t expected = v->is_repeating() ? model.find_entity(*v->scope.entity)->size() : 1;
        if (values.size() != expected)
            throw EvalError(EvalErrorCode::OverrideShapeMismatch,
                            "'" + v->name + "' takes " + std::to_string(expected) + " value(s), got " +
                                std::to_string(values.size()),
                            v->name);
        table.overrides[v->name] = values;
    }

    Evaluation eval(vm, table);
    for (const auto& name : vm.topo_order) {
        const Variable& v = *model.find_variable(name);
        std::size_t count = v.is_repeating() ? model.find_entity(*v.scope.entity)->size() : 1;
        std::vector<double> out;
        if (v.definition) {
            out.reserve(count);
            for (std::size_t i = 0; i < count; ++i) out.push_back(eval.at(*v.definition, i, v));
        } else {
            auto it = table.overrides.find(v.name);
            out = it != table.overrides.end() ? it->second : v.values;
        }
        if (out.size() != count)
            throw std::logic_error("shape of '" + v.name + "' does not match its scope");
        table.values[v.name] = v.is_repeating() ? Value::vector(*v.scope.entity, std::move(out))
                                                : Value::scalar(out.front());
    }
    return table;
}

namespace {

std::string display(const Variable& v, double x) {
    if (v.format == NumberFormat::Percent) return grouped(x * 100.0, 2) + "%";
    return grouped(x, 2);
}

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_report(const ValidatedModel& vm, const ValueTable& table) {
    const Model& model = vm.model;
    std::ostringstream out;
    out << model.title << "\n\n";

    std::size_t label_width = 0;
    for (const auto& v : model.variables) label_width = std::max(label_width, v.name.size());
    for (const auto& e : model.entities) label_width = std::max(label_width, e.name.size());
    label_width += 2;

    out << "Scalars\n";
    for (const auto& v : model.variables) {
        if (v.is_repeating()) continue;
        out << "  " << pad_right(v.name, label_width) << pad_left(display(v, table.at(v.name).scalar_value()), 18)
            << "\n";
    }
    for (const auto& e : model.entities) {
        bool used = std::any_of(model.variables.begin(), model.variables.end(),
                                [&](const Variable& v) { return v.scope.entity == e.name; });
        if (!used) continue;
        std::vector<std::vector<std::string>> rows;
        std::size_t width = 0;
        for (const auto& l : e.instances) width = std::max(width, l.size());
        for (const auto& v : model.variables) {
            if (v.scope.entity != e.name) continue;
            std::vector<std::string> row{v.name};
            for (double x : table.at(v.name).values) {
                row.push_back(display(v, x));
                width = std::max(width, row.back().size());
            }
            rows.push_back(std::move(row));
        }
        width += 2;
        out << "\n" << pad_right(e.name, label_width + 2);
        for (const auto& l : e.instances) out << pad_left(l, width);
        out << "\n";
        for (const auto& row : rows) {
            out << "  " << pad_right(row[0], label_width);
            for (std::size_t i = 1; i < row.size(); ++i) out << pad_left(row[i], width);
            out << "\n";
        }
    }
    return out.str();
}

std::string to_json(const ValidatedModel& vm, const ValueTable& table) {
    using json = nlohmann::ordered_json;
    const Model& model = vm.model;
    json j;
    j["model"] = model.title;
    json scalars = json::object();
    for (const auto& v : model.variables)
        if (!v.is_repeating()) scalars[v.name] = table.at(v.name).scalar_value();
    j["scalars"] = std::move(scalars);
    json entities = json::array();
    for (const auto& e : model.entities) {
        json ej;
        ej["name"] = e.name;
        ej["instances"] = e.instances;
        json vars = json::object();
        for (const auto& v : model.variables)
            if (v.scope.entity == e.name) vars[v.name] = table.at(v.name).values;
        ej["variables"] = std::move(vars);
        entities.push_back(std::move(ej));
    }
    j["entities"] = std::move(entities);
    json ov = json::object();
    for (const auto& [name, values] : table.overrides) ov[name] = values;
    j["overrides"] = std::move(ov);
    return j.dump(2);
}

}  // namespace ssmi
