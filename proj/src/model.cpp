#include "ssmi/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "ssmi/numbers.hpp"

namespace ssmi {

std::string to_string(const Scope& scope) {
    return scope.is_scalar() ? "scalar" : "over " + *scope.entity;
}

namespace {

struct AggregateSpelling {
    AggregateKind kind;
    std::string_view name;
};

constexpr AggregateSpelling kAggregates[] = {
    {AggregateKind::Sum, "SUM"},           {AggregateKind::Average, "AVERAGE"},
    {AggregateKind::Min, "MIN"},           {AggregateKind::Max, "MAX"},
    {AggregateKind::Variance, "VARIANCE"}, {AggregateKind::Stdev, "STDEV"},
    {AggregateKind::Npv, "NPV"},           {AggregateKind::Irr, "IRR"},
};

}  // namespace

std::string_view aggregate_name(AggregateKind kind) {
    for (const auto& a : kAggregates)
        if (a.kind == kind) return a.name;
    return "?";
}

std::optional<AggregateKind> aggregate_from_name(std::string_view name) {
    for (const auto& a : kAggregates)
        if (a.name == name) return a.kind;
    return std::nullopt;
}

char op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
        case BinaryOp::Pow: return '^';
    }
    return '?';
}

Expr Expr::num(double v) {
    Expr e;
    e.kind = Kind::Number;
    e.number = v;
    return e;
}

Expr Expr::ref(std::string name) {
    Expr e;
    e.kind = Kind::Ref;
    e.name = std::move(name);
    return e;
}

Expr Expr::neg(Expr child) {
    Expr e;
    e.kind = Kind::Neg;
    e.args.push_back(std::move(child));
    return e;
}

Expr Expr::binary(BinaryOp op, Expr left, Expr right) {
    Expr e;
    e.kind = Kind::Binary;
    e.op = op;
    e.args.push_back(std::move(left));
    e.args.push_back(std::move(right));
    return e;
}

Expr Expr::agg(AggregateKind kind, std::string arg, std::optional<Expr> rate) {
    Expr e;
    e.kind = Kind::Aggregate;
    e.aggregate = kind;
    e.name = std::move(arg);
    if (rate) e.args.push_back(std::move(*rate));
    return e;
}

std::string_view to_string(VarKind kind) {
    switch (kind) {
        case VarKind::Input: return "input";
        case VarKind::Parameter: return "param";
        case VarKind::Calculated: return "calc";
    }
    return "?";
}

std::string_view to_string(NumberFormat fmt) {
    switch (fmt) {
        case NumberFormat::None: return "none";
        case NumberFormat::Currency: return "currency";
        case NumberFormat::Percent: return "percent";
        case NumberFormat::Count: return "count";
    }
    return "?";
}

const Variable* Model::find_variable(std::string_view name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

const EntityDef* Model::find_entity(std::string_view name) const {
    for (const auto& e : entities)
        if (e.name == name) return &e;
    return nullptr;
}

std::optional<std::size_t> Model::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return i;
    return std::nullopt;
}

namespace {

void collect_free_vars(const Expr& e, std::vector<std::string>& out) {
    auto add = [&out](const std::string& n) {
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    };
    switch (e.kind) {
        case Expr::Kind::Number: return;
        case Expr::Kind::Ref: add(e.name); return;
        case Expr::Kind::Aggregate:
            // NPV(rate, Name): the rate is written first
            for (const auto& a : e.args) collect_free_vars(a, out);
            add(e.name);
            return;
        default:
            for (const auto& a : e.args) collect_free_vars(a, out);
    }
}

}  // namespace

std::vector<std::string> free_vars(const Expr& expr) {
    std::vector<std::string> out;
    collect_free_vars(expr, out);
    return out;
}

int operator_count(const Expr& expr) {
    int n = (expr.kind == Expr::Kind::Binary || expr.kind == Expr::Kind::Aggregate) ? 1 : 0;
    for (const auto& a : expr.args) n += operator_count(a);
    return n;
}

std::string_view to_string(ScopeErrorCode code) {
    switch (code) {
        case ScopeErrorCode::UnknownVariable: return "UnknownVariable";
        case ScopeErrorCode::MixedEntities: return "MixedEntities";
        case ScopeErrorCode::AggregateOfScalar: return "AggregateOfScalar";
        case ScopeErrorCode::NonScalarRate: return "NonScalarRate";
    }
    return "?";
}

namespace {

using ScopeResult = Result<Scope, ScopeError>;

ScopeResult combine(const Scope& a, const Scope& b) {
    if (a.is_scalar()) return b;
    if (b.is_scalar() || a == b) return a;
    return ScopeError{ScopeErrorCode::MixedEntities,
                      "expression mixes entities " + *a.entity + " and " + *b.entity};
}

ScopeResult infer(const Expr& e, const ScopeLookup& lookup) {
    switch (e.kind) {
        case Expr::Kind::Number: return Scope::scalar();
        case Expr::Kind::Ref: {
            auto s = lookup(e.name);
            if (!s) return ScopeError{ScopeErrorCode::UnknownVariable, "unknown variable '" + e.name + "'"};
            return *s;
        }
        case Expr::Kind::Neg: return infer(e.args[0], lookup);
        case Expr::Kind::Binary: {
            auto l = infer(e.args[0], lookup);
            if (!l) return l;
            auto r = infer(e.args[1], lookup);
            if (!r) return r;
            return combine(*l, *r);
        }
        case Expr::Kind::Aggregate: {
            for (const auto& rate : e.args) {
                auto rs = infer(rate, lookup);
                if (!rs) return rs;
                if (!rs->is_scalar())
                    return ScopeError{ScopeErrorCode::NonScalarRate,
                                      std::string(aggregate_name(e.aggregate)) + " rate must be a single value"};
            }
            auto s = lookup(e.name);
            if (!s) return ScopeError{ScopeErrorCode::UnknownVariable, "unknown variable '" + e.name + "'"};
            if (s->is_scalar())
                return ScopeError{ScopeErrorCode::AggregateOfScalar,
                                  std::string(aggregate_name(e.aggregate)) + " applied to single-valued '" +
                                      e.name + "'"};
            return Scope::scalar();
        }
    }
    return Scope::scalar();
}

}  // namespace

Result<Scope, ScopeError> infer_scope(const Expr& expr, const ScopeLookup& lookup) { return infer(expr, lookup); }

Result<Scope, ScopeError> infer_scope(const Expr& expr, const std::map<std::string, Scope>& env) {
    return infer(expr, [&env](const std::string& n) -> std::optional<Scope> {
        auto it = env.find(n);
        if (it == env.end()) return std::nullopt;
        return it->second;
    });
}

namespace {

bool looks_like_cell_reference(std::string_view name) {
    std::size_t i = 0;
    while (i < name.size() && std::isalpha(static_cast<unsigned char>(name[i]))) ++i;
    if (i == 0 || i > 3 || i == name.size()) return false;
    long col = 0;
    for (std::size_t k = 0; k < i; ++k) col = col * 26 + (std::toupper(static_cast<unsigned char>(name[k])) - 'A' + 1);
    if (col > 16384) return false;
    std::string_view digits = name.substr(i);
    if (digits.size() > 7) return false;
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    long row = std::stol(std::string(digits));
    return row >= 1 && row <= 1048576;
}

}  // namespace

Result<std::string, InvalidLabel> defined_name(std::string_view label) {
    std::string out;
    bool pending_sep = false;
    for (char c : label) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) out.push_back('_');
        pending_sep = false;
        out.push_back(c);
    }
    if (out.empty()) return InvalidLabel{"empty label"};
    if (!std::isalpha(static_cast<unsigned char>(out[0])) && out[0] != '_')
        return InvalidLabel{"defined name '" + out + "' must start with a letter"};
    for (char c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
            return InvalidLabel{"defined name '" + out + "' contains '" + std::string(1, c) + "'"};
    }
    if (out.size() > 255) return InvalidLabel{"defined name longer than 255 characters"};
    if (looks_like_cell_reference(out))
        return InvalidLabel{"defined name '" + out + "' collides with a cell reference"};
    if (out == "R" || out == "C" || out == "r" || out == "c")
        return InvalidLabel{"defined name '" + out + "' is reserved"};
    return out;
}

namespace {

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            switch (e.op) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 3;
            }
            return 0;
        case Expr::Kind::Neg: return 4;
        default: return 5;
    }
}

std::string source(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Number: return shortest_repr(e.number);
        case Expr::Kind::Ref: return e.name;
        case Expr::Kind::Neg: {
            std::string child = source(e.args[0]);
            if (e.args[0].kind == Expr::Kind::Binary) child = "(" + child + ")";
            return "-" + child;
        }
        case Expr::Kind::Binary: {
            int p = precedence(e);
            bool right_assoc = e.op == BinaryOp::Pow;
            std::string l = source(e.args[0]);
            std::string r = source(e.args[1]);
            int lp = precedence(e.args[0]);
            int rp = precedence(e.args[1]);
            if (lp < p || (right_assoc && lp == p)) l = "(" + l + ")";
            if (rp < p || (!right_assoc && rp == p)) r = "(" + r + ")";
            return l + " " + op_symbol(e.op) + " " + r;
        }
        case Expr::Kind::Aggregate: {
            std::string out(aggregate_name(e.aggregate));
            out += "(";
            if (!e.args.empty()) out += source(e.args[0]) + ", ";
            return out + e.name + ")";
        }
    }
    return {};
}

}  // namespace

std::string to_source(const Expr& expr) { return source(expr); }

}  // namespace ssmi
