#include "ssmi/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssmi/numbers.hpp"
#include "ssmi/sheet_formula.hpp"

namespace ssmi {

namespace {

using sheet::Node;

class Interpreter {
public:
    explicit Interpreter(const WorkbookDoc& doc) : doc_(doc) {}

    std::map<CellAddress, CellValue> run() {
        std::map<CellAddress, CellValue> out;
        for (const auto& s : doc_.sheets) {
            for (const auto& [key, cell] : s.cells) {
                if (cell.content.kind == CellContent::Kind::Empty) continue;
                out[{s.name, key.second, key.first}] = value_of(s, key.second, key.first);
            }
        }
        return out;
    }

private:
    enum class State { InProgress, Done };

    struct Slot {
        State state;
        CellValue value;
    };

    // Where the formula being evaluated lives.
    struct Site {
        const Sheet* sheet;
        int column;
        int row;
    };

    CellValue value_of(const Sheet& s, int column, int row) {
        const Cell* cell = s.find(column, row);
        if (!cell) return CellValue::empty();
        switch (cell->content.kind) {
            case CellContent::Kind::Empty: return CellValue::empty();
            case CellContent::Kind::Text: return CellValue::of_text(cell->content.text);
            case CellContent::Kind::Number: return CellValue::of(cell->content.number);
            case CellContent::Kind::Formula: break;
        }
        CellAddress addr{s.name, column, row};
        auto it = memo_.find(addr);
        if (it != memo_.end()) {
            if (it->second.state == State::InProgress)
                return CellValue::error("CircularReference", "circular reference through " + to_string(addr));
            return it->second.value;
        }
        memo_[addr] = {State::InProgress, {}};
        CellValue v;
        auto parsed = sheet::parse(cell->content.text);
        if (!parsed) {
            v = CellValue::error("BadFormula", to_string(addr) + ": " + parsed.error().message);
        } else {
            v = eval(*parsed, Site{&s, column, row});
            if (v.kind == CellValue::Kind::Empty) v = CellValue::of(0.0);
        }
        memo_[addr] = {State::Done, v};
        return v;
    }

    // Numeric view of a scalar operand: blank is 0, text is a type error.
    CellValue number(CellValue v) {
        if (v.kind == CellValue::Kind::Empty) return CellValue::of(0.0);
        if (v.kind == CellValue::Kind::Text)
            return CellValue::error("TypeMismatch", "text '" + v.text + "' used as a number");
        return v;
    }

    const Sheet* sheet_named(const std::string& name) const { return doc_.find_sheet(name); }

    // Last populated column of a row segment, 0 when the row is empty.
    int populated_end(const Sheet& s, const RowSegment& seg) const {
        int end = 0;
        for (const auto& [key, cell] : s.cells) {
            if (key.first != seg.row || key.second < seg.start_column) continue;
            if (seg.end_column && key.second > *seg.end_column) continue;
            if (cell.content.kind != CellContent::Kind::Empty) end = std::max(end, key.second);
        }
        return end;
    }

    CellValue resolve_name(const std::string& name, const Site& site) {
        const NamedRange* n = doc_.find_name(name);
        if (!n) return CellValue::error("UnknownName", "no defined name '" + name + "'");
        if (const auto* single = std::get_if<SingleCell>(&n->target)) {
            const Sheet* s = sheet_named(single->cell.sheet);
            if (!s) return CellValue::error("UnknownName", "'" + name + "' points at missing sheet");
            return value_of(*s, single->cell.column, single->cell.row);
        }
        const auto& seg = std::get<RowSegment>(n->target);
        const Sheet* s = sheet_named(seg.sheet);
        if (!s) return CellValue::error("UnknownName", "'" + name + "' points at missing sheet");
        int end = populated_end(*s, seg);
        if (site.column < seg.start_column || site.column > end) {
            return CellValue::error("ImplicitIntersectionMiss",
                                    "'" + name + "' used in column " + column_letters(site.column) + " but row " +
                                        std::to_string(seg.row) + " of " + seg.sheet + " is populated only in " +
                                        (end ? column_letters(seg.start_column) + ".." + column_letters(end)
                                             : std::string("no column")));
        }
        return value_of(*s, site.column, seg.row);
    }

    // Appends numeric cells; returns an error value if a cell holds one.
    std::optional<CellValue> collect_cells(const Sheet& s, int r1, int c1, int r2, int c2, std::vector<double>& out) {
        for (const auto& [key, cell] : s.cells) {
            if (key.first < r1 || key.first > r2 || key.second < c1 || key.second > c2) continue;
            CellValue v = value_of(s, key.second, key.first);
            if (v.is_error()) return v;
            if (v.is_number()) out.push_back(v.number);
        }
        return std::nullopt;
    }

    std::optional<CellValue> collect(const Node& arg, const Site& site, std::vector<double>& out) {
        switch (arg.kind) {
            case Node::Kind::Range:
                return collect_cells(*site.sheet, std::min(arg.from.row, arg.to.row),
                                     std::min(arg.from.column, arg.to.column), std::max(arg.from.row, arg.to.row),
                                     std::max(arg.from.column, arg.to.column), out);
            case Node::Kind::RowRange:
                return collect_cells(*site.sheet, arg.first_row, 1, arg.last_row, kMaxColumns, out);
            case Node::Kind::Name: {
                const NamedRange* n = doc_.find_name(arg.name);
                if (n && std::holds_alternative<RowSegment>(n->target)) {
                    const auto& seg = std::get<RowSegment>(n->target);
                    const Sheet* s = sheet_named(seg.sheet);
                    if (!s) return CellValue::error("UnknownName", "'" + arg.name + "' points at missing sheet");
                    return collect_cells(*s, seg.row, seg.start_column, seg.row,
                                         seg.end_column.value_or(kMaxColumns), out);
                }
                break;
            }
            default: break;
        }
        CellValue v = number(eval(arg, site));
        if (v.is_error()) return v;
        out.push_back(v.number);
        return std::nullopt;
    }

    CellValue call(const Node& n, const Site& site) {
        auto kind = *sheet::function_kind(n.name);
        std::optional<double> rate;
        std::size_t first = 0;
        if (kind == AggregateKind::Npv) {
            if (n.args.size() < 2) return CellValue::error("BadFormula", "NPV needs a rate and values");
            CellValue r = number(eval(n.args[0], site));
            if (r.is_error()) return r;
            rate = r.number;
            first = 1;
        }
        std::vector<double> values;
        for (std::size_t i = first; i < n.args.size(); ++i)
            if (auto err = collect(n.args[i], site, values)) return *err;
        if (kind == AggregateKind::Sum && values.empty()) return CellValue::of(0.0);
        try {
            double out = apply_aggregate(kind, values, rate);
            if (!std::isfinite(out)) return CellValue::error("NonFiniteResult", n.name + " is not finite");
            return CellValue::of(out);
        } catch (const EvalError& e) {
            return CellValue::error(std::string(to_string(e.code())), e.what());
        }
    }

    CellValue eval(const Node& n, const Site& site) {
        switch (n.kind) {
            case Node::Kind::Number: return CellValue::of(n.number);
            case Node::Kind::CellRef: {
                return value_of(*site.sheet, n.from.column, n.from.row);
            }
            case Node::Kind::Range:
            case Node::Kind::RowRange:
                return CellValue::error("RangeInScalarContext", "a range can only be passed to a function");
            case Node::Kind::Name: return resolve_name(n.name, site);
            case Node::Kind::Neg: {
                CellValue v = number(eval(n.args[0], site));
                if (v.is_error()) return v;
                return CellValue::of(-v.number);
            }
            case Node::Kind::Binary: {
                CellValue l = number(eval(n.args[0], site));
                if (l.is_error()) return l;
                CellValue r = number(eval(n.args[1], site));
                if (r.is_error()) return r;
                double out = 0.0;
                switch (n.op) {
                    case BinaryOp::Add: out = l.number + r.number; break;
                    case BinaryOp::Sub: out = l.number - r.number; break;
                    case BinaryOp::Mul: out = l.number * r.number; break;
                    case BinaryOp::Div:
                        if (r.number == 0.0) return CellValue::error("DivisionByZero", "division by zero");
                        out = l.number / r.number;
                        break;
                    case BinaryOp::Pow: out = std::pow(l.number, r.number); break;
                }
                if (!std::isfinite(out)) return CellValue::error("NonFiniteResult", "result is not finite");
                return CellValue::of(out);
            }
            case Node::Kind::Call: return call(n, site);
        }
        return CellValue::empty();
    }

    const WorkbookDoc& doc_;
    std::map<CellAddress, Slot> memo_;
};

double relative_delta(double a, double b) {
    if (a == b) return 0.0;
    double scale = std::max(std::fabs(a), std::fabs(b));
    return std::fabs(a - b) / scale;
}

}  // namespace

std::map<CellAddress, CellValue> interpret(const WorkbookDoc& doc) { return Interpreter(doc).run(); }

const VariableCheck* RoundtripReport::find(const std::string& variable) const {
    for (const auto& c : checks)
        if (c.variable == variable) return &c;
    return nullptr;
}

RoundtripReport verify_roundtrip(const ValidatedModel& vm, const WorkbookDoc& doc, const Overrides& inputs) {
    ValueTable table = evaluate(vm, inputs);
    auto cells = interpret(doc);
    RoundtripReport report;
    report.pass = true;
    for (const auto& v : vm.model.variables) {
        VariableCheck check;
        check.variable = v.name;
        check.expected = table.at(v.name).values;
        auto dn = defined_name(v.name);
        const NamedRange* n = dn ? doc.find_name(*dn) : nullptr;
        std::vector<CellAddress> addrs;
        if (!n) {
            check.note = "no defined name in workbook";
        } else if (const auto* single = std::get_if<SingleCell>(&n->target)) {
            if (v.is_repeating())
                check.note = "named as a single cell but repeats";
            else
                addrs.push_back(single->cell);
        } else {
            const auto& seg = std::get<RowSegment>(n->target);
            if (!v.is_repeating()) {
                check.note = "named as a row but is single-valued";
            } else {
                for (std::size_t i = 0; i < check.expected.size(); ++i)
                    addrs.push_back({seg.sheet, seg.start_column + static_cast<int>(i), seg.row});
            }
        }
        check.ok = !addrs.empty();
        for (std::size_t i = 0; i < addrs.size(); ++i) {
            auto it = cells.find(addrs[i]);
            if (it == cells.end() || !it->second.is_number()) {
                check.actual.push_back(std::nullopt);
                check.ok = false;
                if (check.note.empty())
                    check.note = to_string(addrs[i]) + " is " +
                                 (it == cells.end() ? std::string("blank")
                                  : it->second.is_error() ? it->second.text + " (" + it->second.message + ")"
                                                          : "text '" + it->second.text + "'");
                continue;
            }
            double got = it->second.number;
            check.actual.push_back(got);
            double d = relative_delta(check.expected[i], got);
            check.max_relative_delta = std::max(check.max_relative_delta, d);
            if (!(d <= kRoundtripTolerance)) {
                check.ok = false;
                if (check.note.empty()) check.note = to_string(addrs[i]) + " differs";
            }
        }
        report.pass = report.pass && check.ok;
        report.checks.push_back(std::move(check));
    }
    return report;
}

std::string render(const RoundtripReport& report) {
    std::ostringstream out;
    for (const auto& c : report.checks) {
        out << (c.ok ? "ok   " : "FAIL ") << c.variable << "  max relative delta " << shortest_repr(c.max_relative_delta);
        if (!c.note.empty()) out << "  (" << c.note << ")";
        out << "\n";
    }
    out << (report.pass ? "PASS" : "FAIL") << ": " << report.checks.size() << " variables compared\n";
    return out.str();
}

}  // namespace ssmi
