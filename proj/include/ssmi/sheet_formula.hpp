#pragma once

// Formula language of generated cells: numbers, A1 references (with optional
// `$` markers), A1:B2 ranges, whole-row ranges such as 9:9, defined names,
// + - * / ^ (all left-associative), unary minus, and the functions
// SUM AVERAGE MIN MAX VAR STDEV NPV IRR.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssmi/model.hpp"
#include "ssmi/result.hpp"

namespace ssmi::sheet {

struct Ref {
    int column = 1;
    int row = 1;
    bool abs_column = false;
    bool abs_row = false;

    bool operator==(const Ref&) const = default;
};

struct Node {
    enum class Kind { Number, CellRef, Range, RowRange, Name, Neg, Binary, Call };

    Kind kind = Kind::Number;
    double number = 0.0;
    Ref from;           // CellRef, Range
    Ref to;             // Range
    int first_row = 0;  // RowRange
    int last_row = 0;
    std::string name;   // Name; Call: upper-case function name
    BinaryOp op = BinaryOp::Add;
    std::vector<Node> args;

    static Node num(double v);
    static Node cell(int column, int row);
    static Node range(Ref from, Ref to);
    static Node rows(int first, int last);
    static Node named(std::string name);
    static Node neg(Node child);
    static Node binary(BinaryOp op, Node l, Node r);
    static Node call(std::string fn, std::vector<Node> args);

    bool operator==(const Node&) const = default;
};

struct FormulaError {
    std::size_t position = 0;
    std::string message;
};

// Accepts the text with or without the leading '='.
Result<Node, FormulaError> parse(std::string_view formula);

// Text with leading '=' and minimal parentheses.
std::string print(const Node& node);

// What a spreadsheet copy does: relative column references move by `delta`.
Node shift_columns(const Node& node, int delta);

std::string_view function_name(AggregateKind kind);
std::optional<AggregateKind> function_kind(std::string_view upper_name);

}  // namespace ssmi::sheet
