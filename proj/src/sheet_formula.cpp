#include "ssmi/sheet_formula.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "ssmi/numbers.hpp"
#include "ssmi/workbook.hpp"

namespace ssmi::sheet {

Node Node::num(double v) {
    Node n;
    n.kind = Kind::Number;
    n.number = v;
    return n;
}

Node Node::cell(int column, int row) {
    Node n;
    n.kind = Kind::CellRef;
    n.from = {column, row, false, false};
    return n;
}

Node Node::range(Ref from, Ref to) {
    Node n;
    n.kind = Kind::Range;
    n.from = from;
    n.to = to;
    return n;
}

Node Node::rows(int first, int last) {
    Node n;
    n.kind = Kind::RowRange;
    n.first_row = first;
    n.last_row = last;
    return n;
}

Node Node::named(std::string name) {
    Node n;
    n.kind = Kind::Name;
    n.name = std::move(name);
    return n;
}

Node Node::neg(Node child) {
    Node n;
    n.kind = Kind::Neg;
    n.args.push_back(std::move(child));
    return n;
}

Node Node::binary(BinaryOp op, Node l, Node r) {
    Node n;
    n.kind = Kind::Binary;
    n.op = op;
    n.args.push_back(std::move(l));
    n.args.push_back(std::move(r));
    return n;
}

Node Node::call(std::string fn, std::vector<Node> args) {
    Node n;
    n.kind = Kind::Call;
    n.name = std::move(fn);
    n.args = std::move(args);
    return n;
}

std::string_view function_name(AggregateKind kind) {
    switch (kind) {
        case AggregateKind::Sum: return "SUM";
        case AggregateKind::Average: return "AVERAGE";
        case AggregateKind::Min: return "MIN";
        case AggregateKind::Max: return "MAX";
        case AggregateKind::Variance: return "VAR";
        case AggregateKind::Stdev: return "STDEV";
        case AggregateKind::Npv: return "NPV";
        case AggregateKind::Irr: return "IRR";
    }
    return "?";
}

std::optional<AggregateKind> function_kind(std::string_view upper_name) {
    for (auto k : {AggregateKind::Sum, AggregateKind::Average, AggregateKind::Min, AggregateKind::Max,
                   AggregateKind::Variance, AggregateKind::Stdev, AggregateKind::Npv, AggregateKind::Irr}) {
        if (function_name(k) == upper_name) return k;
    }
    return std::nullopt;
}

namespace {

struct Failure {
    FormulaError error;
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

// "$B$4", "b4" -> Ref; nullopt if not a cell reference.
std::optional<Ref> as_cell_ref(std::string_view s) {
    Ref r;
    std::size_t i = 0;
    if (i < s.size() && s[i] == '$') {
        r.abs_column = true;
        ++i;
    }
    std::size_t letters = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    if (i == letters || i - letters > 3) return std::nullopt;
    auto col = column_number(upper(std::string(s.substr(letters, i - letters))));
    if (!col) return std::nullopt;
    if (i < s.size() && s[i] == '$') {
        r.abs_row = true;
        ++i;
    }
    std::size_t digits = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits || i != s.size() || i - digits > 7) return std::nullopt;
    int row = std::stoi(std::string(s.substr(digits)));
    if (row < 1 || row > kMaxRows) return std::nullopt;
    r.column = *col;
    r.row = row;
    return r;
}

class FormulaParser {
public:
    explicit FormulaParser(std::string_view src) : src_(src) {}

    Node run() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '=') ++pos_;
        Node n = expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(std::string message) { throw Failure{{pos_, std::move(message)}}; }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek_char() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Node expr() {
        Node left = term();
        while (true) {
            char c = peek_char();
            if (c != '+' && c != '-') return left;
            ++pos_;
            left = Node::binary(c == '+' ? BinaryOp::Add : BinaryOp::Sub, std::move(left), term());
        }
    }

    Node term() {
        Node left = power();
        while (true) {
            char c = peek_char();
            if (c != '*' && c != '/') return left;
            ++pos_;
            left = Node::binary(c == '*' ? BinaryOp::Mul : BinaryOp::Div, std::move(left), power());
        }
    }

    Node power() {
        Node left = unary();
        while (eat('^')) left = Node::binary(BinaryOp::Pow, std::move(left), unary());
        return left;
    }

    Node unary() {
        if (eat('-')) return Node::neg(unary());
        if (eat('+')) return unary();
        return primary();
    }

    int row_number(std::string_view digits) {
        if (digits.empty() || digits.size() > 7) fail("bad row number");
        int row = std::stoi(std::string(digits));
        if (row < 1 || row > kMaxRows) fail("row out of range");
        return row;
    }

    // After "9" with ':' next: whole-row range "9:12", "$9:$9".
    Node row_range(int first) {
        ++pos_;  // ':'
        if (pos_ < src_.size() && src_[pos_] == '$') ++pos_;
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        int last = row_number(src_.substr(start, pos_ - start));
        if (last < first) std::swap(first, last);
        return Node::rows(first, last);
    }

    Node primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("expected an operand");
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Node inner = expr();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        if (c == '$' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            ++pos_;
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            int first = row_number(src_.substr(start, pos_ - start));
            if (pos_ >= src_.size() || src_[pos_] != ':') fail("expected ':' in row range");
            return row_range(first);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number_or_rows();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') return word();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Node number_or_rows() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == ':' && pos_ > start)
            return row_range(row_number(src_.substr(start, pos_ - start)));
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string_view text = src_.substr(start, pos_ - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
            pos_ = start;
            fail("malformed number");
        }
        return Node::num(v);
    }

    Node word() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        std::string_view w = src_.substr(start, pos_ - start);
        if (auto ref = as_cell_ref(w)) {
            if (pos_ < src_.size() && src_[pos_] == ':') {
                ++pos_;
                std::size_t s2 = pos_;
                while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
                auto to = as_cell_ref(src_.substr(s2, pos_ - s2));
                if (!to) fail("expected a cell reference after ':'");
                return Node::range(*ref, *to);
            }
            Node n = Node::cell(ref->column, ref->row);
            n.from = *ref;
            return n;
        }
        if (w.find('$') != std::string_view::npos) {
            pos_ = start;
            fail("malformed reference '" + std::string(w) + "'");
        }
        if (peek_char() == '(') {
            std::string fn = upper(std::string(w));
            if (!function_kind(fn)) {
                pos_ = start;
                fail("unknown function '" + std::string(w) + "'");
            }
            ++pos_;
            std::vector<Node> args;
            if (!eat(')')) {
                do {
                    args.push_back(expr());
                } while (eat(','));
                if (!eat(')')) fail("expected ')' or ','");
            }
            return Node::call(fn, std::move(args));
        }
        return Node::named(std::string(w));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Binary:
            switch (n.op) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 3;
            }
            return 0;
        case Node::Kind::Neg: return 4;
        default: return 5;
    }
}

std::string ref_text(const Ref& r) {
    return (r.abs_column ? "$" : "") + column_letters(r.column) + (r.abs_row ? "$" : "") + std::to_string(r.row);
}

std::string text(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Number: return shortest_repr(n.number);
        case Node::Kind::CellRef: return ref_text(n.from);
        case Node::Kind::Range: return ref_text(n.from) + ":" + ref_text(n.to);
        case Node::Kind::RowRange: return std::to_string(n.first_row) + ":" + std::to_string(n.last_row);
        case Node::Kind::Name: return n.name;
        case Node::Kind::Neg: {
            std::string child = text(n.args[0]);
            if (n.args[0].kind == Node::Kind::Binary) child = "(" + child + ")";
            return "-" + child;
        }
        case Node::Kind::Binary: {
            int p = precedence(n);
            std::string l = text(n.args[0]);
            std::string r = text(n.args[1]);
            if (precedence(n.args[0]) < p) l = "(" + l + ")";
            if (precedence(n.args[1]) <= p) r = "(" + r + ")";
            return l + op_symbol(n.op) + r;
        }
        case Node::Kind::Call: {
            std::string out = n.name + "(";
            for (std::size_t i = 0; i < n.args.size(); ++i) out += (i ? "," : "") + text(n.args[i]);
            return out + ")";
        }
    }
    return {};
}

}  // namespace

Result<Node, FormulaError> parse(std::string_view formula) {
    try {
        return FormulaParser(formula).run();
    } catch (const Failure& f) {
        return f.error;
    }
}

std::string print(const Node& node) { return "=" + text(node); }

Node shift_columns(const Node& node, int delta) {
    Node out = node;
    if ((out.kind == Node::Kind::CellRef || out.kind == Node::Kind::Range) && !out.from.abs_column)
        out.from.column += delta;
    if (out.kind == Node::Kind::Range && !out.to.abs_column) out.to.column += delta;
    for (auto& a : out.args) a = shift_columns(a, delta);
    return out;
}

}  // namespace ssmi::sheet
