#include "ssmi/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "ssmi/numbers.hpp"

namespace ssmi {

namespace {

enum class Tok { Word, Number, String, Symbol, Newline, End, Invalid };

struct Token {
    Tok kind;
    std::string text;  // word text, raw number text, decoded string, symbol char, or error message
    SourceSpan span;
    double number = 0.0;
};

const std::set<std::string, std::less<>> kKeywords = {"model", "entity", "input", "param",
                                                      "calc",  "output", "over"};

bool is_keyword(std::string_view w) { return kKeywords.count(w) > 0; }

bool is_word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                out.push_back({Tok::Newline, "\n", span(1)});
                advance();
                line_++;
                col_ = 1;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (is_word_start(c)) {
                out.push_back(word());
            } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
                out.push_back(number());
            } else if (c == '"') {
                out.push_back(string_literal());
            } else if (std::string_view("=[],:()+-*/^").find(c) != std::string_view::npos) {
                out.push_back({Tok::Symbol, std::string(1, c), span(1)});
                advance();
            } else {
                std::string shown = std::isprint(static_cast<unsigned char>(c))
                                        ? std::string("'") + c + "'"
                                        : "byte 0x" + hex(static_cast<unsigned char>(c));
                out.push_back({Tok::Invalid, "unexpected character " + shown, span(1)});
                advance();
            }
        }
        out.push_back({Tok::End, "", span(0)});
        return out;
    }

private:
    static std::string hex(unsigned v) {
        const char* digits = "0123456789abcdef";
        return {digits[v >> 4], digits[v & 15]};
    }

    SourceSpan span(int length) const { return {line_, col_, length}; }
    void advance() {
        ++pos_;
        ++col_;
    }

    Token word() {
        SourceSpan s = span(0);
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_word_char(src_[pos_])) advance();
        s.length = static_cast<int>(pos_ - start);
        return {Tok::Word, std::string(src_.substr(start, pos_ - start)), s};
    }

    Token number() {
        SourceSpan s = span(0);
        std::size_t start = pos_;
        while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '_' || src_[pos_] == '.')) advance();
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && is_digit(src_[look])) {
                while (pos_ < look) advance();
                while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
            }
        }
        if (pos_ < src_.size() && src_[pos_] == '%') advance();
        bool trailing_junk = false;
        while (pos_ < src_.size() && (is_word_char(src_[pos_]) || src_[pos_] == '.')) {
            trailing_junk = true;
            advance();
        }
        std::string raw(src_.substr(start, pos_ - start));
        s.length = static_cast<int>(raw.size());
        auto value = trailing_junk ? std::nullopt : parse_decimal(raw);
        if (!value) return {Tok::Invalid, "malformed number '" + raw + "'", s};
        Token t{Tok::Number, raw, s};
        t.number = *value;
        return t;
    }

    Token string_literal() {
        SourceSpan s = span(0);
        std::size_t start = pos_;
        advance();
        std::string text;
        while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '"' || src_[pos_ + 1] == '\\')) {
                advance();
            }
            text.push_back(src_[pos_]);
            advance();
        }
        if (pos_ >= src_.size() || src_[pos_] != '"') {
            s.length = static_cast<int>(pos_ - start);
            return {Tok::Invalid, "unterminated string", s};
        }
        advance();
        s.length = static_cast<int>(pos_ - start);
        return {Tok::String, text, s};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct LineError {
    ParseError error;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::Word: return "'" + t.text + "'";
        case Tok::Number: return "number '" + t.text + "'";
        case Tok::String: return "string";
        case Tok::Symbol: return "'" + t.text + "'";
        case Tok::Newline: return "end of line";
        case Tok::End: return "end of input";
        case Tok::Invalid: return t.text;
    }
    return "token";
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Result<Model, ParseErrors> model() {
        Model m;
        skip_newlines();
        if (!(peek().kind == Tok::Word && peek().text == "model")) {
            errors_.push_back({peek().span, "expected 'model'", "'model'"});
            return errors_;
        }
        guarded([&] {
            next();
            const Token& title = expect(Tok::String, "model title string");
            m.title = title.text;
            end_of_decl();
        });
        while (true) {
            skip_newlines();
            if (peek().kind == Tok::End) break;
            guarded([&] { declaration(m); });
        }
        if (!errors_.empty()) return errors_;
        return m;
    }

    Result<Expr, ParseError> standalone_expr() {
        try {
            Expr e = expr();
            if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()) + " after expression");
            return e;
        } catch (const LineError& le) {
            return le.error;
        }
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool at_symbol(char c) const { return peek().kind == Tok::Symbol && peek().text[0] == c; }
    bool at_keyword(std::string_view k) const { return peek().kind == Tok::Word && peek().text == k; }

    [[noreturn]] void fail(const Token& at, std::string message, std::optional<std::string> expected = {}) {
        if (at.kind == Tok::Invalid) throw LineError{{at.span, at.text, std::nullopt}};
        throw LineError{{at.span, std::move(message), std::move(expected)}};
    }

    const Token& expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail(peek(), "expected " + what + ", found " + describe(peek()), what);
        return next();
    }

    void expect_symbol(char c) {
        std::string what = std::string("'") + c + "'";
        if (!at_symbol(c)) fail(peek(), "expected " + what + ", found " + describe(peek()), what);
        next();
    }

    void skip_newlines() {
        while (peek().kind == Tok::Newline) next();
    }

    void end_of_decl() {
        if (at_symbol(')')) fail(peek(), "unbalanced parentheses: unexpected ')'");
        if (peek().kind != Tok::Newline && peek().kind != Tok::End)
            fail(peek(), "unexpected " + describe(peek()) + ", expected end of line", "end of line");
    }

    template <typename F>
    void guarded(F&& body) {
        try {
            body();
        } catch (const LineError& le) {
            errors_.push_back(le.error);
            while (peek().kind != Tok::Newline && peek().kind != Tok::End) next();
        }
    }

    // One or more non-keyword words joined by single spaces.
    std::pair<std::string, SourceSpan> name(const std::string& what) {
        if (peek().kind != Tok::Word || is_keyword(peek().text))
            fail(peek(), "expected " + what + ", found " + describe(peek()), what);
        SourceSpan s = peek().span;
        std::string out;
        int end_col = s.column;
        while (peek().kind == Tok::Word && !is_keyword(peek().text) && peek().span.line == s.line) {
            if (!out.empty()) out += ' ';
            out += peek().text;
            end_col = peek().span.column + peek().span.length;
            next();
        }
        s.length = end_col - s.column;
        return {out, s};
    }

    void declare(const std::string& n, const SourceSpan& at, const std::string& what) {
        if (!declared_.insert(n).second)
            throw LineError{{at, "duplicate declaration of '" + n + "' (" + what + ")", std::nullopt}};
    }

    void declaration(Model& m) {
        const Token& kw = peek();
        if (kw.kind != Tok::Word) fail(kw, "expected a declaration keyword, found " + describe(kw), "declaration");
        if (kw.text == "entity") {
            entity(m);
        } else if (kw.text == "input" || kw.text == "param" || kw.text == "calc" || kw.text == "output") {
            variable(m);
        } else if (kw.text == "model") {
            fail(kw, "duplicate 'model' header");
        } else {
            fail(kw, "unknown keyword '" + kw.text + "'", "entity, input, param, calc or output");
        }
        end_of_decl();
    }

    std::string label() {
        if (peek().kind == Tok::String) return next().text;
        if (peek().kind == Tok::Number) return next().text;
        return name("instance label").first;
    }

    void entity(Model& m) {
        next();
        auto [n, s] = name("entity name");
        EntityDef e{n, {}, s};
        expect_symbol('=');
        expect_symbol('[');
        std::set<std::string> seen;
        do {
            const Token& at = peek();
            std::string l = label();
            if (!seen.insert(l).second) fail(at, "duplicate instance label '" + l + "'");
            e.instances.push_back(l);
        } while (at_symbol(',') && (next(), true));
        expect_symbol(']');
        declare(n, s, "entity");
        m.entities.push_back(std::move(e));
    }

    double signed_number() {
        bool negative = false;
        if (at_symbol('-')) {
            next();
            negative = true;
        }
        double v = expect(Tok::Number, "number").number;
        return negative ? -v : v;
    }

    NumberFormat format() {
        next();
        const Token& t = peek();
        if (t.kind == Tok::Word) {
            if (t.text == "currency") return next(), NumberFormat::Currency;
            if (t.text == "percent") return next(), NumberFormat::Percent;
            if (t.text == "count") return next(), NumberFormat::Count;
        }
        fail(t, "unknown format " + describe(t), "currency, percent or count");
    }

    void variable(Model& m) {
        std::string kw = next().text;
        auto [n, s] = name("variable name");
        Variable v;
        v.name = n;
        v.span = s;
        if (kw == "input") v.kind = VarKind::Input;
        if (kw == "param") v.kind = VarKind::Parameter;
        if (kw == "calc" || kw == "output") v.kind = VarKind::Calculated;
        v.is_output = kw == "output";
        if (at_symbol(':')) v.format = format();
        if (at_keyword("over")) {
            next();
            v.scope = Scope::repeating(name("entity name").first);
        }
        expect_symbol('=');
        if (v.kind == VarKind::Calculated) {
            v.definition = expr();
        } else if (at_symbol('[')) {
            const Token& open = next();
            do {
                v.values.push_back(signed_number());
            } while (at_symbol(',') && (next(), true));
            expect_symbol(']');
            v.list_literal = true;
            if (v.scope.is_scalar())
                fail(open, "a list of values needs 'over <entity>' on '" + n + "'", "'over'");
        } else {
            v.values.push_back(signed_number());
        }
        declare(n, s, std::string(to_string(v.kind)));
        m.variables.push_back(std::move(v));
    }

    // expr := term (('+'|'-') term)*
    Expr expr() {
        Expr left = term();
        while (at_symbol('+') || at_symbol('-')) {
            BinaryOp op = next().text[0] == '+' ? BinaryOp::Add : BinaryOp::Sub;
            left = Expr::binary(op, std::move(left), term());
        }
        return left;
    }

    // term := power (('*'|'/') power)*
    Expr term() {
        Expr left = power();
        while (at_symbol('*') || at_symbol('/')) {
            BinaryOp op = next().text[0] == '*' ? BinaryOp::Mul : BinaryOp::Div;
            left = Expr::binary(op, std::move(left), power());
        }
        return left;
    }

    // power := unary ('^' power)?   right-associative
    Expr power() {
        Expr base = unary();
        if (at_symbol('^')) {
            next();
            return Expr::binary(BinaryOp::Pow, std::move(base), power());
        }
        return base;
    }

    Expr unary() {
        if (at_symbol('-')) {
            next();
            return Expr::neg(unary());
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            next();
            return Expr::num(t.number);
        }
        if (at_symbol('(')) {
            next();
            Expr inner = expr();
            if (!at_symbol(')')) fail(peek(), "unbalanced parentheses: expected ')', found " + describe(peek()), "')'");
            next();
            return inner;
        }
        if (t.kind == Tok::Word && !is_keyword(t.text)) {
            if (peek(1).kind == Tok::Symbol && peek(1).text == "(") return call();
            auto [n, s] = name("variable name");
            if (at_symbol('(')) fail(peek(), "unexpected '(' after '" + n + "'");
            return Expr::ref(n);
        }
        if (t.kind == Tok::Symbol && t.text == ")") fail(t, "unbalanced parentheses: unexpected ')'");
        fail(t, "expected an operand, found " + describe(t), "number, name or '('");
    }

    Expr call() {
        const Token& fn = next();
        auto kind = aggregate_from_name(fn.text);
        if (!kind) fail(fn, "unknown function '" + fn.text + "'", "SUM, AVERAGE, MIN, MAX, VARIANCE, STDEV, NPV or IRR");
        next();  // '('
        std::optional<Expr> rate;
        if (*kind == AggregateKind::Npv) {
            rate = expr();
            expect_symbol(',');
        }
        const Token& arg_start = peek();
        if (arg_start.kind != Tok::Word || is_keyword(arg_start.text))
            fail(arg_start, "aggregate argument must be a variable name", "variable name");
        auto [arg, s] = name("variable name");
        if (!at_symbol(')')) {
            if (peek().kind == Tok::End || peek().kind == Tok::Newline)
                fail(peek(), "unbalanced parentheses: expected ')'", "')'");
            fail(arg_start, "aggregate argument must be a variable name", "variable name");
        }
        next();
        return Expr::agg(*kind, arg, std::move(rate));
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParseErrors errors_;
    std::set<std::string> declared_;
};

bool plain_words(const std::string& s) {
    if (s.empty()) return false;
    std::istringstream in(s);
    std::string w, rebuilt;
    while (in >> w) {
        if (!is_word_start(w[0]) || is_keyword(w)) return false;
        for (char c : w)
            if (!is_word_char(c)) return false;
        if (!rebuilt.empty()) rebuilt += ' ';
        rebuilt += w;
    }
    return rebuilt == s;
}

bool plain_number(const std::string& s) {
    return !s.empty() && (is_digit(s[0]) || s[0] == '.') && parse_decimal(s).has_value() &&
           std::all_of(s.begin(), s.end(), [](char c) { return is_word_char(c) || c == '.' || c == '%' || c == '+' || c == '-'; });
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Result<Model, ParseErrors> parse_model(std::string_view source) {
    return Parser(Lexer(source).run()).model();
}

Result<Expr, ParseError> parse_expr(std::string_view source) {
    auto toks = Lexer(source).run();
    for (const auto& t : toks) {
        if (t.kind == Tok::Newline) return ParseError{t.span, "expression must fit on one line", std::nullopt};
    }
    return Parser(std::move(toks)).standalone_expr();
}

std::string print_model(const Model& model) {
    std::ostringstream out;
    out << "model " << quoted(model.title) << "\n";
    for (const auto& e : model.entities) {
        out << "entity " << e.name << " = [";
        for (std::size_t i = 0; i < e.instances.size(); ++i) {
            const auto& l = e.instances[i];
            out << (i ? ", " : "") << (plain_words(l) || plain_number(l) ? l : quoted(l));
        }
        out << "]\n";
    }
    for (const auto& v : model.variables) {
        if (v.kind == VarKind::Calculated)
            out << (v.is_output ? "output" : "calc");
        else
            out << to_string(v.kind);
        out << " " << v.name;
        if (v.format != NumberFormat::None) out << " : " << to_string(v.format);
        if (v.scope.entity) out << " over " << *v.scope.entity;
        out << " = ";
        if (v.definition) {
            out << to_source(*v.definition);
        } else if (v.list_literal) {
            out << "[";
            for (std::size_t i = 0; i < v.values.size(); ++i) out << (i ? ", " : "") << shortest_repr(v.values[i]);
            out << "]";
        } else if (!v.values.empty()) {
            out << shortest_repr(v.values.front());
        }
        out << "\n";
    }
    return out.str();
}

std::string render(const ParseError& error) {
    std::ostringstream out;
    out << "ERROR ParseError at " << error.span.line << ":" << error.span.column << " — " << error.message;
    return out.str();
}

}  // namespace ssmi
