#include <random>

#include "doctest.h"
#include "ssmi/sheet_formula.hpp"

using namespace ssmi;
using namespace ssmi::sheet;

namespace {

Node parsed(const std::string& s) {
    auto n = parse(s);
    REQUIRE_MESSAGE(n.ok(), s);
    return *n;
}

Node random_node(std::mt19937& rng, int depth) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    if (depth == 0 || pick(0, 3) == 0) {
        switch (pick(0, 3)) {
            case 0: return Node::num(pick(0, 1000) / 8.0);
            case 1: return Node::cell(pick(1, 60), pick(1, 500));
            case 2: return Node::named("Name_" + std::to_string(pick(0, 9)));
            default: {
                Node r = Node::cell(pick(1, 30), pick(1, 40));
                r.from.abs_column = pick(0, 1);
                r.from.abs_row = pick(0, 1);
                return r;
            }
        }
    }
    switch (pick(0, 6)) {
        case 0: return Node::neg(random_node(rng, depth - 1));
        case 1: {
            std::vector<Node> args{Node::rows(pick(1, 20), pick(20, 30))};
            return Node::call("SUM", std::move(args));
        }
        case 2: {
            std::vector<Node> args{random_node(rng, depth - 1), Node::named("Flows")};
            return Node::call("NPV", std::move(args));
        }
        default: {
            const BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow};
            return Node::binary(ops[pick(0, 4)], random_node(rng, depth - 1), random_node(rng, depth - 1));
        }
    }
}

}  // namespace

TEST_CASE("parse shapes") {
    CHECK(parsed("=B3*B4^-B5") ==
          Node::binary(BinaryOp::Mul, Node::cell(2, 3),
                       Node::binary(BinaryOp::Pow, Node::cell(2, 4), Node::neg(Node::cell(2, 5)))));
    CHECK(parsed("SUM(9:9)") == Node::call("SUM", {Node::rows(9, 9)}));
    CHECK(parsed("=SUM(B13:B14)") == Node::call("SUM", {Node::range({2, 13}, {2, 14})}));
    CHECK(parsed("=Total_Demand") == Node::named("Total_Demand"));
    CHECK(parsed("=2+2") == Node::binary(BinaryOp::Add, Node::num(2), Node::num(2)));

    Node abs = parsed("=$B$4");
    CHECK(abs.kind == Node::Kind::CellRef);
    CHECK(abs.from.abs_column);
    CHECK(abs.from.abs_row);
}

TEST_CASE("operators are left-associative") {
    CHECK(parsed("2^3^2") ==
          Node::binary(BinaryOp::Pow, Node::binary(BinaryOp::Pow, Node::num(2), Node::num(3)), Node::num(2)));
    CHECK(parsed("A1-B1-C1") ==
          Node::binary(BinaryOp::Sub, Node::binary(BinaryOp::Sub, Node::cell(1, 1), Node::cell(2, 1)), Node::cell(3, 1)));
}

TEST_CASE("names versus cell references") {
    CHECK(parsed("XFD1").kind == Node::Kind::CellRef);
    CHECK(parsed("XFE1").kind == Node::Kind::Name);
    CHECK(parsed("Q1_Sales").kind == Node::Kind::Name);
    CHECK(parsed("Region").kind == Node::Kind::Name);
    CHECK(parsed("sum(A1)") == Node::call("SUM", {Node::cell(1, 1)}));
}

TEST_CASE("errors") {
    CHECK_FALSE(parse("=").ok());
    CHECK_FALSE(parse("=1+").ok());
    CHECK_FALSE(parse("=SUM(1").ok());
    CHECK_FALSE(parse("=MEDIAN(A1)").ok());
    CHECK_FALSE(parse("=A1 B1").ok());
    CHECK(parsed("=A0").kind == Node::Kind::Name);
}

TEST_CASE("print uses minimal parentheses") {
    CHECK(print(parsed("=(B3*B4)^-B5")) == "=(B3*B4)^-B5");
    CHECK(print(parsed("=B29-(B30-B31)")) == "=B29-(B30-B31)");
    CHECK(print(parsed("=(B29-B30)-B31")) == "=B29-B30-B31");
    CHECK(print(parsed("=2^(3^2)")) == "=2^(3^2)");
    CHECK(print(parsed("=NPV(0.05,Flows)+1")) == "=NPV(0.05,Flows)+1");
    CHECK(print(parsed("=$A$1+A$2")) == "=$A$1+A$2");
}

TEST_CASE("print then parse is the identity") {
    std::mt19937 rng(5);
    for (int i = 0; i < 2000; ++i) {
        Node n = random_node(rng, 4);
        std::string text = print(n);
        CAPTURE(text);
        auto back = parse(text);
        REQUIRE(back.ok());
        CHECK(*back == n);
    }
}

TEST_CASE("shift_columns moves only relative columns") {
    CHECK(print(shift_columns(parsed("=B5*B6"), 1)) == "=C5*C6");
    CHECK(print(shift_columns(parsed("=SUM(B13:B14)"), 2)) == "=SUM(D13:D14)");
    CHECK(print(shift_columns(parsed("=$B5+B$6"), 3)) == "=$B5+E$6");
    CHECK(print(shift_columns(parsed("=SUM(9:9)+Price"), 5)) == "=SUM(9:9)+Price");
    CHECK(print(shift_columns(parsed("=Z1"), 1)) == "=AA1");
}

TEST_CASE("function names") {
    CHECK(function_name(AggregateKind::Variance) == "VAR");
    CHECK(function_kind("VAR") == AggregateKind::Variance);
    CHECK(function_kind("STDEV") == AggregateKind::Stdev);
    CHECK_FALSE(function_kind("VARIANCE").has_value());
}
