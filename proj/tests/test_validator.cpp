#include <algorithm>
#include <set>

#include "doctest.h"
#include "ssmi/evaluator.hpp"
#include "ssmi/validator.hpp"
#include "support.hpp"

using namespace ssmi;

namespace {

std::string replace_line(std::string text, const std::string& prefix, const std::string& line) {
    auto at = text.find(prefix);
    REQUIRE(at != std::string::npos);
    auto end = text.find('\n', at);
    return text.replace(at, end - at, line);
}

Diagnostics diagnostics_of(const std::string& text, ValidateOptions opts = {}) {
    auto vm = validate(support::parse_or_throw(text), opts);
    return vm ? vm->warnings : vm.error();
}

std::vector<std::string> codes(const Diagnostics& ds) {
    std::vector<std::string> out;
    for (const auto& d : ds) out.push_back(d.code);
    return out;
}

long count_code(const Diagnostics& ds, const std::string& code) {
    return std::count_if(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code; });
}

// No scalar variable reads a repeating value except through an aggregate.
bool scope_sound(const Expr& e, const std::map<std::string, Scope>& scopes) {
    switch (e.kind) {
        case Expr::Kind::Number: return true;
        case Expr::Kind::Ref: return scopes.at(e.name).is_scalar();
        case Expr::Kind::Aggregate: return e.args.empty() || scope_sound(e.args[0], scopes);
        default:
            return std::all_of(e.args.begin(), e.args.end(), [&](const Expr& a) { return scope_sound(a, scopes); });
    }
}

}  // namespace

TEST_CASE("build_graph on the fixture") {
    Model m = support::parse_or_throw(support::fixture_text());
    auto g = build_graph(m);
    REQUIRE(g.ok());
    // (user, used) pairs read off the definitions one by one.
    std::set<std::pair<std::string, std::string>> expected{
        {"Total Demand", "DemParA"},        {"Total Demand", "DemParB"},      {"Total Demand", "Price"},
        {"Regional Demand", "Total Demand"}, {"Regional Demand", "Distribution"},
        {"Revenue", "Regional Demand"},     {"Revenue", "Price"},
        {"Unit Cost", "Mfg Cost"},          {"Unit Cost", "Delivery Cost"},
        {"Variable Cost", "Regional Demand"}, {"Variable Cost", "Unit Cost"},
        {"Regional Fixed Cost", "Fixed Cost"}, {"Regional Fixed Cost", "Distribution"},
        {"Total Cost", "Regional Fixed Cost"}, {"Total Cost", "Variable Cost"},
        {"Profit", "Revenue"},              {"Profit", "Total Cost"},
        {"Total Profit", "Profit"}};
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& e : *g) got.insert({e.user, e.used});
    CHECK(got == expected);
    CHECK(g->size() == 18);
}

TEST_CASE("build_graph edge cases") {
    auto g = build_graph(support::parse_or_throw("model \"M\"\ninput A = 1\nparam B = 2\n"));
    REQUIRE(g.ok());
    CHECK(g->empty());

    auto bad = build_graph(support::parse_or_throw("model \"M\"\ninput Price = 1\ncalc R = Price * Quantity\n"));
    REQUIRE_FALSE(bad.ok());
    REQUIRE(bad.error().size() == 1);
    CHECK(bad.error()[0].code == "UnknownVariable");
    CHECK(bad.error()[0].variable == "R");
    CHECK(bad.error()[0].message.find("Quantity") != std::string::npos);
}

TEST_CASE("check_cycles") {
    SUBCASE("fixture order respects dependencies") {
        Model m = support::parse_or_throw(support::fixture_text());
        auto graph = *build_graph(m);
        auto order = check_cycles(m, graph);
        REQUIRE(order.ok());
        auto pos = [&](const std::string& n) { return std::find(order->begin(), order->end(), n) - order->begin(); };
        CHECK(order->size() == 16);
        CHECK(pos("Total Demand") < pos("Regional Demand"));
        CHECK(pos("Regional Demand") < pos("Revenue"));
        for (const auto& e : graph) CHECK(pos(e.used) < pos(e.user));
    }
    SUBCASE("2-cycle") {
        Model m = support::parse_or_throw("model \"M\"\ncalc A = B\ncalc B = A\n");
        auto order = check_cycles(m, *build_graph(m));
        REQUIRE_FALSE(order.ok());
        CHECK(order.error().code == "CircularDefinition");
        CHECK(order.error().message.find("A → B → A") != std::string::npos);
    }
    SUBCASE("single calc last") {
        Model m = support::parse_or_throw("model \"M\"\ncalc C = A + B\nparam A = 1\nparam B = 2\n");
        auto order = check_cycles(m, *build_graph(m));
        REQUIRE(order.ok());
        CHECK(order->back() == "C");
        CHECK(*order == std::vector<std::string>{"A", "B", "C"});
    }
    SUBCASE("self reference") {
        Model m = support::parse_or_throw("model \"M\"\ncalc A = A + 1\n");
        auto order = check_cycles(m, *build_graph(m));
        REQUIRE_FALSE(order.ok());
        CHECK(order.error().code == "CircularDefinition");
    }
}

TEST_CASE("check_scopes") {
    std::string base = support::fixture_text();
    SUBCASE("fixture scopes") {
        Model m = support::parse_or_throw(base);
        auto s = check_scopes(m, *build_graph(m));
        REQUIRE(s.ok());
        CHECK(s->at("Total Profit").is_scalar());
        CHECK(s->at("Unit Cost") == Scope::repeating("Region"));
    }
    SUBCASE("repeating into scalar") {
        auto ds = diagnostics_of(base + "calc Bad = Profit + 1\n");
        CHECK(count_code(ds, "RepeatingIntoScalar") == 1);
    }
    SUBCASE("aggregate inside a larger expression is allowed") {
        auto vm = validate(support::parse_or_throw(base + "output Mean Profit : currency = SUM(Profit) / 3\n"));
        CHECK(vm.ok());
    }
}

TEST_CASE("lint_model") {
    std::string base = support::fixture_text();
    SUBCASE("operator count on Total Demand only") {
        auto ds = lint_model(support::parse_or_throw(base));
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].code == "OperatorCount");
        CHECK(ds[0].severity == Severity::Warning);
        CHECK(ds[0].variable == "Total Demand");
        REQUIRE(ds[0].span);
        CHECK(ds[0].span->line == 10);
    }
    SUBCASE("distribution summing to 110%") {
        std::string text = replace_line(base, "param Distribution",
                                        "param Distribution : percent over Region = [50%, 30%, 30%]");
        auto ds = lint_model(support::parse_or_throw(text));
        CHECK(codes(ds) == std::vector<std::string>{"DistributionSum", "OperatorCount"});
    }
    SUBCASE("defined names colliding") {
        auto ds = lint_model(support::parse_or_throw("model \"M\"\nparam Region = 1\nentity REGION = [A]\n"));
        CHECK(codes(ds) == std::vector<std::string>{"NameCollision"});
    }
    SUBCASE("label that is a cell address") {
        auto ds = lint_model(support::parse_or_throw("model \"M\"\nparam AB12 = 1\n"));
        CHECK(codes(ds) == std::vector<std::string>{"InvalidLabel"});
        CHECK(ds[0].severity == Severity::Error);
    }
}

TEST_CASE("validate") {
    std::string base = support::fixture_text();
    SUBCASE("fixture has one warning") {
        auto vm = validate(support::parse_or_throw(base));
        REQUIRE(vm.ok());
        REQUIRE(vm->warnings.size() == 1);
        CHECK(vm->warnings[0].code == "OperatorCount");
        CHECK(vm->topo_order.size() == 16);
        CHECK(vm->graph.size() == 18);
    }
    SUBCASE("extra subtraction adds a warning") {
        std::string text =
            replace_line(base, "output Profit", "output Profit : currency over Region = Revenue - Total Cost - 1");
        auto vm = validate(support::parse_or_throw(text));
        REQUIRE(vm.ok());
        CHECK(codes(vm->warnings) == std::vector<std::string>{"OperatorCount", "OperatorCount"});
    }
    SUBCASE("arity mismatch") {
        std::string text =
            replace_line(base, "param Distribution", "param Distribution : percent over Region = [48%, 23%]");
        auto vm = validate(support::parse_or_throw(text));
        REQUIRE_FALSE(vm.ok());
        CHECK(count_code(vm.error(), "ParamArity") == 1);
    }
    SUBCASE("strict promotes warnings") {
        auto vm = validate(support::parse_or_throw(base), {true});
        REQUIRE_FALSE(vm.ok());
        REQUIRE(vm.error().size() == 1);
        CHECK(vm.error()[0].severity == Severity::Error);
        CHECK(vm.error()[0].code == "OperatorCount");
    }
    SUBCASE("undeclared entity") {
        auto ds = diagnostics_of("model \"M\"\nparam X over Nowhere = [1]\n");
        CHECK(codes(ds) == std::vector<std::string>{"UnknownEntity"});
    }
    SUBCASE("deterministic") {
        std::string text = base + "calc Bad = Profit + Nope\ncalc Worse = SUM(Price)\n";
        CHECK(diagnostics_of(text) == diagnostics_of(text));
    }
    SUBCASE("render") {
        auto ds = diagnostics_of(base);
        CHECK(render(ds[0]) ==
              "WARNING OperatorCount at 10:6 — definition of 'Total Demand' uses 2 operators; split it so each "
              "formula has at most one (Total Demand)");
        CHECK(to_json(ds).find("\"code\": \"OperatorCount\"") != std::string::npos);
    }
}

TEST_CASE("seeded fault fixtures each produce exactly one error") {
    const std::pair<const char*, const char*> cases[] = {
        {"undeclared_reference", "UnknownVariable"}, {"two_cycle", "CircularDefinition"},
        {"repeating_into_scalar", "RepeatingIntoScalar"}, {"entity_mismatch", "EntityMismatch"},
        {"aggregate_of_scalar", "AggregateOfScalar"}, {"param_arity", "ParamArity"},
        {"duplicate_mangled_name", "NameCollision"}, {"repeating_input", "RepeatingInput"}};
    for (const auto& [file, code] : cases) {
        CAPTURE(file);
        auto ds = diagnostics_of(support::read_text(support::source_path(std::string("tests/fixtures/") + file + ".ssm")));
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].code == code);
        CHECK(ds[0].severity == Severity::Error);
        CHECK(ds[0].span.has_value());
    }
}

TEST_CASE("validated random models are sound and evaluate without unbound names") {
    support::ModelGenerator gen(99);
    int evaluated = 0;
    for (int i = 0; i < 400; ++i) {
        std::string text = gen.next();
        CAPTURE(text);
        auto vm = validate(support::parse_or_throw(text));
        REQUIRE(vm.ok());
        for (const auto& v : vm->model.variables) {
            if (v.definition && v.scope.is_scalar()) CHECK(scope_sound(*v.definition, vm->scopes));
            CHECK(vm->scopes.at(v.name) == v.scope);
        }
        try {
            evaluate(*vm);
            ++evaluated;
        } catch (const EvalError& e) {
            // Only arithmetic can fail on a validated model.
            CHECK((e.code() == EvalErrorCode::DivisionByZero || e.code() == EvalErrorCode::NonFiniteResult));
        }
    }
    CHECK(evaluated > 350);
}
