#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssmi/model.hpp"
#include "ssmi/result.hpp"

namespace ssmi {

struct ParseError {
    SourceSpan span;
    std::string message;
    std::optional<std::string> expected;
};

using ParseErrors = std::vector<ParseError>;

// Parses a whole model. Never returns a partial model: any error fails the parse.
Result<Model, ParseErrors> parse_model(std::string_view source);

Result<Expr, ParseError> parse_expr(std::string_view source);

// Renders a model back to DSL text; parse_model(print_model(m)) == m.
std::string print_model(const Model& model);

std::string render(const ParseError& error);

}  // namespace ssmi
