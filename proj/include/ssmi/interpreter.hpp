#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssmi/evaluator.hpp"
#include "ssmi/workbook.hpp"

namespace ssmi {

// Evaluates every non-empty cell of the workbook the way a spreadsheet would.
//
// A defined name bound to a row segment resolves, inside a single-cell
// formula, to the segment's cell in the formula's own column (implicit
// intersection); a column outside the populated extent of the segment gives
// the error value ImplicitIntersectionMiss. Passed to a function, the same
// name yields the numeric cells of the segment. Ranges given to functions
// skip text and blank cells.
//
// Failures are per-cell error values (CircularReference, UnknownName,
// ImplicitIntersectionMiss, TypeMismatch, DivisionByZero, NonFiniteResult,
// BadFormula, RangeInScalarContext, plus aggregate errors) that propagate to
// dependent cells.
std::map<CellAddress, CellValue> interpret(const WorkbookDoc& doc);

struct VariableCheck {
    std::string variable;
    std::vector<double> expected;
    std::vector<std::optional<double>> actual;
    double max_relative_delta = 0.0;
    bool ok = false;
    std::string note;
};

struct RoundtripReport {
    bool pass = false;
    std::vector<VariableCheck> checks;

    const VariableCheck* find(const std::string& variable) const;
};

inline constexpr double kRoundtripTolerance = 1e-9;

// Compares every variable's evaluated value with the interpreted value of the
// workbook cell or row its defined name points to.
RoundtripReport verify_roundtrip(const ValidatedModel& vm, const WorkbookDoc& doc, const Overrides& inputs = {});

std::string render(const RoundtripReport& report);

}  // namespace ssmi
