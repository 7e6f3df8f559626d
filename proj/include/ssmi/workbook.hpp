#pragma once

// Document model of a generated structured workbook, its JSON form and the
// generator that lays a validated model out over five kinds of sheet:
// Interface, Model, one sheet per entity, Parameters, Parameters-<Entity>.

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssmi/evaluator.hpp"
#include "ssmi/model.hpp"
#include "ssmi/result.hpp"
#include "ssmi/validator.hpp"

namespace ssmi {

// 1 -> "A", 27 -> "AA".
std::string column_letters(int column);
std::optional<int> column_number(std::string_view letters);
std::string a1(int column, int row);

constexpr int kMaxColumns = 16384;  // XFD
constexpr int kMaxRows = 1048576;

struct CellAddress {
    std::string sheet;
    int column = 1;
    int row = 1;

    auto operator<=>(const CellAddress&) const = default;
};

std::string to_string(const CellAddress& addr);

// Interpreted or cached cell value. Errors carry a code such as
// "ImplicitIntersectionMiss" in `text` and a description in `message`.
struct CellValue {
    enum class Kind { Empty, Number, Text, Error };
    Kind kind = Kind::Empty;
    double number = 0.0;
    std::string text;
    std::string message;

    static CellValue empty() { return {}; }
    static CellValue of(double v) { return {Kind::Number, v, {}, {}}; }
    static CellValue of_text(std::string s) { return {Kind::Text, 0.0, std::move(s), {}}; }
    static CellValue error(std::string code, std::string message) {
        return {Kind::Error, 0.0, std::move(code), std::move(message)};
    }

    bool is_number() const { return kind == Kind::Number; }
    bool is_error() const { return kind == Kind::Error; }

    bool operator==(const CellValue&) const = default;
};

struct CellContent {
    enum class Kind { Empty, Text, Number, Formula };
    Kind kind = Kind::Empty;
    std::string text;    // Text: the string; Formula: source starting with '='
    double number = 0.0; // Number
    std::optional<CellValue> cached;  // Formula: value shown by the generator

    static CellContent empty() { return {}; }
    static CellContent label(std::string s) { return {Kind::Text, std::move(s), 0.0, std::nullopt}; }
    static CellContent value(double v) { return {Kind::Number, {}, v, std::nullopt}; }
    static CellContent formula(std::string src, std::optional<CellValue> cached = {}) {
        return {Kind::Formula, std::move(src), 0.0, std::move(cached)};
    }

    bool operator==(const CellContent&) const = default;
};

struct CellStyle {
    bool bold = false;
    bool border_top = false;
    NumberFormat number_format = NumberFormat::None;

    bool is_default() const { return !bold && !border_top && number_format == NumberFormat::None; }
    bool operator==(const CellStyle&) const = default;
};

struct Cell {
    CellContent content;
    CellStyle style;

    bool operator==(const Cell&) const = default;
};

struct Sheet {
    std::string name;
    // keyed (row, column): row-major iteration order
    std::map<std::pair<int, int>, Cell> cells;

    void set(int column, int row, CellContent content, CellStyle style = {});
    const Cell* find(int column, int row) const;
    int max_column() const;
    int max_row() const;

    bool operator==(const Sheet&) const = default;
};

struct SingleCell {
    CellAddress cell;
    bool operator==(const SingleCell&) const = default;
};

// Row from `start_column` to the right; open-ended unless `end_column` is set.
struct RowSegment {
    std::string sheet;
    int row = 1;
    int start_column = 2;
    std::optional<int> end_column;

    bool open_ended() const { return !end_column.has_value(); }
    bool operator==(const RowSegment&) const = default;
};

struct NamedRange {
    std::string name;
    std::variant<SingleCell, RowSegment> target;

    bool operator==(const NamedRange&) const = default;
};

struct WorkbookDoc {
    std::vector<Sheet> sheets;
    std::vector<NamedRange> names;

    Sheet* find_sheet(std::string_view name);
    const Sheet* find_sheet(std::string_view name) const;
    // Defined names are case-insensitive.
    const NamedRange* find_name(std::string_view name) const;

    bool operator==(const WorkbookDoc&) const = default;
};

inline constexpr std::string_view kInterfaceSheet = "Interface";
inline constexpr std::string_view kModelSheet = "Model";
inline constexpr std::string_view kParametersSheet = "Parameters";
std::string entity_parameters_sheet(std::string_view entity);

// Lays out the validated model as a structured workbook. Every formula cell
// carries the value the evaluator computes for it.
// A subtraction such as Profit is emitted as `=B29-B30`.
WorkbookDoc generate(const ValidatedModel& vm, const Overrides& inputs = {});

// Canonical JSON, schemaVersion 1:
//   {"schemaVersion":1,
//    "sheets":[{"name":..,"rows":[{"row":r,"cells":[{"col":c,"ref":"B4","type":..,...}]}]}],
//    "names":[{"name":..,"sheet":..,"row":r,"col":c} |
//             {"name":..,"sheet":..,"row":r,"startCol":c,"openEnded":true} |
//             {"name":..,"sheet":..,"row":r,"startCol":c,"openEnded":false,"endCol":e}]}
// Cell types: "empty" (style only), "text" {"text"}, "number" {"value"},
// "formula" {"formula", optional "cached" number or "cachedText" string}.
// "style" {"bold","borderTop","numberFormat"} is present only when not default.
// `indent` < 0 gives the compact single-line form.
std::string serialize_json(const WorkbookDoc& doc, int indent = -1);
Result<WorkbookDoc, std::string> deserialize_json(std::string_view text);

std::string named_range_json(const NamedRange& range);

}  // namespace ssmi
