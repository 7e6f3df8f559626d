#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "ssmi/workbook.hpp"

namespace ssmi {

std::string column_letters(int column) {
    std::string out;
    while (column > 0) {
        int rem = (column - 1) % 26;
        out.insert(out.begin(), static_cast<char>('A' + rem));
        column = (column - 1) / 26;
    }
    return out;
}

std::optional<int> column_number(std::string_view letters) {
    if (letters.empty() || letters.size() > 3) return std::nullopt;
    int col = 0;
    for (char c : letters) {
        if (c < 'A' || c > 'Z') return std::nullopt;
        col = col * 26 + (c - 'A' + 1);
    }
    if (col > kMaxColumns) return std::nullopt;
    return col;
}

std::string a1(int column, int row) { return column_letters(column) + std::to_string(row); }

std::string to_string(const CellAddress& addr) { return addr.sheet + "!" + a1(addr.column, addr.row); }

std::string entity_parameters_sheet(std::string_view entity) { return "Parameters-" + std::string(entity); }

void Sheet::set(int column, int row, CellContent content, CellStyle style) {
    cells[{row, column}] = Cell{std::move(content), style};
}

const Cell* Sheet::find(int column, int row) const {
    auto it = cells.find({row, column});
    return it == cells.end() ? nullptr : &it->second;
}

int Sheet::max_column() const {
    int m = 0;
    for (const auto& [key, cell] : cells) m = std::max(m, key.second);
    return m;
}

int Sheet::max_row() const { return cells.empty() ? 0 : cells.rbegin()->first.first; }

Sheet* WorkbookDoc::find_sheet(std::string_view name) {
    for (auto& s : sheets)
        if (s.name == name) return &s;
    return nullptr;
}

const Sheet* WorkbookDoc::find_sheet(std::string_view name) const {
    for (const auto& s : sheets)
        if (s.name == name) return &s;
    return nullptr;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

}  // namespace

const NamedRange* WorkbookDoc::find_name(std::string_view name) const {
    for (const auto& n : names)
        if (iequals(n.name, name)) return &n;
    return nullptr;
}

namespace {

using json = nlohmann::ordered_json;

json style_json(const CellStyle& s) {
    json j;
    j["bold"] = s.bold;
    j["borderTop"] = s.border_top;
    j["numberFormat"] = std::string(to_string(s.number_format));
    return j;
}

json name_json(const NamedRange& n) {
    json j;
    j["name"] = n.name;
    if (const auto* single = std::get_if<SingleCell>(&n.target)) {
        j["sheet"] = single->cell.sheet;
        j["row"] = single->cell.row;
        j["col"] = single->cell.column;
    } else {
        const auto& seg = std::get<RowSegment>(n.target);
        j["sheet"] = seg.sheet;
        j["row"] = seg.row;
        j["startCol"] = seg.start_column;
        j["openEnded"] = seg.open_ended();
        if (seg.end_column) j["endCol"] = *seg.end_column;
    }
    return j;
}

json cell_json(int row, int col, const Cell& cell) {
    json j;
    j["col"] = col;
    j["ref"] = a1(col, row);
    const CellContent& c = cell.content;
    switch (c.kind) {
        case CellContent::Kind::Empty: j["type"] = "empty"; break;
        case CellContent::Kind::Text:
            j["type"] = "text";
            j["text"] = c.text;
            break;
        case CellContent::Kind::Number:
            j["type"] = "number";
            j["value"] = c.number;
            break;
        case CellContent::Kind::Formula:
            j["type"] = "formula";
            j["formula"] = c.text;
            if (c.cached) {
                if (c.cached->kind == CellValue::Kind::Number) j["cached"] = c.cached->number;
                if (c.cached->kind == CellValue::Kind::Text) j["cachedText"] = c.cached->text;
            }
            break;
    }
    if (!cell.style.is_default()) j["style"] = style_json(cell.style);
    return j;
}

NumberFormat format_from(const std::string& s) {
    if (s == "currency") return NumberFormat::Currency;
    if (s == "percent") return NumberFormat::Percent;
    if (s == "count") return NumberFormat::Count;
    if (s == "none") return NumberFormat::None;
    throw std::runtime_error("unknown numberFormat '" + s + "'");
}

}  // namespace

std::string named_range_json(const NamedRange& range) { return name_json(range).dump(); }

std::string serialize_json(const WorkbookDoc& doc, int indent) {
    json root;
    root["schemaVersion"] = 1;
    json sheets = json::array();
    for (const auto& sheet : doc.sheets) {
        json sj;
        sj["name"] = sheet.name;
        json rows = json::array();
        int current = -1;
        for (const auto& [key, cell] : sheet.cells) {
            if (key.first != current) {
                current = key.first;
                json rj;
                rj["row"] = current;
                rj["cells"] = json::array();
                rows.push_back(std::move(rj));
            }
            rows.back()["cells"].push_back(cell_json(key.first, key.second, cell));
        }
        sj["rows"] = std::move(rows);
        sheets.push_back(std::move(sj));
    }
    root["sheets"] = std::move(sheets);
    json names = json::array();
    for (const auto& n : doc.names) names.push_back(name_json(n));
    root["names"] = std::move(names);
    std::string out = root.dump(indent);
    if (indent >= 0) out += "\n";
    return out;
}

Result<WorkbookDoc, std::string> deserialize_json(std::string_view text) {
    try {
        json root = json::parse(text);
        if (root.value("schemaVersion", 0) != 1) return std::string("unsupported schemaVersion");
        WorkbookDoc doc;
        for (const auto& sj : root.at("sheets")) {
            Sheet sheet;
            sheet.name = sj.at("name").get<std::string>();
            for (const auto& rj : sj.at("rows")) {
                int row = rj.at("row").get<int>();
                for (const auto& cj : rj.at("cells")) {
                    int col = cj.at("col").get<int>();
                    std::string type = cj.at("type").get<std::string>();
                    CellContent content;
                    if (type == "text") {
                        content = CellContent::label(cj.at("text").get<std::string>());
                    } else if (type == "number") {
                        content = CellContent::value(cj.at("value").get<double>());
                    } else if (type == "formula") {
                        content = CellContent::formula(cj.at("formula").get<std::string>());
                        if (cj.contains("cached")) content.cached = CellValue::of(cj.at("cached").get<double>());
                        if (cj.contains("cachedText"))
                            content.cached = CellValue::of_text(cj.at("cachedText").get<std::string>());
                    } else if (type != "empty") {
                        return "unknown cell type '" + type + "'";
                    }
                    CellStyle style;
                    if (cj.contains("style")) {
                        const auto& st = cj.at("style");
                        style.bold = st.at("bold").get<bool>();
                        style.border_top = st.at("borderTop").get<bool>();
                        style.number_format = format_from(st.at("numberFormat").get<std::string>());
                    }
                    sheet.set(col, row, std::move(content), style);
                }
            }
            doc.sheets.push_back(std::move(sheet));
        }
        for (const auto& nj : root.at("names")) {
            NamedRange n;
            n.name = nj.at("name").get<std::string>();
            std::string sheet = nj.at("sheet").get<std::string>();
            int row = nj.at("row").get<int>();
            if (nj.contains("openEnded")) {
                RowSegment seg{sheet, row, nj.at("startCol").get<int>(), std::nullopt};
                if (!nj.at("openEnded").get<bool>()) seg.end_column = nj.at("endCol").get<int>();
                n.target = seg;
            } else {
                n.target = SingleCell{{sheet, nj.at("col").get<int>(), row}};
            }
            doc.names.push_back(std::move(n));
        }
        return doc;
    } catch (const std::exception& e) {
        return std::string("malformed workbook JSON: ") + e.what();
    }
}

}  // namespace ssmi
