#include "ssmi/xlsx.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "ssmi/numbers.hpp"

namespace ssmi {

namespace {

// Minimal zip archive writer, stored entries only.
class ZipWriter {
public:
    void add(const std::string& name, const std::string& data) {
        Entry e{name, static_cast<std::uint32_t>(out_.size()),
                static_cast<std::uint32_t>(
                    crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()))),
                static_cast<std::uint32_t>(data.size())};
        u32(0x04034b50);
        u16(20);  // version needed
        u16(0);   // flags
        u16(0);   // stored
        u16(kTime);
        u16(kDate);
        u32(e.crc);
        u32(e.size);
        u32(e.size);
        u16(static_cast<std::uint16_t>(name.size()));
        u16(0);
        out_ += name;
        out_ += data;
        entries_.push_back(std::move(e));
    }

    std::string finish() {
        auto dir_start = static_cast<std::uint32_t>(out_.size());
        for (const auto& e : entries_) {
            u32(0x02014b50);
            u16(20);  // made by
            u16(20);
            u16(0);
            u16(0);
            u16(kTime);
            u16(kDate);
            u32(e.crc);
            u32(e.size);
            u32(e.size);
            u16(static_cast<std::uint16_t>(e.name.size()));
            u16(0);
            u16(0);
            u16(0);
            u16(0);
            u32(0);
            u32(e.offset);
            out_ += e.name;
        }
        auto dir_size = static_cast<std::uint32_t>(out_.size()) - dir_start;
        u32(0x06054b50);
        u16(0);
        u16(0);
        u16(static_cast<std::uint16_t>(entries_.size()));
        u16(static_cast<std::uint16_t>(entries_.size()));
        u32(dir_size);
        u32(dir_start);
        u16(0);
        return std::move(out_);
    }

private:
    struct Entry {
        std::string name;
        std::uint32_t offset;
        std::uint32_t crc;
        std::uint32_t size;
    };

    // 1980-01-01 00:00:00
    static constexpr std::uint16_t kTime = 0;
    static constexpr std::uint16_t kDate = (0 << 9) | (1 << 5) | 1;

    void u16(std::uint16_t v) {
        out_.push_back(static_cast<char>(v & 0xff));
        out_.push_back(static_cast<char>(v >> 8));
    }
    void u32(std::uint32_t v) {
        u16(static_cast<std::uint16_t>(v & 0xffff));
        u16(static_cast<std::uint16_t>(v >> 16));
    }

    std::string out_;
    std::vector<Entry> entries_;
};

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void check_sheet_name(const std::string& name) {
    if (name.empty() || name.size() > 31) throw XlsxError("invalid sheet name '" + name + "': length must be 1..31");
    if (name.find_first_of("[]:*?/\\") != std::string::npos)
        throw XlsxError("invalid sheet name '" + name + "': contains a reserved character");
    if (name.front() == '\'' || name.back() == '\'')
        throw XlsxError("invalid sheet name '" + name + "': starts or ends with an apostrophe");
}

void check(const WorkbookDoc& doc) {
    std::set<std::string> sheets;
    for (const auto& s : doc.sheets) {
        check_sheet_name(s.name);
        if (!sheets.insert(lower(s.name)).second) throw XlsxError("duplicate sheet name '" + s.name + "'");
    }
    std::set<std::string> names;
    for (const auto& n : doc.names) {
        auto dn = defined_name(n.name);
        if (!dn || *dn != n.name) throw XlsxError("invalid defined name '" + n.name + "'");
        if (!names.insert(lower(n.name)).second) throw XlsxError("duplicate defined name '" + n.name + "'");
        const std::string& sheet =
            std::holds_alternative<SingleCell>(n.target) ? std::get<SingleCell>(n.target).cell.sheet
                                                         : std::get<RowSegment>(n.target).sheet;
        if (!doc.find_sheet(sheet)) throw XlsxError("defined name '" + n.name + "' refers to missing sheet " + sheet);
    }
}

std::string quoted_sheet(const std::string& name) {
    bool plain = std::all_of(name.begin(), name.end(),
                             [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
    if (plain && !name.empty() && !std::isdigit(static_cast<unsigned char>(name.front()))) return name;
    std::string out = "'";
    for (char c : name) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

std::string absolute(int column, int row) { return "$" + column_letters(column) + "$" + std::to_string(row); }

std::string name_target(const NamedRange& n) {
    if (const auto* single = std::get_if<SingleCell>(&n.target))
        return quoted_sheet(single->cell.sheet) + "!" + absolute(single->cell.column, single->cell.row);
    const auto& seg = std::get<RowSegment>(n.target);
    return quoted_sheet(seg.sheet) + "!" + absolute(seg.start_column, seg.row) + ":" +
           absolute(seg.end_column.value_or(kMaxColumns), seg.row);
}

int style_index(const CellStyle& s) {
    return static_cast<int>(s.number_format) * 4 + (s.bold ? 2 : 0) + (s.border_top ? 1 : 0);
}

std::string styles_xml() {
    std::ostringstream x;
    x << R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
      << R"(<styleSheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">)"
      << R"(<numFmts count="1"><numFmt numFmtId="164" formatCode="#,##0 &quot;$&quot;"/></numFmts>)"
      << R"(<fonts count="2"><font><sz val="11"/><name val="Calibri"/></font>)"
      << R"(<font><b/><sz val="11"/><name val="Calibri"/></font></fonts>)"
      << R"(<fills count="2"><fill><patternFill patternType="none"/></fill>)"
      << R"(<fill><patternFill patternType="gray125"/></fill></fills>)"
      << R"(<borders count="2"><border><left/><right/><top/><bottom/><diagonal/></border>)"
      << R"(<border><left/><right/><top style="thin"><color auto="1"/></top><bottom/><diagonal/></border></borders>)"
      << R"(<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>)"
      << R"(<cellXfs count="16">)";
    // index = format * 4 + bold * 2 + border
    const int fmt_ids[] = {0, 164, 9, 3};
    for (int f = 0; f < 4; ++f) {
        for (int bold = 0; bold < 2; ++bold) {
            for (int border = 0; border < 2; ++border) {
                x << "<xf numFmtId=\"" << fmt_ids[f] << "\" fontId=\"" << bold << "\" fillId=\"0\" borderId=\""
                  << border << "\" xfId=\"0\"";
                if (f) x << " applyNumberFormat=\"1\"";
                if (bold) x << " applyFont=\"1\"";
                if (border) x << " applyBorder=\"1\"";
                x << "/>";
            }
        }
    }
    x << R"(</cellXfs><cellStyles count="1"><cellStyle name="Normal" xfId="0" builtinId="0"/></cellStyles>)"
      << "</styleSheet>";
    return x.str();
}

std::string number_text(double v) { return shortest_repr(v); }

std::string sheet_xml(const Sheet& sheet) {
    std::ostringstream x;
    x << R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
      << R"(<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">)";
    int rows = sheet.max_row();
    int cols = sheet.max_column();
    if (rows > 0) x << "<dimension ref=\"A1:" << a1(std::max(cols, 1), rows) << "\"/>";
    x << "<sheetData>";
    int current = -1;
    for (const auto& [key, cell] : sheet.cells) {
        auto [row, col] = key;
        if (row != current) {
            if (current != -1) x << "</row>";
            current = row;
            x << "<row r=\"" << row << "\">";
        }
        std::string ref = a1(col, row);
        int s = style_index(cell.style);
        std::string attrs = "r=\"" + ref + "\"" + (s ? " s=\"" + std::to_string(s) + "\"" : std::string());
        const CellContent& c = cell.content;
        switch (c.kind) {
            case CellContent::Kind::Empty: x << "<c " << attrs << "/>"; break;
            case CellContent::Kind::Text:
                x << "<c " << attrs << " t=\"inlineStr\"><is><t xml:space=\"preserve\">" << escape(c.text)
                  << "</t></is></c>";
                break;
            case CellContent::Kind::Number: x << "<c " << attrs << "><v>" << number_text(c.number) << "</v></c>"; break;
            case CellContent::Kind::Formula: {
                std::string f = c.text.starts_with('=') ? c.text.substr(1) : c.text;
                if (c.cached && c.cached->kind == CellValue::Kind::Text) {
                    x << "<c " << attrs << " t=\"str\"><f>" << escape(f) << "</f><v>" << escape(c.cached->text)
                      << "</v></c>";
                } else if (c.cached && c.cached->kind == CellValue::Kind::Number) {
                    x << "<c " << attrs << "><f>" << escape(f) << "</f><v>" << number_text(c.cached->number)
                      << "</v></c>";
                } else {
                    x << "<c " << attrs << "><f>" << escape(f) << "</f></c>";
                }
                break;
            }
        }
    }
    if (current != -1) x << "</row>";
    x << "</sheetData></worksheet>";
    return x.str();
}

}  // namespace

std::string to_xlsx(const WorkbookDoc& doc) {
    check(doc);
    ZipWriter zip;
    std::ostringstream types;
    types << R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
          << R"(<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">)"
          << R"(<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>)"
          << R"(<Default Extension="xml" ContentType="application/xml"/>)"
          << R"(<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>)"
          << R"(<Override PartName="/xl/styles.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"/>)";
    for (std::size_t i = 1; i <= doc.sheets.size(); ++i)
        types << "<Override PartName=\"/xl/worksheets/sheet" << i
              << R"(.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>)";
    types << "</Types>";
    zip.add("[Content_Types].xml", types.str());

    zip.add("_rels/.rels",
            R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
            R"(<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">)"
            R"(<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>)"
            "</Relationships>");

    std::ostringstream wb;
    wb << R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
       << R"(<workbook xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main" )"
       << R"(xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships"><sheets>)";
    for (std::size_t i = 0; i < doc.sheets.size(); ++i)
        wb << "<sheet name=\"" << escape(doc.sheets[i].name) << "\" sheetId=\"" << i + 1 << "\" r:id=\"rId" << i + 1
           << "\"/>";
    wb << "</sheets>";
    if (!doc.names.empty()) {
        wb << "<definedNames>";
        for (const auto& n : doc.names)
            wb << "<definedName name=\"" << escape(n.name) << "\">" << escape(name_target(n)) << "</definedName>";
        wb << "</definedNames>";
    }
    wb << R"(<calcPr calcId="191029" fullCalcOnLoad="1"/></workbook>)";
    zip.add("xl/workbook.xml", wb.str());

    std::ostringstream rels;
    rels << R"(<?xml version="1.0" encoding="UTF-8" standalone="yes"?>)" "\n"
         << R"(<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">)";
    for (std::size_t i = 1; i <= doc.sheets.size(); ++i)
        rels << "<Relationship Id=\"rId" << i
             << R"(" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet)"
             << i << ".xml\"/>";
    rels << "<Relationship Id=\"rId" << doc.sheets.size() + 1
         << R"(" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles" Target="styles.xml"/>)"
         << "</Relationships>";
    zip.add("xl/_rels/workbook.xml.rels", rels.str());
    zip.add("xl/styles.xml", styles_xml());
    for (std::size_t i = 0; i < doc.sheets.size(); ++i)
        zip.add("xl/worksheets/sheet" + std::to_string(i + 1) + ".xml", sheet_xml(doc.sheets[i]));
    return zip.finish();
}

void write_xlsx(const WorkbookDoc& doc, const std::filesystem::path& path) {
    std::string bytes = to_xlsx(doc);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw XlsxError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw XlsxError("failed writing " + path.string());
}

}  // namespace ssmi
