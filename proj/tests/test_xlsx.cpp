#include <filesystem>
#include <regex>

#include "doctest.h"
#include "ssmi/xlsx.hpp"
#include "support.hpp"

using namespace ssmi;

namespace {

// "numFmtId/fontId/borderId" for each cellXfs entry.
std::vector<std::string> cell_xfs(const std::string& styles) {
    auto begin = styles.find("<cellXfs");
    auto end = styles.find("</cellXfs>");
    REQUIRE(begin != std::string::npos);
    std::string block = styles.substr(begin, end - begin);
    std::regex xf(R"re(<xf numFmtId="(\d+)" fontId="(\d)" fillId="0" borderId="(\d)")re");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(block.begin(), block.end(), xf); it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1].str() + "/" + (*it)[2].str() + "/" + (*it)[3].str());
    return out;
}

std::string cell_xml(const std::string& sheet, const std::string& ref) {
    std::regex c("<c r=\"" + ref + "\"[^>]*(/>|>.*?</c>)");
    std::smatch m;
    REQUIRE_MESSAGE(std::regex_search(sheet, m, c), ref);
    return m[0];
}

long count_of(const std::string& text, const std::string& pattern) {
    std::regex re(pattern);
    return std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator());
}

WorkbookDoc small_doc() {
    WorkbookDoc doc;
    Sheet s{"S", {}};
    s.set(1, 1, CellContent::value(1));
    doc.sheets.push_back(s);
    return doc;
}

}  // namespace

TEST_CASE("package structure") {
    support::StoredZip zip(to_xlsx(generate(support::fixture())));
    CHECK(zip.names().front() == "[Content_Types].xml");
    for (const char* part : {"_rels/.rels", "xl/workbook.xml", "xl/_rels/workbook.xml.rels", "xl/styles.xml",
                             "xl/worksheets/sheet1.xml", "xl/worksheets/sheet5.xml"})
        CHECK_MESSAGE(zip.has(part), part);
    CHECK_FALSE(zip.has("xl/worksheets/sheet6.xml"));

    const std::string& types = zip.at("[Content_Types].xml");
    for (int i = 1; i <= 5; ++i)
        CHECK(types.find("/xl/worksheets/sheet" + std::to_string(i) + ".xml") != std::string::npos);

    const std::string& wb = zip.at("xl/workbook.xml");
    CHECK(count_of(wb, "<sheet name=") == 5);
    CHECK(wb.find(R"(<sheet name="Parameters-Region")") != std::string::npos);
}

TEST_CASE("defined names") {
    const std::string wb = support::StoredZip(to_xlsx(generate(support::fixture()))).at("xl/workbook.xml");
    CHECK(wb.find(R"(<definedName name="Total_Demand">Model!$B$6</definedName>)") != std::string::npos);
    CHECK(wb.find(R"(<definedName name="Price">Interface!$B$4</definedName>)") != std::string::npos);
    CHECK(wb.find(R"(<definedName name="Delivery_Cost">'Parameters-Region'!$B$5:$XFD$5</definedName>)") !=
          std::string::npos);
    CHECK(wb.find(R"(<definedName name="Profit">Region!$B$31:$XFD$31</definedName>)") != std::string::npos);
    CHECK(count_of(wb, "<definedName ") == 17);  // 16 variables and the entity

    WorkbookDoc doc = small_doc();
    doc.names.push_back({"Span", RowSegment{"S", 1, 2, 4}});
    const std::string closed = support::StoredZip(to_xlsx(doc)).at("xl/workbook.xml");
    CHECK(closed.find(">S!$B$1:$D$1<") != std::string::npos);
}

TEST_CASE("cells, formulas and cached values") {
    support::StoredZip zip(to_xlsx(generate(support::fixture())));
    const std::string& iface = zip.at("xl/worksheets/sheet1.xml");
    const std::string& model = zip.at("xl/worksheets/sheet2.xml");
    const std::string& region = zip.at("xl/worksheets/sheet3.xml");

    CHECK(cell_xml(iface, "A1").find("<t xml:space=\"preserve\">Interface</t>") != std::string::npos);
    CHECK(cell_xml(iface, "B4") == "<c r=\"B4\" s=\"4\"><v>375</v></c>");
    CHECK(cell_xml(model, "B6").find("<f>B3*B4^-B5</f><v>13061.7") != std::string::npos);
    CHECK(cell_xml(model, "B10").find("<f>SUM(9:9)</f>") != std::string::npos);
    CHECK(cell_xml(region, "C3") == "<c r=\"C3\" t=\"str\"><f>Region</f><v>East</v></c>");
    CHECK(region.find("<dimension ref=\"A1:D31\"/>") != std::string::npos);
    for (const auto& [name, part] : std::map<std::string, std::string>{{"iface", iface}, {"model", model}}) {
        CAPTURE(name);
        CHECK(part.find("<f>=") == std::string::npos);
    }
}

TEST_CASE("styles") {
    const std::string styles = support::StoredZip(to_xlsx(generate(support::fixture()))).at("xl/styles.xml");
    auto xfs = cell_xfs(styles);
    REQUIRE(xfs.size() == 16);
    CHECK(xfs[0] == "0/0/0");
    CHECK(xfs[1] == "0/0/1");
    CHECK(xfs[2] == "0/1/0");
    CHECK(xfs[4] == "164/0/0");
    CHECK(xfs[8] == "9/0/0");
    CHECK(xfs[15] == "3/1/1");
    CHECK(styles.find("<b/>") != std::string::npos);
    CHECK(styles.find("<top style=\"thin\">") != std::string::npos);

    const std::string model = support::StoredZip(to_xlsx(generate(support::fixture()))).at("xl/worksheets/sheet2.xml");
    // Total Profit: bold, top border, currency.
    CHECK(cell_xml(model, "B10").starts_with("<c r=\"B10\" s=\"7\">"));
}

TEST_CASE("empty workbook") {
    support::StoredZip zip(to_xlsx(WorkbookDoc{}));
    CHECK(zip.has("xl/workbook.xml"));
    CHECK_FALSE(zip.has("xl/worksheets/sheet1.xml"));
    CHECK(zip.at("xl/workbook.xml").find("definedName") == std::string::npos);
}

TEST_CASE("invalid documents are rejected before writing") {
    auto path = std::filesystem::temp_directory_path() / "ssmi_test_rejected.xlsx";
    std::filesystem::remove(path);

    WorkbookDoc dup = small_doc();
    dup.names.push_back({"Price", SingleCell{{"S", 1, 1}}});
    dup.names.push_back({"PRICE", SingleCell{{"S", 1, 1}}});
    CHECK_THROWS_AS(write_xlsx(dup, path), XlsxError);
    CHECK_FALSE(std::filesystem::exists(path));

    WorkbookDoc bad_sheet = small_doc();
    bad_sheet.sheets[0].name = "a/b";
    CHECK_THROWS_AS(to_xlsx(bad_sheet), XlsxError);
    bad_sheet.sheets[0].name = std::string(32, 'x');
    CHECK_THROWS_AS(to_xlsx(bad_sheet), XlsxError);

    WorkbookDoc bad_name = small_doc();
    bad_name.names.push_back({"B2", SingleCell{{"S", 1, 1}}});
    CHECK_THROWS_AS(to_xlsx(bad_name), XlsxError);

    WorkbookDoc missing = small_doc();
    missing.names.push_back({"X", SingleCell{{"Nowhere", 1, 1}}});
    CHECK_THROWS_AS(to_xlsx(missing), XlsxError);

    write_xlsx(small_doc(), path);
    CHECK(std::filesystem::exists(path));
    CHECK(support::read_text(path.string()) == to_xlsx(small_doc()));
    std::filesystem::remove(path);
}

TEST_CASE("deterministic bytes") {
    CHECK(to_xlsx(generate(support::fixture())) == to_xlsx(generate(support::fixture())));
}
