#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ssmi/workbook.hpp"

namespace ssmi {

class XlsxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Office Open XML package (stored, uncompressed zip) with the workbook's
// sheets, formulas with cached values, workbook-scope defined names and
// bold / top-border / number-format styles. Open-ended row segments span to
// column XFD. Output is byte-for-byte deterministic.
//
// Throws XlsxError, before producing anything, on an invalid sheet name, an
// invalid defined name or two defined names equal ignoring case.
std::string to_xlsx(const WorkbookDoc& doc);

// Writes to_xlsx(doc) to `path`; nothing is written when validation fails.
void write_xlsx(const WorkbookDoc& doc, const std::filesystem::path& path);

}  // namespace ssmi
