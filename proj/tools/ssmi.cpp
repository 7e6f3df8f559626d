// ssmi: check, evaluate, diagram, generate and verify structured spreadsheet models.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ssmi/diagram.hpp"
#include "ssmi/evaluator.hpp"
#include "ssmi/interpreter.hpp"
#include "ssmi/numbers.hpp"
#include "ssmi/parser.hpp"
#include "ssmi/validator.hpp"
#include "ssmi/workbook.hpp"
#include "ssmi/xlsx.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kUsage = 2, kVerifyFailed = 3 };

struct Failure {
    int code;
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kUsage, "error: cannot read " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kUsage, "error: cannot write " + path};
    out << text;
    if (!out) throw Failure{kUsage, "error: failed writing " + path};
}

ssmi::Diagnostic as_diagnostic(const ssmi::ParseError& e) {
    std::string msg = e.message;
    if (e.expected) msg += " (expected " + *e.expected + ")";
    return ssmi::Diagnostic{ssmi::Severity::Error, "ParseError", msg, std::nullopt, e.span};
}

struct Loaded {
    std::optional<ssmi::ValidatedModel> vm;
    ssmi::Diagnostics diagnostics;
};

Loaded load(const std::string& path, bool strict) {
    std::string source = read_file(path);
    Loaded out;
    auto parsed = ssmi::parse_model(source);
    if (!parsed) {
        for (const auto& e : parsed.error()) out.diagnostics.push_back(as_diagnostic(e));
        return out;
    }
    auto vm = ssmi::validate(*parsed, {strict});
    if (!vm) {
        out.diagnostics = vm.error();
        return out;
    }
    out.diagnostics = vm->warnings;
    out.vm = std::move(*vm);
    return out;
}

void print_diagnostics(const ssmi::Diagnostics& ds, std::ostream& os) {
    for (const auto& d : ds) os << ssmi::render(d) << "\n";
}

// Loads a model that must validate; diagnostics go to stderr.
ssmi::ValidatedModel require_valid(const std::string& path) {
    Loaded l = load(path, false);
    print_diagnostics(l.diagnostics, std::cerr);
    if (!l.vm) throw Failure{kInvalid, ""};
    return std::move(*l.vm);
}

ssmi::Overrides parse_overrides(const std::vector<std::string>& sets) {
    ssmi::Overrides out;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw Failure{kUsage, "error: --set expects Name=value, got '" + s + "'"};
        std::string name = s.substr(0, eq);
        std::vector<double> values;
        std::string_view rest = std::string_view(s).substr(eq + 1);
        while (true) {
            auto comma = rest.find(',');
            auto item = rest.substr(0, comma);
            while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
            while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
            auto v = ssmi::parse_decimal(item);
            if (!v) throw Failure{kUsage, "error: --set " + name + ": '" + std::string(item) + "' is not a number"};
            values.push_back(*v);
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        out[name] = std::move(values);
    }
    return out;
}

// Test hook: add 1 to the formula behind a defined name.
void inject_fault(ssmi::WorkbookDoc& doc, const std::string& variable) {
    auto dn = ssmi::defined_name(variable);
    const ssmi::NamedRange* n = dn ? doc.find_name(*dn) : nullptr;
    if (!n) throw Failure{kUsage, "error: --inject-fault: no defined name for '" + variable + "'"};
    ssmi::CellAddress at;
    if (const auto* single = std::get_if<ssmi::SingleCell>(&n->target)) {
        at = single->cell;
    } else {
        const auto& seg = std::get<ssmi::RowSegment>(n->target);
        at = {seg.sheet, seg.start_column, seg.row};
    }
    ssmi::Sheet* sheet = doc.find_sheet(at.sheet);
    auto it = sheet->cells.find({at.row, at.column});
    if (it == sheet->cells.end()) throw Failure{kUsage, "error: --inject-fault: " + ssmi::to_string(at) + " is blank"};
    auto& c = it->second.content;
    if (c.kind == ssmi::CellContent::Kind::Formula)
        c.text = "=(" + c.text.substr(1) + ")+1";
    else if (c.kind == ssmi::CellContent::Kind::Number)
        c.number += 1;
    else
        throw Failure{kUsage, "error: --inject-fault: " + ssmi::to_string(at) + " holds no number"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured spreadsheet model compiler"};
    app.require_subcommand(1);

    std::string file;
    bool strict = false;
    bool json = false;
    std::vector<std::string> sets;
    std::string out;
    std::string fault;

    auto* check = app.add_subcommand("check", "Validate a model and print diagnostics");
    check->add_option("file", file, "Model file")->required();
    check->add_flag("--strict", strict, "Treat warnings as errors");
    check->add_flag("--json", json, "Print diagnostics as JSON");

    auto* eval = app.add_subcommand("eval", "Evaluate a model and print its values");
    eval->add_option("file", file, "Model file")->required();
    eval->add_option("--set", sets, "Override an input or parameter: Name=value[,value...]")->allow_extra_args(false);
    eval->add_flag("--json", json, "Print values as JSON");

    auto* diagram = app.add_subcommand("diagram", "Export the formula diagram as Graphviz DOT");
    diagram->add_option("file", file, "Model file")->required();
    diagram->add_option("-o,--out", out, "Output path (default: stdout)");

    auto* gen = app.add_subcommand("gen", "Generate the structured workbook (.json or .xlsx)");
    gen->add_option("file", file, "Model file")->required();
    gen->add_option("-o,--out", out, "Output path ending in .json or .xlsx")->required();

    auto* verify = app.add_subcommand("verify", "Check that the generated workbook computes the model's values");
    verify->add_option("file", file, "Model file")->required();
    verify->add_option("--inject-fault", fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (check->parsed()) {
            Loaded l = load(file, strict);
            if (json)
                std::cout << ssmi::to_json(l.diagnostics) << "\n";
            else
                print_diagnostics(l.diagnostics, std::cout);
            return l.vm ? kOk : kInvalid;
        }

        if (eval->parsed()) {
            auto vm = require_valid(file);
            auto overrides = parse_overrides(sets);
            ssmi::ValueTable table;
            try {
                table = ssmi::evaluate(vm, overrides);
            } catch (const ssmi::EvalError& e) {
                bool bad_override = e.code() == ssmi::EvalErrorCode::OverrideUnknownName ||
                                    e.code() == ssmi::EvalErrorCode::OverrideShapeMismatch;
                throw Failure{bad_override ? kUsage : kInvalid,
                              "error: " + std::string(ssmi::to_string(e.code())) + ": " + e.what()};
            }
            std::cout << (json ? ssmi::to_json(vm, table) + "\n" : ssmi::render_report(vm, table));
            return kOk;
        }

        if (diagram->parsed()) {
            auto vm = require_valid(file);
            std::string dot = ssmi::to_dot(vm);
            if (out.empty())
                std::cout << dot;
            else
                write_file(out, dot);
            return kOk;
        }

        if (gen->parsed()) {
            std::string ext = fs::path(out).extension().string();
            if (ext != ".json" && ext != ".xlsx")
                throw Failure{kUsage, "error: unsupported output extension '" + ext + "' (use .json or .xlsx)"};
            auto vm = require_valid(file);
            ssmi::WorkbookDoc doc;
            try {
                doc = ssmi::generate(vm);
            } catch (const ssmi::EvalError& e) {
                throw Failure{kInvalid, "error: " + std::string(ssmi::to_string(e.code())) + ": " + e.what()};
            }
            if (ext == ".json") {
                write_file(out, ssmi::serialize_json(doc, 2));
            } else {
                try {
                    ssmi::write_xlsx(doc, out);
                } catch (const ssmi::XlsxError& e) {
                    throw Failure{kUsage, std::string("error: ") + e.what()};
                }
            }
            return kOk;
        }

        if (verify->parsed()) {
            auto vm = require_valid(file);
            ssmi::RoundtripReport report;
            try {
                auto doc = ssmi::generate(vm);
                if (!fault.empty()) inject_fault(doc, fault);
                report = ssmi::verify_roundtrip(vm, doc);
            } catch (const ssmi::EvalError& e) {
                throw Failure{kInvalid, "error: " + std::string(ssmi::to_string(e.code())) + ": " + e.what()};
            }
            std::cout << ssmi::render(report);
            return report.pass ? kOk : kVerifyFailed;
        }
    } catch (const Failure& f) {
        if (!f.message.empty()) std::cerr << f.message << "\n";
        return f.code;
    }
    return kUsage;
}
