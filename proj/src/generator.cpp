#include <algorithm>
#include <cctype>
#include <set>

#include "ssmi/sheet_formula.hpp"
#include "ssmi/workbook.hpp"

namespace ssmi {

namespace {

constexpr int kFirstInstanceColumn = 2;

std::string dn(const std::string& label) {
    auto name = defined_name(label);
    if (!name) throw std::logic_error("label '" + label + "' has no defined name: " + name.error().message);
    return *name;
}

CellStyle style_of(const Variable& v, bool bold = false) { return CellStyle{bold, false, v.format}; }

bool less_label(const Variable* a, const Variable* b) {
    auto key = [](const std::string& s) {
        std::string out = s;
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    auto ka = key(a->name), kb = key(b->name);
    return ka != kb ? ka < kb : a->name < b->name;
}

// Non-aggregated references and vector (aggregate argument) references of a
// definition, each mapped to the sheet operand standing for it.
struct Operands {
    std::map<std::string, sheet::Node> cell;
    std::map<std::string, sheet::Node> vector;
};

sheet::Node translate(const Expr& e, const Operands& ops) {
    switch (e.kind) {
        case Expr::Kind::Number: return sheet::Node::num(e.number);
        case Expr::Kind::Ref: return ops.cell.at(e.name);
        case Expr::Kind::Neg: return sheet::Node::neg(translate(e.args[0], ops));
        case Expr::Kind::Binary:
            return sheet::Node::binary(e.op, translate(e.args[0], ops), translate(e.args[1], ops));
        case Expr::Kind::Aggregate: {
            std::vector<sheet::Node> args;
            for (const auto& rate : e.args) args.push_back(translate(rate, ops));
            args.push_back(ops.vector.at(e.name));
            return sheet::Node::call(std::string(sheet::function_name(e.aggregate)), std::move(args));
        }
    }
    return sheet::Node::num(0);
}

// a + b + c (left-nested, bare references) -> [a, b, c]
std::optional<std::vector<std::string>> addition_chain(const Expr& e) {
    if (e.kind == Expr::Kind::Ref) return std::vector<std::string>{e.name};
    if (e.kind != Expr::Kind::Binary || e.op != BinaryOp::Add || e.args[1].kind != Expr::Kind::Ref)
        return std::nullopt;
    auto left = addition_chain(e.args[0]);
    if (!left) return std::nullopt;
    left->push_back(e.args[1].name);
    return left;
}

// `=SUM(B13:B14)` when the definition adds the block's reference
// cells in order; otherwise the operator formula.
sheet::Node definition_formula(const Expr& def, const Operands& ops) {
    auto chain = addition_chain(def);
    if (chain && chain->size() >= 2) {
        std::set<std::string> distinct(chain->begin(), chain->end());
        bool contiguous = distinct.size() == chain->size();
        for (std::size_t i = 0; contiguous && i < chain->size(); ++i) {
            auto it = ops.cell.find((*chain)[i]);
            const sheet::Node& first = ops.cell.at(chain->front());
            contiguous = it != ops.cell.end() && it->second.kind == sheet::Node::Kind::CellRef &&
                         it->second.from.column == first.from.column &&
                         it->second.from.row == first.from.row + static_cast<int>(i);
        }
        if (contiguous) {
            const auto& first = ops.cell.at(chain->front()).from;
            const auto& last = ops.cell.at(chain->back()).from;
            return sheet::Node::call("SUM", {sheet::Node::range(first, last)});
        }
    }
    return translate(def, ops);
}

// Reference order inside an entity-sheet block: first occurrence, skipping
// names that only appear as aggregate arguments.
void cell_references(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Ref) {
        if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
        return;
    }
    for (const auto& a : e.args) cell_references(a, out);
}

class Generator {
public:
    Generator(const ValidatedModel& vm, const ValueTable& table) : vm_(vm), model_(vm.model), table_(table) {
        for (const auto& e : model_.entities) {
            bool used = std::any_of(model_.variables.begin(), model_.variables.end(),
                                    [&](const Variable& v) { return v.scope.entity == e.name; });
            if (used) entities_.push_back(&e);
        }
    }

    WorkbookDoc run() {
        doc_.sheets.push_back(Sheet{std::string(kInterfaceSheet), {}});
        doc_.sheets.push_back(Sheet{std::string(kModelSheet), {}});
        for (const auto* e : entities_) doc_.sheets.push_back(Sheet{e->name, {}});
        doc_.sheets.push_back(Sheet{std::string(kParametersSheet), {}});
        for (const auto* e : entities_) doc_.sheets.push_back(Sheet{entity_parameters_sheet(e->name), {}});

        layout_interface_inputs();
        layout_parameters();
        layout_model();
        for (const auto* e : entities_) layout_entity_sheet(*e);
        layout_interface_outputs();
        return std::move(doc_);
    }

private:
    Sheet& sheet(std::string_view name) { return *doc_.find_sheet(name); }

    void name_cell(const std::string& label, const std::string& sheet_name, int column, int row) {
        doc_.names.push_back({dn(label), SingleCell{{sheet_name, column, row}}});
    }

    void name_row(const std::string& label, const std::string& sheet_name, int row) {
        doc_.names.push_back({dn(label), RowSegment{sheet_name, row, kFirstInstanceColumn, std::nullopt}});
    }

    const Value& value(const std::string& var) const { return table_.at(var); }

    std::size_t instances(const Variable& v) const {
        return v.is_repeating() ? model_.find_entity(*v.scope.entity)->size() : 1;
    }

    // `=<Entity>` across the instance columns, cached with the instance labels.
    void entity_row(Sheet& s, const EntityDef& e, int row) {
        s.set(1, row, CellContent::label(e.name));
        for (std::size_t i = 0; i < e.size(); ++i)
            s.set(kFirstInstanceColumn + static_cast<int>(i), row,
                  CellContent::formula("=" + dn(e.name), CellValue::of_text(e.instances[i])));
    }

    // `=<Name>` across `count` columns.
    void reference_row(Sheet& s, const Variable& v, int row, std::size_t count) {
        s.set(1, row, CellContent::label(v.name));
        const Value& val = value(v.name);
        for (std::size_t i = 0; i < count; ++i)
            s.set(kFirstInstanceColumn + static_cast<int>(i), row,
                  CellContent::formula("=" + dn(v.name), CellValue::of(val.at(i))), style_of(v));
    }

    void layout_interface_inputs() {
        Sheet& s = sheet(kInterfaceSheet);
        s.set(1, 1, CellContent::label("Interface"));
        s.set(1, 3, CellContent::label("Input Variables"));
        int row = 4;
        for (const auto& v : model_.variables) {
            if (v.kind != VarKind::Input) continue;
            s.set(1, row, CellContent::label(v.name));
            s.set(2, row, CellContent::value(value(v.name).scalar_value()), style_of(v));
            name_cell(v.name, s.name, 2, row);
            ++row;
        }
        outputs_row_ = row + 2;
    }

    void layout_interface_outputs() {
        Sheet& s = sheet(kInterfaceSheet);
        int row = outputs_row_;
        s.set(1, row++, CellContent::label("Output Variables"));
        for (const auto* e : entities_) {
            std::vector<const Variable*> outs;
            for (const auto& v : model_.variables)
                if (v.is_output && v.scope.entity == e->name) outs.push_back(&v);
            if (outs.empty()) continue;
            entity_row(s, *e, row++);
            for (const auto* v : outs) reference_row(s, *v, row++, e->size());
        }
        for (const auto& v : model_.variables)
            if (v.is_output && !v.is_repeating()) reference_row(s, v, row++, 1);
    }

    void layout_parameters() {
        std::vector<const Variable*> scalars;
        for (const auto& v : model_.variables)
            if (v.kind == VarKind::Parameter && !v.is_repeating()) scalars.push_back(&v);
        std::sort(scalars.begin(), scalars.end(), less_label);

        Sheet& s = sheet(kParametersSheet);
        s.set(1, 1, CellContent::label(std::string(kParametersSheet)));
        int row = 3;
        for (const auto* v : scalars) {
            s.set(1, row, CellContent::label(v->name));
            s.set(2, row, CellContent::value(value(v->name).scalar_value()), style_of(*v));
            name_cell(v->name, s.name, 2, row);
            ++row;
        }

        for (const auto* e : entities_) {
            Sheet& ps = sheet(entity_parameters_sheet(e->name));
            ps.set(1, 1, CellContent::label(ps.name));
            int prow = 4;
            ps.set(1, prow, CellContent::label(e->name));
            for (std::size_t i = 0; i < e->size(); ++i)
                ps.set(kFirstInstanceColumn + static_cast<int>(i), prow, CellContent::label(e->instances[i]));
            name_row(e->name, ps.name, prow);
            ++prow;
            std::vector<const Variable*> params;
            for (const auto& v : model_.variables)
                if (v.kind != VarKind::Calculated && v.scope.entity == e->name) params.push_back(&v);
            std::sort(params.begin(), params.end(), less_label);
            for (const auto* v : params) {
                ps.set(1, prow, CellContent::label(v->name));
                const Value& val = value(v->name);
                for (std::size_t i = 0; i < val.values.size(); ++i)
                    ps.set(kFirstInstanceColumn + static_cast<int>(i), prow, CellContent::value(val.values[i]),
                           style_of(*v));
                name_row(v->name, ps.name, prow);
                ++prow;
            }
        }
    }

    void layout_model() {
        Sheet& s = sheet(kModelSheet);
        s.set(1, 1, CellContent::label(std::string(kModelSheet)));
        int row = 3;
        for (const auto& name : vm_.topo_order) {
            const Variable& v = *model_.find_variable(name);
            if (!v.definition || v.is_repeating()) continue;
            Operands ops;
            std::set<std::string> entity_rows;
            int width = 1;
            for (const auto& used : free_vars(*v.definition)) {
                const Variable& u = *model_.find_variable(used);
                if (!u.is_repeating()) {
                    reference_row(s, u, row, 1);
                    ops.cell[used] = sheet::Node::cell(kFirstInstanceColumn, row);
                    ++row;
                    continue;
                }
                const EntityDef& e = *model_.find_entity(*u.scope.entity);
                if (entity_rows.insert(e.name).second) entity_row(s, e, row++);
                reference_row(s, u, row, e.size());
                ops.vector[used] = sheet::Node::rows(row, row);
                width = std::max(width, static_cast<int>(e.size()));
                ++row;
            }
            CellStyle def = style_of(v, true);
            s.set(1, row, CellContent::label(v.name));
            s.set(kFirstInstanceColumn, row,
                  CellContent::formula(sheet::print(definition_formula(*v.definition, ops)),
                                       CellValue::of(value(v.name).scalar_value())),
                  def);
            if (!ops.vector.empty()) {
                // top border across the aggregated row width
                for (int c = 1; c <= kFirstInstanceColumn + width - 1; ++c) {
                    Cell& cell = s.cells[{row, c}];
                    cell.style.border_top = true;
                }
            }
            name_cell(v.name, s.name, kFirstInstanceColumn, row);
            row += 2;
        }
    }

    void layout_entity_sheet(const EntityDef& e) {
        Sheet& s = sheet(e.name);
        s.set(1, 1, CellContent::label("Repeated sub-model"));
        entity_row(s, e, 3);
        int row = 5;
        for (const auto& name : vm_.topo_order) {
            const Variable& v = *model_.find_variable(name);
            if (!v.definition || v.scope.entity != e.name) continue;
            Operands ops;
            std::vector<std::string> refs;
            cell_references(*v.definition, refs);
            for (const auto& used : refs) {
                reference_row(s, *model_.find_variable(used), row, e.size());
                ops.cell[used] = sheet::Node::cell(kFirstInstanceColumn, row);
                ++row;
            }
            for (const auto& used : free_vars(*v.definition))
                if (model_.find_variable(used)->is_repeating()) ops.vector[used] = sheet::Node::named(dn(used));

            // Column B is written once; the other instances are its copy.
            sheet::Node first = definition_formula(*v.definition, ops);
            s.set(1, row, CellContent::label(v.name));
            const Value& val = value(v.name);
            for (std::size_t i = 0; i < e.size(); ++i) {
                sheet::Node f = sheet::shift_columns(first, static_cast<int>(i));
                s.set(kFirstInstanceColumn + static_cast<int>(i), row,
                      CellContent::formula(sheet::print(f), CellValue::of(val.at(i))), style_of(v, true));
            }
            name_row(v.name, s.name, row);
            row += 2;
        }
    }

    const ValidatedModel& vm_;
    const Model& model_;
    const ValueTable& table_;
    std::vector<const EntityDef*> entities_;
    WorkbookDoc doc_;
    int outputs_row_ = 7;
};

}  // namespace

WorkbookDoc generate(const ValidatedModel& vm, const Overrides& inputs) {
    ValueTable table = evaluate(vm, inputs);
    return Generator(vm, table).run();
}

}  // namespace ssmi
