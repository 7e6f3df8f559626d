#pragma once

#include <string>

#include "ssmi/validator.hpp"

namespace ssmi {

// Formula Diagram in Graphviz DOT. Repeating variables sit inside a dashed
// cluster per entity, labeled top right with the entity name. Edges run from
// the defining (used) variable to the defined one.
//
// Node styles: input = plain box, parameter = rounded box, calculated =
// ellipse, output = double-bordered ellipse.
std::string to_dot(const ValidatedModel& vm);

}  // namespace ssmi
