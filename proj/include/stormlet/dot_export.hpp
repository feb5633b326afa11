#pragma once

#include <optional>
#include <string>

#include "stormlet/model.hpp"

namespace stormlet {

/// Renders the model as a DOT digraph: one ellipse per state (annotated with
/// its labels and, when given, the result value), one box per choice
/// (annotated with the action name and nonzero rewards), and
/// probability-labeled edges from choices to successors. Choices selected by
/// the scheduler are highlighted.
std::string exportDot(ExplicitModel const& model, CheckResult const* result = nullptr,
                      Scheduler const* scheduler = nullptr);

} // namespace stormlet
