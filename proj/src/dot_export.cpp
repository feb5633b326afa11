#include "stormlet/dot_export.hpp"

#include <sstream>

#include "stormlet/model_json.hpp"

namespace stormlet {

namespace {

std::string escapeDot(std::string const& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        out.push_back(c);
    }
    return out;
}

} // namespace

std::string exportDot(ExplicitModel const& model, CheckResult const* result, Scheduler const* scheduler) {
    std::ostringstream out;
    out << "digraph model {\n";
    out << "  rankdir=LR;\n";

    for (std::size_t state = 0; state < model.numStates(); ++state) {
        std::string label = std::to_string(state);
        for (auto const& [name, states] : model.labels) {
            if (states.get(state)) {
                label += "\\n" + escapeDot(name);
            }
        }
        if (result && state < result->values.size()) {
            label += "\\n" + formatDouble(result->values[state], 6);
        }
        out << "  s" << state << " [shape=ellipse, label=\"" << label << "\"";
        if (model.initialStates.size() == model.numStates() && model.initialStates.get(state)) {
            out << ", penwidth=2";
        }
        out << "];\n";
    }

    for (std::size_t state = 0; state < model.numStates(); ++state) {
        for (uint64_t rowIndex = model.matrix.rowGroupBegin(state); rowIndex < model.matrix.rowGroupEnd(state);
             ++rowIndex) {
            std::size_t localChoice = static_cast<std::size_t>(rowIndex - model.matrix.rowGroupBegin(state));
            std::string label;
            if (model.choiceLabels && !(*model.choiceLabels)[rowIndex].empty()) {
                label = escapeDot((*model.choiceLabels)[rowIndex]);
            } else {
                label = std::to_string(localChoice);
            }
            for (auto const& [name, structure] : model.rewards) {
                double reward = model.rewardOf(structure, state, rowIndex);
                if (reward != 0.0) {
                    label += "\\n" + escapeDot(name) + ": " + formatDouble(reward, 6);
                }
            }
            bool selected = scheduler && state < scheduler->choices.size() &&
                            scheduler->choices[state] == localChoice;
            out << "  c" << rowIndex << " [shape=box, style=filled, fillcolor=" << (selected ? "salmon" : "lightblue")
                << ", label=\"" << label << "\"];\n";
            out << "  s" << state << " -> c" << rowIndex;
            if (selected) {
                out << " [color=red, penwidth=2]";
            }
            out << ";\n";
            for (auto const& entry : model.matrix.row(rowIndex)) {
                out << "  c" << rowIndex << " -> s" << entry.column << " [label=\"";
                if (entry.interval) {
                    out << "[" << formatDouble(entry.lower, 6) << ", " << formatDouble(entry.upper, 6) << "]";
                } else {
                    out << formatDouble(entry.lower, 6);
                }
                out << "\"];\n";
            }
        }
    }

    out << "}\n";
    return out.str();
}

} // namespace stormlet
