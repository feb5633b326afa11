#include "stormlet/model_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_ops.hpp"

using nlohmann::json;

namespace stormlet {

std::string formatDouble(double value, int significantDigits) {
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", significantDigits, value);
    return buffer;
}

namespace {

void appendEscaped(std::string& out, std::string const& text) {
    out.push_back('"');
    for (char c : text) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buffer[8];
                std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                out += buffer;
            } else {
                out.push_back(c);
            }
        }
    }
    out.push_back('"');
}

} // namespace

std::string writeModelJson(ExplicitModel const& model) {
    std::string out;
    out.reserve(model.numTransitions() * 16 + 1024);
    out += "{\n";
    out += "  \"kind\": \"" + toString(model.kind) + "\",\n";
    out += "  \"numStates\": " + std::to_string(model.numStates()) + ",\n";

    out += "  \"initial\": [";
    bool first = true;
    for (std::size_t s : model.initialStates.toIndices()) {
        if (!first) {
            out += ", ";
        }
        out += std::to_string(s);
        first = false;
    }
    out += "],\n";

    out += "  \"rowGroupOffsets\": [";
    for (std::size_t i = 0; i < model.matrix.rowGroupOffsets().size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(model.matrix.rowGroupOffsets()[i]);
    }
    out += "],\n";

    out += "  \"rows\": [\n";
    for (std::size_t row = 0; row < model.numChoices(); ++row) {
        out += "    {";
        if (model.choiceLabels && !(*model.choiceLabels)[row].empty()) {
            out += "\"label\": ";
            appendEscaped(out, (*model.choiceLabels)[row]);
            out += ", ";
        }
        out += "\"entries\": [";
        bool firstEntry = true;
        for (auto const& entry : model.matrix.row(row)) {
            if (!firstEntry) {
                out += ", ";
            }
            out += "[" + std::to_string(entry.column) + ", ";
            if (entry.interval) {
                out += "[" + formatDouble(entry.lower) + ", " + formatDouble(entry.upper) + "]";
            } else {
                out += formatDouble(entry.lower);
            }
            out += "]";
            firstEntry = false;
        }
        out += "]}";
        out += row + 1 < model.numChoices() ? ",\n" : "\n";
    }
    out += "  ],\n";

    out += "  \"labels\": {";
    first = true;
    for (auto const& [name, states] : model.labels) {
        if (!first) {
            out += ", ";
        }
        out += "\n    ";
        appendEscaped(out, name);
        out += ": [";
        bool firstIndex = true;
        for (std::size_t s : states.toIndices()) {
            if (!firstIndex) {
                out += ", ";
            }
            out += std::to_string(s);
            firstIndex = false;
        }
        out += "]";
        first = false;
    }
    out += first ? "}" : "\n  }";

    if (!model.rewards.empty()) {
        out += ",\n  \"rewards\": {";
        first = true;
        for (auto const& [name, structure] : model.rewards) {
            if (!first) {
                out += ", ";
            }
            out += "\n    ";
            appendEscaped(out, name);
            out += ": {";
            bool firstPart = true;
            auto emitVector = [&](std::string const& key, std::vector<double> const& values) {
                if (!firstPart) {
                    out += ", ";
                }
                out += "\"" + key + "\": [";
                for (std::size_t i = 0; i < values.size(); ++i) {
                    if (i > 0) {
                        out += ", ";
                    }
                    out += formatDouble(values[i]);
                }
                out += "]";
                firstPart = false;
            };
            if (structure.stateRewards) {
                emitVector("state", *structure.stateRewards);
            }
            if (structure.choiceRewards) {
                emitVector("choice", *structure.choiceRewards);
            }
            out += "}";
            first = false;
        }
        out += "\n  }";
    }

    if (model.observations) {
        out += ",\n  \"observations\": [";
        for (std::size_t i = 0; i < model.observations->size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += std::to_string((*model.observations)[i]);
        }
        out += "]";
    }

    if (model.stateValuations) {
        out += ",\n  \"valuations\": [\n";
        for (std::size_t s = 0; s < model.stateValuations->size(); ++s) {
            out += "    {";
            bool firstVar = true;
            for (auto const& [name, value] : (*model.stateValuations)[s]) {
                if (!firstVar) {
                    out += ", ";
                }
                appendEscaped(out, name);
                out += ": " + std::to_string(value);
                firstVar = false;
            }
            out += "}";
            out += s + 1 < model.stateValuations->size() ? ",\n" : "\n";
        }
        out += "  ]";
    }

    out += "\n}\n";
    return out;
}

namespace {

[[noreturn]] void schemaError(std::string const& path, std::string const& message) {
    throw ParseError("model JSON: " + path + ": " + message);
}

} // namespace

ExplicitModel readModelJson(std::string const& text) {
    json document;
    try {
        document = json::parse(text);
    } catch (json::parse_error const& error) {
        throw ParseError(std::string("model JSON: ") + error.what());
    }
    if (!document.is_object()) {
        schemaError("$", "expected an object");
    }

    ExplicitModel model;
    if (!document.contains("kind") || !document["kind"].is_string()) {
        schemaError("kind", "missing or not a string");
    }
    model.kind = modelKindFromString(document["kind"].get<std::string>());

    if (!document.contains("numStates") || !document["numStates"].is_number_unsigned()) {
        schemaError("numStates", "missing or not a non-negative integer");
    }
    std::size_t numStates = document["numStates"].get<std::size_t>();

    if (!document.contains("rowGroupOffsets") || !document["rowGroupOffsets"].is_array()) {
        schemaError("rowGroupOffsets", "missing or not an array");
    }
    auto const& groupOffsets = document["rowGroupOffsets"];
    if (groupOffsets.size() != numStates + 1) {
        schemaError("rowGroupOffsets", "expected numStates+1 entries");
    }

    if (!document.contains("rows") || !document["rows"].is_array()) {
        schemaError("rows", "missing or not an array");
    }
    auto const& rows = document["rows"];

    std::vector<std::string> choiceLabels;
    bool anyChoiceLabel = false;
    std::size_t nextRow = 0;
    for (std::size_t state = 0; state < numStates; ++state) {
        uint64_t begin = groupOffsets[state].get<uint64_t>();
        uint64_t end = groupOffsets[state + 1].get<uint64_t>();
        if (begin != nextRow || end < begin) {
            schemaError("rowGroupOffsets[" + std::to_string(state) + "]", "offsets not monotone");
        }
        model.matrix.newRowGroup();
        for (uint64_t rowIndex = begin; rowIndex < end; ++rowIndex) {
            if (rowIndex >= rows.size()) {
                schemaError("rows", "fewer rows than rowGroupOffsets require");
            }
            auto const& row = rows[rowIndex];
            std::string path = "rows[" + std::to_string(rowIndex) + "]";
            if (!row.is_object() || !row.contains("entries") || !row["entries"].is_array()) {
                schemaError(path, "expected an object with an entries array");
            }
            model.matrix.newRow();
            if (row.contains("label")) {
                if (!row["label"].is_string()) {
                    schemaError(path + ".label", "not a string");
                }
                choiceLabels.push_back(row["label"].get<std::string>());
                anyChoiceLabel = true;
            } else {
                choiceLabels.push_back("");
            }
            for (std::size_t e = 0; e < row["entries"].size(); ++e) {
                auto const& pair = row["entries"][e];
                std::string entryPath = path + ".entries[" + std::to_string(e) + "]";
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned()) {
                    schemaError(entryPath, "expected [column, value]");
                }
                uint32_t column = pair[0].get<uint32_t>();
                if (pair[1].is_number()) {
                    double value = pair[1].get<double>();
                    if (value < 0.0) {
                        schemaError(entryPath, "negative probability");
                    }
                    model.matrix.pushEntry(MatrixEntry::point(column, value));
                } else if (pair[1].is_array() && pair[1].size() == 2 && pair[1][0].is_number() &&
                           pair[1][1].is_number()) {
                    double lo = pair[1][0].get<double>();
                    double hi = pair[1][1].get<double>();
                    if (lo < 0.0 || hi < lo || hi > 1.0) {
                        schemaError(entryPath, "invalid probability interval");
                    }
                    model.matrix.pushEntry(MatrixEntry::bounded(column, lo, hi));
                } else {
                    schemaError(entryPath, "value must be a number or [lo, hi]");
                }
            }
        }
        nextRow = end;
    }
    if (nextRow != rows.size()) {
        schemaError("rows", "more rows than rowGroupOffsets reference");
    }
    if (anyChoiceLabel) {
        model.choiceLabels = std::move(choiceLabels);
    }

    model.initialStates = BitVector(numStates);
    if (!document.contains("initial") || !document["initial"].is_array()) {
        schemaError("initial", "missing or not an array");
    }
    for (auto const& index : document["initial"]) {
        if (!index.is_number_unsigned() || index.get<std::size_t>() >= numStates) {
            schemaError("initial", "state index out of range");
        }
        model.initialStates.set(index.get<std::size_t>());
    }

    if (document.contains("labels")) {
        if (!document["labels"].is_object()) {
            schemaError("labels", "not an object");
        }
        for (auto const& [name, indices] : document["labels"].items()) {
            if (!indices.is_array()) {
                schemaError("labels." + name, "not an array");
            }
            BitVector states(numStates);
            for (auto const& index : indices) {
                if (!index.is_number_unsigned() || index.get<std::size_t>() >= numStates) {
                    schemaError("labels." + name, "state index out of range");
                }
                states.set(index.get<std::size_t>());
            }
            model.labels.emplace(name, std::move(states));
        }
    }

    if (document.contains("rewards")) {
        if (!document["rewards"].is_object()) {
            schemaError("rewards", "not an object");
        }
        for (auto const& [name, parts] : document["rewards"].items()) {
            if (!parts.is_object()) {
                schemaError("rewards." + name, "not an object");
            }
            RewardStructure structure;
            auto readVector = [&](std::string const& key) -> std::optional<std::vector<double>> {
                if (!parts.contains(key)) {
                    return std::nullopt;
                }
                if (!parts[key].is_array()) {
                    schemaError("rewards." + name + "." + key, "not an array");
                }
                std::vector<double> values;
                for (auto const& value : parts[key]) {
                    if (!value.is_number()) {
                        schemaError("rewards." + name + "." + key, "not a number");
                    }
                    values.push_back(value.get<double>());
                }
                return values;
            };
            structure.stateRewards = readVector("state");
            structure.choiceRewards = readVector("choice");
            model.rewards.emplace(name, std::move(structure));
        }
    }

    if (document.contains("observations")) {
        if (!document["observations"].is_array()) {
            schemaError("observations", "not an array");
        }
        std::vector<uint32_t> observations;
        for (auto const& value : document["observations"]) {
            if (!value.is_number_unsigned()) {
                schemaError("observations", "not a non-negative integer");
            }
            observations.push_back(value.get<uint32_t>());
        }
        model.observations = std::move(observations);
    }

    if (document.contains("valuations")) {
        if (!document["valuations"].is_array()) {
            schemaError("valuations", "not an array");
        }
        std::vector<StateValuation> valuations;
        for (auto const& object : document["valuations"]) {
            if (!object.is_object()) {
                schemaError("valuations", "entries must be objects");
            }
            StateValuation valuation;
            for (auto const& [name, value] : object.items()) {
                if (!value.is_number_integer()) {
                    schemaError("valuations." + name, "not an integer");
                }
                valuation.emplace(name, value.get<int64_t>());
            }
            valuations.push_back(std::move(valuation));
        }
        model.stateValuations = std::move(valuations);
    }

    auto violations = validate(model);
    if (!violations.empty()) {
        throw ParseError("model JSON: invariant violation: " + violations.front());
    }
    return model;
}

std::string readTextFile(std::string const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void writeTextFile(std::string const& path, std::string const& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << content;
}

ExplicitModel readModelFile(std::string const& path) {
    return readModelJson(readTextFile(path));
}

void writeModelFile(ExplicitModel const& model, std::string const& path) {
    writeTextFile(path, writeModelJson(model));
}

std::string writeSchedulerJson(Scheduler const& scheduler) {
    std::string out = "{\"choices\": [";
    for (std::size_t i = 0; i < scheduler.choices.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(scheduler.choices[i]);
    }
    out += "]}\n";
    return out;
}

Scheduler readSchedulerJson(std::string const& text) {
    json document;
    try {
        document = json::parse(text);
    } catch (json::parse_error const& error) {
        throw ParseError(std::string("scheduler JSON: ") + error.what());
    }
    if (!document.is_object() || !document.contains("choices") || !document["choices"].is_array()) {
        throw ParseError("scheduler JSON: expected {\"choices\": [...]}");
    }
    Scheduler scheduler;
    for (auto const& value : document["choices"]) {
        if (!value.is_number_unsigned()) {
            throw ParseError("scheduler JSON: choices must be non-negative integers");
        }
        scheduler.choices.push_back(value.get<uint32_t>());
    }
    return scheduler;
}

Scheduler readSchedulerFile(std::string const& path) {
    return readSchedulerJson(readTextFile(path));
}

void writeSchedulerFile(Scheduler const& scheduler, std::string const& path) {
    writeTextFile(path, writeSchedulerJson(scheduler));
}

std::string writeValuesJson(std::vector<double> const& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        if (std::isinf(values[i])) {
            out += values[i] > 0 ? "\"inf\"" : "\"-inf\"";
        } else {
            out += formatDouble(values[i]);
        }
    }
    out += "]\n";
    return out;
}

std::vector<double> readValuesJson(std::string const& text) {
    json document;
    try {
        document = json::parse(text);
    } catch (json::parse_error const& error) {
        throw ParseError(std::string("values JSON: ") + error.what());
    }
    if (!document.is_array()) {
        throw ParseError("values JSON: expected an array");
    }
    std::vector<double> values;
    for (auto const& value : document) {
        if (value.is_string()) {
            std::string s = value.get<std::string>();
            if (s == "inf") {
                values.push_back(std::numeric_limits<double>::infinity());
            } else if (s == "-inf") {
                values.push_back(-std::numeric_limits<double>::infinity());
            } else {
                throw ParseError("values JSON: unknown string value " + s);
            }
        } else if (value.is_number()) {
            values.push_back(value.get<double>());
        } else {
            throw ParseError("values JSON: expected numbers");
        }
    }
    return values;
}

} // namespace stormlet
