#include "stormlet/simulate.hpp"

#include <random>

#include "stormlet/exceptions.hpp"
#include "stormlet/model_json.hpp"

namespace stormlet {

namespace {

bool isAbsorbing(ExplicitModel const& model, uint32_t state) {
    if (model.matrix.rowGroupSize(state) != 1) {
        return false;
    }
    auto row = model.matrix.row(model.matrix.rowGroupBegin(state));
    return row.size() == 1 && row[0].column == state && row[0].lower == 1.0;
}

/// 53-bit uniform double in [0, 1); avoids the implementation-defined
/// std::uniform_real_distribution.
double nextUniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

} // namespace

std::vector<Trace> simulate(ExplicitModel const& model, Scheduler const* scheduler,
                            SimulationOptions const& options) {
    if (model.kind == ModelKind::Imdp) {
        throw UnsupportedError("simulate: interval models have no point dynamics");
    }
    if (scheduler && scheduler->choices.size() != model.numStates()) {
        throw ModelError("simulate: scheduler has wrong length");
    }

    std::vector<Trace> traces;
    traces.reserve(options.runs);
    for (uint64_t run = 0; run < options.runs; ++run) {
        std::seed_seq seedSequence{options.seed, run};
        std::mt19937_64 rng(seedSequence);

        Trace trace;
        trace.seed = options.seed;
        std::map<std::string, double> accumulated;
        for (auto const& [name, structure] : model.rewards) {
            (void)structure;
            accumulated[name] = 0.0;
        }

        uint32_t state = static_cast<uint32_t>(model.firstInitialState());
        for (uint64_t step = 0; step < options.maxSteps; ++step) {
            if (isAbsorbing(model, state)) {
                break;
            }
            std::size_t groupSize = model.matrix.rowGroupSize(state);
            uint32_t choice;
            if (scheduler) {
                choice = scheduler->choices[state];
                if (choice >= groupSize) {
                    throw ModelError("simulate: scheduler choice out of range at state " + std::to_string(state));
                }
            } else {
                choice = static_cast<uint32_t>(nextUniform(rng) * static_cast<double>(groupSize));
                if (choice >= groupSize) {
                    choice = static_cast<uint32_t>(groupSize) - 1;
                }
            }
            uint64_t rowIndex = model.matrix.rowGroupBegin(state) + choice;

            for (auto const& [name, structure] : model.rewards) {
                accumulated[name] += model.rewardOf(structure, state, rowIndex);
            }

            TraceStep traceStep;
            traceStep.state = state;
            if (model.choiceLabels) {
                traceStep.action = (*model.choiceLabels)[rowIndex];
            }
            traceStep.rewards = accumulated;
            trace.steps.push_back(std::move(traceStep));

            double draw = nextUniform(rng);
            auto row = model.matrix.row(rowIndex);
            double cumulative = 0.0;
            uint32_t successor = row.back().column;
            for (auto const& entry : row) {
                cumulative += entry.lower;
                if (draw < cumulative) {
                    successor = entry.column;
                    break;
                }
            }
            state = successor;
        }
        TraceStep last;
        last.state = state;
        last.rewards = accumulated;
        trace.steps.push_back(std::move(last));
        traces.push_back(std::move(trace));
    }
    return traces;
}

std::string writeTracesJson(std::vector<Trace> const& traces) {
    std::string out;
    for (auto const& trace : traces) {
        out += "{\"seed\": " + std::to_string(trace.seed) + ", \"steps\": [";
        for (std::size_t i = 0; i < trace.steps.size(); ++i) {
            auto const& step = trace.steps[i];
            if (i > 0) {
                out += ", ";
            }
            out += "{\"state\": " + std::to_string(step.state);
            if (!step.action.empty()) {
                out += ", \"action\": \"" + step.action + "\"";
            }
            out += ", \"reward\": {";
            bool first = true;
            for (auto const& [name, value] : step.rewards) {
                if (!first) {
                    out += ", ";
                }
                out += "\"" + name + "\": " + formatDouble(value);
                first = false;
            }
            out += "}}";
        }
        out += "]}\n";
    }
    return out;
}

} // namespace stormlet
