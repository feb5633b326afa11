#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stormlet/model.hpp"

namespace stormlet {

struct TraceStep {
    uint32_t state = 0;
    std::string action;                     // empty on the final step
    std::map<std::string, double> rewards;  // accumulated up to this step
};

struct Trace {
    uint64_t seed = 0;
    std::vector<TraceStep> steps;
};

struct SimulationOptions {
    uint64_t seed = 0;
    uint64_t maxSteps = 10000;
    uint64_t runs = 1;
};

/// Seeded simulation runs through a point-valued model; the policy is either
/// a scheduler or uniformly random choice selection. Runs are reproducible
/// per (seed, run index); a run stops at maxSteps or at a state whose only
/// choice self-loops with probability one.
std::vector<Trace> simulate(ExplicitModel const& model, Scheduler const* scheduler, SimulationOptions const& options);

/// One JSON object per run, newline separated.
std::string writeTracesJson(std::vector<Trace> const& traces);

} // namespace stormlet
