#pragma once

#include <string>
#include <vector>

#include "stormlet/model.hpp"

namespace stormlet {

/// Row-sum tolerance for point-valued distributions.
inline constexpr double kRowSumTolerance = 1e-10;

/// Diagnoses violations of the structural model invariants. Returns an empty
/// list iff the model is valid; never throws.
std::vector<std::string> validate(ExplicitModel const& model);

/// Throws ModelError with the first violation if the model is invalid.
void requireValid(ExplicitModel const& model, std::string const& context);

struct ModelCounts {
    std::size_t states = 0;
    std::size_t transitions = 0; // stored nonzero matrix entries
    std::size_t choices = 0;     // matrix rows
    std::size_t distinctChoiceLabels = 0;
    std::size_t distinctLabels = 0;
    std::size_t observationCount = 0; // pomdp only
};

ModelCounts counts(ExplicitModel const& model);

/// One-line human-readable model description.
std::string summary(ExplicitModel const& model);

/// Applies a memoryless deterministic scheduler to an MDP, producing the
/// induced DTMC. Labels, state rewards and valuations are carried over; the
/// selected choice's reward becomes the induced choice reward.
ExplicitModel applyScheduler(ExplicitModel const& model, Scheduler const& scheduler);

} // namespace stormlet
