#pragma once

#include <string>
#include <vector>

#include "stormlet/model.hpp"

namespace stormlet {

/// Partition of the state space into dense blocks.
struct Partition {
    std::vector<uint32_t> blockOfState;
    std::size_t blockCount = 0;
};

struct BisimulationOptions {
    std::vector<std::string> preservedLabels; // empty = preserve all labels
    bool preserveRewards = true;
    bool includeActionLabels = false; // add choice labels to the signature
};

/// Strong probabilistic bisimulation minimization by signature-based
/// partition refinement. Returns the quotient model (one state per block,
/// one choice per distinct lifted distribution) and the partition.
std::pair<ExplicitModel, Partition> bisimulationQuotient(ExplicitModel const& model,
                                                         BisimulationOptions const& options = BisimulationOptions());

/// JSON array of block indices per state.
std::string writePartitionJson(Partition const& partition);

} // namespace stormlet
