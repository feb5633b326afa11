#include "stormlet/bisimulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "stormlet/exceptions.hpp"

namespace stormlet {

namespace {

/// Probabilities compared after rounding to 12 decimal digits; lifted
/// distributions hash on the rounded text form.
std::string roundedProbability(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.12f", value);
    return buffer;
}

} // namespace

std::pair<ExplicitModel, Partition> bisimulationQuotient(ExplicitModel const& model,
                                                         BisimulationOptions const& options) {
    if (model.kind != ModelKind::Dtmc && model.kind != ModelKind::Mdp) {
        throw UnsupportedError("bisimulation: requires a point-valued dtmc/mdp, got " + toString(model.kind));
    }
    std::size_t n = model.numStates();

    std::vector<std::string> preserved = options.preservedLabels;
    if (preserved.empty()) {
        for (auto const& [name, states] : model.labels) {
            (void)states;
            preserved.push_back(name);
        }
    } else {
        for (auto const& name : preserved) {
            if (!model.hasLabel(name)) {
                throw ModelError("bisimulation: unknown label " + name);
            }
        }
    }

    // initial partition: preserved labels plus (optionally) state rewards
    Partition partition;
    partition.blockOfState.assign(n, 0);
    {
        std::map<std::string, uint32_t> blockOfSignature;
        for (std::size_t s = 0; s < n; ++s) {
            std::string signature;
            for (auto const& name : preserved) {
                signature += model.labels.at(name).get(s) ? '1' : '0';
            }
            if (options.preserveRewards) {
                for (auto const& [name, structure] : model.rewards) {
                    if (structure.stateRewards) {
                        signature += "|" + name + ":" + roundedProbability((*structure.stateRewards)[s]);
                    }
                }
            }
            auto [it, inserted] = blockOfSignature.emplace(signature, static_cast<uint32_t>(blockOfSignature.size()));
            (void)inserted;
            partition.blockOfState[s] = it->second;
        }
        partition.blockCount = blockOfSignature.size();
    }

    // refine until the block count is stable; it can only grow
    std::vector<double> lifted;
    while (true) {
        std::unordered_map<std::string, uint32_t> blockOfSignature;
        std::vector<uint32_t> next(n, 0);
        for (std::size_t s = 0; s < n; ++s) {
            // signature: old block plus the set of lifted choice distributions
            std::set<std::string> choiceSignatures;
            for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
                std::map<uint32_t, double> distribution;
                for (auto const& entry : model.matrix.row(row)) {
                    distribution[partition.blockOfState[entry.column]] += entry.lower;
                }
                std::string choice;
                if (options.includeActionLabels && model.choiceLabels) {
                    choice += (*model.choiceLabels)[row] + "@";
                }
                if (options.preserveRewards) {
                    for (auto const& [name, structure] : model.rewards) {
                        if (structure.choiceRewards) {
                            choice += name + ":" + roundedProbability((*structure.choiceRewards)[row]) + ";";
                        }
                    }
                }
                for (auto const& [block, probability] : distribution) {
                    choice += std::to_string(block) + "=" + roundedProbability(probability) + ",";
                }
                choiceSignatures.insert(std::move(choice));
            }
            std::string signature = std::to_string(partition.blockOfState[s]) + "#";
            for (auto const& choice : choiceSignatures) {
                signature += choice + "/";
            }
            auto [it, inserted] = blockOfSignature.emplace(std::move(signature),
                                                           static_cast<uint32_t>(blockOfSignature.size()));
            (void)inserted;
            next[s] = it->second;
        }
        bool stable = blockOfSignature.size() == partition.blockCount;
        partition.blockOfState = std::move(next);
        partition.blockCount = blockOfSignature.size();
        if (stable) {
            break;
        }
    }

    // renumber blocks by their first state so the quotient ordering is stable
    {
        std::vector<uint32_t> renumber(partition.blockCount, UINT32_MAX);
        uint32_t fresh = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (renumber[partition.blockOfState[s]] == UINT32_MAX) {
                renumber[partition.blockOfState[s]] = fresh++;
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            partition.blockOfState[s] = renumber[partition.blockOfState[s]];
        }
    }

    std::vector<uint32_t> representative(partition.blockCount, UINT32_MAX);
    for (std::size_t s = 0; s < n; ++s) {
        if (representative[partition.blockOfState[s]] == UINT32_MAX) {
            representative[partition.blockOfState[s]] = static_cast<uint32_t>(s);
        }
    }

    ExplicitModel quotient;
    quotient.kind = model.kind;
    std::vector<std::string> quotientChoiceLabels;
    std::vector<double> quotientChoiceRewards;
    std::map<std::string, std::vector<double>> quotientChoiceRewardsByName;

    for (std::size_t block = 0; block < partition.blockCount; ++block) {
        uint32_t s = representative[block];
        quotient.matrix.newRowGroup();
        // one choice per distinct lifted distribution (plus reward/label key)
        std::set<std::string> emitted;
        for (uint64_t row = model.matrix.rowGroupBegin(s); row < model.matrix.rowGroupEnd(s); ++row) {
            std::map<uint32_t, double> distribution;
            for (auto const& entry : model.matrix.row(row)) {
                distribution[partition.blockOfState[entry.column]] += entry.lower;
            }
            std::string key;
            if (options.includeActionLabels && model.choiceLabels) {
                key += (*model.choiceLabels)[row] + "@";
            }
            if (options.preserveRewards) {
                for (auto const& [name, structure] : model.rewards) {
                    if (structure.choiceRewards) {
                        key += name + ":" + roundedProbability((*structure.choiceRewards)[row]) + ";";
                    }
                }
            }
            for (auto const& [target, probability] : distribution) {
                key += std::to_string(target) + "=" + roundedProbability(probability) + ",";
            }
            if (!emitted.insert(key).second) {
                continue;
            }
            quotient.matrix.newRow();
            if (model.choiceLabels) {
                quotientChoiceLabels.push_back((*model.choiceLabels)[row]);
            }
            for (auto const& [name, structure] : model.rewards) {
                if (structure.choiceRewards) {
                    quotientChoiceRewardsByName[name].push_back(options.preserveRewards
                                                                    ? (*structure.choiceRewards)[row]
                                                                    : 0.0);
                }
            }
            for (auto const& [target, probability] : distribution) {
                quotient.matrix.pushEntry(MatrixEntry::point(target, probability));
            }
        }
    }

    quotient.initialStates = BitVector(partition.blockCount);
    for (std::size_t s = 0; s < n; ++s) {
        if (model.initialStates.get(s)) {
            quotient.initialStates.set(partition.blockOfState[s]);
        }
    }
    for (auto const& name : preserved) {
        BitVector bits(partition.blockCount);
        BitVector const& original = model.labels.at(name);
        for (std::size_t s = 0; s < n; ++s) {
            if (original.get(s)) {
                bits.set(partition.blockOfState[s]);
            }
        }
        quotient.labels.emplace(name, std::move(bits));
    }
    if (options.preserveRewards) {
        for (auto const& [name, structure] : model.rewards) {
            RewardStructure quotientStructure;
            if (structure.stateRewards) {
                std::vector<double> stateRewards(partition.blockCount, 0.0);
                for (std::size_t block = 0; block < partition.blockCount; ++block) {
                    stateRewards[block] = (*structure.stateRewards)[representative[block]];
                }
                quotientStructure.stateRewards = std::move(stateRewards);
            }
            if (structure.choiceRewards) {
                quotientStructure.choiceRewards = quotientChoiceRewardsByName.at(name);
            }
            quotient.rewards.emplace(name, std::move(quotientStructure));
        }
    }
    if (model.choiceLabels && options.includeActionLabels) {
        quotient.choiceLabels = std::move(quotientChoiceLabels);
    }
    return {std::move(quotient), std::move(partition)};
}

std::string writePartitionJson(Partition const& partition) {
    std::string out = "[";
    for (std::size_t i = 0; i < partition.blockOfState.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(partition.blockOfState[i]);
    }
    out += "]\n";
    return out;
}

} // namespace stormlet
