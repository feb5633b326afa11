#pragma once

#include <string>
#include <vector>

#include "stormlet/model.hpp"
#include "stormlet/uncertain.hpp"

namespace stormlet {

enum class OrchardVariant { Mdp, Interval, Parametric, Pomdp, PomdpSteal };

/// Configuration of the Orchard game family. The dice is uniform over
/// |fruitTypes| + 2 outcomes (one per fruit type, basket, raven).
struct OrchardConfig {
    std::vector<std::string> fruitTypes = {"APPLE", "CHERRY", "PEAR", "PLUM"};
    int fruitsPerTree = 4;
    int ravenDistance = 5;
    bool diagnosticLabels = false;
    /// Emit "allApplesPicked", "allCherriesPicked", ... labels (tree empty
    /// while the raven is still away).
    bool allPickedLabels = false;
    OrchardVariant variant = OrchardVariant::Mdp;
    double intervalEpsilon = 0.0; // Interval variant: dice probabilities +- epsilon
    int stealCount = 0;           // PomdpSteal variant: hidden pre-game steal steps
    std::size_t maxSize = 1000000;
};

/// Standard fruit names used when only a type count is given.
std::vector<std::string> orchardFruitNames(int count);

/// Builds the configured variant (point MDP, interval MDP, or POMDP).
/// Use orchardParametric for the parametric variant.
ExplicitModel orchardModel(OrchardConfig const& config);

/// Two-fruit parametric variant: fruit outcomes carry parameter p, the basket
/// q, and the raven 1 - 2p - q.
ParametricModel orchardParametric(OrchardConfig const& config);

} // namespace stormlet
