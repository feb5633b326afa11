#include "stormlet/model.hpp"

#include "stormlet/exceptions.hpp"

namespace stormlet {

std::string toString(ModelKind kind) {
    switch (kind) {
    case ModelKind::Dtmc:
        return "dtmc";
    case ModelKind::Mdp:
        return "mdp";
    case ModelKind::Imdp:
        return "imdp";
    case ModelKind::Pomdp:
        return "pomdp";
    }
    return "?";
}

ModelKind modelKindFromString(std::string const& text) {
    if (text == "dtmc") {
        return ModelKind::Dtmc;
    }
    if (text == "mdp") {
        return ModelKind::Mdp;
    }
    if (text == "imdp") {
        return ModelKind::Imdp;
    }
    if (text == "pomdp") {
        return ModelKind::Pomdp;
    }
    throw ParseError("unknown model kind: " + text);
}

BitVector const& ExplicitModel::label(std::string const& name) const {
    auto it = labels.find(name);
    if (it == labels.end()) {
        throw ModelError("unknown label: " + name);
    }
    return it->second;
}

std::size_t ExplicitModel::firstInitialState() const {
    for (std::size_t s = 0; s < initialStates.size(); ++s) {
        if (initialStates.get(s)) {
            return s;
        }
    }
    throw ModelError("model has no initial state");
}

} // namespace stormlet
