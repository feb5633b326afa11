#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormlet/bitvector.hpp"

namespace stormlet {

enum class ModelKind { Dtmc, Mdp, Imdp, Pomdp };

std::string toString(ModelKind kind);
ModelKind modelKindFromString(std::string const& text);

/// Closed probability interval. Point probabilities are represented by
/// MatrixEntry with interval == false, not by degenerate intervals.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

struct MatrixEntry {
    uint32_t column = 0;
    bool interval = false;
    double lower = 0.0;
    double upper = 0.0;

    static MatrixEntry point(uint32_t column, double value) {
        return MatrixEntry{column, false, value, value};
    }
    static MatrixEntry bounded(uint32_t column, double lo, double hi) {
        return MatrixEntry{column, true, lo, hi};
    }
    /// Point value; for interval entries this is the lower endpoint.
    double value() const { return lower; }
};

/// Row-grouped sparse transition matrix: each state owns one row group with
/// one row per choice. Rows and groups are appended in order; the offset
/// arrays always satisfy the prefix invariants.
class SparseChoiceMatrix {
  public:
    void newRowGroup() { rowGroupOffsets_.push_back(rowGroupOffsets_.back()); }

    void newRow() {
        rowOffsets_.push_back(rowOffsets_.back());
        ++rowGroupOffsets_.back();
    }

    void pushEntry(MatrixEntry entry) {
        entries_.push_back(entry);
        ++rowOffsets_.back();
    }

    std::size_t numStates() const { return rowGroupOffsets_.size() - 1; }
    std::size_t numRows() const { return rowOffsets_.size() - 1; }
    std::size_t numEntries() const { return entries_.size(); }

    uint64_t rowGroupBegin(std::size_t state) const { return rowGroupOffsets_[state]; }
    uint64_t rowGroupEnd(std::size_t state) const { return rowGroupOffsets_[state + 1]; }
    std::size_t rowGroupSize(std::size_t state) const {
        return static_cast<std::size_t>(rowGroupEnd(state) - rowGroupBegin(state));
    }

    std::span<MatrixEntry const> row(std::size_t rowIndex) const {
        return std::span<MatrixEntry const>(entries_.data() + rowOffsets_[rowIndex],
                                            entries_.data() + rowOffsets_[rowIndex + 1]);
    }

    std::vector<uint64_t> const& rowGroupOffsets() const { return rowGroupOffsets_; }
    std::vector<uint64_t> const& rowOffsets() const { return rowOffsets_; }
    std::vector<MatrixEntry> const& entries() const { return entries_; }

  private:
    std::vector<uint64_t> rowGroupOffsets_{0};
    std::vector<uint64_t> rowOffsets_{0};
    std::vector<MatrixEntry> entries_;
};

/// Reward structure: optional per-state and per-choice vectors. Taking a
/// choice collects the state reward of its source plus the choice reward.
struct RewardStructure {
    std::optional<std::vector<double>> stateRewards;
    std::optional<std::vector<double>> choiceRewards;
};

using StateValuation = std::map<std::string, int64_t>;

struct ExplicitModel {
    ModelKind kind = ModelKind::Mdp;
    SparseChoiceMatrix matrix;
    BitVector initialStates;
    std::map<std::string, BitVector> labels;
    std::map<std::string, RewardStructure> rewards;
    std::optional<std::vector<std::string>> choiceLabels; // per row; "" = unlabeled
    std::optional<std::vector<StateValuation>> stateValuations;
    std::optional<std::vector<uint32_t>> observations; // pomdp only, per state

    std::size_t numStates() const { return matrix.numStates(); }
    std::size_t numChoices() const { return matrix.numRows(); }
    std::size_t numTransitions() const { return matrix.numEntries(); }

    bool hasLabel(std::string const& name) const { return labels.count(name) > 0; }
    BitVector const& label(std::string const& name) const;
    std::size_t firstInitialState() const;

    /// Reward collected when taking the given row from the given state.
    double rewardOf(RewardStructure const& structure, std::size_t state, std::size_t rowIndex) const {
        double result = 0.0;
        if (structure.stateRewards) {
            result += (*structure.stateRewards)[state];
        }
        if (structure.choiceRewards) {
            result += (*structure.choiceRewards)[rowIndex];
        }
        return result;
    }
};

/// Memoryless deterministic scheduler: local choice index per state.
struct Scheduler {
    std::vector<uint32_t> choices;
};

/// Per-state outcome of a check call. Probability results lie in [0, 1];
/// reward results may be +infinity. Certified methods also fill `bounds`.
struct CheckResult {
    std::vector<double> values;
    std::optional<Scheduler> scheduler;
    std::optional<std::vector<Interval>> bounds;

    double at(std::size_t state) const { return values[state]; }
};

} // namespace stormlet
