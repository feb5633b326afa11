#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace stormlet {

/// Fixed-length bit vector used for state sets. All binary operations require
/// operands of equal length and preserve it.
class BitVector {
  public:
    BitVector() = default;
    explicit BitVector(std::size_t length, bool value = false)
        : length_(length), words_((length + 63) / 64, value ? ~uint64_t(0) : 0) {
        trim();
    }

    std::size_t size() const { return length_; }

    bool get(std::size_t index) const {
        assert(index < length_);
        return (words_[index >> 6] >> (index & 63)) & 1;
    }

    void set(std::size_t index, bool value = true) {
        assert(index < length_);
        uint64_t mask = uint64_t(1) << (index & 63);
        if (value) {
            words_[index >> 6] |= mask;
        } else {
            words_[index >> 6] &= ~mask;
        }
    }

    std::size_t count() const {
        std::size_t result = 0;
        for (uint64_t word : words_) {
            result += static_cast<std::size_t>(__builtin_popcountll(word));
        }
        return result;
    }

    bool empty() const { return count() == 0; }
    bool full() const { return count() == length_; }

    BitVector operator&(BitVector const& other) const {
        assert(length_ == other.length_);
        BitVector result(length_);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            result.words_[i] = words_[i] & other.words_[i];
        }
        return result;
    }

    BitVector operator|(BitVector const& other) const {
        assert(length_ == other.length_);
        BitVector result(length_);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            result.words_[i] = words_[i] | other.words_[i];
        }
        return result;
    }

    BitVector operator~() const {
        BitVector result(length_);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            result.words_[i] = ~words_[i];
        }
        result.trim();
        return result;
    }

    bool operator==(BitVector const& other) const {
        return length_ == other.length_ && words_ == other.words_;
    }

    bool isSubsetOf(BitVector const& other) const {
        assert(length_ == other.length_);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & ~other.words_[i]) {
                return false;
            }
        }
        return true;
    }

    bool intersects(BitVector const& other) const {
        assert(length_ == other.length_);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & other.words_[i]) {
                return true;
            }
        }
        return false;
    }

    std::vector<std::size_t> toIndices() const {
        std::vector<std::size_t> result;
        result.reserve(count());
        for (std::size_t i = 0; i < length_; ++i) {
            if (get(i)) {
                result.push_back(i);
            }
        }
        return result;
    }

  private:
    void trim() {
        if (length_ & 63) {
            words_.back() &= (uint64_t(1) << (length_ & 63)) - 1;
        }
    }

    std::size_t length_ = 0;
    std::vector<uint64_t> words_;
};

} // namespace stormlet
