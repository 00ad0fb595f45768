#include "js/shred.hpp"

namespace js {

void validate_probe_sequence(std::span<const uint64_t> pos, uint64_t n) {
    for (size_t k = 0; k < pos.size(); ++k) {
        if (k > 0 && pos[k] <= pos[k - 1])
            throw NonIncreasingProbeSequence("position " + std::to_string(pos[k]) +
                                             " at index " + std::to_string(k) +
                                             " does not increase");
        if (pos[k] >= n)
            throw PositionOutOfRange("position " + std::to_string(pos[k]) +
                                     " outside [0," + std::to_string(n) + ")");
    }
}

}  // namespace js
