#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "js/error.hpp"
#include "js/relation.hpp"

namespace js {

// One node of a nested scheme; children are table ids within the owning
// store, in semijoin attachment order. The same ids index the store's table
// vector, so scheme node <-> table is one-to-one.
struct SchemeNode {
    std::vector<std::string> flats;
    std::vector<int> children;
};

// Inline join key over up to kMaxKeyAttrs column values.
struct GroupKey {
    static constexpr size_t kMaxKeyAttrs = 12;
    std::array<Value, kMaxKeyAttrs> v;
    uint32_t len = 0;

    bool operator==(const GroupKey& o) const {
        if (len != o.len) return false;
        for (uint32_t k = 0; k < len; ++k)
            if (!(v[k] == o.v[k])) return false;
        return true;
    }
};

struct GroupKeyHash {
    size_t operator()(const GroupKey& k) const {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ k.len;
        for (uint32_t i = 0; i < k.len; ++i) {
            h ^= k.v[i].hash();
            h *= 0xff51afd7ed558ccdull;
            h ^= h >> 33;
        }
        return size_t(h);
    }
};

inline uint64_t checked_add(uint64_t a, uint64_t b) {
    uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("64-bit weight sum overflow");
    return r;
}

inline uint64_t checked_mul(uint64_t a, uint64_t b) {
    uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("64-bit weight product overflow");
    return r;
}

// Leftmost index j in [0,len) with key < pref[base+j]. `compares` counts
// element comparisons when given; used to check the logarithmic work bound.
inline size_t pref_lower_bound(std::span<const uint64_t> pref, size_t base, size_t len,
                               uint64_t key, uint64_t* compares = nullptr) {
    size_t lo = 0, hi = len;
    uint64_t cmp = 0;
    while (lo < hi) {
        size_t mid = lo + (hi - lo) / 2;
        ++cmp;
        if (key < pref[base + mid])
            hi = mid;
        else
            lo = mid + 1;
    }
    if (compares) *compares += cmp;
    return lo;
}

// Shared instrumentation for both store kinds.
struct ProbeStats {
    uint64_t positions = 0;          // probe sequence entries decoded
    uint64_t chain_steps = 0;        // nxt dereferences (chained store)
    uint64_t pref_compares = 0;      // binary search element comparisons
    uint64_t searches = 0;           // binary searches performed
    uint64_t bound_violations = 0;   // searches exceeding ceil(log2(len))+1 compares
};

inline void note_search(ProbeStats* st, uint64_t compares, size_t len) {
    if (!st) return;
    st->searches += 1;
    st->pref_compares += compares;
    uint64_t bound = 1;
    size_t v = len;
    while (v > 1) {
        v = (v + 1) / 2;
        ++bound;  // accumulates ceil(log2(len)), plus the initial 1
    }
    if (compares > bound) st->bound_violations += 1;
}

void validate_probe_sequence(std::span<const uint64_t> pos, uint64_t n);

}  // namespace js
