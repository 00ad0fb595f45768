#pragma once

#include <iosfwd>
#include <unordered_map>

#include "js/shred.hpp"

namespace js {

// One table of the unchained store. Non-root tables keep their per-key groups
// as contiguous slices of the permutation vector, with an inclusive weight
// prefix per slice; the root carries the global prefix.
struct UsrTable {
    size_t nrows = 0;
    std::vector<std::string> attrs;
    std::vector<std::vector<Value>> cols;
    std::vector<std::vector<uint64_t>> start;  // per child: slice start in child's perm
    std::vector<std::vector<uint64_t>> len;    // per child: slice length
    std::vector<std::vector<uint64_t>> w;      // per child: nested bag weight
    std::vector<uint64_t> perm;                // non-root only
    std::vector<uint64_t> pref;                // root: global; non-root: per-slice
};

struct UsrStore {
    std::vector<SchemeNode> schemes;
    std::vector<UsrTable> tables;
    int root = 0;

    const UsrTable& root_table() const { return tables[size_t(root)]; }
    uint64_t flat_count() const {
        const auto& p = root_table().pref;
        return p.empty() ? 0 : p.back();
    }
    std::vector<std::string> flat_attrs() const;
};

UsrStore make_usr_base(const PhysicalRelation& rel);

struct SliceRef {
    uint64_t start = 0;
    uint64_t len = 0;
    uint64_t weight = 0;
};
using SliceMap = std::unordered_map<GroupKey, SliceRef, GroupKeyHash>;

struct UsrGroupResult {
    SliceMap groups;
    std::vector<uint64_t> perm;
    std::vector<uint64_t> pref;
};

// Two passes: the first counts rows per key and assigns slice starts in
// first-encounter order; the second writes row offsets into perm in scan
// order and accumulates the per-slice inclusive weight prefix.
UsrGroupResult usr_group(const UsrStore& child, std::span<const std::string> keys);

UsrStore usr_semijoin(UsrStore parent, UsrStore child, std::span<const std::string> z);

uint64_t usr_weight_of(const UsrStore& store, int table, size_t row);

void usr_finalize(UsrStore& store);

// Per level: binary search the slice prefix for the mixed-radix digit,
// subtract, indirect through perm, recurse.
PhysicalRelation usr_get(const UsrStore& store, std::span<const uint64_t> pos,
                         ProbeStats* stats = nullptr);
// Identical output; consecutive probes of one slice with non-decreasing
// digits search only the suffix from the previous hit.
PhysicalRelation usr_get_cached(const UsrStore& store, std::span<const uint64_t> pos,
                                ProbeStats* stats = nullptr);

PhysicalRelation usr_flatten(const UsrStore& store);

void usr_validate(const UsrStore& store);

void usr_dump(const UsrStore& store, std::ostream& out);

}  // namespace js
