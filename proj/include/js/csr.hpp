#pragma once

#include <iosfwd>
#include <unordered_map>

#include "js/shred.hpp"

namespace js {

// One table of the chained store. Non-root tables thread their rows into
// per-key linked lists via nxt (sentinel -1); the root table carries the
// inclusive weight prefix over its rows.
struct CsrTable {
    size_t nrows = 0;
    std::vector<std::string> attrs;
    std::vector<std::vector<Value>> cols;     // parallel to attrs
    std::vector<std::vector<int64_t>> hd;     // per child: chain head offsets
    std::vector<std::vector<uint64_t>> w;     // per child: nested bag weights
    std::vector<int64_t> nxt;                 // non-root only
    std::vector<uint64_t> pref;               // root only, set by csr_finalize
};

struct CsrStore {
    std::vector<SchemeNode> schemes;  // index = table id; entry 0 = root
    std::vector<CsrTable> tables;
    int root = 0;

    const CsrTable& root_table() const { return tables[size_t(root)]; }
    uint64_t flat_count() const {
        const auto& p = root_table().pref;
        return p.empty() ? 0 : p.back();
    }
    // All flat attributes of the scheme tree in enumeration (preorder) order.
    std::vector<std::string> flat_attrs() const;
};

CsrStore make_csr_base(const PhysicalRelation& rel);

struct HeadWeight {
    int64_t head;
    uint64_t weight;
};
using GroupMap = std::unordered_map<GroupKey, HeadWeight, GroupKeyHash>;

struct CsrGroupResult {
    GroupMap groups;
    std::vector<int64_t> nxt;
};

// Single scan over the child's root rows. Head = last row of its key in scan
// order (prepend chaining); weight = sum of row weights over the group.
CsrGroupResult csr_group(const CsrStore& child, std::span<const std::string> keys);

// Nested semijoin: parent root rows without a key match are dropped; the rest
// gain hd/w columns for the child; the child root loses its z columns and
// gains nxt. Linear in both stores.
CsrStore csr_semijoin(CsrStore parent, CsrStore child, std::span<const std::string> z);

// Product of the row's child weights; 1 for leaf tables.
uint64_t csr_weight_of(const CsrStore& store, int table, size_t row);

// Fills the root prefix vector; required before any probe.
void csr_finalize(CsrStore& store);

PhysicalRelation csr_get(const CsrStore& store, std::span<const uint64_t> pos,
                         ProbeStats* stats = nullptr);
// Identical output; consecutive positions hitting the same row and chain
// resume the chain walk instead of restarting at the head.
PhysicalRelation csr_get_cached(const CsrStore& store, std::span<const uint64_t> pos,
                                ProbeStats* stats = nullptr);

// Full enumeration in canonical order: root row order x chain order, first
// child varying fastest.
PhysicalRelation csr_flatten(const CsrStore& store);

// Structural sanity for tests: chain termination, weight consistency, row
// budget (total rows never exceed the input rows).
void csr_validate(const CsrStore& store);

void csr_dump(const CsrStore& store, std::ostream& out);

}  // namespace js
