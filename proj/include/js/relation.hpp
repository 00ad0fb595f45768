#pragma once

#include <span>
#include <string>
#include <vector>

#include "js/value.hpp"

namespace js {

// Column-oriented relation with bag semantics: duplicate rows are allowed and
// meaningful.
struct PhysicalRelation {
    std::string name;
    std::vector<std::string> attrs;
    std::vector<std::vector<Value>> cols;  // cols[a][i], all of equal length

    size_t n() const { return cols.empty() ? 0 : cols[0].size(); }
    size_t arity() const { return attrs.size(); }

    int attr_index(std::string_view a) const {
        for (size_t k = 0; k < attrs.size(); ++k)
            if (attrs[k] == a) return int(k);
        return -1;
    }

    void append_row(std::span<const Value> row) {
        for (size_t k = 0; k < cols.size(); ++k) cols[k].push_back(row[k]);
    }
};

PhysicalRelation make_relation(std::string name, std::vector<std::string> attrs);

// Projection of row i onto `attrs` in the requested order.
std::vector<Value> tuple_at(const PhysicalRelation& rel, size_t i,
                            std::span<const std::string> attrs);

}  // namespace js
