#include "js/relation.hpp"

#include "js/error.hpp"

namespace js {

PhysicalRelation make_relation(std::string name, std::vector<std::string> attrs) {
    PhysicalRelation r;
    r.name = std::move(name);
    r.attrs = std::move(attrs);
    r.cols.resize(r.attrs.size());
    return r;
}

std::vector<Value> tuple_at(const PhysicalRelation& rel, size_t i,
                            std::span<const std::string> attrs) {
    if (i >= rel.n())
        throw OutOfRange("tuple_at: offset " + std::to_string(i) + " outside relation " +
                         rel.name + " of size " + std::to_string(rel.n()));
    std::vector<Value> out;
    out.reserve(attrs.size());
    for (const std::string& a : attrs) {
        int k = rel.attr_index(a);
        if (k < 0) throw UnknownAttribute("tuple_at: no attribute " + a + " in " + rel.name);
        out.push_back(rel.cols[size_t(k)][i]);
    }
    return out;
}

}  // namespace js
