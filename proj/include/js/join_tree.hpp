#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "js/query.hpp"

namespace js {

// Rooted join tree over the query's atoms. Edges carry their attachment order
// from the reduction, which fixes child order deterministically even after
// rerooting (an edge keeps its stamp when its direction flips).
struct JoinTree {
    std::vector<Atom> atoms;                 // index = atom index in the query
    std::vector<std::array<int, 2>> edges;   // {ear, witness} in attachment order
    int root = -1;

    // derived by relink()
    std::vector<int> parent;                 // -1 at root
    std::vector<std::vector<int>> children;  // per node, in edge-stamp order

    void relink();
    std::vector<int> preorder() const;       // root first, children in order

    // Connectedness: for every attribute, the nodes mentioning it form a
    // connected subtree. True for trees produced by gyo_reduce; exposed so
    // tests can re-verify after rerooting.
    bool connected_per_attribute() const;

    std::string describe() const;            // indented one-node-per-line rendering
};

// GYO reduction: repeatedly remove an ear (an atom whose attributes shared
// with the remaining atoms are covered by a single witness atom), attaching
// it to the witness. Ties broken toward the lowest atom index, for both ear
// and witness. Returns nothing when the query is cyclic.
std::optional<JoinTree> gyo_reduce(const JoinQuery& q);

// Same undirected tree re-rooted at the first preorder node mentioning y.
JoinTree reroot(const JoinTree& t, const std::string& y);

}  // namespace js
