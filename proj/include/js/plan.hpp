#pragma once

#include <string>
#include <vector>

#include "js/join_tree.hpp"

namespace js {

struct SemijoinStep {
    int parent;                  // tree node receiving the nested attribute
    int child;                   // tree node whose partial store is absorbed
    std::vector<std::string> z;  // shared flat attributes, in parent-atom order
};

// Two-phase plan: all semijoin steps run bottom-up (children before their
// parent, siblings left to right), then one flatten of the root store.
struct NsaPlan {
    JoinTree tree;
    std::vector<SemijoinStep> steps;
    int flatten_node = -1;  // terminal flatten target = tree root

    std::string describe() const;
};

NsaPlan compile_2nsa(const JoinTree& t);

}  // namespace js
