#include "js/plan.hpp"

#include <set>

#include "js/error.hpp"

namespace js {

std::string NsaPlan::describe() const {
    std::string out;
    for (size_t k = 0; k < steps.size(); ++k) {
        const SemijoinStep& s = steps[k];
        out += "step " + std::to_string(k + 1) + ": " + tree.atoms[size_t(s.parent)].label() +
               " semijoin " + tree.atoms[size_t(s.child)].label() + " on [";
        for (size_t i = 0; i < s.z.size(); ++i) out += (i ? "," : "") + s.z[i];
        out += "]\n";
    }
    out += "flatten " + tree.atoms[size_t(flatten_node)].label() + "\n";
    return out;
}

NsaPlan compile_2nsa(const JoinTree& t) {
    NsaPlan plan;
    plan.tree = t;
    plan.flatten_node = t.root;

    // flat attributes of each node's whole subtree
    std::vector<std::set<std::string>> flatsub(t.atoms.size());
    auto collect = [&](auto&& self, int v) -> void {
        flatsub[size_t(v)].insert(t.atoms[size_t(v)].attrs.begin(),
                                  t.atoms[size_t(v)].attrs.end());
        for (int c : t.children[size_t(v)]) {
            self(self, c);
            flatsub[size_t(v)].insert(flatsub[size_t(c)].begin(), flatsub[size_t(c)].end());
        }
    };
    collect(collect, t.root);

    auto emit = [&](auto&& self, int v) -> void {
        std::set<std::string> left(t.atoms[size_t(v)].attrs.begin(),
                                   t.atoms[size_t(v)].attrs.end());
        for (int c : t.children[size_t(v)]) self(self, c);
        for (int c : t.children[size_t(v)]) {
            SemijoinStep step;
            step.parent = v;
            step.child = c;
            for (const std::string& x : t.atoms[size_t(v)].attrs)
                if (t.atoms[size_t(c)].mentions(x)) step.z.push_back(x);
            // the semijoin result is only a legal scheme if no flat attribute
            // of the child subtree survives on both sides
            for (const std::string& x : flatsub[size_t(c)]) {
                bool in_z = false;
                for (const std::string& zx : step.z) in_z = in_z || zx == x;
                if (!in_z && left.count(x))
                    throw InvalidSchemeUnion("attribute " + x +
                                             " would repeat in the scheme union at " +
                                             t.atoms[size_t(v)].label());
            }
            left.insert(flatsub[size_t(c)].begin(), flatsub[size_t(c)].end());
            plan.steps.push_back(std::move(step));
        }
    };
    emit(emit, t.root);
    return plan;
}

}  // namespace js
