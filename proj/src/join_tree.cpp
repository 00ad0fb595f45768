#include "js/join_tree.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "js/error.hpp"

namespace js {

void JoinTree::relink() {
    size_t m = atoms.size();
    parent.assign(m, -1);
    children.assign(m, {});
    // adjacency in stamp order; children = neighbors away from the root
    std::vector<std::vector<int>> adj(m);
    for (const auto& e : edges) {
        adj[size_t(e[0])].push_back(e[1]);
        adj[size_t(e[1])].push_back(e[0]);
    }
    std::vector<int> stack{root};
    std::vector<bool> seen(m, false);
    seen[size_t(root)] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[size_t(v)]) {
            if (seen[size_t(u)]) continue;
            seen[size_t(u)] = true;
            parent[size_t(u)] = v;
            children[size_t(v)].push_back(u);
            stack.push_back(u);
        }
    }
}

std::vector<int> JoinTree::preorder() const {
    std::vector<int> order;
    order.reserve(atoms.size());
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        order.push_back(v);
        const auto& ch = children[size_t(v)];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    return order;
}

bool JoinTree::connected_per_attribute() const {
    std::set<std::string> all;
    for (const Atom& a : atoms) all.insert(a.attrs.begin(), a.attrs.end());
    for (const std::string& x : all) {
        int count = 0;
        for (const Atom& a : atoms) count += a.mentions(x);
        // nodes mentioning x form a subtree iff the count of mentioning nodes
        // whose parent also mentions x is count-1 (one subtree root)
        int with_mentioning_parent = 0;
        for (size_t v = 0; v < atoms.size(); ++v) {
            if (!atoms[v].mentions(x)) continue;
            int p = parent[v];
            if (p >= 0 && atoms[size_t(p)].mentions(x)) ++with_mentioning_parent;
        }
        if (with_mentioning_parent != count - 1) return false;
    }
    return true;
}

std::string JoinTree::describe() const {
    std::string out;
    auto rec = [&](auto&& self, int v, int depth) -> void {
        out.append(size_t(depth) * 2, ' ');
        out += atoms[size_t(v)].label();
        out += '\n';
        for (int c : children[size_t(v)]) self(self, c, depth + 1);
    };
    rec(rec, root, 0);
    return out;
}

std::optional<JoinTree> gyo_reduce(const JoinQuery& q) {
    size_t m = q.atoms.size();
    JoinTree t;
    t.atoms = q.atoms;
    if (m == 0) return std::nullopt;

    std::vector<bool> alive(m, true);
    size_t remaining = m;
    while (remaining > 1) {
        int ear = -1, witness = -1;
        for (size_t e = 0; e < m && ear < 0; ++e) {
            if (!alive[e]) continue;
            // attributes of e shared with any other alive atom
            std::vector<std::string> shared;
            for (const std::string& x : t.atoms[e].attrs) {
                for (size_t o = 0; o < m; ++o) {
                    if (o == e || !alive[o]) continue;
                    if (t.atoms[o].mentions(x)) {
                        shared.push_back(x);
                        break;
                    }
                }
            }
            for (size_t w = 0; w < m; ++w) {
                if (w == e || !alive[w]) continue;
                bool covers = true;
                for (const std::string& x : shared) covers = covers && t.atoms[w].mentions(x);
                if (covers) {
                    ear = int(e);
                    witness = int(w);
                    break;
                }
            }
        }
        if (ear < 0) return std::nullopt;  // no ear left: cyclic
        alive[size_t(ear)] = false;
        --remaining;
        t.edges.push_back({ear, witness});
    }
    for (size_t v = 0; v < m; ++v)
        if (alive[v]) t.root = int(v);
    t.relink();
    return t;
}

JoinTree reroot(const JoinTree& t, const std::string& y) {
    int target = -1;
    for (int v : t.preorder()) {
        if (t.atoms[size_t(v)].mentions(y)) {
            target = v;
            break;
        }
    }
    if (target < 0) throw AttrNotInTree("attribute " + y + " occurs in no tree node");
    JoinTree out = t;
    out.root = target;
    out.relink();
    return out;
}

}  // namespace js
