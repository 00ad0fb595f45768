#include "js/csr.hpp"

#include <algorithm>
#include <ostream>

namespace js {

namespace {

// Output layout: flat attributes in preorder; each table owns a contiguous
// slot range, children follow their parent.
struct Layout {
    std::vector<size_t> slot;       // first output column per table
    std::vector<size_t> sub_width;  // flat width of the whole subtree per table
    std::vector<int> order;         // preorder table ids
    size_t width = 0;
};

Layout layout_of(const CsrStore& s) {
    Layout L;
    L.slot.resize(s.tables.size(), 0);
    L.sub_width.resize(s.tables.size(), 0);
    auto rec = [&](auto&& self, int tid) -> size_t {
        L.order.push_back(tid);
        L.slot[size_t(tid)] = L.width;
        size_t wsub = s.tables[size_t(tid)].attrs.size();
        L.width += wsub;
        for (int c : s.schemes[size_t(tid)].children) wsub += self(self, c);
        L.sub_width[size_t(tid)] = wsub;
        return wsub;
    };
    rec(rec, s.root);
    return L;
}

std::vector<int> key_columns(const CsrTable& t, std::span<const std::string> keys) {
    std::vector<int> idx;
    idx.reserve(keys.size());
    for (const std::string& k : keys) {
        int found = -1;
        for (size_t a = 0; a < t.attrs.size(); ++a)
            if (t.attrs[a] == k) found = int(a);
        if (found < 0) throw SchemeClash("key attribute " + k + " is not flat in the table");
        idx.push_back(found);
    }
    return idx;
}

GroupKey key_at(const CsrTable& t, const std::vector<int>& idx, size_t row) {
    if (idx.size() > GroupKey::kMaxKeyAttrs)
        throw SchemeClash("join key arity above " + std::to_string(GroupKey::kMaxKeyAttrs));
    GroupKey k;
    k.len = uint32_t(idx.size());
    for (size_t c = 0; c < idx.size(); ++c) k.v[c] = t.cols[size_t(idx[c])][row];
    return k;
}

std::string scheme_render(const CsrStore& s, int tid) {
    std::string out = "{";
    const CsrTable& t = s.tables[size_t(tid)];
    bool first = true;
    for (const std::string& a : t.attrs) {
        if (!first) out += ",";
        out += a;
        first = false;
    }
    for (int c : s.schemes[size_t(tid)].children) {
        if (!first) out += ",";
        out += scheme_render(s, c);
        first = false;
    }
    return out + "}";
}

std::string child_label(const CsrStore& s, int tid) {
    const CsrTable& t = s.tables[size_t(tid)];
    if (t.attrs.empty()) return "b" + std::to_string(tid);
    std::string lbl;
    for (size_t a = 0; a < t.attrs.size(); ++a) lbl += (a ? "_" : "") + t.attrs[a];
    return lbl;
}

}  // namespace

std::vector<std::string> CsrStore::flat_attrs() const {
    std::vector<std::string> out;
    auto rec = [&](auto&& self, int tid) -> void {
        const CsrTable& t = tables[size_t(tid)];
        out.insert(out.end(), t.attrs.begin(), t.attrs.end());
        for (int c : schemes[size_t(tid)].children) self(self, c);
    };
    rec(rec, root);
    return out;
}

CsrStore make_csr_base(const PhysicalRelation& rel) {
    CsrStore s;
    s.root = 0;
    SchemeNode node;
    node.flats = rel.attrs;
    s.schemes.push_back(std::move(node));
    CsrTable t;
    t.nrows = rel.n();
    t.attrs = rel.attrs;
    t.cols = rel.cols;
    s.tables.push_back(std::move(t));
    return s;
}

uint64_t csr_weight_of(const CsrStore& store, int table, size_t row) {
    const CsrTable& t = store.tables[size_t(table)];
    if (row >= t.nrows)
        throw OutOfRange("weight_of: row " + std::to_string(row) + " outside table of " +
                         std::to_string(t.nrows) + " rows");
    uint64_t w = 1;
    for (const auto& wc : t.w) w = checked_mul(w, wc[row]);
    return w;
}

CsrGroupResult csr_group(const CsrStore& child, std::span<const std::string> keys) {
    const CsrTable& t = child.root_table();
    std::vector<int> idx = key_columns(t, keys);
    CsrGroupResult res;
    res.nxt.assign(t.nrows, -1);
    res.groups.reserve(t.nrows);
    for (size_t i = 0; i < t.nrows; ++i) {
        uint64_t wi = csr_weight_of(child, child.root, i);
        auto [it, fresh] = res.groups.try_emplace(key_at(t, idx, i), HeadWeight{int64_t(i), wi});
        if (!fresh) {
            res.nxt[i] = it->second.head;
            it->second.head = int64_t(i);
            it->second.weight = checked_add(it->second.weight, wi);
        }
    }
    return res;
}

CsrStore csr_semijoin(CsrStore parent, CsrStore child, std::span<const std::string> z) {
    // z must be flat on both sides, and no other flat attribute may repeat
    // across the union
    const CsrTable& pt = parent.root_table();
    std::vector<int> pz = key_columns(pt, z);
    (void)key_columns(child.root_table(), z);
    {
        std::vector<std::string> pa = parent.flat_attrs();
        std::vector<std::string> ca = child.flat_attrs();
        for (const std::string& a : ca) {
            bool in_z = std::find(z.begin(), z.end(), a) != z.end();
            bool in_parent = std::find(pa.begin(), pa.end(), a) != pa.end();
            if (!in_z && in_parent)
                throw SchemeClash("flat attribute " + a + " repeats across the scheme union");
        }
    }

    CsrGroupResult grouped = csr_group(child, z);

    CsrStore out;
    out.root = parent.root;
    out.schemes = std::move(parent.schemes);
    out.tables = std::move(parent.tables);
    size_t base = out.tables.size();
    for (SchemeNode& sc : child.schemes) {
        for (int& c : sc.children) c += int(base);
        out.schemes.push_back(std::move(sc));
    }
    for (CsrTable& tb : child.tables) out.tables.push_back(std::move(tb));
    int child_root = int(base) + child.root;

    // child root: drop z columns, thread the chains
    {
        CsrTable& ct = out.tables[size_t(child_root)];
        std::vector<std::string> keep_attrs;
        std::vector<std::vector<Value>> keep_cols;
        for (size_t a = 0; a < ct.attrs.size(); ++a) {
            if (std::find(z.begin(), z.end(), ct.attrs[a]) != z.end()) continue;
            keep_attrs.push_back(std::move(ct.attrs[a]));
            keep_cols.push_back(std::move(ct.cols[a]));
        }
        ct.attrs = std::move(keep_attrs);
        ct.cols = std::move(keep_cols);
        ct.nxt = std::move(grouped.nxt);
        ct.pref.clear();
        out.schemes[size_t(child_root)].flats = ct.attrs;
    }

    // parent root: keep matching rows, append the new hd/w pair
    {
        CsrTable& rt = out.tables[size_t(out.root)];
        CsrTable nr;
        nr.attrs = rt.attrs;
        nr.cols.resize(rt.cols.size());
        nr.hd.resize(rt.hd.size() + 1);
        nr.w.resize(rt.w.size() + 1);
        for (size_t i = 0; i < rt.nrows; ++i) {
            auto it = grouped.groups.find(key_at(rt, pz, i));
            if (it == grouped.groups.end()) continue;
            for (size_t a = 0; a < rt.cols.size(); ++a) nr.cols[a].push_back(rt.cols[a][i]);
            for (size_t c = 0; c < rt.hd.size(); ++c) {
                nr.hd[c].push_back(rt.hd[c][i]);
                nr.w[c].push_back(rt.w[c][i]);
            }
            nr.hd.back().push_back(it->second.head);
            nr.w.back().push_back(it->second.weight);
            ++nr.nrows;
        }
        rt = std::move(nr);
    }
    out.schemes[size_t(out.root)].children.push_back(child_root);
    return out;
}

void csr_finalize(CsrStore& store) {
    CsrTable& rt = store.tables[size_t(store.root)];
    rt.pref.clear();
    rt.pref.reserve(rt.nrows);
    uint64_t total = 0;
    for (size_t i = 0; i < rt.nrows; ++i) {
        total = checked_add(total, csr_weight_of(store, store.root, i));
        rt.pref.push_back(total);
    }
}

namespace {

void get_rec(const CsrStore& s, const Layout& L, int tid, int64_t row_idx, uint64_t rem,
             std::vector<Value>& row, ProbeStats* stats) {
    const CsrTable& t = s.tables[size_t(tid)];
    size_t slot = L.slot[size_t(tid)];
    for (size_t a = 0; a < t.cols.size(); ++a) row[slot + a] = t.cols[a][size_t(row_idx)];
    const auto& kids = s.schemes[size_t(tid)].children;
    for (size_t c = 0; c < kids.size(); ++c) {
        uint64_t wc = t.w[c][size_t(row_idx)];
        uint64_t digit = rem % wc;
        rem /= wc;
        int64_t elem = t.hd[c][size_t(row_idx)];
        for (;;) {
            uint64_t ew = csr_weight_of(s, kids[c], size_t(elem));
            if (digit < ew) break;
            digit -= ew;
            elem = s.tables[size_t(kids[c])].nxt[size_t(elem)];
            if (stats) stats->chain_steps += 1;
        }
        get_rec(s, L, kids[c], elem, digit, row, stats);
    }
}

PhysicalRelation probe_result_shell(const CsrStore& s, const Layout& L) {
    PhysicalRelation out;
    out.name = "sample";
    out.attrs = s.flat_attrs();
    out.cols.resize(L.width);
    return out;
}

}  // namespace

PhysicalRelation csr_get(const CsrStore& store, std::span<const uint64_t> pos,
                         ProbeStats* stats) {
    Layout L = layout_of(store);
    PhysicalRelation out = probe_result_shell(store, L);
    validate_probe_sequence(pos, store.flat_count());
    const auto& pref = store.root_table().pref;
    std::vector<Value> row(L.width);
    for (uint64_t i : pos) {
        uint64_t cmp = 0;
        size_t j = pref_lower_bound(pref, 0, pref.size(), i, &cmp);
        note_search(stats, cmp, pref.size());
        uint64_t local = i - (j ? pref[j - 1] : 0);
        get_rec(store, L, store.root, int64_t(j), local, row, stats);
        out.append_row(row);
        if (stats) stats->positions += 1;
    }
    return out;
}

namespace {

void get_batched_rec(const CsrStore& s, const Layout& L, int tid,
                     const std::vector<int64_t>& rows, std::vector<uint64_t>& sub,
                     PhysicalRelation& out, ProbeStats* stats) {
    const CsrTable& t = s.tables[size_t(tid)];
    size_t slot = L.slot[size_t(tid)];
    for (size_t a = 0; a < t.cols.size(); ++a) {
        std::vector<Value>& dst = out.cols[slot + a];
        const std::vector<Value>& src = t.cols[a];
        for (int64_t r : rows) dst.push_back(src[size_t(r)]);
    }
    const auto& kids = s.schemes[size_t(tid)].children;
    for (size_t c = 0; c < kids.size(); ++c) {
        const std::vector<int64_t>& nxt = s.tables[size_t(kids[c])].nxt;
        std::vector<int64_t> crows;
        std::vector<uint64_t> csub;
        crows.reserve(rows.size());
        csub.reserve(rows.size());
        bool have_prev = false;
        int64_t j_prev = -1;
        int64_t elem = -1;
        uint64_t consumed = 0;  // chain weight strictly before elem
        for (size_t k = 0; k < rows.size(); ++k) {
            int64_t j = rows[k];
            uint64_t wc = t.w[c][size_t(j)];
            uint64_t digit = sub[k] % wc;
            sub[k] /= wc;
            uint64_t rem;
            if (have_prev && j == j_prev && digit >= consumed) {
                rem = digit - consumed;  // resume the walk at the cached element
            } else {
                elem = t.hd[c][size_t(j)];
                consumed = 0;
                rem = digit;
            }
            for (;;) {
                uint64_t ew = csr_weight_of(s, kids[c], size_t(elem));
                if (rem < ew) break;
                rem -= ew;
                consumed += ew;
                elem = nxt[size_t(elem)];
                if (stats) stats->chain_steps += 1;
            }
            have_prev = true;
            j_prev = j;
            crows.push_back(elem);
            csub.push_back(rem);
        }
        get_batched_rec(s, L, kids[c], crows, csub, out, stats);
    }
}

}  // namespace

PhysicalRelation csr_get_cached(const CsrStore& store, std::span<const uint64_t> pos,
                                ProbeStats* stats) {
    Layout L = layout_of(store);
    PhysicalRelation out = probe_result_shell(store, L);
    validate_probe_sequence(pos, store.flat_count());
    const auto& pref = store.root_table().pref;
    std::vector<int64_t> rows;
    std::vector<uint64_t> sub;
    rows.reserve(pos.size());
    sub.reserve(pos.size());
    for (uint64_t i : pos) {
        uint64_t cmp = 0;
        size_t j = pref_lower_bound(pref, 0, pref.size(), i, &cmp);
        note_search(stats, cmp, pref.size());
        rows.push_back(int64_t(j));
        sub.push_back(i - (j ? pref[j - 1] : 0));
        if (stats) stats->positions += 1;
    }
    get_batched_rec(store, L, store.root, rows, sub, out, stats);
    return out;
}

namespace {

// Appends the canonical-order rows of the subtree element (tid,row) to dst,
// row-major with the subtree's preorder width.
void subtree_rows(const CsrStore& s, const Layout& L, int tid, int64_t row,
                  std::vector<Value>& dst) {
    const CsrTable& t = s.tables[size_t(tid)];
    const auto& kids = s.schemes[size_t(tid)].children;
    if (kids.empty()) {
        for (size_t a = 0; a < t.cols.size(); ++a) dst.push_back(t.cols[a][size_t(row)]);
        return;
    }
    size_t m = kids.size();
    std::vector<std::vector<Value>> frags(m);
    std::vector<size_t> fw(m);
    std::vector<uint64_t> fn(m);
    for (size_t c = 0; c < m; ++c) {
        fw[c] = L.sub_width[size_t(kids[c])];
        fn[c] = t.w[c][size_t(row)];
        const std::vector<int64_t>& nxt = s.tables[size_t(kids[c])].nxt;
        for (int64_t e = t.hd[c][size_t(row)]; e >= 0; e = nxt[size_t(e)])
            subtree_rows(s, L, kids[c], e, frags[c]);
    }
    uint64_t total = 1;
    for (size_t c = 0; c < m; ++c) total = checked_mul(total, fn[c]);
    std::vector<uint64_t> digit(m, 0);
    for (uint64_t i = 0; i < total; ++i) {
        for (size_t a = 0; a < t.cols.size(); ++a) dst.push_back(t.cols[a][size_t(row)]);
        for (size_t c = 0; c < m; ++c) {
            const Value* f = frags[c].data() + size_t(digit[c]) * fw[c];
            dst.insert(dst.end(), f, f + fw[c]);
        }
        for (size_t c = 0; c < m; ++c) {
            if (++digit[c] < fn[c]) break;
            digit[c] = 0;
        }
    }
}

}  // namespace

PhysicalRelation csr_flatten(const CsrStore& store) {
    Layout L = layout_of(store);
    PhysicalRelation out = probe_result_shell(store, L);
    out.name = "join";
    const CsrTable& rt = store.root_table();
    const auto& kids = store.schemes[size_t(store.root)].children;
    size_t m = kids.size();
    std::vector<Value> frag;
    for (size_t j = 0; j < rt.nrows; ++j) {
        if (m == 0) {
            for (size_t a = 0; a < rt.cols.size(); ++a) out.cols[a].push_back(rt.cols[a][j]);
            continue;
        }
        std::vector<std::vector<Value>> frags(m);
        std::vector<size_t> fw(m);
        std::vector<uint64_t> fn(m);
        for (size_t c = 0; c < m; ++c) {
            fw[c] = L.sub_width[size_t(kids[c])];
            fn[c] = rt.w[c][j];
            const std::vector<int64_t>& nxt = store.tables[size_t(kids[c])].nxt;
            for (int64_t e = rt.hd[c][j]; e >= 0; e = nxt[size_t(e)])
                subtree_rows(store, L, kids[c], e, frags[c]);
        }
        uint64_t total = csr_weight_of(store, store.root, j);
        std::vector<uint64_t> digit(m, 0);
        size_t slot0 = L.slot[size_t(store.root)];
        for (uint64_t i = 0; i < total; ++i) {
            for (size_t a = 0; a < rt.cols.size(); ++a)
                out.cols[slot0 + a].push_back(rt.cols[a][j]);
            for (size_t c = 0; c < m; ++c) {
                size_t off = L.slot[size_t(kids[c])];
                const Value* f = frags[c].data() + size_t(digit[c]) * fw[c];
                for (size_t q = 0; q < fw[c]; ++q) out.cols[off + q].push_back(f[q]);
            }
            for (size_t c = 0; c < m; ++c) {
                if (++digit[c] < fn[c]) break;
                digit[c] = 0;
            }
        }
    }
    return out;
}

void csr_validate(const CsrStore& store) {
    Layout L = layout_of(store);
    if (L.order.size() != store.tables.size())
        throw Error("store: unreachable tables in scheme tree");
    for (int tid : L.order) {
        const CsrTable& t = store.tables[size_t(tid)];
        const auto& kids = store.schemes[size_t(tid)].children;
        if (t.hd.size() != kids.size() || t.w.size() != kids.size())
            throw Error("store: hd/w column count mismatch");
        for (size_t a = 0; a < t.cols.size(); ++a)
            if (t.cols[a].size() != t.nrows) throw Error("store: ragged column");
        if (tid != store.root && t.nxt.size() != t.nrows)
            throw Error("store: nxt length mismatch");
        for (size_t c = 0; c < kids.size(); ++c) {
            const std::vector<int64_t>& nxt = store.tables[size_t(kids[c])].nxt;
            for (size_t i = 0; i < t.nrows; ++i) {
                uint64_t sum = 0;
                size_t steps = 0;
                for (int64_t e = t.hd[c][i]; e >= 0; e = nxt[size_t(e)]) {
                    sum = checked_add(sum, csr_weight_of(store, kids[c], size_t(e)));
                    if (++steps > nxt.size()) throw Error("store: cyclic chain");
                }
                if (steps == 0) throw Error("store: empty chain");
                if (sum != t.w[c][i]) throw Error("store: chain weight mismatch");
            }
        }
        if (tid == store.root && !t.pref.empty()) {
            uint64_t total = 0;
            for (size_t i = 0; i < t.nrows; ++i) {
                total = checked_add(total, csr_weight_of(store, tid, i));
                if (t.pref[i] != total) throw Error("store: bad prefix vector");
            }
        }
    }
}

void csr_dump(const CsrStore& store, std::ostream& out) {
    Layout L = layout_of(store);
    for (int tid : L.order) {
        const CsrTable& t = store.tables[size_t(tid)];
        const auto& kids = store.schemes[size_t(tid)].children;
        out << "# table " << tid << " scheme " << scheme_render(store, tid) << "\n";
        bool first = true;
        for (const std::string& a : t.attrs) {
            out << (first ? "" : ",") << a;
            first = false;
        }
        for (int c : kids) {
            std::string lbl = child_label(store, c);
            out << (first ? "" : ",") << "hd_" << lbl << ",w_" << lbl;
            first = false;
        }
        if (tid != store.root) {
            out << (first ? "" : ",") << "nxt";
            first = false;
        }
        if (tid == store.root) {
            out << (first ? "" : ",") << "pref";
            first = false;
        }
        out << "\n";
        for (size_t i = 0; i < t.nrows; ++i) {
            first = true;
            for (size_t a = 0; a < t.cols.size(); ++a) {
                out << (first ? "" : ",") << t.cols[a][i].to_string();
                first = false;
            }
            for (size_t c = 0; c < kids.size(); ++c) {
                out << (first ? "" : ",") << t.hd[c][i] << "," << t.w[c][i];
                first = false;
            }
            if (tid != store.root) {
                out << (first ? "" : ",") << t.nxt[i];
                first = false;
            }
            if (tid == store.root) {
                out << (first ? "" : ",") << (i < t.pref.size() ? std::to_string(t.pref[i]) : "");
                first = false;
            }
            out << "\n";
        }
        out << "\n";
    }
}

}  // namespace js
