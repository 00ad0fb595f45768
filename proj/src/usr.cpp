#include "js/usr.hpp"

#include <algorithm>
#include <ostream>

namespace js {

namespace {

struct Layout {
    std::vector<size_t> slot;
    std::vector<size_t> sub_width;
    std::vector<int> order;
    size_t width = 0;
};

Layout layout_of(const UsrStore& s) {
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

std::vector<int> key_columns(const UsrTable& t, std::span<const std::string> keys) {
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

GroupKey key_at(const UsrTable& t, const std::vector<int>& idx, size_t row) {
    if (idx.size() > GroupKey::kMaxKeyAttrs)
        throw SchemeClash("join key arity above " + std::to_string(GroupKey::kMaxKeyAttrs));
    GroupKey k;
    k.len = uint32_t(idx.size());
    for (size_t c = 0; c < idx.size(); ++c) k.v[c] = t.cols[size_t(idx[c])][row];
    return k;
}

std::string scheme_render(const UsrStore& s, int tid) {
    std::string out = "{";
    const UsrTable& t = s.tables[size_t(tid)];
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

std::string child_label(const UsrStore& s, int tid) {
    const UsrTable& t = s.tables[size_t(tid)];
    if (t.attrs.empty()) return "b" + std::to_string(tid);
    std::string lbl;
    for (size_t a = 0; a < t.attrs.size(); ++a) lbl += (a ? "_" : "") + t.attrs[a];
    return lbl;
}

}  // namespace

std::vector<std::string> UsrStore::flat_attrs() const {
    std::vector<std::string> out;
    auto rec = [&](auto&& self, int tid) -> void {
        const UsrTable& t = tables[size_t(tid)];
        out.insert(out.end(), t.attrs.begin(), t.attrs.end());
        for (int c : schemes[size_t(tid)].children) self(self, c);
    };
    rec(rec, root);
    return out;
}

UsrStore make_usr_base(const PhysicalRelation& rel) {
    UsrStore s;
    s.root = 0;
    SchemeNode node;
    node.flats = rel.attrs;
    s.schemes.push_back(std::move(node));
    UsrTable t;
    t.nrows = rel.n();
    t.attrs = rel.attrs;
    t.cols = rel.cols;
    s.tables.push_back(std::move(t));
    return s;
}

uint64_t usr_weight_of(const UsrStore& store, int table, size_t row) {
    const UsrTable& t = store.tables[size_t(table)];
    if (row >= t.nrows)
        throw OutOfRange("weight_of: row " + std::to_string(row) + " outside table of " +
                         std::to_string(t.nrows) + " rows");
    uint64_t w = 1;
    for (const auto& wc : t.w) w = checked_mul(w, wc[row]);
    return w;
}

UsrGroupResult usr_group(const UsrStore& child, std::span<const std::string> keys) {
    const UsrTable& t = child.root_table();
    std::vector<int> idx = key_columns(t, keys);
    UsrGroupResult res;
    res.groups.reserve(t.nrows);
    std::vector<SliceRef*> encounter_order;

    // pass 1: count per key, slices laid out in first-encounter order
    for (size_t i = 0; i < t.nrows; ++i) {
        auto [it, fresh] = res.groups.try_emplace(key_at(t, idx, i));
        if (fresh) encounter_order.push_back(&it->second);
        it->second.len += 1;
    }
    uint64_t at = 0;
    for (SliceRef* s : encounter_order) {
        s->start = at;
        at += s->len;
    }

    // pass 2: offsets in scan order, inclusive weight prefix per slice
    res.perm.assign(t.nrows, 0);
    res.pref.assign(t.nrows, 0);
    std::unordered_map<GroupKey, uint64_t, GroupKeyHash> cursor;
    cursor.reserve(res.groups.size());
    for (size_t i = 0; i < t.nrows; ++i) {
        GroupKey k = key_at(t, idx, i);
        SliceRef& slice = res.groups.find(k)->second;
        uint64_t& fill = cursor.try_emplace(k, 0).first->second;
        uint64_t slot = slice.start + fill;
        fill += 1;
        res.perm[slot] = uint64_t(i);
        slice.weight = checked_add(slice.weight, usr_weight_of(child, child.root, i));
        res.pref[slot] = slice.weight;
    }
    return res;
}

UsrStore usr_semijoin(UsrStore parent, UsrStore child, std::span<const std::string> z) {
    const UsrTable& pt = parent.root_table();
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

    UsrGroupResult grouped = usr_group(child, z);

    UsrStore out;
    out.root = parent.root;
    out.schemes = std::move(parent.schemes);
    out.tables = std::move(parent.tables);
    size_t base = out.tables.size();
    for (SchemeNode& sc : child.schemes) {
        for (int& c : sc.children) c += int(base);
        out.schemes.push_back(std::move(sc));
    }
    for (UsrTable& tb : child.tables) out.tables.push_back(std::move(tb));
    int child_root = int(base) + child.root;

    {
        UsrTable& ct = out.tables[size_t(child_root)];
        std::vector<std::string> keep_attrs;
        std::vector<std::vector<Value>> keep_cols;
        for (size_t a = 0; a < ct.attrs.size(); ++a) {
            if (std::find(z.begin(), z.end(), ct.attrs[a]) != z.end()) continue;
            keep_attrs.push_back(std::move(ct.attrs[a]));
            keep_cols.push_back(std::move(ct.cols[a]));
        }
        ct.attrs = std::move(keep_attrs);
        ct.cols = std::move(keep_cols);
        ct.perm = std::move(grouped.perm);
        ct.pref = std::move(grouped.pref);
        out.schemes[size_t(child_root)].flats = ct.attrs;
    }

    {
        UsrTable& rt = out.tables[size_t(out.root)];
        UsrTable nr;
        nr.attrs = rt.attrs;
        nr.cols.resize(rt.cols.size());
        nr.start.resize(rt.start.size() + 1);
        nr.len.resize(rt.len.size() + 1);
        nr.w.resize(rt.w.size() + 1);
        for (size_t i = 0; i < rt.nrows; ++i) {
            auto it = grouped.groups.find(key_at(rt, pz, i));
            if (it == grouped.groups.end()) continue;
            for (size_t a = 0; a < rt.cols.size(); ++a) nr.cols[a].push_back(rt.cols[a][i]);
            for (size_t c = 0; c < rt.start.size(); ++c) {
                nr.start[c].push_back(rt.start[c][i]);
                nr.len[c].push_back(rt.len[c][i]);
                nr.w[c].push_back(rt.w[c][i]);
            }
            nr.start.back().push_back(it->second.start);
            nr.len.back().push_back(it->second.len);
            nr.w.back().push_back(it->second.weight);
            ++nr.nrows;
        }
        rt = std::move(nr);
    }
    out.schemes[size_t(out.root)].children.push_back(child_root);
    return out;
}

void usr_finalize(UsrStore& store) {
    UsrTable& rt = store.tables[size_t(store.root)];
    rt.pref.clear();
    rt.pref.reserve(rt.nrows);
    uint64_t total = 0;
    for (size_t i = 0; i < rt.nrows; ++i) {
        total = checked_add(total, usr_weight_of(store, store.root, i));
        rt.pref.push_back(total);
    }
}

namespace {

void get_rec(const UsrStore& s, const Layout& L, int tid, uint64_t row_idx, uint64_t rem,
             std::vector<Value>& row, ProbeStats* stats) {
    const UsrTable& t = s.tables[size_t(tid)];
    size_t slot = L.slot[size_t(tid)];
    for (size_t a = 0; a < t.cols.size(); ++a) row[slot + a] = t.cols[a][size_t(row_idx)];
    const auto& kids = s.schemes[size_t(tid)].children;
    for (size_t c = 0; c < kids.size(); ++c) {
        uint64_t wc = t.w[c][size_t(row_idx)];
        uint64_t digit = rem % wc;
        rem /= wc;
        uint64_t s0 = t.start[c][size_t(row_idx)];
        uint64_t l = t.len[c][size_t(row_idx)];
        const UsrTable& ct = s.tables[size_t(kids[c])];
        uint64_t cmp = 0;
        size_t idx = pref_lower_bound(ct.pref, size_t(s0), size_t(l), digit, &cmp);
        note_search(stats, cmp, size_t(l));
        uint64_t local = digit - (idx ? ct.pref[size_t(s0) + idx - 1] : 0);
        get_rec(s, L, kids[c], ct.perm[size_t(s0) + idx], local, row, stats);
    }
}

PhysicalRelation probe_result_shell(const UsrStore& s, const Layout& L) {
    PhysicalRelation out;
    out.name = "sample";
    out.attrs = s.flat_attrs();
    out.cols.resize(L.width);
    return out;
}

}  // namespace

PhysicalRelation usr_get(const UsrStore& store, std::span<const uint64_t> pos,
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
        get_rec(store, L, store.root, uint64_t(j), local, row, stats);
        out.append_row(row);
        if (stats) stats->positions += 1;
    }
    return out;
}

namespace {

void get_batched_rec(const UsrStore& s, const Layout& L, int tid,
                     const std::vector<uint64_t>& rows, std::vector<uint64_t>& sub,
                     PhysicalRelation& out, ProbeStats* stats) {
    const UsrTable& t = s.tables[size_t(tid)];
    size_t slot = L.slot[size_t(tid)];
    for (size_t a = 0; a < t.cols.size(); ++a) {
        std::vector<Value>& dst = out.cols[slot + a];
        const std::vector<Value>& src = t.cols[a];
        for (uint64_t r : rows) dst.push_back(src[size_t(r)]);
    }
    const auto& kids = s.schemes[size_t(tid)].children;
    for (size_t c = 0; c < kids.size(); ++c) {
        const UsrTable& ct = s.tables[size_t(kids[c])];
        std::vector<uint64_t> crows;
        std::vector<uint64_t> csub;
        crows.reserve(rows.size());
        csub.reserve(rows.size());
        bool have_prev = false;
        uint64_t s_prev = 0, l_prev = 0, digit_prev = 0;
        size_t idx_prev = 0;
        for (size_t k = 0; k < rows.size(); ++k) {
            uint64_t j = rows[k];
            uint64_t wc = t.w[c][size_t(j)];
            uint64_t digit = sub[k] % wc;
            sub[k] /= wc;
            uint64_t s0 = t.start[c][size_t(j)];
            uint64_t l = t.len[c][size_t(j)];
            size_t hint = 0;
            if (have_prev && s0 == s_prev && l == l_prev && digit >= digit_prev)
                hint = idx_prev;  // the hit can only move right within the slice
            uint64_t cmp = 0;
            size_t idx = hint + pref_lower_bound(ct.pref, size_t(s0) + hint,
                                                 size_t(l) - hint, digit, &cmp);
            note_search(stats, cmp, size_t(l) - hint);
            uint64_t local = digit - (idx ? ct.pref[size_t(s0) + idx - 1] : 0);
            crows.push_back(ct.perm[size_t(s0) + idx]);
            csub.push_back(local);
            have_prev = true;
            s_prev = s0;
            l_prev = l;
            digit_prev = digit;
            idx_prev = idx;
        }
        get_batched_rec(s, L, kids[c], crows, csub, out, stats);
    }
}

}  // namespace

PhysicalRelation usr_get_cached(const UsrStore& store, std::span<const uint64_t> pos,
                                ProbeStats* stats) {
    Layout L = layout_of(store);
    PhysicalRelation out = probe_result_shell(store, L);
    validate_probe_sequence(pos, store.flat_count());
    const auto& pref = store.root_table().pref;
    std::vector<uint64_t> rows;
    std::vector<uint64_t> sub;
    rows.reserve(pos.size());
    sub.reserve(pos.size());
    size_t hint = 0;  // probe positions increase, so root hits move right
    for (uint64_t i : pos) {
        uint64_t cmp = 0;
        size_t j = hint + pref_lower_bound(pref, hint, pref.size() - hint, i, &cmp);
        note_search(stats, cmp, pref.size() - hint);
        rows.push_back(uint64_t(j));
        sub.push_back(i - (j ? pref[j - 1] : 0));
        hint = j;
        if (stats) stats->positions += 1;
    }
    get_batched_rec(store, L, store.root, rows, sub, out, stats);
    return out;
}

namespace {

void subtree_rows(const UsrStore& s, const Layout& L, int tid, uint64_t row,
                  std::vector<Value>& dst) {
    const UsrTable& t = s.tables[size_t(tid)];
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
        const UsrTable& ct = s.tables[size_t(kids[c])];
        uint64_t s0 = t.start[c][size_t(row)];
        uint64_t l = t.len[c][size_t(row)];
        for (uint64_t q = 0; q < l; ++q) subtree_rows(s, L, kids[c], ct.perm[s0 + q], frags[c]);
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

PhysicalRelation usr_flatten(const UsrStore& store) {
    Layout L = layout_of(store);
    PhysicalRelation out = probe_result_shell(store, L);
    out.name = "join";
    const UsrTable& rt = store.root_table();
    const auto& kids = store.schemes[size_t(store.root)].children;
    size_t m = kids.size();
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
            const UsrTable& ct = store.tables[size_t(kids[c])];
            uint64_t s0 = rt.start[c][j];
            uint64_t l = rt.len[c][j];
            for (uint64_t q = 0; q < l; ++q)
                subtree_rows(store, L, kids[c], ct.perm[s0 + q], frags[c]);
        }
        uint64_t total = usr_weight_of(store, store.root, j);
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

void usr_validate(const UsrStore& store) {
    Layout L = layout_of(store);
    if (L.order.size() != store.tables.size())
        throw Error("store: unreachable tables in scheme tree");
    for (int tid : L.order) {
        const UsrTable& t = store.tables[size_t(tid)];
        const auto& kids = store.schemes[size_t(tid)].children;
        if (t.start.size() != kids.size() || t.len.size() != kids.size() ||
            t.w.size() != kids.size())
            throw Error("store: start/len/w column count mismatch");
        for (size_t a = 0; a < t.cols.size(); ++a)
            if (t.cols[a].size() != t.nrows) throw Error("store: ragged column");
        if (tid != store.root) {
            if (t.perm.size() != t.nrows || t.pref.size() != t.nrows)
                throw Error("store: perm/pref length mismatch");
            std::vector<bool> seen(t.nrows, false);
            for (uint64_t p : t.perm) {
                if (p >= t.nrows || seen[size_t(p)]) throw Error("store: perm not a permutation");
                seen[size_t(p)] = true;
            }
        }
        for (size_t c = 0; c < kids.size(); ++c) {
            const UsrTable& ct = store.tables[size_t(kids[c])];
            for (size_t i = 0; i < t.nrows; ++i) {
                uint64_t s0 = t.start[c][i], l = t.len[c][i];
                if (l == 0 || s0 + l > ct.nrows) throw Error("store: bad slice bounds");
                uint64_t sum = 0;
                for (uint64_t q = 0; q < l; ++q) {
                    sum = checked_add(sum,
                                      usr_weight_of(store, kids[c], size_t(ct.perm[s0 + q])));
                    if (ct.pref[s0 + q] != sum) throw Error("store: bad slice prefix");
                }
                if (sum != t.w[c][i]) throw Error("store: slice weight mismatch");
            }
        }
        if (tid == store.root && !t.pref.empty()) {
            uint64_t total = 0;
            for (size_t i = 0; i < t.nrows; ++i) {
                total = checked_add(total, usr_weight_of(store, tid, i));
                if (t.pref[i] != total) throw Error("store: bad prefix vector");
            }
        }
    }
}

void usr_dump(const UsrStore& store, std::ostream& out) {
    Layout L = layout_of(store);
    for (int tid : L.order) {
        const UsrTable& t = store.tables[size_t(tid)];
        const auto& kids = store.schemes[size_t(tid)].children;
        out << "# table " << tid << " scheme " << scheme_render(store, tid) << "\n";
        bool first = true;
        for (const std::string& a : t.attrs) {
            out << (first ? "" : ",") << a;
            first = false;
        }
        for (int c : kids) {
            std::string lbl = child_label(store, c);
            out << (first ? "" : ",") << "start_" << lbl << ",len_" << lbl << ",w_" << lbl;
            first = false;
        }
        if (tid != store.root) {
            out << (first ? "" : ",") << "perm,pref";
        } else {
            out << (first ? "" : ",") << "pref";
        }
        out << "\n";
        for (size_t i = 0; i < t.nrows; ++i) {
            first = true;
            for (size_t a = 0; a < t.cols.size(); ++a) {
                out << (first ? "" : ",") << t.cols[a][i].to_string();
                first = false;
            }
            for (size_t c = 0; c < kids.size(); ++c) {
                out << (first ? "" : ",") << t.start[c][i] << "," << t.len[c][i] << ","
                    << t.w[c][i];
                first = false;
            }
            if (tid != store.root) {
                out << (first ? "" : ",") << t.perm[i] << "," << t.pref[i];
            } else {
                out << (first ? "" : ",")
                    << (i < t.pref.size() ? std::to_string(t.pref[i]) : "");
            }
            out << "\n";
        }
        out << "\n";
    }
}

}  // namespace js
