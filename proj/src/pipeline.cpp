#include "js/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>

namespace js {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

Db load_db(const QueryFile& qf, const std::string& query_path, const std::string& data_dir) {
    std::filesystem::path base = data_dir.empty()
                                     ? std::filesystem::path(query_path).parent_path()
                                     : std::filesystem::path(data_dir);
    Db db;
    for (const RelationDecl& decl : qf.relations) {
        std::filesystem::path p(decl.file);
        if (p.is_relative()) p = base / p;
        PhysicalRelation rel = load_csv(p.string());
        rel.name = decl.name;
        if (decl.attrs) {
            if (decl.attrs->size() != rel.attrs.size())
                throw SchemeClash("relation " + decl.name + " declares " +
                                  std::to_string(decl.attrs->size()) +
                                  " attributes but its file has " +
                                  std::to_string(rel.attrs.size()));
            rel.attrs = *decl.attrs;
        }
        db.emplace(decl.name, std::move(rel));
    }
    return db;
}

IndexKind index_from_name(const std::string& name) {
    if (name == "csr") return IndexKind::Csr;
    if (name == "usr") return IndexKind::Usr;
    throw UsageError("unknown index kind " + name + " (expected csr or usr)");
}

const char* index_name(IndexKind k) { return k == IndexKind::Csr ? "csr" : "usr"; }

Caching caching_from_name(const std::string& name) {
    if (name == "auto") return Caching::Auto;
    if (name == "on") return Caching::On;
    if (name == "off") return Caching::Off;
    throw UsageError("unknown caching mode " + name + " (expected auto, on or off)");
}

bool caching_effective(Caching c, IndexKind k) {
    if (c == Caching::Auto) return k == IndexKind::Csr;
    return c == Caching::On;
}

NsaPlan plan_query(const JoinQuery& q, bool reroot_at_bern) {
    std::optional<JoinTree> tree = gyo_reduce(q);
    if (!tree) throw NotAcyclic("query admits no join tree");
    if (reroot_at_bern && q.bern_attr) *tree = reroot(*tree, *q.bern_attr);
    return compile_2nsa(*tree);
}

namespace {

PhysicalRelation atom_relation(const Atom& atom, const Db& db) {
    auto it = db.find(atom.rel);
    if (it == db.end()) throw SyntaxError("query names undeclared relation " + atom.rel);
    PhysicalRelation rel = it->second;
    if (rel.attrs.size() != atom.attrs.size())
        throw SchemeClash("atom " + atom.label() + " has arity " +
                          std::to_string(atom.attrs.size()) + " but relation " + rel.name +
                          " has arity " + std::to_string(rel.attrs.size()));
    rel.attrs = atom.attrs;
    return rel;
}

}  // namespace

CsrStore build_csr(const NsaPlan& plan, const Db& db) {
    std::vector<CsrStore> node(plan.tree.atoms.size());
    for (size_t i = 0; i < plan.tree.atoms.size(); ++i)
        node[i] = make_csr_base(atom_relation(plan.tree.atoms[i], db));
    for (const SemijoinStep& st : plan.steps)
        node[size_t(st.parent)] = csr_semijoin(std::move(node[size_t(st.parent)]),
                                               std::move(node[size_t(st.child)]), st.z);
    CsrStore store = std::move(node[size_t(plan.flatten_node)]);
    csr_finalize(store);
    return store;
}

UsrStore build_usr(const NsaPlan& plan, const Db& db) {
    std::vector<UsrStore> node(plan.tree.atoms.size());
    for (size_t i = 0; i < plan.tree.atoms.size(); ++i)
        node[i] = make_usr_base(atom_relation(plan.tree.atoms[i], db));
    for (const SemijoinStep& st : plan.steps)
        node[size_t(st.parent)] = usr_semijoin(std::move(node[size_t(st.parent)]),
                                               std::move(node[size_t(st.child)]), st.z);
    UsrStore store = std::move(node[size_t(plan.flatten_node)]);
    usr_finalize(store);
    return store;
}

namespace {

double prob_at(const std::vector<Value>& col, size_t i, const char* where) {
    const Value& v = col[i];
    if (v.kind() == Kind::Str)
        throw ProbabilityOutOfRange(std::string(where) + " value at row " + std::to_string(i) +
                                    " is a string, not a probability");
    return v.as_number();
}

// Per-root-row weights and bern probabilities, the per-tuple reduction input.
struct RootProblem {
    std::vector<uint64_t> weights;
    std::vector<double> probs;
};

template <class Store, class WeightFn>
RootProblem root_problem(const Store& store, const std::string& bern, WeightFn weight_of) {
    const auto& rt = store.root_table();
    int ycol = -1;
    for (size_t a = 0; a < rt.attrs.size(); ++a)
        if (rt.attrs[a] == bern) ycol = int(a);
    if (ycol < 0) throw AttrNotInTree("attribute " + bern + " is not flat at the root");
    RootProblem rp;
    rp.weights.reserve(rt.nrows);
    rp.probs.reserve(rt.nrows);
    for (size_t i = 0; i < rt.nrows; ++i) {
        rp.weights.push_back(weight_of(i));
        rp.probs.push_back(prob_at(rt.cols[size_t(ycol)], i, "bern"));
    }
    return rp;
}

ProbeSequence make_positions(const RootProblem* rp, uint64_t n, const SampleOptions& opt,
                             Rng& rng, SamplerStats* stats) {
    if (opt.p_override)
        return sample_positions(opt.method, *opt.p_override, n, rng, opt.threshold, stats);
    return per_tuple(rp->weights, rp->probs, opt.method, rng, opt.threshold, stats);
}

PhysicalRelation reorder_columns(PhysicalRelation flat, const std::vector<std::string>& order) {
    PhysicalRelation out;
    out.name = std::move(flat.name);
    out.attrs = order;
    out.cols.reserve(order.size());
    for (const std::string& a : order) {
        int idx = flat.attr_index(a);
        if (idx < 0) throw Error("flat output is missing attribute " + a);
        out.cols.push_back(std::move(flat.cols[size_t(idx)]));
    }
    return out;
}

void require_bern(const JoinQuery& q, const SampleOptions& opt) {
    if (!opt.p_override && !q.bern_attr)
        throw BernAttrUnknown(
            "query names no bern attribute and no uniform probability was given");
}

}  // namespace

SampleResult index_and_probe(const JoinQuery& q, const Db& db, const SampleOptions& opt,
                             Rng& rng) {
    require_bern(q, opt);
    SampleResult res;
    auto t0 = Clock::now();
    NsaPlan plan = plan_query(q, !opt.p_override.has_value());
    PhysicalRelation flat;
    bool cached = caching_effective(opt.caching, opt.index);
    if (opt.index == IndexKind::Csr) {
        CsrStore store = build_csr(plan, db);
        res.times.build_ms = ms_since(t0);
        res.n = store.flat_count();

        auto t1 = Clock::now();
        RootProblem rp;
        if (!opt.p_override)
            rp = root_problem(store, *q.bern_attr,
                              [&](size_t i) { return csr_weight_of(store, store.root, i); });
        ProbeSequence pos = make_positions(&rp, res.n, opt, rng, &res.sampler);
        res.times.possample_ms = ms_since(t1);

        auto t2 = Clock::now();
        flat = cached ? csr_get_cached(store, pos, &res.probe)
                      : csr_get(store, pos, &res.probe);
        res.times.probe_ms = ms_since(t2);
        res.k = pos.size();
    } else {
        UsrStore store = build_usr(plan, db);
        res.times.build_ms = ms_since(t0);
        res.n = store.flat_count();

        auto t1 = Clock::now();
        RootProblem rp;
        if (!opt.p_override)
            rp = root_problem(store, *q.bern_attr,
                              [&](size_t i) { return usr_weight_of(store, store.root, i); });
        ProbeSequence pos = make_positions(&rp, res.n, opt, rng, &res.sampler);
        res.times.possample_ms = ms_since(t1);

        auto t2 = Clock::now();
        flat = cached ? usr_get_cached(store, pos, &res.probe)
                      : usr_get(store, pos, &res.probe);
        res.times.probe_ms = ms_since(t2);
        res.k = pos.size();
    }
    res.rows = reorder_columns(std::move(flat), q.attr_order());
    res.rows.name = "sample";
    return res;
}

SampleResult materialize_and_scan(const JoinQuery& q, const Db& db, const SampleOptions& opt,
                                  Rng& rng) {
    require_bern(q, opt);
    SampleResult res;
    auto t0 = Clock::now();
    NsaPlan plan = plan_query(q, !opt.p_override.has_value());
    PhysicalRelation flat;
    if (opt.index == IndexKind::Csr) {
        CsrStore store = build_csr(plan, db);
        res.times.build_ms = ms_since(t0);
        res.n = store.flat_count();
        t0 = Clock::now();
        flat = csr_flatten(store);
    } else {
        UsrStore store = build_usr(plan, db);
        res.times.build_ms = ms_since(t0);
        res.n = store.flat_count();
        t0 = Clock::now();
        flat = usr_flatten(store);
    }

    int ycol = -1;
    if (!opt.p_override) {
        ycol = flat.attr_index(*q.bern_attr);
        if (ycol < 0) throw AttrNotInTree("attribute " + *q.bern_attr + " missing from join");
    }
    std::vector<size_t> kept;
    for (size_t i = 0; i < flat.n(); ++i) {
        double p = opt.p_override ? *opt.p_override : prob_at(flat.cols[size_t(ycol)], i, "bern");
        if (!(p >= 0.0 && p <= 1.0))
            throw ProbabilityOutOfRange("probability " + std::to_string(p) + " at row " +
                                        std::to_string(i) + " outside [0,1]");
        if (rng.next_unit() < p) kept.push_back(i);
    }
    PhysicalRelation sel;
    sel.name = "sample";
    sel.attrs = flat.attrs;
    sel.cols.resize(flat.cols.size());
    for (size_t a = 0; a < flat.cols.size(); ++a) {
        sel.cols[a].reserve(kept.size());
        for (size_t i : kept) sel.cols[a].push_back(flat.cols[a][i]);
    }
    res.times.flatten_bernoulli_ms = ms_since(t0);
    res.k = kept.size();
    res.rows = reorder_columns(std::move(sel), q.attr_order());
    return res;
}

PhysicalRelation oracle_join(const JoinQuery& q, const Db& db) {
    std::vector<std::string> order = q.attr_order();
    PhysicalRelation out;
    out.name = "oracle";
    out.attrs = order;
    out.cols.resize(order.size());

    std::vector<PhysicalRelation> rels;
    std::vector<std::vector<size_t>> slots;  // per atom, attr position in `order`
    rels.reserve(q.atoms.size());
    for (const Atom& atom : q.atoms) {
        rels.push_back(atom_relation(atom, db));
        std::vector<size_t> s;
        for (const std::string& a : atom.attrs) {
            auto it = std::find(order.begin(), order.end(), a);
            s.push_back(size_t(it - order.begin()));
        }
        slots.push_back(std::move(s));
    }

    std::vector<Value> row(order.size());
    std::vector<bool> bound(order.size(), false);
    auto rec = [&](auto&& self, size_t ai) -> void {
        if (ai == q.atoms.size()) {
            out.append_row(row);
            return;
        }
        const PhysicalRelation& rel = rels[ai];
        const std::vector<size_t>& slot = slots[ai];
        std::vector<size_t> took;
        for (size_t r = 0; r < rel.n(); ++r) {
            bool ok = true;
            took.clear();
            for (size_t a = 0; a < slot.size(); ++a) {
                const Value& v = rel.cols[a][r];
                size_t s = slot[a];
                if (bound[s]) {
                    if (!(row[s] == v)) {
                        ok = false;
                        break;
                    }
                } else {
                    row[s] = v;
                    bound[s] = true;
                    took.push_back(s);
                }
            }
            if (ok) self(self, ai + 1);
            for (size_t s : took) bound[s] = false;
        }
    };
    rec(rec, 0);
    return out;
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "ip-csr") return Strategy::IpCsr;
    if (name == "ip-usr") return Strategy::IpUsr;
    if (name == "ms-csr") return Strategy::MsCsr;
    if (name == "ms-usr") return Strategy::MsUsr;
    throw UsageError("unknown strategy " + name +
                     " (expected ip-csr, ip-usr, ms-csr or ms-usr)");
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::IpCsr: return "ip-csr";
        case Strategy::IpUsr: return "ip-usr";
        case Strategy::MsCsr: return "ms-csr";
        case Strategy::MsUsr: return "ms-usr";
    }
    return "?";
}

namespace {

struct VecLess {
    bool operator()(const std::vector<Value>& a, const std::vector<Value>& b) const {
        for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
            if (value_less(a[i], b[i])) return true;
            if (value_less(b[i], a[i])) return false;
        }
        return a.size() < b.size();
    }
};

}  // namespace

CheckReport oracle_sample_check(const JoinQuery& q, const Db& db, Strategy strategy,
                                const SampleOptions& opt, uint64_t trials, uint64_t seed) {
    SampleOptions ropt = opt;
    ropt.index = (strategy == Strategy::IpCsr || strategy == Strategy::MsCsr)
                     ? IndexKind::Csr
                     : IndexKind::Usr;
    bool ip = strategy == Strategy::IpCsr || strategy == Strategy::IpUsr;

    PhysicalRelation oracle = oracle_join(q, db);
    int ycol = -1;
    if (!ropt.p_override) {
        if (!q.bern_attr)
            throw BernAttrUnknown(
                "query names no bern attribute and no uniform probability was given");
        ycol = oracle.attr_index(*q.bern_attr);
    }

    struct TupleInfo {
        uint64_t mult = 0;
        double p = 0;
        uint64_t count = 0;
    };
    std::map<std::vector<Value>, TupleInfo, VecLess> infos;
    for (size_t i = 0; i < oracle.n(); ++i) {
        std::vector<Value> key(oracle.attrs.size());
        for (size_t a = 0; a < key.size(); ++a) key[a] = oracle.cols[a][i];
        TupleInfo& info = infos[std::move(key)];
        info.mult += 1;
        info.p = ropt.p_override ? *ropt.p_override
                                 : prob_at(oracle.cols[size_t(ycol)], i, "bern");
    }

    CheckReport rep;
    rep.trials = trials;
    rep.oracle_rows = oracle.n();
    rep.distinct_tuples = infos.size();

    std::map<std::vector<Value>, uint64_t, VecLess> trial_counts;
    for (uint64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, t));
        SampleResult res = ip ? index_and_probe(q, db, ropt, rng)
                              : materialize_and_scan(q, db, ropt, rng);
        trial_counts.clear();
        std::vector<Value> key(res.rows.attrs.size());
        for (size_t i = 0; i < res.rows.n(); ++i) {
            for (size_t a = 0; a < key.size(); ++a) key[a] = res.rows.cols[a][i];
            auto it = infos.find(key);
            if (it == infos.end()) {
                rep.foreign_rows += 1;
                continue;
            }
            it->second.count += 1;
            trial_counts[key] += 1;
        }
        for (const auto& [k, c] : trial_counts)
            if (c > infos.find(k)->second.mult) rep.excess_rows += 1;
    }

    for (const auto& [key, info] : infos) {
        double N = double(info.mult) * double(trials);
        double expect = N * info.p;
        if (info.p <= 0.0 || info.p >= 1.0) {
            if (double(info.count) != expect) rep.failures += 1;
            continue;
        }
        double se = std::sqrt(N * info.p * (1.0 - info.p));
        double z = (double(info.count) - expect) / se;
        rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
        if (std::abs(z) > 5.0) rep.failures += 1;
    }
    return rep;
}

namespace {

int64_t pow10_i(int e) {
    int64_t v = 1;
    for (int i = 0; i < e; ++i) v = checked_mul(uint64_t(v), 10ull);
    return v;
}

}  // namespace

SyntheticInstance gen_synthetic(const BenchConfig& cfg) {
    if (!(1 <= cfg.s && cfg.s < cfg.o))
        throw DomainError("synthetic config needs 1 <= s < o");
    if (cfg.o > 8) throw DomainError("synthetic config capped at o <= 8");
    int64_t ns = pow10_i(cfg.s);
    int64_t nt = pow10_i(cfg.o);
    int64_t deg = pow10_i(cfg.o - cfg.s);

    PhysicalRelation S = make_relation("S", {"x", "y"});
    for (int64_t i = 0; i < ns; ++i) {
        S.cols[0].push_back(Value::of_int(i));
        S.cols[1].push_back(Value::of_int(i));
    }
    PhysicalRelation T = make_relation("T", {"y", "z"});
    T.cols[0].reserve(size_t(nt));
    T.cols[1].reserve(size_t(nt));
    for (int64_t i = 0; i < nt; ++i) {
        T.cols[0].push_back(Value::of_int(i / deg));
        T.cols[1].push_back(Value::of_int(i));
    }
    Rng rng(cfg.seed);
    for (size_t i = size_t(nt); i-- > 1;) {
        size_t j = size_t(rng.bounded(uint64_t(i) + 1));
        std::swap(T.cols[0][i], T.cols[0][j]);
        std::swap(T.cols[1][i], T.cols[1][j]);
    }

    SyntheticInstance inst;
    inst.db.emplace("S", std::move(S));
    inst.db.emplace("T", std::move(T));
    inst.query.atoms = {Atom{"T", {"y", "z"}}, Atom{"S", {"x", "y"}}};
    return inst;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    if (v.empty()) return 0;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

std::vector<BenchRow> bench(const BenchConfig& cfg) {
    if (cfg.trials == 0) throw DomainError("bench needs at least one trial");
    SyntheticInstance inst = gen_synthetic(cfg);
    std::vector<BenchRow> out;
    for (double p : cfg.ps) {
        for (const char* strat : {"ip", "ms"}) {
            SampleOptions opt;
            opt.index = cfg.index;
            opt.caching = cfg.caching;
            opt.method = cfg.method;
            opt.threshold = cfg.threshold;
            opt.p_override = p;

            BenchRow row;
            row.strategy = strat;
            row.index = cfg.index;
            row.cached = caching_effective(cfg.caching, cfg.index);
            row.p = p;
            row.n = 0;

            std::vector<double> build, possample, probe, flatbern, total;
            bool ip = std::string(strat) == "ip";
            for (uint64_t t = 0; t <= cfg.trials; ++t) {
                // t = 0 is the warm-up; measured trials reuse seeds 0..trials-1
                uint64_t trial = t == 0 ? 0 : t - 1;
                Rng rng(derive_seed(cfg.seed, trial));
                SampleResult res = ip ? index_and_probe(inst.query, inst.db, opt, rng)
                                      : materialize_and_scan(inst.query, inst.db, opt, rng);
                if (t == 0) continue;
                build.push_back(res.times.build_ms);
                possample.push_back(res.times.possample_ms);
                probe.push_back(res.times.probe_ms);
                flatbern.push_back(res.times.flatten_bernoulli_ms);
                total.push_back(res.times.total_ms());
                if (t == 1) {
                    row.k = res.k;
                    row.n = res.n;
                    row.geo_draws = res.sampler.geo_draws;
                    row.chain_steps = res.probe.chain_steps;
                    row.pref_compares = res.probe.pref_compares;
                }
            }
            row.build_ms = median_of(build);
            row.possample_ms = median_of(possample);
            row.probe_ms = median_of(probe);
            row.flatten_bernoulli_ms = median_of(flatbern);
            row.total_ms = median_of(total);
            out.push_back(std::move(row));
        }
    }
    return out;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

}  // namespace

void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out) {
    out << "strategy,index,caching,p,build_ms,possample_ms,probe_ms,"
           "flatten_bernoulli_ms,total_ms,k,n,geo_draws,chain_steps,pref_compares\n";
    for (const BenchRow& r : rows) {
        out << r.strategy << ',' << index_name(r.index) << ',' << (r.cached ? "on" : "off")
            << ',' << fmt_double(r.p) << ',' << fmt_double(r.build_ms) << ','
            << fmt_double(r.possample_ms) << ',' << fmt_double(r.probe_ms) << ','
            << fmt_double(r.flatten_bernoulli_ms) << ',' << fmt_double(r.total_ms) << ','
            << r.k << ',' << r.n << ',' << r.geo_draws << ',' << r.chain_steps << ','
            << r.pref_compares << '\n';
    }
}

}  // namespace js
