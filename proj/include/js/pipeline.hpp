#pragma once

#include <iosfwd>
#include <map>
#include <optional>

#include "js/csr.hpp"
#include "js/csv.hpp"
#include "js/plan.hpp"
#include "js/query.hpp"
#include "js/sampling.hpp"
#include "js/usr.hpp"

namespace js {

using Db = std::map<std::string, PhysicalRelation>;

// Loads every declared relation; file= paths resolve against data_dir when
// given, else against the query file's directory. attrs= declarations rename
// the CSV header positionally.
Db load_db(const QueryFile& qf, const std::string& query_path,
           const std::string& data_dir = "");

enum class IndexKind { Csr, Usr };
IndexKind index_from_name(const std::string& name);  // csr|usr
const char* index_name(IndexKind k);

// Auto resolves per index: cached access for the chained store, plain access
// for the unchained one.
enum class Caching { Auto, On, Off };
Caching caching_from_name(const std::string& name);  // auto|on|off
bool caching_effective(Caching c, IndexKind k);

// Acyclicity check, optional rerooting at the bern attribute, then the
// two-phase compilation.
NsaPlan plan_query(const JoinQuery& q, bool reroot_at_bern);

CsrStore build_csr(const NsaPlan& plan, const Db& db);
UsrStore build_usr(const NsaPlan& plan, const Db& db);

struct PhaseTimings {
    double build_ms = 0;
    double possample_ms = 0;
    double probe_ms = 0;
    double flatten_bernoulli_ms = 0;

    double total_ms() const {
        return build_ms + possample_ms + probe_ms + flatten_bernoulli_ms;
    }
};

struct SampleResult {
    PhysicalRelation rows;  // columns in attribute-first-appearance order
    uint64_t n = 0;         // full join size
    uint64_t k = 0;         // sample size = rows.n()
    PhaseTimings times;
    ProbeStats probe;
    SamplerStats sampler;
};

struct SampleOptions {
    IndexKind index = IndexKind::Csr;
    Method method = Method::Hybrid;    // uniform solver; inner solver per tuple
    std::optional<double> p_override;  // uniform p; skips per-tuple and reroot
    double threshold = 0.5;
    Caching caching = Caching::Auto;
};

// Build the index, draw a probe sequence (per-tuple on the root's bern
// values unless a uniform p overrides them), probe it, never materializing
// the full join.
SampleResult index_and_probe(const JoinQuery& q, const Db& db, const SampleOptions& opt,
                             Rng& rng);

// Build the index, flatten the full join, one Bernoulli trial per output row.
SampleResult materialize_and_scan(const JoinQuery& q, const Db& db, const SampleOptions& opt,
                                  Rng& rng);

// Exhaustive nested-loop join honoring bag multiplicities. Reference answer
// for small instances; accepts cyclic queries too.
PhysicalRelation oracle_join(const JoinQuery& q, const Db& db);

enum class Strategy { IpCsr, IpUsr, MsCsr, MsUsr };
Strategy strategy_from_name(const std::string& name);  // ip-csr|ip-usr|ms-csr|ms-usr
const char* strategy_name(Strategy s);

struct CheckReport {
    uint64_t trials = 0;
    uint64_t oracle_rows = 0;       // bag size of the reference join
    uint64_t distinct_tuples = 0;   // distinct value tuples among them
    double max_abs_z = 0;           // worst frequency deviation, in standard errors
    uint64_t failures = 0;          // tuples beyond 5 standard errors (or exact miss)
    uint64_t foreign_rows = 0;      // sampled rows absent from the reference join
    uint64_t excess_rows = 0;       // per-trial multiplicity above the reference bag

    bool ok() const { return failures == 0 && foreign_rows == 0 && excess_rows == 0; }
};

// Runs the strategy `trials` times with per-trial derived seeds and compares
// every reference tuple's empirical inclusion frequency against its
// probability at 5 standard errors (exact comparison at p = 0 and p = 1).
CheckReport oracle_sample_check(const JoinQuery& q, const Db& db, Strategy strategy,
                                const SampleOptions& opt, uint64_t trials, uint64_t seed);

struct BenchConfig {
    int o = 4;  // log10 of the full join size
    int s = 2;  // log10 of |S|; degree of each key in T is 10^(o-s)
    std::vector<double> ps{0.001, 0.01, 0.1};
    IndexKind index = IndexKind::Csr;
    Caching caching = Caching::Auto;
    Method method = Method::Hybrid;
    double threshold = 0.5;
    uint64_t trials = 3;
    uint64_t seed = 42;
};

struct SyntheticInstance {
    Db db;
    JoinQuery query;
};

// Two-relation chain: S(x,y) with 10^s rows and distinct keys, T(y,z) with
// 10^o rows spread evenly over the keys, T in seeded random row order.
SyntheticInstance gen_synthetic(const BenchConfig& cfg);

struct BenchRow {
    std::string strategy;  // ip|ms
    IndexKind index;
    bool cached = false;
    double p = 0;
    double build_ms = 0;
    double possample_ms = 0;
    double probe_ms = 0;
    double flatten_bernoulli_ms = 0;
    double total_ms = 0;
    uint64_t k = 0;
    uint64_t n = 0;
    uint64_t geo_draws = 0;
    uint64_t chain_steps = 0;
    uint64_t pref_compares = 0;
};

// One row per (p, strategy): per-phase wall-clock medians over the trials,
// after one discarded warm-up run, plus the work counters of trial 0.
std::vector<BenchRow> bench(const BenchConfig& cfg);

void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out);

}  // namespace js
