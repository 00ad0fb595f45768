#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "js/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw js::IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Opts {
    std::string query_file;
    std::string data_dir;
    std::string index = "csr";
    std::string caching = "auto";
    std::string method = "per-tuple";
    std::string strategy = "ip-csr";
    std::optional<double> p;
    double threshold = 0.5;
    uint64_t seed = 0;
    uint64_t trials = 1000;
    uint64_t bench_trials = 3;
    std::string output;
    int o = 4;
    int s = 2;
    std::vector<double> ps{0.001, 0.01, 0.1};
};

js::SampleOptions sample_options(const Opts& o) {
    js::SampleOptions opt;
    opt.index = js::index_from_name(o.index);
    opt.caching = js::caching_from_name(o.caching);
    opt.method = o.method == "per-tuple" ? js::Method::Hybrid : js::method_from_name(o.method);
    opt.p_override = o.p;
    opt.threshold = o.threshold;
    return opt;
}

// The machine CSV goes to --output when given, otherwise to stdout after the
// summary line.
void emit_csv(const js::PhysicalRelation& rel, const std::string& output) {
    if (output.empty()) {
        js::write_csv(rel, std::cout);
    } else {
        js::write_csv(rel, output);
    }
}

void print_timings(const js::SampleResult& res) {
    std::cout << "n=" << res.n << " k=" << res.k << " build_ms=" << res.times.build_ms
              << " possample_ms=" << res.times.possample_ms
              << " probe_ms=" << res.times.probe_ms
              << " flatten_bernoulli_ms=" << res.times.flatten_bernoulli_ms
              << " geo_draws=" << res.sampler.geo_draws
              << " chain_steps=" << res.probe.chain_steps
              << " pref_compares=" << res.probe.pref_compares << "\n";
}

int run(const CLI::App& app, const Opts& o) {
    using namespace js;
    if (app.got_subcommand("plan")) {
        QueryFile qf = parse_query_file(read_file(o.query_file));
        NsaPlan plan = plan_query(qf.query, qf.query.bern_attr.has_value());
        std::cout << plan.tree.describe() << plan.describe();
        return 0;
    }
    if (app.got_subcommand("index")) {
        QueryFile qf = parse_query_file(read_file(o.query_file));
        Db db = load_db(qf, o.query_file, o.data_dir);
        NsaPlan plan = plan_query(qf.query, qf.query.bern_attr.has_value());
        std::ostringstream dump;
        if (index_from_name(o.index) == IndexKind::Csr) {
            CsrStore store = build_csr(plan, db);
            csr_validate(store);
            std::cout << "index=csr flats=" << store.flat_count()
                      << " tables=" << store.tables.size() << "\n";
            csr_dump(store, dump);
        } else {
            UsrStore store = build_usr(plan, db);
            usr_validate(store);
            std::cout << "index=usr flats=" << store.flat_count()
                      << " tables=" << store.tables.size() << "\n";
            usr_dump(store, dump);
        }
        if (o.output.empty()) {
            std::cout << dump.str();
        } else {
            std::ofstream out(o.output, std::ios::binary);
            if (!out) throw IoError("cannot write " + o.output);
            out << dump.str();
        }
        return 0;
    }
    if (app.got_subcommand("join")) {
        QueryFile qf = parse_query_file(read_file(o.query_file));
        Db db = load_db(qf, o.query_file, o.data_dir);
        NsaPlan plan = plan_query(qf.query, qf.query.bern_attr.has_value());
        PhysicalRelation flat;
        if (index_from_name(o.index) == IndexKind::Csr) {
            flat = csr_flatten(build_csr(plan, db));
        } else {
            flat = usr_flatten(build_usr(plan, db));
        }
        std::vector<std::string> order = qf.query.attr_order();
        PhysicalRelation out = make_relation("join", order);
        for (const std::string& a : order) {
            int idx = flat.attr_index(a);
            out.cols[size_t(out.attr_index(a))] = std::move(flat.cols[size_t(idx)]);
        }
        std::cout << "rows=" << out.n() << "\n";
        emit_csv(out, o.output);
        return 0;
    }
    if (app.got_subcommand("sample")) {
        QueryFile qf = parse_query_file(read_file(o.query_file));
        Db db = load_db(qf, o.query_file, o.data_dir);
        Rng rng(o.seed);
        SampleResult res = index_and_probe(qf.query, db, sample_options(o), rng);
        print_timings(res);
        emit_csv(res.rows, o.output);
        return 0;
    }
    if (app.got_subcommand("verify")) {
        QueryFile qf = parse_query_file(read_file(o.query_file));
        Db db = load_db(qf, o.query_file, o.data_dir);
        CheckReport rep = oracle_sample_check(qf.query, db, strategy_from_name(o.strategy),
                                              sample_options(o), o.trials, o.seed);
        std::cout << "strategy=" << o.strategy << " trials=" << rep.trials
                  << " oracle_rows=" << rep.oracle_rows
                  << " distinct_tuples=" << rep.distinct_tuples
                  << " max_abs_z=" << rep.max_abs_z << " failures=" << rep.failures
                  << " foreign_rows=" << rep.foreign_rows << " excess_rows=" << rep.excess_rows
                  << (rep.ok() ? " OK" : " FAIL") << "\n";
        return rep.ok() ? 0 : 1;
    }
    if (app.got_subcommand("bench")) {
        BenchConfig cfg;
        cfg.o = o.o;
        cfg.s = o.s;
        cfg.ps = o.ps;
        cfg.index = index_from_name(o.index);
        cfg.caching = caching_from_name(o.caching);
        cfg.method = o.method == "per-tuple" ? Method::Hybrid : method_from_name(o.method);
        cfg.threshold = o.threshold;
        cfg.trials = o.bench_trials;
        cfg.seed = o.seed;
        std::vector<BenchRow> rows = bench(cfg);
        for (size_t i = 0; i + 1 < rows.size(); i += 2) {
            const BenchRow& ip = rows[i];
            const BenchRow& ms = rows[i + 1];
            std::cout << "p=" << ip.p << " n=" << ip.n << " k=" << ip.k
                      << " ip_total_ms=" << ip.total_ms << " ms_total_ms=" << ms.total_ms
                      << " ratio=" << (ms.total_ms > 0 ? ip.total_ms / ms.total_ms : 0)
                      << "\n";
        }
        std::ostringstream csv;
        write_bench_csv(rows, csv);
        if (o.output.empty()) {
            std::cout << csv.str();
        } else {
            std::ofstream out(o.output, std::ios::binary);
            if (!out) throw IoError("cannot write " + o.output);
            out << csv.str();
        }
        return 0;
    }
    throw js::UsageError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bernoulli sampling over acyclic joins without materializing them"};
    app.require_subcommand(1);
    Opts o;

    auto add_query = [&](CLI::App* cmd) {
        cmd->add_option("query", o.query_file, "query file")->required();
        cmd->add_option("--data-dir", o.data_dir, "base directory for relation files");
    };
    auto add_index = [&](CLI::App* cmd) {
        cmd->add_option("--index", o.index, "index kind: csr or usr")
            ->check(CLI::IsMember({"csr", "usr"}));
    };
    auto add_sampling = [&](CLI::App* cmd) {
        cmd->add_option("--method", o.method, "naive, geo, binom, hybrid or per-tuple")
            ->check(CLI::IsMember({"naive", "geo", "binom", "hybrid", "per-tuple"}));
        cmd->add_option("--p", o.p, "uniform probability override");
        cmd->add_option("--threshold", o.threshold, "hybrid geo/naive switch point");
        cmd->add_option("--seed", o.seed, "rng seed")->envname("JS_SEED");
        cmd->add_option("--caching", o.caching, "probe caching: auto, on or off")
            ->check(CLI::IsMember({"auto", "on", "off"}));
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--output", o.output, "write the machine CSV here");
    };

    CLI::App* plan = app.add_subcommand("plan", "print the join tree and the evaluation plan");
    plan->add_option("query", o.query_file, "query file")->required();

    CLI::App* index = app.add_subcommand("index", "build an index and dump its tables");
    add_query(index);
    add_index(index);
    add_output(index);

    CLI::App* join = app.add_subcommand("join", "materialize the full join as CSV");
    add_query(join);
    add_index(join);
    add_output(join);

    CLI::App* sample = app.add_subcommand("sample", "draw a Bernoulli sample of the join");
    add_query(sample);
    add_index(sample);
    add_sampling(sample);
    add_output(sample);

    CLI::App* verify = app.add_subcommand("verify", "check sample frequencies against the join");
    add_query(verify);
    verify->add_option("--strategy", o.strategy, "ip-csr, ip-usr, ms-csr or ms-usr")
        ->check(CLI::IsMember({"ip-csr", "ip-usr", "ms-csr", "ms-usr"}));
    verify->add_option("--trials", o.trials, "number of sampling runs");
    add_sampling(verify);

    CLI::App* bench = app.add_subcommand("bench", "time the strategies on synthetic data");
    bench->add_option("--o", o.o, "log10 of the full join size");
    bench->add_option("--s", o.s, "log10 of the key-side relation size");
    bench->add_option("--ps", o.ps, "probability list")->delimiter(',');
    bench->add_option("--trials", o.bench_trials, "measured runs per configuration");
    add_index(bench);
    add_sampling(bench);
    add_output(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run(app, o);
    } catch (const js::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const js::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
