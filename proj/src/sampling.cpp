#include "js/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "js/error.hpp"

namespace js {

Method method_from_name(const std::string& name) {
    if (name == "naive") return Method::Naive;
    if (name == "geo") return Method::Geo;
    if (name == "binom") return Method::Binom;
    if (name == "hybrid") return Method::Hybrid;
    throw UsageError("unknown method '" + name + "'");
}

const char* method_name(Method m) {
    switch (m) {
        case Method::Naive: return "naive";
        case Method::Geo: return "geo";
        case Method::Binom: return "binom";
        default: return "hybrid";
    }
}

uint64_t geom_from_unit(double p, double u) {
    double g = std::floor(std::log(u) / std::log1p(-p));
    // gaps beyond any realistic domain size saturate; callers only compare
    // against n
    if (!(g < 1e18)) return uint64_t(1) << 62;
    return g < 0 ? 0 : uint64_t(g);
}

uint64_t draw_geom(double p, Rng& rng) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("draw_geom requires 0 < p < 1, got " + std::to_string(p));
    return geom_from_unit(p, rng.next_unit_open());
}

static void check_unit_range(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("probability outside [0,1]: " + std::to_string(p));
}

ProbeSequence geo(double p, uint64_t n, Rng& rng, SamplerStats* stats) {
    check_unit_range(p);
    ProbeSequence out;
    if (p == 0.0 || n == 0) return out;
    if (p == 1.0) {
        out.resize(n);
        std::iota(out.begin(), out.end(), uint64_t(0));
        return out;
    }
    uint64_t draws = 1;
    uint64_t i = draw_geom(p, rng);
    while (i < n) {
        out.push_back(i);
        uint64_t gap = draw_geom(p, rng);
        ++draws;
        if (gap >= n) break;  // next position cannot land inside [0,n)
        i += 1 + gap;
    }
    if (stats) stats->geo_draws += draws;
    return out;
}

ProbeSequence naive(double p, uint64_t n, Rng& rng) {
    check_unit_range(p);
    ProbeSequence out;
    for (uint64_t i = 0; i < n; ++i)
        if (rng.next_unit() < p) out.push_back(i);
    return out;
}

uint64_t binomial_draw(uint64_t n, double p, Rng& rng) {
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    double q = std::min(p, 1.0 - p);
    if (double(n) * q <= 30.0) {
        // cdf inversion on the smaller tail
        double c = std::exp(double(n) * std::log1p(-q));  // (1-q)^n
        double u = rng.next_unit();
        uint64_t k = 0;
        while (u >= c && k < n) {
            u -= c;
            c *= (double(n - k) / double(k + 1)) * (q / (1.0 - q));
            ++k;
        }
        return p <= 0.5 ? k : n - k;
    }
    std::binomial_distribution<long long> dist((long long)n, p);
    return uint64_t(dist(rng.engine()));
}

ProbeSequence binom(double p, uint64_t n, Rng& rng) {
    check_unit_range(p);
    if (p == 0.0 || n == 0) return {};
    if (p == 1.0) {
        ProbeSequence out(n);
        std::iota(out.begin(), out.end(), uint64_t(0));
        return out;
    }
    uint64_t k = binomial_draw(n, p, rng);
    // Floyd's uniform k-subset of [0,n)
    std::unordered_set<uint64_t> chosen;
    chosen.reserve(size_t(k) * 2);
    ProbeSequence out;
    out.reserve(size_t(k));
    for (uint64_t j = n - k; j < n; ++j) {
        uint64_t t = rng.bounded(j + 1);
        if (chosen.insert(t).second) {
            out.push_back(t);
        } else {
            chosen.insert(j);
            out.push_back(j);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ProbeSequence hybrid(double p, uint64_t n, Rng& rng, double threshold) {
    check_unit_range(p);
    return p <= threshold ? geo(p, n, rng) : naive(p, n, rng);
}

ProbeSequence sample_positions(Method m, double p, uint64_t n, Rng& rng, double threshold,
                               SamplerStats* stats) {
    switch (m) {
        case Method::Naive: return naive(p, n, rng);
        case Method::Geo: return geo(p, n, rng, stats);
        case Method::Binom: return binom(p, n, rng);
        default: {
            check_unit_range(p);
            return p <= threshold ? geo(p, n, rng, stats) : naive(p, n, rng);
        }
    }
}

ProbeSequence per_tuple(std::span<const uint64_t> weights, std::span<const double> probs,
                        Method method, Rng& rng, double threshold, SamplerStats* stats) {
    if (weights.size() != probs.size())
        throw DomainError("per_tuple: weights and probs sizes differ");
    for (size_t t = 0; t < probs.size(); ++t)
        if (!(probs[t] >= 0.0 && probs[t] <= 1.0))
            throw ProbabilityOutOfRange("probability " + std::to_string(probs[t]) +
                                        " outside [0,1] at row " + std::to_string(t));
    ProbeSequence out;
    uint64_t offset = 0;
    for (size_t t = 0; t < probs.size(); ++t) {
        ProbeSequence local = sample_positions(method, probs[t], weights[t], rng, threshold,
                                               stats);
        for (uint64_t x : local) out.push_back(offset + x);
        offset += weights[t];
    }
    return out;
}

}  // namespace js
