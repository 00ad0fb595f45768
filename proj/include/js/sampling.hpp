#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "js/rng.hpp"

namespace js {

// Strictly increasing positions, each below the stated domain size n.
using ProbeSequence = std::vector<uint64_t>;

enum class Method { Naive, Geo, Binom, Hybrid };

Method method_from_name(const std::string& name);  // naive|geo|binom|hybrid
const char* method_name(Method m);

struct SamplerStats {
    uint64_t geo_draws = 0;  // geometric gap draws consumed by geo()
};

// Failures before the first success, Geometric(p), via inverse-exponential
// truncation with u drawn from the open unit interval. Requires 0 < p < 1.
uint64_t draw_geom(double p, Rng& rng);
uint64_t geom_from_unit(double p, double u);  // the pure truncation formula

// Skip sampling: each position in [0,n) kept independently with probability p;
// expected work O(np). Consumes exactly |output|+1 gap draws for 0<p<1.
ProbeSequence geo(double p, uint64_t n, Rng& rng, SamplerStats* stats = nullptr);

// One unit uniform per position.
ProbeSequence naive(double p, uint64_t n, Rng& rng);

// Draw k ~ Binomial(n,p) exactly, then a uniform k-subset in O(k) expected
// time, returned sorted.
ProbeSequence binom(double p, uint64_t n, Rng& rng);
uint64_t binomial_draw(uint64_t n, double p, Rng& rng);

// geo below the threshold (default 0.5), naive above it.
ProbeSequence hybrid(double p, uint64_t n, Rng& rng, double threshold = 0.5);

ProbeSequence sample_positions(Method m, double p, uint64_t n, Rng& rng,
                               double threshold = 0.5, SamplerStats* stats = nullptr);

// Non-uniform reduction: solve one uniform problem (probs[t], weights[t]) per
// root row and shift by the running weight offset. Globally sorted by
// construction.
ProbeSequence per_tuple(std::span<const uint64_t> weights, std::span<const double> probs,
                        Method method, Rng& rng, double threshold = 0.5,
                        SamplerStats* stats = nullptr);

}  // namespace js
