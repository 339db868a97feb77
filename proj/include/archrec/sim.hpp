#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archrec/graph.hpp"
#include "archrec/trace.hpp"

namespace archrec {

// Per-GEMM counts one op invocation produces.
struct GemmCounts {
    std::int64_t conv = 0;
    std::int64_t oncopy = 0;
    friend bool operator==(const GemmCounts&, const GemmCounts&) = default;
};

// Deterministic timing/GEMM model shared by the simulator and the offline
// profiler. Spans are base + cycles_per_mac * macs per op kind; GEMM call
// counts follow panel-blocking of the multiplications.
struct CostModel {
    struct KindCost {
        Cycles base = 20000;
        double cycles_per_mac = 1.0;
    };
    KindCost cost[kOpKindCount];
    // oncopy blocking: calls = ceil(M/m_block) + ceil(K/k_block) - 1
    std::int64_t m_block = 512;
    std::int64_t k_block = 256;
    std::int64_t dw_m_block = 1024;  // per-channel panel for depthwise
    FrameworkProfile profile = FrameworkProfile::PyTorch;

    static CostModel defaults();
    std::string fingerprint() const;

    std::string to_json_text() const;
    static CostModel from_json_text(const std::string& text);
};

struct NoiseModel {
    int dup_hits_max = 3;        // extra cache hits per call
    Cycles jitter = 500;         // uniform +- on each hit
    double spurious_prob = 0.001;  // unrelated-symbol hit, one draw per op
    std::uint64_t seed = 0;

    static NoiseModel none();
    static NoiseModel defaults(std::uint64_t seed);

    std::string to_json_text() const;
    static NoiseModel from_json_text(const std::string& text);
};

// Multiply-accumulate count of one op application.
std::int64_t mac_count(OpKind op, const OpParams& params, const Shape& in_shape);

// Noiseless span and GEMM counts; the profiling primitives.
Cycles op_span(OpKind op, const OpParams& params, const Shape& in_shape, const CostModel& cost);
GemmCounts gemm_counts(OpKind op, const OpParams& params, const Shape& in_shape,
                       const CostModel& cost);

// Emits the raw cache-hit trace one inference of `g` would produce.
// Bit-identical across runs for a fixed (g, cost, noise) triple.
std::vector<RawEvent> simulate(const ArchGraph& g, const CostModel& cost, const NoiseModel& noise);

}  // namespace archrec
