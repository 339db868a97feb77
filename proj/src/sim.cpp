#include "archrec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace archrec {

using json = nlohmann::ordered_json;

CostModel CostModel::defaults() {
    CostModel m;
    auto set = [&](OpKind k, Cycles base, double cpm) {
        m.cost[static_cast<int>(k)] = {base, cpm};
    };
    // Dense conv calibrated to ~2.0M cycles for a (3,10,3,1) conv on 3x32x32;
    // depthwise to ~3.668M for (10,10,1,1) on 10x30x30. Depthwise pays far
    // more per MAC: many tiny per-channel GEMMs, memory bound.
    set(OpKind::Conv1d, 56000, 8.0);
    set(OpKind::Conv2d, 56000, 8.0);
    set(OpKind::DepthConv2d, 68000, 400.0);
    set(OpKind::Linear, 56000, 8.0);
    set(OpKind::BatchNorm, 50000, 140.0);
    set(OpKind::ReLU6, 30000, 60.0);
    set(OpKind::Sigmoid, 30000, 60.0);
    set(OpKind::Add, 20000, 30.0);
    set(OpKind::Multiply, 20000, 30.0);
    set(OpKind::MaxPool1d, 25000, 20.0);
    set(OpKind::AvgPool, 25000, 20.0);
    set(OpKind::Embedding, 40000, 4.0);
    set(OpKind::Transpose, 15000, 0.0);  // view only
    set(OpKind::Narrow, 15000, 0.0);     // view only
    return m;
}

std::string CostModel::fingerprint() const { return digest_hex(to_json_text()); }

std::string CostModel::to_json_text() const {
    json j;
    j["kind_cost"] = json::object();
    for (int i = 0; i < kOpKindCount; ++i) {
        json kc;
        kc["base"] = cost[i].base;
        kc["cycles_per_mac"] = cost[i].cycles_per_mac;
        j["kind_cost"][op_name(static_cast<OpKind>(i))] = kc;
    }
    j["m_block"] = m_block;
    j["k_block"] = k_block;
    j["dw_m_block"] = dw_m_block;
    j["profile"] = profile == FrameworkProfile::PyTorch ? "pytorch" : "tensorflow";
    return j.dump(2);
}

CostModel CostModel::from_json_text(const std::string& text) {
    json j = json::parse(text);
    CostModel m = CostModel::defaults();
    if (j.contains("kind_cost"))
        for (auto it = j["kind_cost"].begin(); it != j["kind_cost"].end(); ++it) {
            auto k = op_from_name(it.key());
            if (!k) throw std::runtime_error("cost model: unknown op " + it.key());
            m.cost[static_cast<int>(*k)].base = it.value().at("base").get<Cycles>();
            m.cost[static_cast<int>(*k)].cycles_per_mac =
                it.value().at("cycles_per_mac").get<double>();
        }
    if (j.contains("m_block")) m.m_block = j["m_block"].get<std::int64_t>();
    if (j.contains("k_block")) m.k_block = j["k_block"].get<std::int64_t>();
    if (j.contains("dw_m_block")) m.dw_m_block = j["dw_m_block"].get<std::int64_t>();
    if (j.contains("profile"))
        m.profile = j["profile"].get<std::string>() == "tensorflow" ? FrameworkProfile::TensorFlow
                                                                    : FrameworkProfile::PyTorch;
    return m;
}

NoiseModel NoiseModel::none() { return NoiseModel{1, 0, 0.0, 0}; }

NoiseModel NoiseModel::defaults(std::uint64_t seed) { return NoiseModel{3, 500, 0.001, seed}; }

std::string NoiseModel::to_json_text() const {
    json j;
    j["dup_hits_max"] = dup_hits_max;
    j["jitter"] = jitter;
    j["spurious_prob"] = spurious_prob;
    j["seed"] = seed;
    return j.dump(2);
}

NoiseModel NoiseModel::from_json_text(const std::string& text) {
    json j = json::parse(text);
    NoiseModel n;
    n.dup_hits_max = j.at("dup_hits_max").get<int>();
    n.jitter = j.at("jitter").get<Cycles>();
    n.spurious_prob = j.at("spurious_prob").get<double>();
    n.seed = j.value("seed", 0ull);
    return n;
}

std::int64_t mac_count(OpKind op, const OpParams& params, const Shape& in_shape) {
    if (is_conv(op)) {
        const auto& c = std::get<ConvParams>(params);
        Shape out = propagate_shape(op, params, {in_shape});
        std::int64_t out_spatial = 1;
        for (std::size_t i = 1; i < out.rank(); ++i) out_spatial *= out.dims[i];
        const int spatial_rank = op == OpKind::Conv1d ? 1 : 2;
        std::int64_t k = 1;
        for (int i = 0; i < spatial_rank; ++i) k *= c.kernel;
        if (op == OpKind::DepthConv2d) return out_spatial * k * c.out_ch;
        return out_spatial * k * c.in_ch * c.out_ch;
    }
    if (op == OpKind::Linear) {
        const auto& l = std::get<LinearParams>(params);
        std::int64_t rows = in_shape.numel() / in_shape.dims.back();
        return rows * l.in_dim * l.out_dim;
    }
    // element-wise cost
    return in_shape.numel();
}

namespace {
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }
}

GemmCounts gemm_counts(OpKind op, const OpParams& params, const Shape& in_shape,
                       const CostModel& cost) {
    GemmCounts g;
    if (is_conv(op)) {
        const auto& c = std::get<ConvParams>(params);
        Shape out = propagate_shape(op, params, {in_shape});
        std::int64_t out_spatial = 1;
        for (std::size_t i = 1; i < out.rank(); ++i) out_spatial *= out.dims[i];
        const int spatial_rank = op == OpKind::Conv1d ? 1 : 2;
        std::int64_t ksz = 1;
        for (int i = 0; i < spatial_rank; ++i) ksz *= c.kernel;
        if (op == OpKind::DepthConv2d) {
            // one small GEMM per channel
            g.conv = c.out_ch;
            g.oncopy = c.out_ch * (ceil_div(out_spatial, cost.dw_m_block) +
                                   ceil_div(ksz, cost.k_block) - 1);
        } else {
            g.conv = 1;
            const std::int64_t M = out_spatial;
            const std::int64_t K = ksz * c.in_ch;
            g.oncopy = ceil_div(M, cost.m_block) + ceil_div(K, cost.k_block) - 1;
        }
        return g;
    }
    if (op == OpKind::Linear) {
        const auto& l = std::get<LinearParams>(params);
        g.conv = 0;
        g.oncopy = ceil_div(l.out_dim, cost.m_block) + ceil_div(l.in_dim, cost.k_block) - 1;
        return g;
    }
    return g;
}

Cycles op_span(OpKind op, const OpParams& params, const Shape& in_shape, const CostModel& cost) {
    const auto& kc = cost.cost[static_cast<int>(op)];
    const double span = static_cast<double>(kc.base) +
                        kc.cycles_per_mac * static_cast<double>(mac_count(op, params, in_shape));
    return static_cast<Cycles>(std::llround(span));
}

std::vector<RawEvent> simulate(const ArchGraph& g, const CostModel& cost,
                               const NoiseModel& noise) {
    if (auto v = validate_graph(g); !v.empty()) {
        std::string msg = "simulate: invalid graph:";
        for (const auto& x : v) msg += " [" + x.code + "] " + x.detail;
        throw std::runtime_error(msg);
    }
    auto order = trace_order_ids(g);
    auto shapes = propagate_all(g);
    std::unordered_map<int, std::size_t> idx;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) idx[g.nodes[i].id] = i;

    std::mt19937_64 rng(noise.seed);
    auto jittered = [&](Cycles t) {
        if (noise.jitter == 0) return t;
        std::uniform_int_distribution<Cycles> d(-noise.jitter, noise.jitter);
        return std::max<Cycles>(0, t + d(rng));
    };

    std::vector<RawEvent> events;
    Cycles clock = 50000000;  // arbitrary probe start offset
    for (int id : order) {
        const Node& n = *g.find(id);
        auto ps = g.parents(id);
        Shape in = ps.empty() ? g.input_shape : shapes[idx[ps[0]]];
        const Cycles span = op_span(n.op, n.params, in, cost);
        const GemmCounts gc = gemm_counts(n.op, n.params, in, cost);
        const std::string& sym = symbol_for(n.op, cost.profile);

        int dups = 1;
        if (noise.dup_hits_max > 1) {
            std::uniform_int_distribution<int> d(1, noise.dup_hits_max);
            dups = d(rng);
        }
        for (int i = 0; i < dups; ++i)
            events.push_back(RawEvent{jittered(clock + i * 400), sym});

        // GEMM hits spread across the middle of the span, conv calls first.
        const std::int64_t total_gemm = gc.conv + gc.oncopy;
        if (total_gemm > 0) {
            const Cycles lo = clock + span / 5;
            const Cycles hi = clock + (span * 9) / 10;
            const Cycles step = total_gemm > 1 ? (hi - lo) / (total_gemm - 1) : 0;
            std::int64_t i = 0;
            for (std::int64_t c = 0; c < gc.conv; ++c, ++i)
                events.push_back(RawEvent{jittered(lo + i * step), kGemmConvSymbol});
            for (std::int64_t c = 0; c < gc.oncopy; ++c, ++i)
                events.push_back(RawEvent{jittered(lo + i * step), kGemmOncopySymbol});
        }

        if (noise.spurious_prob > 0.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            if (u(rng) < noise.spurious_prob) {
                std::uniform_int_distribution<int> pick(0, kOpKindCount - 1);
                const std::string& ssym =
                    symbol_for(static_cast<OpKind>(pick(rng)), cost.profile);
                std::uniform_int_distribution<Cycles> at(clock + span / 4, clock + span - 1);
                events.push_back(RawEvent{at(rng), ssym});
            }
        }
        clock += span;
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const RawEvent& a, const RawEvent& b) { return a.timestamp < b.timestamp; });
    return events;
}

}  // namespace archrec
