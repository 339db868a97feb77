#include "archrec/graph.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace archrec {

using json = nlohmann::ordered_json;

const Node* ArchGraph::find(int id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

Node* ArchGraph::find(int id) {
    for (auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

std::vector<int> ArchGraph::parents(int id) const {
    std::vector<std::pair<int, int>> in;  // (slot, src)
    for (const auto& e : edges)
        if (e.dst == id) in.emplace_back(e.slot, e.src);
    std::sort(in.begin(), in.end());
    std::vector<int> out;
    out.reserve(in.size());
    for (auto& [slot, src] : in) out.push_back(src);
    return out;
}

std::vector<int> ArchGraph::children(int id) const {
    std::vector<int> out;
    for (const auto& e : edges)
        if (e.src == id) out.push_back(e.dst);
    return out;
}

int ArchGraph::add_node(OpKind op, OpParams params) {
    int id = nodes.empty() ? 0 : nodes.back().id + 1;
    nodes.push_back(Node{id, op, std::move(params)});
    return id;
}

void ArchGraph::add_edge(int src, int dst, int slot) { edges.push_back(Edge{src, dst, slot}); }

namespace {

// Kahn topological check; returns empty on cycle.
std::vector<int> topo(const ArchGraph& g) {
    std::map<int, int> indeg;
    for (const auto& n : g.nodes) indeg[n.id] = 0;
    for (const auto& e : g.edges) indeg[e.dst]++;
    std::vector<int> ready, order;
    for (auto& [id, d] : indeg)
        if (d == 0) ready.push_back(id);
    while (!ready.empty()) {
        int id = ready.back();
        ready.pop_back();
        order.push_back(id);
        for (int c : g.children(id))
            if (--indeg[c] == 0) ready.push_back(c);
    }
    if (order.size() != g.nodes.size()) return {};
    return order;
}

}  // namespace

std::vector<Violation> validate_graph(const ArchGraph& g) {
    std::vector<Violation> out;
    if (g.nodes.empty()) {
        out.push_back({"empty", "graph has no nodes"});
        return out;
    }
    std::set<int> ids;
    for (const auto& n : g.nodes)
        if (!ids.insert(n.id).second) out.push_back({"dup-id", "node id repeated: " + std::to_string(n.id)});
    for (const auto& e : g.edges) {
        if (!ids.count(e.src) || !ids.count(e.dst))
            out.push_back({"edge-ref", "edge references unknown node"});
        if (e.src == e.dst) out.push_back({"self-loop", "node " + std::to_string(e.src)});
    }
    if (!out.empty()) return out;

    for (const auto& n : g.nodes) {
        if (auto err = check_params(n.op, n.params); !err.empty())
            out.push_back({"params", "node " + std::to_string(n.id) + ": " + err});
        const std::size_t want = is_binary(n.op) ? 2 : 1;
        const auto ps = g.parents(n.id);
        const bool source = ps.empty();
        if (!source && ps.size() != want)
            out.push_back({"arity", "node " + std::to_string(n.id) + " (" + op_name(n.op) +
                                        ") has " + std::to_string(ps.size()) + " in-edges, wants " +
                                        std::to_string(want)});
        if (source && is_binary(n.op))
            out.push_back({"arity", "binary node " + std::to_string(n.id) + " cannot be a source"});
        if (ps.size() == 2) {
            auto all = g.parents(n.id);
            // slots must be 0 and 1
            std::vector<int> slots;
            for (const auto& e : g.edges)
                if (e.dst == n.id) slots.push_back(e.slot);
            std::sort(slots.begin(), slots.end());
            if (slots != std::vector<int>{0, 1})
                out.push_back({"slots", "binary node " + std::to_string(n.id) + " needs slots 0,1"});
            (void)all;
        }
    }

    int sources = 0, sinks = 0;
    for (const auto& n : g.nodes) {
        if (g.parents(n.id).empty()) sources++;
        if (g.children(n.id).empty()) sinks++;
    }
    if (sources != 1)
        out.push_back({"source", "graph has " + std::to_string(sources) + " sources, wants 1"});
    if (sinks != 1)
        out.push_back({"sink", "graph has " + std::to_string(sinks) + " sinks, wants 1"});

    if (topo(g).empty()) out.push_back({"cycle", "graph is cyclic"});
    if (!out.empty()) return out;

    try {
        auto shapes = propagate_all(g);
        // sink shape must match the declared output
        int sink = -1;
        for (const auto& n : g.nodes)
            if (g.children(n.id).empty()) sink = n.id;
        std::size_t sink_idx = 0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
            if (g.nodes[i].id == sink) sink_idx = i;
        if (!squeeze_equal(shapes[sink_idx], g.output_shape))
            out.push_back({"shape", "sink shape " + shapes[sink_idx].str() +
                                        " != declared output " + g.output_shape.str()});
    } catch (const ShapeError& e) {
        out.push_back({"shape", e.what()});
    }
    return out;
}

std::vector<Shape> propagate_all(const ArchGraph& g) {
    auto order = topo(g);
    if (order.empty()) throw ShapeError("cycle");
    std::unordered_map<int, Shape> shapes;
    std::unordered_map<int, std::size_t> idx;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) idx[g.nodes[i].id] = i;
    // deterministic order: process in topological order
    for (int id : order) {
        const Node& n = *g.find(id);
        std::vector<Shape> ins;
        auto ps = g.parents(id);
        if (ps.empty()) {
            ins.push_back(g.input_shape);
            if (is_binary(n.op)) throw ShapeError("binary source");
        } else {
            for (int p : ps) ins.push_back(shapes.at(p));
        }
        shapes[id] = propagate_shape(n.op, n.params, ins);
    }
    std::vector<Shape> out(g.nodes.size());
    for (const auto& n : g.nodes) out[idx[n.id]] = shapes.at(n.id);
    return out;
}

std::vector<int> trace_order_ids(const ArchGraph& g) {
    if (topo(g).empty()) throw std::runtime_error("trace_order: cyclic graph");
    int sink = -1;
    for (const auto& n : g.nodes)
        if (g.children(n.id).empty()) {
            if (sink != -1) throw std::runtime_error("trace_order: multiple sinks");
            sink = n.id;
        }
    if (sink == -1) throw std::runtime_error("trace_order: no sink");
    std::vector<int> order;
    std::set<int> seen;
    std::function<void(int)> visit = [&](int id) {
        if (seen.count(id)) return;
        seen.insert(id);
        for (int p : g.parents(id)) visit(p);
        order.push_back(id);
    };
    visit(sink);
    if (order.size() != g.nodes.size())
        throw std::runtime_error("trace_order: nodes unreachable from sink");
    return order;
}

std::vector<OpKind> trace_order(const ArchGraph& g) {
    std::vector<OpKind> out;
    for (int id : trace_order_ids(g)) out.push_back(g.find(id)->op);
    return out;
}

namespace {

// Interned bottom-up encoding with binary inputs sorted; constant time per
// node via hash consing. Sound for the nested branch structures this toolkit
// builds (cross-checked against exact isomorphism in tests).
std::string encode(const ArchGraph& g) {
    auto order = topo(g);
    std::unordered_map<int, int> code;      // node id -> interned id
    std::map<std::string, int> intern;
    std::vector<std::string> defs;
    for (int id : order) {
        const Node& n = *g.find(id);
        auto ps = g.parents(id);
        std::vector<int> pcodes;
        for (int p : ps) pcodes.push_back(code.at(p));
        if (is_binary(n.op)) std::sort(pcodes.begin(), pcodes.end());
        std::string key = op_name(n.op);
        key += '[';
        for (std::size_t i = 0; i < pcodes.size(); ++i) {
            if (i) key += ',';
            key += std::to_string(pcodes[i]);
        }
        key += ']';
        auto it = intern.find(key);
        if (it == intern.end()) {
            it = intern.emplace(key, (int)defs.size()).first;
            defs.push_back(key);
        }
        code[id] = it->second;
    }
    int sink = -1;
    for (const auto& n : g.nodes)
        if (g.children(n.id).empty()) sink = n.id;
    std::ostringstream os;
    for (std::size_t i = 0; i < defs.size(); ++i) os << i << ":" << defs[i] << ";";
    os << "sink=" << code.at(sink);
    return os.str();
}

}  // namespace

std::string canonical_key(const ArchGraph& g) { return encode(g); }

bool labeled_isomorphic(const ArchGraph& a, const ArchGraph& b) {
    if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
    return canonical_key(a) == canonical_key(b);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kFormatVersion = 1;

json params_to_json(OpKind k, const OpParams& p) {
    json j = json::object();
    if (is_conv(k)) {
        const auto& c = std::get<ConvParams>(p);
        j["in_ch"] = c.in_ch;
        j["out_ch"] = c.out_ch;
        j["kernel"] = c.kernel;
        j["stride"] = c.stride;
        j["padding"] = c.padding;
    } else if (k == OpKind::Linear) {
        const auto& l = std::get<LinearParams>(p);
        j["in_dim"] = l.in_dim;
        j["out_dim"] = l.out_dim;
    } else if (k == OpKind::Embedding) {
        const auto& e = std::get<EmbeddingParams>(p);
        j["vocab"] = e.vocab;
        j["dim"] = e.dim;
    } else if (k == OpKind::MaxPool1d || (k == OpKind::AvgPool && std::holds_alternative<PoolParams>(p))) {
        j["window"] = std::get<PoolParams>(p).window;
    } else if (k == OpKind::Transpose) {
        const auto& t = std::get<TransposeParams>(p);
        j["axis_a"] = t.axis_a;
        j["axis_b"] = t.axis_b;
    } else if (k == OpKind::Narrow) {
        const auto& n = std::get<NarrowParams>(p);
        j["axis"] = n.axis;
        j["start"] = n.start;
        j["length"] = n.length;
    }
    return j;
}

OpParams params_from_json(OpKind k, const json& j) {
    auto need = [&](const char* f) {
        if (!j.contains(f)) throw std::runtime_error(std::string("missing param field ") + f);
        return j.at(f).get<std::int64_t>();
    };
    if (is_conv(k))
        return ConvParams{need("in_ch"), need("out_ch"), need("kernel"), need("stride"),
                          need("padding")};
    if (k == OpKind::Linear) return LinearParams{need("in_dim"), need("out_dim")};
    if (k == OpKind::Embedding) return EmbeddingParams{need("vocab"), need("dim")};
    if (k == OpKind::MaxPool1d) return PoolParams{need("window")};
    if (k == OpKind::AvgPool && j.contains("window")) return PoolParams{need("window")};
    if (k == OpKind::Transpose) return TransposeParams{need("axis_a"), need("axis_b")};
    if (k == OpKind::Narrow) return NarrowParams{need("axis"), need("start"), need("length")};
    return {};
}

}  // namespace

std::string to_json(const ArchGraph& g) {
    json j;
    j["version"] = kFormatVersion;
    j["input_shape"] = g.input_shape.dims;
    j["output_shape"] = g.output_shape.dims;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) {
        json nj;
        nj["id"] = n.id;
        nj["op"] = op_name(n.op);
        nj["params"] = params_to_json(n.op, n.params);
        j["nodes"].push_back(nj);
    }
    j["edges"] = json::array();
    for (const auto& e : g.edges) j["edges"].push_back({e.src, e.dst, e.slot});
    return j.dump(2);
}

ArchGraph graph_from_json(const std::string& text) {
    json j = json::parse(text);
    static const std::set<std::string> allowed = {"version", "input_shape", "output_shape",
                                                  "nodes", "edges"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw std::runtime_error("unknown field: " + it.key());
    if (!j.contains("version") || j["version"].get<int>() != kFormatVersion)
        throw std::runtime_error("unsupported graph format version");
    ArchGraph g;
    g.input_shape = Shape(j.at("input_shape").get<std::vector<std::int64_t>>());
    g.output_shape = Shape(j.at("output_shape").get<std::vector<std::int64_t>>());
    for (const auto& nj : j.at("nodes")) {
        static const std::set<std::string> nallowed = {"id", "op", "params"};
        for (auto it = nj.begin(); it != nj.end(); ++it)
            if (!nallowed.count(it.key())) throw std::runtime_error("unknown node field: " + it.key());
        auto kind = op_from_name(nj.at("op").get<std::string>());
        if (!kind) throw std::runtime_error("unknown op: " + nj.at("op").get<std::string>());
        Node n;
        n.id = nj.at("id").get<int>();
        n.op = *kind;
        n.params = params_from_json(*kind, nj.at("params"));
        g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges")) {
        if (!ej.is_array() || ej.size() != 3) throw std::runtime_error("edge must be [src,dst,slot]");
        g.edges.push_back(Edge{ej[0].get<int>(), ej[1].get<int>(), ej[2].get<int>()});
    }
    return g;
}

void save_graph(const ArchGraph& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << to_json(g) << "\n";
}

ArchGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return graph_from_json(ss.str());
}

}  // namespace archrec
