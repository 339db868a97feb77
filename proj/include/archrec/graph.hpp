#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archrec/ops.hpp"

namespace archrec {

struct Node {
    int id = 0;
    OpKind op = OpKind::Conv2d;
    OpParams params;
};

struct Edge {
    int src = 0;
    int dst = 0;
    int slot = 0;  // input slot on dst; binary joins use 0 and 1
};

// Labeled computation DAG. Single source, single sink; unary nodes take one
// in-edge, binary joins two. Shapes are static, batch dim omitted.
struct ArchGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    Shape input_shape;
    Shape output_shape;

    const Node* find(int id) const;
    Node* find(int id);
    // Parent ids of `id` ordered by slot.
    std::vector<int> parents(int id) const;
    std::vector<int> children(int id) const;
    int add_node(OpKind op, OpParams params = {});
    void add_edge(int src, int dst, int slot = 0);
};

struct Violation {
    std::string code;     // short machine key, e.g. "arity", "cycle", "shape"
    std::string detail;
};

// Structural and shape validation; empty result means the graph is well
// formed and shapes propagate from input_shape to output_shape.
std::vector<Violation> validate_graph(const ArchGraph& g);

// Deterministic emission order: postorder from the sink, visiting parents in
// slot order, each node once. Matches single-threaded framework execution
// where the first-declared branch of a join runs to completion first.
// Throws std::runtime_error on cyclic or multi-sink graphs.
std::vector<int> trace_order_ids(const ArchGraph& g);
std::vector<OpKind> trace_order(const ArchGraph& g);

// Label-preserving-isomorphism key; binary input slots are interchangeable
// (joins here are commutative). Two graphs compare equal iff their keys do.
std::string canonical_key(const ArchGraph& g);
bool labeled_isomorphic(const ArchGraph& a, const ArchGraph& b);

// Shape at every node when propagating input_shape through the graph, in
// node-id order. Throws ShapeError on the first inconsistency.
std::vector<Shape> propagate_all(const ArchGraph& g);

// Versioned JSON serialization (.arch.json). Unknown fields are rejected.
std::string to_json(const ArchGraph& g);
ArchGraph graph_from_json(const std::string& text);
void save_graph(const ArchGraph& g, const std::string& path);
ArchGraph load_graph(const std::string& path);

}  // namespace archrec
