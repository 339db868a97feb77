#include "archrec/ops.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>

namespace archrec {

bool is_binary(OpKind k) { return k == OpKind::Add || k == OpKind::Multiply; }

bool is_conv(OpKind k) {
    return k == OpKind::Conv1d || k == OpKind::Conv2d || k == OpKind::DepthConv2d;
}

namespace {
const std::array<std::string, kOpKindCount> kNames = {
    "Conv1d",   "Conv2d", "DepthConv2d", "BatchNorm", "ReLU6",    "Sigmoid",  "Linear",
    "Embedding", "MaxPool1d", "AvgPool", "Add",       "Multiply", "Transpose", "Narrow"};
}  // namespace

const std::string& op_name(OpKind k) { return kNames[static_cast<std::size_t>(k)]; }

std::optional<OpKind> op_from_name(const std::string& name) {
    for (int i = 0; i < kOpKindCount; ++i)
        if (kNames[i] == name) return static_cast<OpKind>(i);
    return std::nullopt;
}

const std::vector<SymbolInfo>& monitored_symbols() {
    static const std::vector<SymbolInfo> table = {
        {"Conv1d", OpKind::Conv1d},
        {"Conv2d", OpKind::Conv2d},
        {"DepthConv2d", OpKind::DepthConv2d},
        {"DepthwiseConv", OpKind::DepthConv2d},
        {"BatchNorm2d", OpKind::BatchNorm},
        {"BatchNorm", OpKind::BatchNorm},
        {"ReLU6", OpKind::ReLU6},
        {"Sigmoid", OpKind::Sigmoid},
        {"Linear", OpKind::Linear},
        {"FC", OpKind::Linear},
        {"Embedding", OpKind::Embedding},
        {"MaxPool1d", OpKind::MaxPool1d},
        {"AvgPool", OpKind::AvgPool},
        {"AvgPool2d", OpKind::AvgPool},
        {"add", OpKind::Add},
        {"TensorAdd", OpKind::Add},
        {"* (multiply)", OpKind::Multiply},
        {"multiply", OpKind::Multiply},
        {"transpose", OpKind::Transpose},
        {"narrow", OpKind::Narrow},
    };
    return table;
}

std::optional<OpKind> kind_from_symbol(const std::string& symbol) {
    for (const auto& s : monitored_symbols())
        if (s.symbol == symbol) return s.kind;
    return std::nullopt;
}

const std::string& symbol_for(OpKind k, FrameworkProfile profile) {
    static const std::unordered_map<int, std::string> pytorch = {
        {(int)OpKind::Conv1d, "Conv1d"},     {(int)OpKind::Conv2d, "Conv2d"},
        {(int)OpKind::DepthConv2d, "Conv2d"},  // not distinguished by PyTorch
        {(int)OpKind::BatchNorm, "BatchNorm2d"}, {(int)OpKind::ReLU6, "ReLU6"},
        {(int)OpKind::Sigmoid, "Sigmoid"},   {(int)OpKind::Linear, "Linear"},
        {(int)OpKind::Embedding, "Embedding"}, {(int)OpKind::MaxPool1d, "MaxPool1d"},
        {(int)OpKind::AvgPool, "AvgPool2d"}, {(int)OpKind::Add, "add"},
        {(int)OpKind::Multiply, "* (multiply)"}, {(int)OpKind::Transpose, "transpose"},
        {(int)OpKind::Narrow, "narrow"},
    };
    static const std::unordered_map<int, std::string> tf = {
        {(int)OpKind::Conv1d, "Conv1d"},     {(int)OpKind::Conv2d, "Conv2d"},
        {(int)OpKind::DepthConv2d, "DepthConv2d"},
        {(int)OpKind::BatchNorm, "BatchNorm2d"}, {(int)OpKind::ReLU6, "ReLU6"},
        {(int)OpKind::Sigmoid, "Sigmoid"},   {(int)OpKind::Linear, "Linear"},
        {(int)OpKind::Embedding, "Embedding"}, {(int)OpKind::MaxPool1d, "MaxPool1d"},
        {(int)OpKind::AvgPool, "AvgPool2d"}, {(int)OpKind::Add, "TensorAdd"},
        {(int)OpKind::Multiply, "* (multiply)"}, {(int)OpKind::Transpose, "transpose"},
        {(int)OpKind::Narrow, "narrow"},
    };
    const auto& m = profile == FrameworkProfile::PyTorch ? pytorch : tf;
    return m.at(static_cast<int>(k));
}

std::vector<std::int64_t> param_values(const OpParams& p) {
    struct V {
        std::vector<std::int64_t> out;
        void operator()(const std::monostate&) {}
        void operator()(const ConvParams& c) { out = {c.in_ch, c.out_ch, c.kernel, c.stride, c.padding}; }
        void operator()(const LinearParams& l) { out = {l.in_dim, l.out_dim}; }
        void operator()(const EmbeddingParams& e) { out = {e.vocab, e.dim}; }
        void operator()(const PoolParams& q) { out = {q.window}; }
        void operator()(const TransposeParams& t) { out = {t.axis_a, t.axis_b}; }
        void operator()(const NarrowParams& n) { out = {n.axis, n.start, n.length}; }
    } v;
    std::visit(v, p);
    return v.out;
}

std::string check_params(OpKind k, const OpParams& p) {
    auto fail = [&](const std::string& msg) { return op_name(k) + ": " + msg; };
    if (is_conv(k)) {
        const auto* c = std::get_if<ConvParams>(&p);
        if (!c) return fail("conv params required");
        if (c->in_ch <= 0 || c->out_ch <= 0 || c->kernel <= 0 || c->stride <= 0)
            return fail("counts must be positive");
        if (c->padding < 0) return fail("padding must be >= 0");
        if (k == OpKind::DepthConv2d && c->in_ch != c->out_ch)
            return fail("depthwise requires in_ch == out_ch");
        return {};
    }
    switch (k) {
        case OpKind::Linear: {
            const auto* l = std::get_if<LinearParams>(&p);
            if (!l) return fail("linear params required");
            if (l->in_dim <= 0 || l->out_dim <= 0) return fail("dims must be positive");
            return {};
        }
        case OpKind::Embedding: {
            const auto* e = std::get_if<EmbeddingParams>(&p);
            if (!e) return fail("embedding params required");
            if (e->vocab <= 0 || e->dim <= 0) return fail("vocab/dim must be positive");
            return {};
        }
        case OpKind::MaxPool1d: {
            const auto* q = std::get_if<PoolParams>(&p);
            if (!q) return fail("pool params required");
            if (q->window <= 0) return fail("window must be positive");
            return {};
        }
        case OpKind::AvgPool: {
            if (std::holds_alternative<std::monostate>(p)) return {};
            const auto* q = std::get_if<PoolParams>(&p);
            if (!q) return fail("pool params or empty required");
            if (q->window < 0) return fail("window must be >= 0");
            return {};
        }
        case OpKind::Transpose: {
            const auto* t = std::get_if<TransposeParams>(&p);
            if (!t) return fail("transpose params required");
            if (t->axis_a < 0 || t->axis_b < 0 || t->axis_a == t->axis_b)
                return fail("axes must be distinct and >= 0");
            return {};
        }
        case OpKind::Narrow: {
            const auto* nn = std::get_if<NarrowParams>(&p);
            if (!nn) return fail("narrow params required");
            if (nn->axis < 0 || nn->start < 0 || nn->length <= 0)
                return fail("axis/start must be >= 0, length positive");
            return {};
        }
        default:
            if (!std::holds_alternative<std::monostate>(p)) return fail("takes no params");
            return {};
    }
}

std::int64_t Shape::numel() const {
    std::int64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << ",";
        os << dims[i];
    }
    os << ")";
    return os.str();
}

bool squeeze_equal(const Shape& a, const Shape& b) {
    auto squeeze = [](const Shape& s) {
        std::vector<std::int64_t> out;
        for (auto d : s.dims)
            if (d != 1) out.push_back(d);
        return out;
    };
    return squeeze(a) == squeeze(b);
}

namespace {

Shape conv_shape(OpKind k, const ConvParams& c, const Shape& in) {
    const std::size_t spatial_rank = k == OpKind::Conv1d ? 1 : 2;
    if (in.rank() != spatial_rank + 1)
        throw ShapeError(op_name(k) + ": input rank " + std::to_string(in.rank()) +
                         " incompatible, want " + std::to_string(spatial_rank + 1));
    if (in.dims[0] != c.in_ch)
        throw ShapeError(op_name(k) + ": input channels " + std::to_string(in.dims[0]) +
                         " != in_ch " + std::to_string(c.in_ch));
    Shape out;
    out.dims.push_back(c.out_ch);
    for (std::size_t i = 1; i < in.rank(); ++i) {
        const std::int64_t padded = in.dims[i] + 2 * c.padding;
        if (c.kernel > padded)
            throw ShapeError(op_name(k) + ": kernel " + std::to_string(c.kernel) +
                             " exceeds padded extent " + std::to_string(padded));
        out.dims.push_back((padded - c.kernel) / c.stride + 1);
    }
    return out;
}

}  // namespace

Shape propagate_shape(OpKind op, const OpParams& params, const std::vector<Shape>& inputs) {
    const std::size_t want = is_binary(op) ? 2 : 1;
    if (inputs.size() != want)
        throw ShapeError(op_name(op) + ": arity " + std::to_string(inputs.size()) + ", want " +
                         std::to_string(want));
    if (auto err = check_params(op, params); !err.empty()) throw ShapeError(err);
    for (const auto& s : inputs)
        if (s.numel() <= 0 || s.rank() == 0 || s.rank() > 4)
            throw ShapeError(op_name(op) + ": bad input shape " + s.str());

    const Shape& a = inputs[0];
    switch (op) {
        case OpKind::Conv1d:
        case OpKind::Conv2d:
        case OpKind::DepthConv2d:
            return conv_shape(op, std::get<ConvParams>(params), a);
        case OpKind::BatchNorm:
        case OpKind::ReLU6:
        case OpKind::Sigmoid:
            return a;
        case OpKind::Add:
        case OpKind::Multiply:
            if (!(a == inputs[1]))
                throw ShapeError(op_name(op) + ": shape mismatch " + a.str() + " vs " +
                                 inputs[1].str());
            return a;
        case OpKind::Linear: {
            const auto& l = std::get<LinearParams>(params);
            if (a.dims.back() != l.in_dim)
                throw ShapeError("Linear: last dim " + std::to_string(a.dims.back()) +
                                 " != in_dim " + std::to_string(l.in_dim));
            Shape out = a;
            out.dims.back() = l.out_dim;
            return out;
        }
        case OpKind::Embedding: {
            const auto& e = std::get<EmbeddingParams>(params);
            if (a.rank() != 1) throw ShapeError("Embedding: input must be rank 1");
            return Shape{a.dims[0], e.dim};
        }
        case OpKind::MaxPool1d: {
            const auto& q = std::get<PoolParams>(params);
            if (a.rank() != 2) throw ShapeError("MaxPool1d: input must be rank 2");
            if (q.window > a.dims[1])
                throw ShapeError("MaxPool1d: window " + std::to_string(q.window) +
                                 " exceeds extent " + std::to_string(a.dims[1]));
            return Shape{a.dims[0], a.dims[1] / q.window};
        }
        case OpKind::AvgPool:
            // Global pooling; emits the flattened channel vector the
            // classifier consumes.
            if (a.rank() < 2) throw ShapeError("AvgPool: input must have spatial dims");
            return Shape{a.dims[0]};
        case OpKind::Transpose: {
            const auto& t = std::get<TransposeParams>(params);
            if (t.axis_a >= (std::int64_t)a.rank() || t.axis_b >= (std::int64_t)a.rank())
                throw ShapeError("Transpose: axis out of range for " + a.str());
            Shape out = a;
            std::swap(out.dims[t.axis_a], out.dims[t.axis_b]);
            return out;
        }
        case OpKind::Narrow: {
            const auto& nn = std::get<NarrowParams>(params);
            if (nn.axis >= (std::int64_t)a.rank())
                throw ShapeError("Narrow: axis out of range for " + a.str());
            if (nn.start + nn.length > a.dims[nn.axis])
                throw ShapeError("Narrow: slice [" + std::to_string(nn.start) + "," +
                                 std::to_string(nn.start + nn.length) + ") exceeds extent " +
                                 std::to_string(a.dims[nn.axis]));
            Shape out = a;
            out.dims[nn.axis] = nn.length;
            return out;
        }
    }
    throw ShapeError("unhandled op");
}

}  // namespace archrec
