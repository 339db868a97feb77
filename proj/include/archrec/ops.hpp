#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace archrec {

// Monitored computation kinds. The set mirrors the functions a shared DL
// framework exposes to an instruction-level cache probe; nothing else is
// representable on purpose.
enum class OpKind : std::uint8_t {
    Conv1d,
    Conv2d,
    DepthConv2d,
    BatchNorm,
    ReLU6,
    Sigmoid,
    Linear,
    Embedding,
    MaxPool1d,
    AvgPool,
    Add,
    Multiply,
    Transpose,
    Narrow,
};

constexpr int kOpKindCount = 14;

bool is_binary(OpKind k);
inline bool is_unary(OpKind k) { return !is_binary(k); }
bool is_conv(OpKind k);

const std::string& op_name(OpKind k);
std::optional<OpKind> op_from_name(const std::string& name);

// Raw-trace symbol registry. Symbols are the strings a probe reports, e.g.
// "BatchNorm2d" or "* (multiply)"; GEMM symbols are tracked separately.
struct SymbolInfo {
    std::string symbol;
    OpKind kind;
};
const std::vector<SymbolInfo>& monitored_symbols();
std::optional<OpKind> kind_from_symbol(const std::string& symbol);
// Symbol emitted for an op kind under a given framework profile.
// PyTorch reports depthwise convolutions with the Conv2d symbol.
enum class FrameworkProfile { PyTorch, TensorFlow };
const std::string& symbol_for(OpKind k, FrameworkProfile profile);

inline constexpr const char* kGemmConvSymbol = "GEMM(conv)";
inline constexpr const char* kGemmOncopySymbol = "GEMM(oncopy)";

// ---------------------------------------------------------------------------
// Parameters

struct ConvParams {
    std::int64_t in_ch = 0;
    std::int64_t out_ch = 0;
    std::int64_t kernel = 0;
    std::int64_t stride = 1;
    std::int64_t padding = 0;
    friend bool operator==(const ConvParams&, const ConvParams&) = default;
};
struct LinearParams {
    std::int64_t in_dim = 0;
    std::int64_t out_dim = 0;
    friend bool operator==(const LinearParams&, const LinearParams&) = default;
};
struct EmbeddingParams {
    std::int64_t vocab = 0;
    std::int64_t dim = 0;
    friend bool operator==(const EmbeddingParams&, const EmbeddingParams&) = default;
};
struct PoolParams {
    std::int64_t window = 0;  // 0 on AvgPool means global
    friend bool operator==(const PoolParams&, const PoolParams&) = default;
};
struct TransposeParams {
    std::int64_t axis_a = 0;
    std::int64_t axis_b = 1;
    friend bool operator==(const TransposeParams&, const TransposeParams&) = default;
};
struct NarrowParams {
    std::int64_t axis = 0;
    std::int64_t start = 0;
    std::int64_t length = 0;
    friend bool operator==(const NarrowParams&, const NarrowParams&) = default;
};

using OpParams = std::variant<std::monostate, ConvParams, LinearParams, EmbeddingParams,
                              PoolParams, TransposeParams, NarrowParams>;

// Flat numeric view, used by the l1 metric and serialization.
std::vector<std::int64_t> param_values(const OpParams& p);
// Validates the parameter block against its op kind (positivity, depthwise
// channel equality, padding >= 0). Returns an error message or empty.
std::string check_params(OpKind k, const OpParams& p);

// ---------------------------------------------------------------------------
// Shapes

struct Shape {
    std::vector<std::int64_t> dims;

    Shape() = default;
    Shape(std::initializer_list<std::int64_t> d) : dims(d) {}
    explicit Shape(std::vector<std::int64_t> d) : dims(std::move(d)) {}

    std::size_t rank() const { return dims.size(); }
    std::int64_t numel() const;
    std::string str() const;
    friend bool operator==(const Shape&, const Shape&) = default;
};

// Equality after dropping singleton axes; used when checking a propagated
// sink shape against a declared task output such as (1,).
bool squeeze_equal(const Shape& a, const Shape& b);

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Output shape of one op application. Throws ShapeError on arity mismatch,
// unequal binary inputs, or kernels exceeding the padded extent.
Shape propagate_shape(OpKind op, const OpParams& params, const std::vector<Shape>& inputs);

}  // namespace archrec
