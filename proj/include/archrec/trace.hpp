#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "archrec/ops.hpp"

namespace archrec {

using Cycles = std::int64_t;

// One cache-hit observation: cycle timestamp plus the monitored symbol.
struct RawEvent {
    Cycles timestamp = 0;
    std::string symbol;
    friend bool operator==(const RawEvent&, const RawEvent&) = default;
};

struct ProcessedEntry {
    int index = 0;
    OpKind op = OpKind::Conv2d;
    Cycles timestamp = 0;    // first hit of the invocation
    std::int64_t gemm_conv = 0;
    std::int64_t gemm_oncopy = 0;
    friend bool operator==(const ProcessedEntry&, const ProcessedEntry&) = default;
};

struct ProcessedTrace {
    std::vector<ProcessedEntry> entries;
    Cycles condense_threshold = 0;
    std::string source;  // digest or filename of the raw input

    std::vector<OpKind> ops() const;
    friend bool operator==(const ProcessedTrace&, const ProcessedTrace&) = default;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default gap under which repeated hits of one symbol merge into a single
// invocation; an order of magnitude below typical inter-op gaps.
inline constexpr Cycles kDefaultCondenseThreshold = 100000;

// `cycles,symbol` per line. Throws TraceError with the line number on
// malformed lines or symbols outside the monitored set.
std::vector<RawEvent> parse_raw(const std::string& path);
std::vector<RawEvent> parse_raw_text(const std::string& text);
void write_raw(const std::vector<RawEvent>& events, const std::string& path);

// De-noising pass: merges duplicate hits, attributes GEMM(conv)/GEMM(oncopy)
// hits to the preceding op entry, renumbers entries from 0.
ProcessedTrace condense(const std::vector<RawEvent>& events,
                        Cycles threshold = kDefaultCondenseThreshold);

// `index,op,timestamp,gemm_conv,gemm_oncopy` per line behind a `#meta` header.
void write_processed(const ProcessedTrace& t, const std::string& path);
ProcessedTrace read_processed(const std::string& path);
std::string processed_to_text(const ProcessedTrace& t);
ProcessedTrace processed_from_text(const std::string& text);

std::string digest_hex(const std::string& bytes);  // FNV-1a, content pinning

}  // namespace archrec
