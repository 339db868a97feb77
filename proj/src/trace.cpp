#include "archrec/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace archrec {

std::vector<OpKind> ProcessedTrace::ops() const {
    std::vector<OpKind> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.op);
    return out;
}

std::string digest_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

bool is_gemm(const std::string& s) {
    return s == kGemmConvSymbol || s == kGemmOncopySymbol;
}

std::vector<RawEvent> parse_lines(const std::string& text) {
    std::vector<RawEvent> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Cycles prev = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw TraceError("malformed line " + std::to_string(lineno) + ": missing comma");
        Cycles ts = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + comma, ts);
        if (ec != std::errc() || ptr != line.data() + comma || ts < 0)
            throw TraceError("malformed line " + std::to_string(lineno) + ": bad timestamp");
        std::string symbol = line.substr(comma + 1);
        if (!is_gemm(symbol) && !kind_from_symbol(symbol))
            throw TraceError("unknown symbol at line " + std::to_string(lineno) + ": " + symbol);
        if (ts < prev)
            throw TraceError("timestamps decrease at line " + std::to_string(lineno));
        prev = ts;
        out.push_back(RawEvent{ts, std::move(symbol)});
    }
    return out;
}

}  // namespace

std::vector<RawEvent> parse_raw_text(const std::string& text) { return parse_lines(text); }

std::vector<RawEvent> parse_raw(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw TraceError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_lines(ss.str());
}

void write_raw(const std::vector<RawEvent>& events, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw TraceError("cannot write " + path);
    for (const auto& e : events) f << e.timestamp << "," << e.symbol << "\n";
}

ProcessedTrace condense(const std::vector<RawEvent>& events, Cycles threshold) {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].timestamp < events[i - 1].timestamp)
            throw TraceError("condense: events not time-sorted");

    ProcessedTrace t;
    t.condense_threshold = threshold;
    {
        std::string all;
        for (const auto& e : events) all += std::to_string(e.timestamp) + "," + e.symbol + "\n";
        t.source = digest_hex(all);
    }
    ProcessedEntry cur;
    bool open = false;
    Cycles last_hit = 0;
    std::string last_symbol;
    auto flush = [&] {
        if (open) {
            cur.index = static_cast<int>(t.entries.size());
            t.entries.push_back(cur);
            open = false;
        }
    };
    for (const auto& e : events) {
        if (e.symbol == kGemmConvSymbol) {
            if (open) cur.gemm_conv++;
            continue;
        }
        if (e.symbol == kGemmOncopySymbol) {
            if (open) cur.gemm_oncopy++;
            continue;
        }
        auto kind = kind_from_symbol(e.symbol);
        if (!kind) throw TraceError("condense: unknown symbol " + e.symbol);
        const bool merge = open && e.symbol == last_symbol && e.timestamp - last_hit <= threshold;
        if (!merge) {
            flush();
            cur = ProcessedEntry{};
            cur.op = *kind;
            cur.timestamp = e.timestamp;
            open = true;
            last_symbol = e.symbol;
        }
        last_hit = e.timestamp;
    }
    flush();
    return t;
}

namespace {
constexpr const char* kProcessedHeader = "#meta v1";
}

std::string processed_to_text(const ProcessedTrace& t) {
    std::ostringstream os;
    os << kProcessedHeader << " threshold=" << t.condense_threshold << " source=" << t.source
       << "\n";
    for (const auto& e : t.entries)
        os << e.index << "," << op_name(e.op) << "," << e.timestamp << "," << e.gemm_conv << ","
           << e.gemm_oncopy << "\n";
    return os.str();
}

ProcessedTrace processed_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw TraceError("processed trace: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kProcessedHeader, 0) != 0)
        throw TraceError("processed trace: version mismatch in header: " + line);
    ProcessedTrace t;
    {
        std::istringstream hs(line.substr(std::string(kProcessedHeader).size()));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("threshold=", 0) == 0)
                t.condense_threshold = std::stoll(tok.substr(10));
            else if (tok.rfind("source=", 0) == 0)
                t.source = tok.substr(7);
        }
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[5];
        for (int i = 0; i < 5; ++i)
            if (!std::getline(ls, f[i], i == 4 ? '\n' : ','))
                throw TraceError("processed trace: short line " + std::to_string(lineno));
        ProcessedEntry e;
        try {
            e.index = std::stoi(f[0]);
            auto kind = op_from_name(f[1]);
            if (!kind) throw TraceError("processed trace: unknown op " + f[1]);
            e.op = *kind;
            e.timestamp = std::stoll(f[2]);
            e.gemm_conv = std::stoll(f[3]);
            e.gemm_oncopy = std::stoll(f[4]);
        } catch (const TraceError&) {
            throw;
        } catch (const std::exception&) {
            throw TraceError("processed trace: malformed line " + std::to_string(lineno));
        }
        if (e.index != static_cast<int>(t.entries.size()))
            throw TraceError("processed trace: indices not consecutive at line " +
                             std::to_string(lineno));
        if (!t.entries.empty() && e.timestamp <= t.entries.back().timestamp)
            throw TraceError("processed trace: timestamps not increasing at line " +
                             std::to_string(lineno));
        t.entries.push_back(e);
    }
    return t;
}

void write_processed(const ProcessedTrace& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw TraceError("cannot write " + path);
    f << processed_to_text(t);
}

ProcessedTrace read_processed(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw TraceError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return processed_from_text(ss.str());
}

}  // namespace archrec
