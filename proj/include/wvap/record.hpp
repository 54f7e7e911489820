#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "wvap/errors.hpp"
#include "wvap/search.hpp"

namespace wvap {

// One row of output: a full postselected run plus the Grover baseline at the
// same size. Field names match the CSV header and the JSON keys one to one.
struct RunRecord {
    int n = 0;
    std::uint64_t N = 0;
    std::uint64_t y = 0;
    std::uint64_t w = 0;
    double p_analytic = 0.0;
    double p_sim = 0.0;
    double overlap_sq = 0.0;
    double postsel_prob = 0.0;
    double end_to_end_prob = 0.0;
    double weak_value_re = 0.0;
    double weak_value_im = 0.0;
    std::uint64_t oracle_queries = 0;
    std::uint64_t grover_iters = 0;
    double grover_p = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t mc_postsel_successes = 0;
    std::uint64_t mc_target_hits = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kCsvHeader =
    "n,N,y,w,p_analytic,p_sim,overlap_sq,postsel_prob,end_to_end_prob,"
    "weak_value_re,weak_value_im,oracle_queries,grover_iters,grover_p,"
    "trials,mc_postsel_successes,mc_target_hits,seed";

// Shortest decimal that parses back to the same double; locale-free. Both
// zeros render as "0" so an emit/parse/emit cycle is byte-stable even through
// parsers that drop the sign of zero.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Streaming writer for the one JSON shape this tool emits: two-space indent,
// keys in insertion order, doubles through format_double.
class JsonWriter {
public:
    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(std::string_view k) {
        prefix();
        buf_ += '"';
        buf_ += k;
        buf_ += "\": ";
        pending_value_ = true;
    }

    void value(double v) { raw(format_double(v)); }
    void value(int v) { raw(std::to_string(v)); }
    void value(std::uint64_t v) { raw(std::to_string(v)); }
    void value_string(std::string_view s) {
        std::string quoted = "\"";
        quoted += s;
        quoted += '"';
        raw(quoted);
    }

    const std::string& str() const { return buf_; }

private:
    void open(char c) {
        if (!pending_value_) prefix();
        pending_value_ = false;
        buf_ += c;
        ++depth_;
        need_comma_ = false;
    }
    void close(char c) {
        --depth_;
        buf_ += '\n';
        buf_.append(std::size_t(2 * depth_), ' ');
        buf_ += c;
        need_comma_ = true;
        pending_value_ = false;
    }
    void raw(std::string_view s) {
        if (!pending_value_) prefix();
        pending_value_ = false;
        buf_ += s;
        need_comma_ = true;
    }
    void prefix() {
        if (need_comma_) buf_ += ',';
        if (depth_ > 0) {
            buf_ += '\n';
            buf_.append(std::size_t(2 * depth_), ' ');
        }
        need_comma_ = false;
    }

    std::string buf_;
    int depth_ = 0;
    bool need_comma_ = false;
    bool pending_value_ = false;
};

namespace detail {

inline void write_record_fields(JsonWriter& w, const RunRecord& r) {
    w.key("n"); w.value(r.n);
    w.key("N"); w.value(r.N);
    w.key("y"); w.value(r.y);
    w.key("w"); w.value(r.w);
    w.key("p_analytic"); w.value(r.p_analytic);
    w.key("p_sim"); w.value(r.p_sim);
    w.key("overlap_sq"); w.value(r.overlap_sq);
    w.key("postsel_prob"); w.value(r.postsel_prob);
    w.key("end_to_end_prob"); w.value(r.end_to_end_prob);
    w.key("weak_value_re"); w.value(r.weak_value_re);
    w.key("weak_value_im"); w.value(r.weak_value_im);
    w.key("oracle_queries"); w.value(r.oracle_queries);
    w.key("grover_iters"); w.value(r.grover_iters);
    w.key("grover_p"); w.value(r.grover_p);
    w.key("trials"); w.value(r.trials);
    w.key("mc_postsel_successes"); w.value(r.mc_postsel_successes);
    w.key("mc_target_hits"); w.value(r.mc_target_hits);
    w.key("seed"); w.value(r.seed);
}

} // namespace detail

inline std::string to_json(const RunRecord& r) {
    JsonWriter w;
    w.begin_object();
    detail::write_record_fields(w, r);
    w.end_object();
    return w.str();
}

inline std::string to_json(std::span<const RunRecord> records) {
    JsonWriter w;
    w.begin_array();
    for (const auto& r : records) {
        w.begin_object();
        detail::write_record_fields(w, r);
        w.end_object();
    }
    w.end_array();
    return w.str();
}

inline std::string to_csv_row(const RunRecord& r) {
    std::string out;
    out += std::to_string(r.n); out += ',';
    out += std::to_string(r.N); out += ',';
    out += std::to_string(r.y); out += ',';
    out += std::to_string(r.w); out += ',';
    out += format_double(r.p_analytic); out += ',';
    out += format_double(r.p_sim); out += ',';
    out += format_double(r.overlap_sq); out += ',';
    out += format_double(r.postsel_prob); out += ',';
    out += format_double(r.end_to_end_prob); out += ',';
    out += format_double(r.weak_value_re); out += ',';
    out += format_double(r.weak_value_im); out += ',';
    out += std::to_string(r.oracle_queries); out += ',';
    out += std::to_string(r.grover_iters); out += ',';
    out += format_double(r.grover_p); out += ',';
    out += std::to_string(r.trials); out += ',';
    out += std::to_string(r.mc_postsel_successes); out += ',';
    out += std::to_string(r.mc_target_hits); out += ',';
    out += std::to_string(r.seed);
    return out;
}

inline std::string render_csv(std::span<const RunRecord> records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += to_csv_row(r);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view row) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(row.substr(start));
            return out;
        }
        out.push_back(row.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_field(std::string_view text, const char* name) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw Error("cannot parse record field " + std::string(name) + " from '" +
                    std::string(text) + "'");
    return v;
}

} // namespace detail

inline RunRecord from_csv_row(std::string_view row) {
    const auto f = detail::split_fields(row);
    if (f.size() != 18)
        throw Error("record row has " + std::to_string(f.size()) + " fields, expected 18");
    RunRecord r;
    r.n = detail::parse_field<int>(f[0], "n");
    r.N = detail::parse_field<std::uint64_t>(f[1], "N");
    r.y = detail::parse_field<std::uint64_t>(f[2], "y");
    r.w = detail::parse_field<std::uint64_t>(f[3], "w");
    r.p_analytic = detail::parse_field<double>(f[4], "p_analytic");
    r.p_sim = detail::parse_field<double>(f[5], "p_sim");
    r.overlap_sq = detail::parse_field<double>(f[6], "overlap_sq");
    r.postsel_prob = detail::parse_field<double>(f[7], "postsel_prob");
    r.end_to_end_prob = detail::parse_field<double>(f[8], "end_to_end_prob");
    r.weak_value_re = detail::parse_field<double>(f[9], "weak_value_re");
    r.weak_value_im = detail::parse_field<double>(f[10], "weak_value_im");
    r.oracle_queries = detail::parse_field<std::uint64_t>(f[11], "oracle_queries");
    r.grover_iters = detail::parse_field<std::uint64_t>(f[12], "grover_iters");
    r.grover_p = detail::parse_field<double>(f[13], "grover_p");
    r.trials = detail::parse_field<std::uint64_t>(f[14], "trials");
    r.mc_postsel_successes = detail::parse_field<std::uint64_t>(f[15], "mc_postsel_successes");
    r.mc_target_hits = detail::parse_field<std::uint64_t>(f[16], "mc_target_hits");
    r.seed = detail::parse_field<std::uint64_t>(f[17], "seed");
    return r;
}

inline std::vector<RunRecord> parse_csv(std::string_view text) {
    std::vector<RunRecord> out;
    std::size_t start = 0;
    bool saw_header = false;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != kCsvHeader)
                throw Error("unexpected CSV header: '" + std::string(line) + "'");
            saw_header = true;
            continue;
        }
        out.push_back(from_csv_row(line));
    }
    if (!saw_header) throw Error("CSV input has no header row");
    return out;
}

namespace detail {

inline RunRecord record_from_json_object(const nlohmann::json& j) {
    RunRecord r;
    r.n = j.at("n").get<int>();
    r.N = j.at("N").get<std::uint64_t>();
    r.y = j.at("y").get<std::uint64_t>();
    r.w = j.at("w").get<std::uint64_t>();
    r.p_analytic = j.at("p_analytic").get<double>();
    r.p_sim = j.at("p_sim").get<double>();
    r.overlap_sq = j.at("overlap_sq").get<double>();
    r.postsel_prob = j.at("postsel_prob").get<double>();
    r.end_to_end_prob = j.at("end_to_end_prob").get<double>();
    r.weak_value_re = j.at("weak_value_re").get<double>();
    r.weak_value_im = j.at("weak_value_im").get<double>();
    r.oracle_queries = j.at("oracle_queries").get<std::uint64_t>();
    r.grover_iters = j.at("grover_iters").get<std::uint64_t>();
    r.grover_p = j.at("grover_p").get<double>();
    r.trials = j.at("trials").get<std::uint64_t>();
    r.mc_postsel_successes = j.at("mc_postsel_successes").get<std::uint64_t>();
    r.mc_target_hits = j.at("mc_target_hits").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

} // namespace detail

// Accepts a single record object or an array of them.
inline std::vector<RunRecord> parse_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("cannot parse record JSON: ") + e.what());
    }
    try {
        std::vector<RunRecord> out;
        if (j.is_array()) {
            out.reserve(j.size());
            for (const auto& item : j) out.push_back(detail::record_from_json_object(item));
        } else {
            out.push_back(detail::record_from_json_object(j));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("record JSON is missing or mistypes a field: ") + e.what());
    }
}

// One full row: the postselected run (with sampling if trials > 0) and the
// Grover baseline at the same width, both against the same target.
inline RunRecord make_run_record(const SearchConfig& cfg) {
    const SearchReport rep = run_wvap(cfg);
    const GroverResult grover =
        run_grover(cfg.num_qubits, cfg.target, grover_default_iterations(cfg.num_qubits));
    RunRecord r;
    r.n = cfg.num_qubits;
    r.N = std::uint64_t{1} << cfg.num_qubits;
    r.y = cfg.target;
    r.w = cfg.reflection;
    r.p_analytic = rep.p_analytic;
    r.p_sim = rep.p_sim;
    r.overlap_sq = rep.overlap_sq;
    r.postsel_prob = rep.postsel_prob;
    r.end_to_end_prob = rep.end_to_end_prob;
    r.weak_value_re = rep.weak_value.real();
    r.weak_value_im = rep.weak_value.imag();
    r.oracle_queries = rep.oracle_queries;
    r.grover_iters = grover.iterations;
    r.grover_p = grover.success_probability;
    r.trials = cfg.trials;
    r.mc_postsel_successes = rep.mc.postsel_successes;
    r.mc_target_hits = rep.mc.target_hits;
    r.seed = cfg.seed;
    return r;
}

// One record per width, target y = N-1 and reflection w = 0 throughout.
inline std::vector<RunRecord> sweep_records(int n_min, int n_max, std::uint64_t trials,
                                            std::uint64_t seed) {
    if (n_min < 1 || n_max > kMaxSearchQubits || n_min > n_max)
        throw InvalidSize("sweep range [" + std::to_string(n_min) + ", " +
                          std::to_string(n_max) + "] is not inside [1, " +
                          std::to_string(kMaxSearchQubits) + "]");
    std::vector<RunRecord> out;
    out.reserve(std::size_t(n_max - n_min + 1));
    for (int n = n_min; n <= n_max; ++n) {
        SearchConfig cfg;
        cfg.num_qubits = n;
        cfg.target = (std::uint64_t{1} << n) - 1;
        cfg.reflection = 0;
        cfg.seed = seed;
        cfg.trials = trials;
        out.push_back(make_run_record(cfg));
    }
    return out;
}

} // namespace wvap
