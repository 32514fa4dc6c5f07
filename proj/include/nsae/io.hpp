#pragma once

// File formats. Binary formats are little-endian and fixed-width with a
// magic string and version byte; text formats are tab separated, '#' starts
// a comment line. Every writer goes through a temp file and a rename.

#include "error.hpp"
#include "eval.hpp"
#include "neighbors.hpp"
#include "net.hpp"
#include "trainer.hpp"
#include "vecmath.hpp"

#include "json.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace nsae::io {

namespace fs = std::filesystem;

inline constexpr char kVectorMagic[8] = {'N', 'S', 'A', 'E', 'V', 'E', 'C', '\0'};
inline constexpr char kCheckpointMagic[8] = {'N', 'S', 'A', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint8_t kVectorVersion = 1;
inline constexpr std::uint8_t kCheckpointVersion = 1;
inline constexpr std::size_t kVectorHeaderSize = 28;

enum class DType : std::uint8_t { Float64 = 1, Float32 = 2 };

// ---------------------------------------------------------------------------
// Raw file access

inline std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoFailure, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_atomic(const fs::path& path, std::string_view bytes)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            fail(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        fail(ErrorCode::IoFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

// FNV-1a, used for output checksums and config hashes.
inline std::uint64_t fnv1a(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string file_checksum(const fs::path& path)
{
    return hex64(fnv1a(read_file(path)));
}

// ---------------------------------------------------------------------------
// Little-endian encoding

class ByteWriter {
public:
    void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }

    template <class T>
    void uint(T v)
    {
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }

    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    const std::string& str() const noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(std::string_view data, std::string name) : data_(data), name_(std::move(name)) {}

    template <class T>
    T uint(ErrorCode on_short = ErrorCode::TruncatedPayload)
    {
        need(sizeof(T), on_short);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
    float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }

    std::string_view take(std::size_t n, ErrorCode on_short)
    {
        need(n, on_short);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    [[noreturn]] void error(ErrorCode code, const std::string& what) const
    {
        fail(code, name_ + " at byte " + std::to_string(pos_) + ": " + what);
    }

private:
    void need(std::size_t n, ErrorCode code) const
    {
        if (remaining() < n)
            error(code, "needs " + std::to_string(n) + " bytes, " + std::to_string(remaining()) +
                            " left");
    }

    std::string_view data_;
    std::string name_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Text helpers

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct TextLine {
    std::size_t number;
    std::string_view text;
};

// Non-empty, non-comment lines with 1-based line numbers.
inline std::vector<TextLine> content_lines(std::string_view text)
{
    std::vector<TextLine> lines;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        const auto end = text.find('\n');
        auto line = text.substr(0, end);
        text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;
        lines.push_back({number, line});
    }
    return lines;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] inline void parse_error(const fs::path& path, std::size_t line, const std::string& what)
{
    fail(ErrorCode::ParseError, path.string() + " line " + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view s, const fs::path& path, std::size_t line)
{
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        parse_error(path, line, "bad number '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_int(std::string_view s, const fs::path& path, std::size_t line)
{
    s = trim(s);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        parse_error(path, line, "bad integer '" + std::string(s) + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Vectors

inline bool is_csv(const fs::path& path)
{
    return path.extension() == ".csv";
}

inline std::string encode_vectors(const Dataset& data)
{
    const std::size_t dim = data.empty() ? 0 : data.front().size();
    ByteWriter w;
    w.bytes(kVectorMagic, sizeof kVectorMagic);
    w.uint<std::uint8_t>(kVectorVersion);
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(DType::Float64));
    w.uint<std::uint16_t>(0);
    w.uint<std::uint64_t>(data.size());
    w.uint<std::uint64_t>(dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != dim)
            fail(ErrorCode::DimInconsistent, "vector " + std::to_string(i) + " has dim " +
                                                 std::to_string(data[i].size()) + ", expected " +
                                                 std::to_string(dim));
        for (double v : data[i])
            w.f64(v);
    }
    return w.str();
}

inline Dataset decode_vectors(std::string_view bytes, const std::string& name)
{
    ByteReader r(bytes, name);
    const auto magic = r.take(sizeof kVectorMagic, ErrorCode::CorruptHeader);
    if (std::memcmp(magic.data(), kVectorMagic, sizeof kVectorMagic) != 0)
        r.error(ErrorCode::CorruptHeader, "bad magic");
    const auto version = r.uint<std::uint8_t>(ErrorCode::CorruptHeader);
    if (version != kVectorVersion)
        r.error(ErrorCode::VersionMismatch, "vector file version " + std::to_string(version));
    const auto dtype = static_cast<DType>(r.uint<std::uint8_t>(ErrorCode::CorruptHeader));
    if (dtype != DType::Float64 && dtype != DType::Float32)
        r.error(ErrorCode::CorruptHeader, "unknown dtype tag");
    r.uint<std::uint16_t>(ErrorCode::CorruptHeader);
    const auto n = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    const auto dim = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    if (n > 0 && dim == 0)
        r.error(ErrorCode::CorruptHeader, "zero dimension");
    const std::size_t width = dtype == DType::Float64 ? 8 : 4;
    if (dim != 0 && n > r.remaining() / width / dim)
        r.error(ErrorCode::TruncatedPayload,
                "payload holds fewer than " + std::to_string(n) + " vectors");
    if (r.remaining() != n * dim * width)
        r.error(ErrorCode::DimInconsistent, "payload size does not match n * dim");
    Dataset data(n, Vector(dim));
    for (auto& v : data)
        for (double& x : v)
            x = dtype == DType::Float64 ? r.f64() : static_cast<double>(r.f32());
    return data;
}

inline std::string encode_vectors_csv(const Dataset& data)
{
    std::string out;
    for (const auto& v : data) {
        for (std::size_t d = 0; d < v.size(); ++d) {
            if (d)
                out += ',';
            out += format_double(v[d]);
        }
        out += '\n';
    }
    return out;
}

inline Dataset decode_vectors_csv(std::string_view text, const fs::path& path)
{
    const auto lines = content_lines(text);
    if (lines.empty())
        fail(ErrorCode::CorruptHeader, path.string() + ": empty file");
    Dataset data;
    for (const auto& line : lines) {
        const auto fields = split(line.text, ',');
        Vector v;
        v.reserve(fields.size());
        for (auto f : fields)
            v.push_back(parse_double(f, path, line.number));
        if (!data.empty() && v.size() != data.front().size())
            fail(ErrorCode::DimInconsistent,
                 path.string() + " line " + std::to_string(line.number) + ": " +
                     std::to_string(v.size()) + " values, expected " +
                     std::to_string(data.front().size()));
        data.push_back(std::move(v));
    }
    return data;
}

inline void save_vectors(const fs::path& path, const Dataset& data)
{
    write_file_atomic(path, is_csv(path) ? encode_vectors_csv(data) : encode_vectors(data));
}

inline Dataset load_vectors(const fs::path& path)
{
    const auto bytes = read_file(path);
    if (bytes.empty())
        fail(ErrorCode::CorruptHeader, path.string() + ": empty file");
    Dataset data = is_csv(path) ? decode_vectors_csv(bytes, path) : decode_vectors(bytes, path.string());
    for (std::size_t i = 0; i < data.size(); ++i)
        require_finite(data[i], path.string() + " vector " + std::to_string(i));
    return data;
}

// One integer identity label per line.
inline void save_labels(const fs::path& path, std::span<const int> labels)
{
    std::string out;
    for (int l : labels)
        out += std::to_string(l) + '\n';
    write_file_atomic(path, out);
}

inline std::vector<int> load_labels(const fs::path& path)
{
    const auto text = read_file(path);
    std::vector<int> labels;
    for (const auto& line : content_lines(text))
        labels.push_back(parse_int<int>(line.text, path, line.number));
    return labels;
}

// ---------------------------------------------------------------------------
// Checkpoints

struct CheckpointMeta {
    std::uint64_t epoch = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;

    friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

struct Checkpoint {
    AutoencoderParams params;
    CheckpointMeta meta;
};

inline std::string encode_checkpoint(const AutoencoderParams& p, const CheckpointMeta& meta)
{
    validate(p);
    ByteWriter w;
    w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
    w.uint<std::uint8_t>(kCheckpointVersion);
    w.uint<std::uint8_t>(0);
    w.uint<std::uint16_t>(0);
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(p.layer_sizes.size()));
    for (auto s : p.layer_sizes)
        w.uint<std::uint64_t>(s);
    w.uint<std::uint64_t>(p.bottleneck_index);
    for (const auto& layer : p.layers)
        w.uint<std::uint8_t>(static_cast<std::uint8_t>(layer.activation));
    w.uint<std::uint64_t>(meta.epoch);
    w.uint<std::uint64_t>(meta.seed);
    w.uint<std::uint64_t>(meta.config_hash);
    for (const auto& layer : p.layers) {
        for (double x : layer.weights)
            w.f64(x);
        for (double x : layer.bias)
            w.f64(x);
    }
    return w.str();
}

inline Checkpoint decode_checkpoint(std::string_view bytes, const std::string& name)
{
    ByteReader r(bytes, name);
    const auto magic = r.take(sizeof kCheckpointMagic, ErrorCode::CorruptHeader);
    if (std::memcmp(magic.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
        r.error(ErrorCode::CorruptHeader, "bad magic");
    const auto version = r.uint<std::uint8_t>(ErrorCode::CorruptHeader);
    if (version != kCheckpointVersion)
        r.error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) +
                                                ", expected " +
                                                std::to_string(kCheckpointVersion));
    r.uint<std::uint8_t>(ErrorCode::CorruptHeader);
    r.uint<std::uint16_t>(ErrorCode::CorruptHeader);
    const auto count = r.uint<std::uint32_t>(ErrorCode::CorruptHeader);
    if (count < 3 || count > 1024)
        r.error(ErrorCode::CorruptHeader, "implausible layer count " + std::to_string(count));

    Checkpoint ck;
    auto& p = ck.params;
    for (std::uint32_t i = 0; i < count; ++i)
        p.layer_sizes.push_back(r.uint<std::uint64_t>(ErrorCode::CorruptHeader));
    p.bottleneck_index = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    std::vector<Activation> acts;
    for (std::uint32_t i = 0; i + 1 < count; ++i) {
        const auto a = r.uint<std::uint8_t>(ErrorCode::CorruptHeader);
        if (a > 1)
            r.error(ErrorCode::CorruptHeader, "unknown activation tag");
        acts.push_back(static_cast<Activation>(a));
    }
    ck.meta.epoch = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    ck.meta.seed = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    ck.meta.config_hash = r.uint<std::uint64_t>(ErrorCode::CorruptHeader);
    validate_architecture(p.layer_sizes);

    std::size_t params_total = 0;
    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l)
        params_total += p.layer_sizes[l + 1] * (p.layer_sizes[l] + 1);
    if (r.remaining() / 8 < params_total)
        r.error(ErrorCode::TruncatedPayload, "parameter payload too short");
    if (r.remaining() != params_total * 8)
        r.error(ErrorCode::DimInconsistent, "trailing bytes after parameters");

    for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        Layer layer;
        layer.fan_in = p.layer_sizes[l];
        layer.fan_out = p.layer_sizes[l + 1];
        layer.activation = acts[l];
        layer.weights.resize(layer.fan_in * layer.fan_out);
        layer.bias.resize(layer.fan_out);
        for (double& x : layer.weights)
            x = r.f64();
        for (double& x : layer.bias)
            x = r.f64();
        p.layers.push_back(std::move(layer));
    }
    validate(p);
    return ck;
}

inline void save_checkpoint(const fs::path& path, const AutoencoderParams& p,
                            const CheckpointMeta& meta = {})
{
    write_file_atomic(path, encode_checkpoint(p, meta));
}

inline Checkpoint load_checkpoint(const fs::path& path)
{
    const auto bytes = read_file(path);
    if (bytes.empty())
        fail(ErrorCode::CorruptHeader, path.string() + ": empty file");
    return decode_checkpoint(bytes, path.string());
}

// ---------------------------------------------------------------------------
// Neighbor maps: "i: j1,j2,..." per row after a "# nsae-neighbors" header.

inline std::string encode_neighbor_map(const NeighborMap& map)
{
    std::string out = "# nsae-neighbors mode=";
    out += map.mode == SelectionMode::TopK ? "topk" : "threshold";
    out += " param=" + format_double(map.parameter) + " n=" + std::to_string(map.size()) + "\n";
    for (std::size_t i = 0; i < map.size(); ++i) {
        out += std::to_string(i) + ":";
        for (std::size_t k = 0; k < map.neighbors[i].size(); ++k)
            out += (k ? "," : " ") + std::to_string(map.neighbors[i][k]);
        out += '\n';
    }
    return out;
}

inline NeighborMap decode_neighbor_map(std::string_view text, const fs::path& path)
{
    NeighborMap map;
    map.mode = SelectionMode::Threshold;
    map.parameter = -1.0;
    bool have_mode = false;

    std::size_t number = 0;
    for (auto raw : split(text, '\n')) {
        ++number;
        if (!raw.empty() && raw.back() == '\r')
            raw.remove_suffix(1);
        if (raw.starts_with("# nsae-neighbors")) {
            for (auto field : split(raw.substr(16), ' ')) {
                if (field.starts_with("mode=")) {
                    const auto m = field.substr(5);
                    if (m != "topk" && m != "threshold")
                        parse_error(path, number, "unknown mode '" + std::string(m) + "'");
                    map.mode = m == "topk" ? SelectionMode::TopK : SelectionMode::Threshold;
                    have_mode = true;
                } else if (field.starts_with("param=")) {
                    map.parameter = parse_double(field.substr(6), path, number);
                }
            }
            continue;
        }
        if (raw.empty() || raw.front() == '#')
            continue;
        const auto colon = raw.find(':');
        if (colon == std::string_view::npos)
            parse_error(path, number, "expected 'i: j1,j2,...'");
        const auto row = parse_int<std::size_t>(raw.substr(0, colon), path, number);
        if (row != map.size())
            parse_error(path, number, "row " + std::to_string(row) + " out of sequence");
        std::vector<std::size_t> js;
        const auto rest = trim(raw.substr(colon + 1));
        if (!rest.empty())
            for (auto f : split(rest, ','))
                js.push_back(parse_int<std::size_t>(f, path, number));
        map.neighbors.push_back(std::move(js));
    }
    if (!have_mode) {
        // Without a header nothing is known about row lengths.
        map.mode = SelectionMode::Threshold;
    }
    try {
        validate(map);
    } catch (const Error& e) {
        fail(ErrorCode::InvalidNeighborMap, path.string() + ": " + e.what());
    }
    return map;
}

inline void save_neighbor_map(const fs::path& path, const NeighborMap& map)
{
    validate(map);
    write_file_atomic(path, encode_neighbor_map(map));
}

inline NeighborMap load_neighbor_map(const fs::path& path)
{
    return decode_neighbor_map(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Trials: "index_a<TAB>index_b<TAB>{1|0}"

inline std::string encode_trials(const TrialList& trials)
{
    std::string out;
    for (const auto& t : trials)
        out += std::to_string(t.a) + '\t' + std::to_string(t.b) + '\t' +
               (t.label == TrialLabel::Matched ? "1" : "0") + '\n';
    return out;
}

namespace detail {

inline TrialLabel parse_label(std::string_view s, const fs::path& path, std::size_t line)
{
    s = trim(s);
    if (s == "1")
        return TrialLabel::Matched;
    if (s == "0")
        return TrialLabel::Mismatched;
    parse_error(path, line, "label must be 1 or 0, got '" + std::string(s) + "'");
}

} // namespace detail

// Pass bound_n to check indices against a dataset of that size.
inline TrialList load_trials(const fs::path& path, std::optional<std::size_t> bound_n = {})
{
    const auto text = read_file(path);
    TrialList trials;
    for (const auto& line : content_lines(text)) {
        const auto f = split(line.text, '\t');
        if (f.size() != 3)
            parse_error(path, line.number, "expected 3 tab-separated fields");
        Trial t{parse_int<std::size_t>(f[0], path, line.number),
                parse_int<std::size_t>(f[1], path, line.number),
                detail::parse_label(f[2], path, line.number)};
        if (bound_n && (t.a >= *bound_n || t.b >= *bound_n))
            fail(ErrorCode::IndexOutOfRange, path.string() + " line " +
                                                 std::to_string(line.number) +
                                                 ": index >= " + std::to_string(*bound_n));
        trials.push_back(t);
    }
    return trials;
}

inline void save_trials(const fs::path& path, const TrialList& trials)
{
    write_file_atomic(path, encode_trials(trials));
}

// ---------------------------------------------------------------------------
// Scores: "index_a<TAB>index_b<TAB>label<TAB>score" after a "# source:" line.

struct ScoreFile {
    TrialList trials;
    ScoreSet scores;
};

inline std::string encode_scores(const TrialList& trials, const ScoreSet& s)
{
    if (trials.size() != s.scores.size())
        fail(ErrorCode::LengthMismatch, std::to_string(s.scores.size()) + " scores for " +
                                            std::to_string(trials.size()) + " trials");
    std::string out = "# source: " + s.source + "\n";
    for (std::size_t t = 0; t < trials.size(); ++t)
        out += std::to_string(trials[t].a) + '\t' + std::to_string(trials[t].b) + '\t' +
               (trials[t].label == TrialLabel::Matched ? "1" : "0") + '\t' +
               format_double(s.scores[t]) + '\n';
    return out;
}

inline ScoreFile decode_scores(std::string_view text, const fs::path& path)
{
    ScoreFile sf;
    constexpr std::string_view tag = "# source: ";
    if (text.starts_with(tag)) {
        const auto end = text.find('\n');
        sf.scores.source = std::string(trim(text.substr(tag.size(), end - tag.size())));
    }
    for (const auto& line : content_lines(text)) {
        const auto f = split(line.text, '\t');
        if (f.size() != 4)
            parse_error(path, line.number, "expected 4 tab-separated fields");
        sf.trials.push_back({parse_int<std::size_t>(f[0], path, line.number),
                             parse_int<std::size_t>(f[1], path, line.number),
                             detail::parse_label(f[2], path, line.number)});
        sf.scores.scores.push_back(parse_double(f[3], path, line.number));
    }
    return sf;
}

inline void save_scores(const fs::path& path, const TrialList& trials, const ScoreSet& s)
{
    write_file_atomic(path, encode_scores(trials, s));
}

inline ScoreFile load_scores(const fs::path& path)
{
    return decode_scores(read_file(path), path);
}

// ---------------------------------------------------------------------------
// Training log and reports

inline std::string encode_train_log(const TrainReport& report, std::size_t first_epoch = 0)
{
    std::string out;
    for (std::size_t e = 0; e < report.epochs_run; ++e)
        out += std::to_string(first_epoch + e) + '\t' + format_double(report.loss_per_epoch[e]) +
               '\t' + format_double(report.lr_per_epoch[e]) + '\n';
    return out;
}

inline nlohmann::ordered_json to_json(const EvalReport& r, bool with_roc = true)
{
    nlohmann::ordered_json j;
    j["eer"] = r.eer;
    j["eer_threshold"] = r.eer_threshold;
    j["accuracy"] = r.accuracy;
    j["n_matched"] = r.n_matched;
    j["n_mismatched"] = r.n_mismatched;
    if (with_roc) {
        auto roc = nlohmann::ordered_json::array();
        for (const auto& p : r.roc)
            roc.push_back({{"far", p.far}, {"frr", p.frr}, {"threshold", p.threshold}});
        j["roc"] = std::move(roc);
    }
    return j;
}

inline std::string render_report(const EvalReport& r)
{
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "EER %.4f\nEER threshold %.6f\nAccuracy %.4f\nMatched trials %zu\n"
                  "Mismatched trials %zu\n",
                  r.eer, r.eer_threshold, r.accuracy, r.n_matched, r.n_mismatched);
    return buf;
}

inline void save_json(const fs::path& path, const nlohmann::ordered_json& j)
{
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace nsae::io
