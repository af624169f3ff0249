#include "loopforge/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "loopforge/error.hpp"

namespace loopforge::io {

namespace {

constexpr char kMagic[4] = {'L', 'C', 'D', 'B'};
constexpr std::size_t kHeaderBytes = 24;
constexpr std::size_t kFrameHeaderBytes = 16;

template <typename U>
void put_le(std::string& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xffu));
    }
}

template <typename U>
U get_le(const std::string& in, std::size_t offset) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return value;
}

template <typename F, typename U>
U bits_of(F value) {
    static_assert(sizeof(F) == sizeof(U));
    U bits;
    std::memcpy(&bits, &value, sizeof(U));
    return bits;
}

template <typename F, typename U>
F from_bits(U bits) {
    F value;
    std::memcpy(&value, &bits, sizeof(U));
    return value;
}

std::string format_number(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        parse_fail(line_no, "'" + std::string(field) + "' is not a finite number");
    }
    return value;
}

std::uint64_t parse_id(std::string_view field, std::size_t line_no) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        parse_fail(line_no, "'" + std::string(field) + "' is not a frame id");
    }
    return value;
}

/// Calls fn(line_no, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty() || fields.front().front() == '#') continue;
        fn(line_no, fields);
    }
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    return in;
}

void append_sim3(std::string& line, const Sim3& t, int digits) {
    for (double v : {t.s, t.r.w(), t.r.x(), t.r.y(), t.r.z(), t.t.x(), t.t.y(), t.t.z()}) {
        line += ' ';
        line += format_number(v, digits);
    }
}

Sim3 parse_sim3(std::span<const std::string_view> f, std::size_t line_no) {
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) v[k] = parse_double(f[k], line_no);
    if (!(v[0] > 0.0)) parse_fail(line_no, "scale must be positive");
    const Eigen::Quaterniond q(v[1], v[2], v[3], v[4]);
    if (std::abs(q.norm() - 1.0) > 1e-6) parse_fail(line_no, "quaternion is not unit-norm");
    return Sim3(v[0], q, Vec3(v[5], v[6], v[7]));
}

}  // namespace

std::string encode_lcdb(const LcdbFile& file) {
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, kLcdbVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(file.frames.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(file.kind));
    put_le<std::uint32_t>(out, file.n);
    put_le<std::uint32_t>(out, file.d);
    for (const auto& frame : file.frames) {
        if (frame.values.rows() != file.n || frame.values.cols() != file.d) {
            throw Error(ErrorCode::DimMismatch,
                        "frame " + std::to_string(frame.frame_id) + " is " + std::to_string(frame.values.rows()) +
                            "x" + std::to_string(frame.values.cols()) + ", header says " +
                            std::to_string(file.n) + "x" + std::to_string(file.d));
        }
        put_le<std::uint64_t>(out, frame.frame_id);
        put_le<std::uint64_t>(out, bits_of<double, std::uint64_t>(frame.timestamp));
        const float* data = frame.values.data();
        for (Eigen::Index i = 0; i < frame.values.size(); ++i) {
            put_le<std::uint32_t>(out, bits_of<float, std::uint32_t>(data[i]));
        }
    }
    return out;
}

LcdbFile decode_lcdb(const std::string& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        if (bytes.size() < 4 && std::memcmp(bytes.data(), kMagic, bytes.size()) == 0) {
            throw Error(ErrorCode::TruncatedPayload, "file ends inside the magic bytes");
        }
        throw Error(ErrorCode::BadMagic, "not an LCDB file");
    }
    if (bytes.size() < 8) {
        throw Error(ErrorCode::TruncatedPayload, "file ends inside the header");
    }
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != kLcdbVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "LCDB version " + std::to_string(version));
    }
    if (bytes.size() < kHeaderBytes) {
        throw Error(ErrorCode::TruncatedPayload, "file ends inside the header");
    }
    LcdbFile file;
    const auto count = get_le<std::uint32_t>(bytes, 8);
    const auto kind = get_le<std::uint32_t>(bytes, 12);
    if (kind > 1) {
        throw Error(ErrorCode::ParseError, "unknown descriptor kind " + std::to_string(kind));
    }
    file.kind = static_cast<DescriptorKind>(kind);
    file.n = get_le<std::uint32_t>(bytes, 16);
    file.d = get_le<std::uint32_t>(bytes, 20);

    using u128 = unsigned __int128;
    const u128 frame_bytes = kFrameHeaderBytes + u128(file.n) * file.d * 4;
    const u128 expected = kHeaderBytes + frame_bytes * count;
    if (u128(bytes.size()) < expected) {
        throw Error(ErrorCode::TruncatedPayload, "header promises more data than the file holds");
    }
    if (u128(bytes.size()) > expected) {
        throw Error(ErrorCode::TrailingData,
                    std::to_string(bytes.size() - static_cast<std::size_t>(expected)) + " bytes after the last frame");
    }

    std::size_t offset = kHeaderBytes;
    file.frames.reserve(count);
    for (std::uint32_t f = 0; f < count; ++f) {
        LcdbFrame frame;
        frame.frame_id = get_le<std::uint64_t>(bytes, offset);
        frame.timestamp = from_bits<double>(get_le<std::uint64_t>(bytes, offset + 8));
        offset += kFrameHeaderBytes;
        frame.values.resize(file.n, file.d);
        float* data = frame.values.data();
        for (Eigen::Index i = 0; i < frame.values.size(); ++i, offset += 4) {
            data[i] = from_bits<float>(get_le<std::uint32_t>(bytes, offset));
        }
        file.frames.push_back(std::move(frame));
    }
    return file;
}

void write_lcdb(const std::filesystem::path& path, const LcdbFile& file) {
    write_text(path, encode_lcdb(file));
}

LcdbFile read_lcdb(const std::filesystem::path& path) { return decode_lcdb(read_text(path)); }

LcdbFile to_lcdb(std::span<const LocalDescriptorSet> locals, std::span<const double> timestamps) {
    if (locals.size() != timestamps.size()) {
        throw Error(ErrorCode::DimMismatch, "one timestamp per descriptor set is required");
    }
    LcdbFile file;
    file.kind = DescriptorKind::Local;
    if (!locals.empty()) {
        file.n = static_cast<std::uint32_t>(locals.front().rows());
        file.d = static_cast<std::uint32_t>(locals.front().cols());
    }
    for (std::size_t i = 0; i < locals.size(); ++i) {
        file.frames.push_back({i, timestamps[i], locals[i].cast<float>()});
    }
    return file;
}

LocalDescriptorSet to_local_set(const LcdbFrame& frame) { return frame.values.cast<double>(); }

void write_tum(std::ostream& out, const Trajectory& trajectory) {
    for (const auto& e : trajectory) {
        const auto& q = e.pose.r;
        std::string line = format_number(e.timestamp, 17);
        for (double v : {e.pose.t.x(), e.pose.t.y(), e.pose.t.z(), q.x(), q.y(), q.z(), q.w()}) {
            line += ' ';
            line += format_number(v, 9);
        }
        out << line << '\n';
    }
}

Trajectory read_tum(std::istream& in) {
    Trajectory out;
    for_each_record(in, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 8) {
            parse_fail(line_no, "expected 8 fields, got " + std::to_string(f.size()));
        }
        double v[8];
        for (std::size_t k = 0; k < 8; ++k) v[k] = parse_double(f[k], line_no);
        if (!out.empty() && !(v[0] > out.back().timestamp)) {
            parse_fail(line_no, "timestamps must be strictly increasing");
        }
        const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
        if (std::abs(q.norm() - 1.0) > 1e-6) {
            parse_fail(line_no, "quaternion is not unit-norm");
        }
        TrajectoryEntry e;
        e.frame_id = out.size();
        e.timestamp = v[0];
        e.pose = Sim3(1.0, q, Vec3(v[1], v[2], v[3]));
        if (!out.empty()) e.reference = out.back().frame_id;
        out.push_back(e);
    });
    return out;
}

void write_tum(const std::filesystem::path& path, const Trajectory& trajectory) {
    std::ostringstream out;
    write_tum(out, trajectory);
    write_text(path, out.str());
}

Trajectory read_tum(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_tum(in);
}

void write_correspondences(std::ostream& out, const CorrespondenceTable& table) {
    for (const auto& [key, pairs] : table) {
        for (const auto& c : pairs) {
            std::string line = std::to_string(key.first) + ' ' + std::to_string(key.second);
            for (double v : {c.p.x(), c.p.y(), c.p.z(), c.q.x(), c.q.y(), c.q.z()}) {
                line += ' ';
                line += format_number(v, 17);
            }
            out << line << '\n';
        }
    }
}

CorrespondenceTable read_correspondences(std::istream& in) {
    CorrespondenceTable table;
    for_each_record(in, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f.size() != 8) {
            parse_fail(line_no, "expected 8 fields, got " + std::to_string(f.size()));
        }
        const FrameId a = parse_id(f[0], line_no);
        const FrameId b = parse_id(f[1], line_no);
        Correspondence c;
        for (int k = 0; k < 3; ++k) {
            c.p(k) = parse_double(f[2 + k], line_no);
            c.q(k) = parse_double(f[5 + k], line_no);
        }
        table[{a, b}].push_back(c);
    });
    return table;
}

void write_correspondences(const std::filesystem::path& path, const CorrespondenceTable& table) {
    std::ostringstream out;
    write_correspondences(out, table);
    write_text(path, out.str());
}

CorrespondenceTable read_correspondences(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_correspondences(in);
}

void write_graph(std::ostream& out, const PoseGraph& graph) {
    auto node_line = [&](FrameId id, const Sim3& pose) {
        std::string line = "NODE " + std::to_string(id);
        append_sim3(line, pose, 17);
        out << line << '\n';
    };
    const auto gauge = graph.gauge_id();
    if (gauge) node_line(*gauge, graph.nodes().at(*gauge));
    for (const auto& [id, pose] : graph.nodes()) {
        if (!gauge || id != *gauge) node_line(id, pose);
    }
    for (const auto& e : graph.edges()) {
        std::string line = "EDGE " + std::to_string(e.from) + ' ' + std::to_string(e.to);
        append_sim3(line, e.measurement, 17);
        line += ' ' + format_number(e.weight, 17);
        line += e.kind == EdgeKind::Loop ? " loop" : " odometry";
        out << line << '\n';
    }
}

PoseGraph read_graph(std::istream& in) {
    PoseGraph graph;
    std::vector<std::pair<std::size_t, PoseEdge>> edges;
    for_each_record(in, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        if (f[0] == "NODE") {
            if (f.size() != 10) parse_fail(line_no, "NODE needs 10 fields, got " + std::to_string(f.size()));
            const FrameId id = parse_id(f[1], line_no);
            if (graph.contains(id)) parse_fail(line_no, "duplicate node " + std::to_string(id));
            graph.add_node(id, parse_sim3(std::span(f).subspan(2, 8), line_no));
        } else if (f[0] == "EDGE") {
            if (f.size() != 13) parse_fail(line_no, "EDGE needs 13 fields, got " + std::to_string(f.size()));
            PoseEdge e;
            e.from = parse_id(f[1], line_no);
            e.to = parse_id(f[2], line_no);
            e.measurement = parse_sim3(std::span(f).subspan(3, 8), line_no);
            e.weight = parse_double(f[11], line_no);
            if (f[12] == "odometry") {
                e.kind = EdgeKind::Odometry;
            } else if (f[12] == "loop") {
                e.kind = EdgeKind::Loop;
            } else {
                parse_fail(line_no, "unknown edge kind '" + std::string(f[12]) + "'");
            }
            edges.emplace_back(line_no, e);
        } else {
            parse_fail(line_no, "unknown record '" + std::string(f[0]) + "'");
        }
    });
    for (const auto& [line_no, e] : edges) {
        try {
            graph.add_edge(e);
        } catch (const Error& err) {
            parse_fail(line_no, err.what());
        }
    }
    return graph;
}

void write_graph(const std::filesystem::path& path, const PoseGraph& graph) {
    std::ostringstream out;
    write_graph(out, graph);
    write_text(path, out.str());
}

PoseGraph read_graph(const std::filesystem::path& path) {
    auto in = open_in(path);
    return read_graph(in);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::out | std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw Error(ErrorCode::IoError, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

}  // namespace loopforge::io
