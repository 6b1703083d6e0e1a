#include "sega/nrrd.hpp"

#include "gzip.hpp"
#include "sega/errors.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace sega {

namespace {

// Refuse headers describing more than 2^34 voxels before touching the payload.
constexpr std::size_t kMaxVoxels = std::size_t{1} << 34;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::optional<ScalarType> parse_type(const std::string& raw) {
    static const std::map<std::string, ScalarType> names = {
        {"uchar", ScalarType::UInt8},           {"unsigned char", ScalarType::UInt8},
        {"uint8", ScalarType::UInt8},           {"uint8_t", ScalarType::UInt8},
        {"short", ScalarType::Int16},           {"short int", ScalarType::Int16},
        {"signed short", ScalarType::Int16},    {"signed short int", ScalarType::Int16},
        {"int16", ScalarType::Int16},           {"int16_t", ScalarType::Int16},
        {"ushort", ScalarType::UInt16},         {"unsigned short", ScalarType::UInt16},
        {"unsigned short int", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},
        {"uint16_t", ScalarType::UInt16},       {"float", ScalarType::Float32},
    };
    const auto it = names.find(lower(raw));
    if (it == names.end()) return std::nullopt;
    return it->second;
}

double parse_double(std::string_view s) {
    const auto t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw CorruptFile(fmt::format("malformed number '{}'", t));
    return v;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Parses "(a,b,c)" vectors separated by whitespace.
std::vector<Vec3> parse_vectors(std::string_view s) {
    std::vector<Vec3> out;
    std::size_t pos = 0;
    while (true) {
        const auto open = s.find_first_not_of(" \t", pos);
        if (open == std::string_view::npos) break;
        if (s[open] != '(') {
            if (s.substr(open, 4) == "none") throw UnsupportedFormat("non-spatial axis ('none') is not supported");
            throw CorruptFile("malformed vector list");
        }
        const auto close = s.find(')', open);
        if (close == std::string_view::npos) throw CorruptFile("unterminated vector");
        const auto body = s.substr(open + 1, close - open - 1);
        Vec3 v{};
        std::size_t start = 0;
        for (int c = 0; c < 3; ++c) {
            const auto comma = body.find(',', start);
            if ((c < 2) != (comma != std::string_view::npos)) throw CorruptFile("vector must have 3 components");
            v[c] = parse_double(body.substr(start, c < 2 ? comma - start : std::string_view::npos));
            start = comma + 1;
        }
        out.push_back(v);
        pos = close + 1;
    }
    return out;
}

template <typename T>
T load(const char* p, bool swap) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if (swap) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    return v;
}

template <typename T>
void store(std::string& out, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<unsigned char*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

}  // namespace

VoxelGrid parse_nrrd(const std::string& bytes) {
    std::size_t pos = 0;
    auto next_line = [&](std::string& line) -> bool {
        if (pos >= bytes.size()) return false;
        auto nl = bytes.find('\n', pos);
        if (nl == std::string::npos) nl = bytes.size();
        line = bytes.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = nl + 1;
        return true;
    };

    std::string line;
    if (!next_line(line) || line.size() != 8 || line.rfind("NRRD000", 0) != 0 || line[7] < '1' || line[7] > '5')
        throw UnsupportedFormat("missing or unsupported NRRD magic");

    std::map<std::string, std::string> fields;
    bool header_closed = false;
    while (next_line(line)) {
        if (line.empty()) {
            header_closed = true;
            break;
        }
        if (line[0] == '#') continue;
        if (line.find(":=") != std::string::npos) continue;  // key/value pairs
        const auto colon = line.find(": ");
        if (colon == std::string::npos) throw CorruptFile(fmt::format("malformed header line '{}'", line));
        fields[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 2));
    }

    if (fields.count("data file") || fields.count("datafile"))
        throw UnsupportedFormat("detached headers are not supported");
    for (const char* req : {"dimension", "type", "sizes", "encoding"})
        if (!fields.count(req)) throw UnsupportedFormat(fmt::format("missing required field '{}'", req));
    if (!header_closed) throw CorruptFile("header is not terminated by a blank line");

    if (fields["dimension"] != "3") throw UnsupportedFormat(fmt::format("dimension {} is not supported", fields["dimension"]));
    if (fields.count("space dimension") && fields["space dimension"] != "3")
        throw UnsupportedFormat("space dimension must be 3");
    for (const char* skip : {"line skip", "lineskip", "byte skip", "byteskip"})
        if (fields.count(skip) && fields[skip] != "0") throw UnsupportedFormat("line/byte skip is not supported");

    const auto type = parse_type(fields["type"]);
    if (!type) throw UnsupportedFormat(fmt::format("type '{}' is not supported", fields["type"]));

    const auto enc = lower(fields["encoding"]);
    NrrdEncoding encoding;
    if (enc == "raw") encoding = NrrdEncoding::Raw;
    else if (enc == "gzip" || enc == "gz") encoding = NrrdEncoding::Gzip;
    else throw UnsupportedFormat(fmt::format("encoding '{}' is not supported", enc));

    bool big_endian = false;
    if (fields.count("endian")) {
        const auto e = lower(fields["endian"]);
        if (e == "big") big_endian = true;
        else if (e != "little") throw UnsupportedFormat(fmt::format("endian '{}' is not supported", e));
    }

    Geometry g;
    const auto sizes = split_ws(fields["sizes"]);
    if (sizes.size() != 3) throw CorruptFile("sizes must list 3 axes");
    std::size_t total = 1;
    for (int a = 0; a < 3; ++a) {
        std::size_t n = 0;
        const auto [ptr, ec] = std::from_chars(sizes[a].data(), sizes[a].data() + sizes[a].size(), n);
        if (ec != std::errc{} || ptr != sizes[a].data() + sizes[a].size() || n == 0)
            throw CorruptFile(fmt::format("invalid size '{}'", sizes[a]));
        if (n > kMaxVoxels || total > kMaxVoxels / n) throw CorruptFile("volume is implausibly large");
        total *= n;
        g.dims[a] = n;
    }

    if (fields.count("space directions")) {
        const auto vecs = parse_vectors(fields["space directions"]);
        if (vecs.size() != 3) throw CorruptFile("space directions must list 3 vectors");
        Mat3 dir{};
        for (int c = 0; c < 3; ++c) {
            const double n = std::sqrt(vecs[c][0] * vecs[c][0] + vecs[c][1] * vecs[c][1] + vecs[c][2] * vecs[c][2]);
            if (!(n > 0.0) || !std::isfinite(n)) throw InvalidGeometry("zero or non-finite space direction");
            g.spacing[c] = n;
            for (int r = 0; r < 3; ++r) dir[r][c] = vecs[c][r] / n;
        }
        g.direction = orthonormalize_direction(dir);
    } else if (fields.count("spacings")) {
        const auto sp = split_ws(fields["spacings"]);
        if (sp.size() != 3) throw CorruptFile("spacings must list 3 values");
        for (int a = 0; a < 3; ++a) g.spacing[a] = parse_double(sp[a]);
    }
    if (fields.count("space origin")) {
        const auto o = parse_vectors(fields["space origin"]);
        if (o.size() != 1) throw CorruptFile("space origin must be a single vector");
        g.origin = o[0];
    }
    g.validate();

    const std::size_t elem = scalar_type_size(*type);
    const std::size_t expected = total * elem;
    std::string_view payload(bytes.data() + std::min(pos, bytes.size()), bytes.size() - std::min(pos, bytes.size()));
    std::string inflated;
    if (encoding == NrrdEncoding::Gzip) {
        inflated = detail::gzip_decompress(payload, expected);
        payload = inflated;
    }
    if (payload.size() != expected)
        throw CorruptFile(fmt::format("payload has {} bytes, header implies {}", payload.size(), expected));

    VoxelGrid grid(g, *type);
    const bool swap = big_endian != (std::endian::native == std::endian::big);
    const char* p = payload.data();
    for (std::size_t i = 0; i < total; ++i, p += elem) {
        switch (*type) {
            case ScalarType::UInt8: grid.values[i] = static_cast<float>(static_cast<unsigned char>(*p)); break;
            case ScalarType::Int16: grid.values[i] = static_cast<float>(load<std::int16_t>(p, swap)); break;
            case ScalarType::UInt16: grid.values[i] = static_cast<float>(load<std::uint16_t>(p, swap)); break;
            case ScalarType::Float32: grid.values[i] = load<float>(p, swap); break;
        }
    }
    return grid;
}

VoxelGrid read_nrrd(const std::filesystem::path& path) { return parse_nrrd(read_file(path)); }

LabelMask read_nrrd_mask(const std::filesystem::path& path) {
    const auto grid = read_nrrd(path);
    LabelMask mask(grid.geometry);
    for (std::size_t i = 0; i < grid.values.size(); ++i) mask.values[i] = grid.values[i] > 0.0f ? 1 : 0;
    return mask;
}

std::string serialize_nrrd(const VoxelGrid& grid, NrrdEncoding encoding) {
    grid.validate();
    const auto& g = grid.geometry;
    std::string out = "NRRD0004\n";
    out += fmt::format("type: {}\n", scalar_type_name(grid.type));
    out += "dimension: 3\n";
    out += "space dimension: 3\n";
    out += fmt::format("sizes: {} {} {}\n", g.dims[0], g.dims[1], g.dims[2]);
    out += "space directions:";
    for (int c = 0; c < 3; ++c)
        out += fmt::format(" ({},{},{})", g.direction[0][c] * g.spacing[c], g.direction[1][c] * g.spacing[c],
                           g.direction[2][c] * g.spacing[c]);
    out += "\nkinds: domain domain domain\n";
    if (scalar_type_size(grid.type) > 1) out += "endian: little\n";
    out += fmt::format("encoding: {}\n", encoding == NrrdEncoding::Gzip ? "gzip" : "raw");
    out += fmt::format("space origin: ({},{},{})\n\n", g.origin[0], g.origin[1], g.origin[2]);

    std::string data;
    data.reserve(grid.values.size() * scalar_type_size(grid.type));
    for (const float v : grid.values) {
        switch (grid.type) {
            case ScalarType::UInt8: data.push_back(static_cast<char>(static_cast<std::uint8_t>(v))); break;
            case ScalarType::Int16: store(data, static_cast<std::int16_t>(v)); break;
            case ScalarType::UInt16: store(data, static_cast<std::uint16_t>(v)); break;
            case ScalarType::Float32: store(data, v); break;
        }
    }
    out += encoding == NrrdEncoding::Gzip ? detail::gzip_compress(data) : data;
    return out;
}

void write_nrrd(const VoxelGrid& grid, const std::filesystem::path& path, NrrdEncoding encoding) {
    const auto bytes = serialize_nrrd(grid, encoding);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

void write_nrrd(const LabelMask& mask, const std::filesystem::path& path, NrrdEncoding encoding) {
    VoxelGrid grid(mask.geometry, ScalarType::UInt8);
    for (std::size_t i = 0; i < mask.values.size(); ++i) grid.values[i] = mask.values[i] ? 1.0f : 0.0f;
    write_nrrd(grid, path, encoding);
}

}  // namespace sega
