#include "growcut/nrrd.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

namespace growcut::nrrd {
namespace {

enum class PixelType { UInt8, Int16, UInt16, Float32 };

std::size_t pixel_bytes(PixelType t)
{
    switch (t) {
    case PixelType::UInt8: return 1;
    case PixelType::Int16:
    case PixelType::UInt16: return 2;
    case PixelType::Float32: return 4;
    }
    return 1;
}

std::optional<PixelType> parse_type(std::string_view s)
{
    static constexpr std::pair<std::string_view, PixelType> names[] = {
        {"uchar", PixelType::UInt8},           {"unsigned char", PixelType::UInt8},
        {"uint8", PixelType::UInt8},           {"uint8_t", PixelType::UInt8},
        {"short", PixelType::Int16},           {"short int", PixelType::Int16},
        {"signed short", PixelType::Int16},    {"signed short int", PixelType::Int16},
        {"int16", PixelType::Int16},           {"int16_t", PixelType::Int16},
        {"ushort", PixelType::UInt16},         {"unsigned short", PixelType::UInt16},
        {"unsigned short int", PixelType::UInt16}, {"uint16", PixelType::UInt16},
        {"uint16_t", PixelType::UInt16},       {"float", PixelType::Float32},
    };
    for (const auto& [name, type] : names) {
        if (s == name) return type;
    }
    return std::nullopt;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string to_text(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct Header {
    std::optional<PixelType> type;
    std::optional<int> dimension;
    std::optional<Index3> sizes;
    std::optional<Vec3> spacings;
    std::optional<Vec3> origin;
    bool gzip = false;
    bool have_encoding = false;
    std::endian endian = std::endian::little;
};

class LineError {
public:
    LineError(const std::filesystem::path& path, int line_no, std::string_view line)
        : prefix_(path.string() + ": line " + std::to_string(line_no) + " \"" + std::string(line) + "\": ")
    {}
    Error operator()(const std::string& what) const { return parse_error(prefix_ + what); }

private:
    std::string prefix_;
};

template <typename T, std::size_t N>
std::array<T, N> parse_numbers(std::string_view text, const LineError& err)
{
    std::array<T, N> out{};
    std::istringstream in{std::string(text)};
    for (std::size_t a = 0; a < N; ++a) {
        std::string token;
        if (!(in >> token)) throw err("expected " + std::to_string(N) + " values");
        const char* first = token.data();
        const char* last = token.data() + token.size();
        auto res = std::from_chars(first, last, out[a]);
        if (res.ec != std::errc{} || res.ptr != last) throw err("bad number \"" + token + "\"");
    }
    std::string extra;
    if (in >> extra) throw err("expected " + std::to_string(N) + " values");
    return out;
}

Vec3 parse_vector(std::string_view text, const LineError& err)
{
    std::string s = trim(text);
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') throw err("expected (x,y,z) vector");
    s = s.substr(1, s.size() - 2);
    std::replace(s.begin(), s.end(), ',', ' ');
    return parse_numbers<double, 3>(s, err);
}

Vec3 parse_directions(std::string_view text, const std::filesystem::path& path, const LineError& err)
{
    std::array<Vec3, 3> dirs{};
    std::string s(text);
    std::size_t pos = 0;
    for (int a = 0; a < 3; ++a) {
        const auto open = s.find('(', pos);
        const auto close = s.find(')', open == std::string::npos ? pos : open);
        if (open == std::string::npos || close == std::string::npos) throw err("expected three direction vectors");
        dirs[a] = parse_vector(std::string_view(s).substr(open, close - open + 1), err);
        pos = close + 1;
    }
    if (!trim(std::string_view(s).substr(pos)).empty()) throw err("expected three direction vectors");
    Vec3 spacing{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            if (a != b && dirs[a][b] != 0.0) {
                throw Error(Error::Kind::UnsupportedGeometry,
                            path.string() + ": non-diagonal space directions are not supported");
            }
        }
        spacing[a] = std::abs(dirs[a][a]);
    }
    return spacing;
}

std::vector<char> inflate_gzip(const char* data, std::size_t size, std::size_t expected, const std::filesystem::path& path)
{
    std::vector<char> out(expected);
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw io_error(path.string() + ": zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc == Z_BUF_ERROR && zs.avail_out == 0) {
        // More decompressed data than the header declares.
        throw Error(Error::Kind::Truncation, path.string() + ": data length mismatch (gzip payload larger than sizes)");
    }
    if (rc != Z_STREAM_END) {
        if (produced < expected) {
            throw Error(Error::Kind::Truncation, path.string() + ": data truncated, got " + std::to_string(produced) +
                                                     " of " + std::to_string(expected) + " bytes");
        }
        throw parse_error(path.string() + ": corrupt gzip data");
    }
    if (produced != expected) {
        throw Error(Error::Kind::Truncation, path.string() + ": data length mismatch, got " + std::to_string(produced) +
                                                 " of " + std::to_string(expected) + " bytes");
    }
    return out;
}

template <typename T>
T read_value(const char* p, bool swap)
{
    std::array<char, sizeof(T)> b;
    std::memcpy(b.data(), p, sizeof(T));
    if (swap) std::reverse(b.begin(), b.end());
    return std::bit_cast<T>(b);
}

} // namespace

AnyVolume load(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw io_error("read failed: " + path.string());

    Header h;
    std::size_t pos = 0;
    int line_no = 0;
    bool header_done = false;
    while (pos < bytes.size()) {
        const auto* begin = bytes.data() + pos;
        const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', bytes.size() - pos));
        const std::size_t len = nl ? static_cast<std::size_t>(nl - begin) : bytes.size() - pos;
        std::string_view line(begin, len);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos += len + (nl ? 1 : 0);
        ++line_no;
        const LineError err(path, line_no, line);

        if (line_no == 1) {
            if (line.size() != 8 || line.substr(0, 7) != "NRRD000" || line[7] < '1' || line[7] > '5') {
                throw err("not a NRRD file (expected magic NRRD0001..NRRD0005)");
            }
            continue;
        }
        if (line.empty()) {
            header_done = true;
            break;
        }
        if (line.front() == '#') continue;

        const auto kv = line.find(":=");
        const auto colon = line.find(": ");
        if (kv != std::string_view::npos && kv < colon) {
            if (trim(line.substr(0, kv)) == "origin") h.origin = parse_vector(line.substr(kv + 2), err);
            continue;
        }
        if (colon == std::string_view::npos) throw err("expected \"field: value\"");
        const std::string field = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 2));

        if (field == "type") {
            h.type = parse_type(value);
            if (!h.type) throw err("unsupported type \"" + value + "\"");
        } else if (field == "dimension") {
            const auto d = parse_numbers<int, 1>(value, err)[0];
            if (d != 3) throw err("only 3-dimensional volumes are supported");
            h.dimension = d;
        } else if (field == "sizes") {
            h.sizes = parse_numbers<int, 3>(value, err);
            for (int s : *h.sizes) {
                if (s < 1) throw err("sizes must be >= 1");
            }
        } else if (field == "spacings") {
            h.spacings = parse_numbers<double, 3>(value, err);
            for (double s : *h.spacings) {
                if (!(s > 0.0)) throw err("spacings must be > 0");
            }
        } else if (field == "space directions") {
            h.spacings = parse_directions(value, path, err);
            for (double s : *h.spacings) {
                if (!(s > 0.0)) throw err("space directions must have nonzero length");
            }
        } else if (field == "space origin") {
            h.origin = parse_vector(value, err);
        } else if (field == "encoding") {
            if (value == "raw") {
                h.gzip = false;
            } else if (value == "gzip" || value == "gz") {
                h.gzip = true;
            } else {
                throw err("unsupported encoding \"" + value + "\"");
            }
            h.have_encoding = true;
        } else if (field == "endian") {
            if (value == "little") {
                h.endian = std::endian::little;
            } else if (value == "big") {
                h.endian = std::endian::big;
            } else {
                throw err("bad endian \"" + value + "\"");
            }
        } else if (field == "data file" || field == "datafile") {
            throw err("detached data files are not supported");
        } else if (field == "line skip" || field == "lineskip" || field == "byte skip" || field == "byteskip") {
            if (parse_numbers<long, 1>(value, err)[0] != 0) throw err("skips are not supported");
        }
        // Other fields (space, kinds, centers, units, content, ...) carry nothing we need.
    }
    if (!header_done) throw parse_error(path.string() + ": header not terminated by a blank line");
    if (!h.type) throw parse_error(path.string() + ": missing \"type\" field");
    if (!h.dimension) throw parse_error(path.string() + ": missing \"dimension\" field");
    if (!h.sizes) throw parse_error(path.string() + ": missing \"sizes\" field");
    if (!h.have_encoding) throw parse_error(path.string() + ": missing \"encoding\" field");

    Geometry geom;
    geom.dims = *h.sizes;
    if (h.spacings) geom.spacing = *h.spacings;
    if (h.origin) geom.origin = *h.origin;

    const std::size_t count = geom.voxel_count();
    const std::size_t expected = count * pixel_bytes(*h.type);
    const char* payload = bytes.data() + pos;
    const std::size_t payload_size = bytes.size() - pos;
    std::vector<char> inflated;
    if (h.gzip) {
        inflated = inflate_gzip(payload, payload_size, expected, path);
        payload = inflated.data();
    } else if (payload_size != expected) {
        throw Error(Error::Kind::Truncation, path.string() + ": data length mismatch, got " +
                                                 std::to_string(payload_size) + " of " + std::to_string(expected) +
                                                 " bytes");
    }

    const bool swap = h.endian != std::endian::native;
    switch (*h.type) {
    case PixelType::UInt8: {
        std::vector<Label> data(payload, payload + count);
        return LabelVolume(geom, std::move(data));
    }
    case PixelType::Int16: {
        std::vector<float> data(count);
        for (std::size_t i = 0; i < count; ++i) data[i] = read_value<std::int16_t>(payload + 2 * i, swap);
        return ScalarVolume(geom, std::move(data));
    }
    case PixelType::UInt16: {
        std::vector<float> data(count);
        for (std::size_t i = 0; i < count; ++i) data[i] = read_value<std::uint16_t>(payload + 2 * i, swap);
        return ScalarVolume(geom, std::move(data));
    }
    case PixelType::Float32: {
        std::vector<float> data(count);
        for (std::size_t i = 0; i < count; ++i) data[i] = read_value<float>(payload + 4 * i, swap);
        return ScalarVolume(geom, std::move(data));
    }
    }
    throw parse_error(path.string() + ": unsupported type");
}

ScalarVolume load_scalar(const std::filesystem::path& path)
{
    auto any = load(path);
    if (auto* s = std::get_if<ScalarVolume>(&any)) return std::move(*s);
    const auto& labels = std::get<LabelVolume>(any);
    std::vector<float> data(labels.data().begin(), labels.data().end());
    return ScalarVolume(labels.geometry(), std::move(data));
}

LabelVolume load_labels(const std::filesystem::path& path)
{
    auto any = load(path);
    if (auto* l = std::get_if<LabelVolume>(&any)) return std::move(*l);
    const auto& s = std::get<ScalarVolume>(any);
    std::vector<Label> data(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const float v = s[i];
        if (!(v >= 0.0f && v <= 255.0f) || std::floor(v) != v) {
            throw validation_error(path.string() + ": value " + to_text(v) + " at voxel " + std::to_string(i) +
                                   " is not a label in [0, 255]");
        }
        data[i] = static_cast<Label>(v);
    }
    return LabelVolume(s.geometry(), std::move(data));
}

namespace {

template <typename T>
void write_volume(const Volume<T>& volume, std::string_view type_name, const std::filesystem::path& path)
{
    const Geometry& g = volume.geometry();
    std::ostringstream header;
    header << "NRRD0004\n"
           << "# Complete NRRD file format specification at:\n"
           << "# http://teem.sourceforge.net/nrrd/format.html\n"
           << "type: " << type_name << "\n"
           << "dimension: 3\n"
           << "sizes: " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << "\n"
           << "spacings: " << to_text(g.spacing[0]) << ' ' << to_text(g.spacing[1]) << ' ' << to_text(g.spacing[2])
           << "\n"
           << "endian: little\n"
           << "encoding: raw\n"
           << "origin:=(" << to_text(g.origin[0]) << ',' << to_text(g.origin[1]) << ',' << to_text(g.origin[2])
           << ")\n\n";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    const std::string text = header.str();
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    const auto data = volume.data();
    if constexpr (std::endian::native == std::endian::little || sizeof(T) == 1) {
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
    } else {
        for (const T& v : data) {
            auto b = std::bit_cast<std::array<char, sizeof(T)>>(v);
            std::reverse(b.begin(), b.end());
            out.write(b.data(), sizeof(T));
        }
    }
    out.flush();
    if (!out) throw io_error("write failed: " + path.string());
}

} // namespace

void save(const ScalarVolume& volume, const std::filesystem::path& path) { write_volume(volume, "float", path); }

void save(const LabelVolume& volume, const std::filesystem::path& path) { write_volume(volume, "uint8", path); }

} // namespace growcut::nrrd
