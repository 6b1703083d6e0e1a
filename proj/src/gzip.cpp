#include "gzip.hpp"

#include "sega/errors.hpp"

#include <zlib.h>

namespace sega::detail {

std::string gzip_compress(std::string_view data) {
    z_stream zs{};
    // 15 window bits + 16 selects the gzip wrapper.
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

std::string gzip_decompress(std::string_view data, std::size_t limit) {
    z_stream zs{};
    // 32 enables automatic gzip/zlib header detection.
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw CorruptFile("inflateInit2 failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());

    std::string out;
    char buf[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw CorruptFile("gzip payload is corrupt or truncated");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (out.size() > limit) break;
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw CorruptFile("gzip payload is truncated");
        }
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace sega::detail
