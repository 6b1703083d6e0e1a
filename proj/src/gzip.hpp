#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace sega::detail {

std::string gzip_compress(std::string_view data);

/// Inflates a gzip/zlib stream. Stops after `limit` bytes of output so a
/// corrupt header cannot trigger unbounded allocation.
std::string gzip_decompress(std::string_view data, std::size_t limit);

}  // namespace sega::detail
