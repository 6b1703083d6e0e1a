#pragma once

#include "sega/volume.hpp"

#include <filesystem>
#include <string>

namespace sega {

enum class NrrdEncoding { Raw, Gzip };

/// Reads a 3D NRRD volume with attached header. Supports NRRD0001-0005,
/// encodings raw/gzip, little/big endian, types uint8/int16/uint16/float.
/// Throws UnsupportedFormat, CorruptFile, InvalidGeometry or IoError.
VoxelGrid read_nrrd(const std::filesystem::path& path);

/// Reads a volume and binarizes it at > 0.
LabelMask read_nrrd_mask(const std::filesystem::path& path);

/// Parses an in-memory NRRD file. Used by the readers above.
VoxelGrid parse_nrrd(const std::string& bytes);

std::string serialize_nrrd(const VoxelGrid& grid, NrrdEncoding encoding);

/// Writes NRRD0004 little endian. Throws IoError if the path is unwritable.
void write_nrrd(const VoxelGrid& grid, const std::filesystem::path& path,
                NrrdEncoding encoding = NrrdEncoding::Raw);
void write_nrrd(const LabelMask& mask, const std::filesystem::path& path,
                NrrdEncoding encoding = NrrdEncoding::Gzip);

}  // namespace sega
