#pragma once

/// Field checkpoints: little-endian binary, magic "HSF1", then u32 placement
/// code (cell=0 node=1 x_face=2 y_face=3), u32 rows, u32 cols, rows*cols
/// float64 values row-major. CSV export carries the header "i,j,value".

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hydrostab/grid.hpp"

namespace hydrostab {

void write_checkpoint(const std::filesystem::path& path, const ScalarField& f);

/// Reads a checkpoint; the grid must reproduce the stored shape.
ScalarField read_checkpoint(const std::filesystem::path& path, const Grid& g);

/// Raw bytes of the checkpoint encoding (used for hashing without re-reading).
std::vector<std::uint8_t> checkpoint_bytes(const ScalarField& f);

void write_csv(const std::filesystem::path& path, const ScalarField& f);

/// 64-bit FNV-1a content hash.
std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);
std::uint64_t fnv1a64(const std::vector<std::uint8_t>& data);
std::string hash_hex(std::uint64_t h);

}  // namespace hydrostab
