#pragma once

#include <filesystem>
#include <iosfwd>

#include "hartree/grid.hpp"

namespace hartree {

/// Binary field snapshot, little-endian:
///   "CHFLD1\0" | u32 N | u32 m | u32 n | f64 L | m * n^N * (f64 re, f64 im)
void write_snapshot(std::ostream& out, const MultiField& mf);
MultiField read_snapshot(std::istream& in);

void save_snapshot(const std::filesystem::path& path, const MultiField& mf);
MultiField load_snapshot(const std::filesystem::path& path);

}  // namespace hartree
