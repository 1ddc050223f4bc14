#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hartree/field.hpp"

namespace hartree {

/// Binary field snapshot, little-endian:
///   "HRT5" | u16 version=1 | u16 flags | u32 d | u32 n | f64 L | f64 t |
///   n^d × (f64 re, f64 im) row-major | u32 CRC32 of the payload.
/// flags bit 0 set means the payload holds frequency coefficients.
inline constexpr std::uint16_t kSnapshotVersion = 1;

struct Snapshot {
  Field field;
  double t = 0.0;
};

void write_snapshot(std::ostream& os, const Field& f, double t);
Snapshot read_snapshot(std::istream& is);

/// Writes through a temporary file renamed into place.
void store_field(const std::filesystem::path& path, const Field& f, double t = 0.0);
/// Throws FormatError on bad magic, unsupported version, truncation, CRC
/// mismatch, or (when `expect` is given) a grid different from `expect`.
Snapshot load_field(const std::filesystem::path& path, const std::optional<Grid>& expect = {});

/// Writes `contents` to `path` atomically (temporary file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace hartree
