#include "hartree/snapshot_io.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hartree/error.hpp"

namespace hartree {
namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'H', 'R', 'T', '5'};

template <class T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T take(const char*& p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  p += sizeof(T);
  return value;
}

std::uint32_t crc_of(const char* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (len > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

constexpr std::size_t kHeaderBytes = 4 + 2 + 2 + 4 + 4 + 8 + 8;

}  // namespace

void write_snapshot(std::ostream& os, const Field& f, double t) {
  std::string buf;
  buf.reserve(kHeaderBytes + f.size() * 16 + 4);
  buf.append(kMagic.data(), kMagic.size());
  put<std::uint16_t>(buf, kSnapshotVersion);
  put<std::uint16_t>(buf, f.rep() == Rep::frequency ? 1 : 0);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid().dim()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(f.grid().points_per_axis()));
  put<double>(buf, f.grid().length());
  put<double>(buf, t);
  const std::size_t payload_at = buf.size();
  for (const auto& z : f.data()) {
    put<double>(buf, z.real());
    put<double>(buf, z.imag());
  }
  put<std::uint32_t>(buf, crc_of(buf.data() + payload_at, buf.size() - payload_at));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw FormatError("failed to write snapshot");
}

Snapshot read_snapshot(std::istream& is) {
  char header[kHeaderBytes];
  is.read(header, kHeaderBytes);
  if (is.gcount() < 4 || std::memcmp(header, kMagic.data(), 4) != 0) {
    throw FormatError("not a field snapshot (bad magic)");
  }
  if (static_cast<std::size_t>(is.gcount()) != kHeaderBytes) throw FormatError("truncated snapshot header");
  const char* p = header + 4;
  const auto version = take<std::uint16_t>(p);
  if (version != kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(version));
  }
  const auto flags = take<std::uint16_t>(p);
  const auto d = take<std::uint32_t>(p);
  const auto n = take<std::uint32_t>(p);
  const auto L = take<double>(p);
  const auto t = take<double>(p);
  if ((flags & ~std::uint16_t{1}) != 0) throw FormatError("unknown snapshot flags");
  Grid grid;
  try {
    grid = make_grid(static_cast<int>(d), static_cast<int>(n), L);
  } catch (const ParameterError& e) {
    throw FormatError(std::string("invalid snapshot grid: ") + e.what());
  }
  const std::size_t payload_bytes = grid.size() * 16;
  std::vector<char> payload(payload_bytes + 4);
  is.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(is.gcount()) != payload.size()) throw FormatError("truncated snapshot payload");
  const char* q = payload.data() + payload_bytes;
  const auto stored_crc = take<std::uint32_t>(q);
  if (stored_crc != crc_of(payload.data(), payload_bytes)) throw FormatError("snapshot CRC mismatch");
  std::vector<Complex> data(grid.size());
  q = payload.data();
  for (auto& z : data) {
    const double re = take<double>(q);
    const double im = take<double>(q);
    z = Complex(re, im);
  }
  return {Field(grid, (flags & 1) ? Rep::frequency : Rep::physical, std::move(data)), t};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    os.flush();
    if (!os) throw FormatError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void store_field(const std::filesystem::path& path, const Field& f, double t) {
  std::ostringstream os(std::ios::binary);
  write_snapshot(os, f, t);
  write_file_atomic(path, os.str());
}

Snapshot load_field(const std::filesystem::path& path, const std::optional<Grid>& expect) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  Snapshot s = read_snapshot(is);
  if (expect && !(s.field.grid() == *expect)) {
    throw FormatError("snapshot grid does not match the expected grid");
  }
  return s;
}

}  // namespace hartree
